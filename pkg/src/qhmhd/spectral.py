"""
Fourier calculus on the periodic square [0, 2*pi)^2.

Fields are stored as normalized rfft2 amplitudes, so that a real field reads
f(x) = sum_k c_k exp(i k.x) and ``coeffs[k] == c_k``.  Physical arrays are
indexed ``f[i1, i2] = f(x1_i1, x2_i2)``; the half-spectrum axis is x2.

Derivative symbols have the Nyquist row/column zeroed, and every operator
built from them (Laplacian, Leray projector, inverse Laplacian) uses the same
symbols, so discrete identities such as div(grad) = Laplacian hold exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

from .errors import GridMismatchError, MeanViolationError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TorusGrid:
    """Uniform n x n grid on the torus with cached wavenumber tables."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 8 or self.n % 2:
            raise ValueError(f"grid size must be an even integer >= 8, got {self.n!r}")

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    @property
    def area(self) -> float:
        return TWO_PI**2

    @property
    def spectral_shape(self) -> tuple[int, int]:
        return (self.n, self.n // 2 + 1)

    @cached_property
    def x(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical coordinates (x1, x2) as broadcastable 2-D arrays."""
        s = np.arange(self.n) * self.spacing
        return s[:, None], s[None, :]

    @cached_property
    def k(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer wavenumbers (k1, k2); k1 spans the full axis, k2 the half axis."""
        k1 = np.fft.fftfreq(self.n, 1.0 / self.n)[:, None]
        k2 = np.fft.rfftfreq(self.n, 1.0 / self.n)[None, :]
        return k1, k2

    @cached_property
    def kd(self) -> tuple[np.ndarray, np.ndarray]:
        """Derivative symbols: wavenumbers with the Nyquist entries set to zero."""
        k1, k2 = self.k
        half = self.n // 2
        return np.where(np.abs(k1) == half, 0.0, k1), np.where(k2 == half, 0.0, k2)

    @cached_property
    def ksq(self) -> np.ndarray:
        """|kd|^2, the symbol of -Laplacian."""
        k1, k2 = self.kd
        return k1**2 + k2**2

    @cached_property
    def inv_ksq(self) -> np.ndarray:
        ksq = self.ksq
        out = np.zeros_like(ksq)
        np.divide(1.0, ksq, out=out, where=ksq > 0)
        return out

    @cached_property
    def kabs(self) -> np.ndarray:
        """True radial wavenumber |k| (Nyquist kept), used by frequency cutoffs."""
        k1, k2 = self.k
        return np.sqrt(k1**2 + k2**2)

    @property
    def dealias_cutoff(self) -> float:
        return self.n / 3.0

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        k1, k2 = self.k
        return np.maximum(np.abs(k1), np.abs(k2)) <= self.dealias_cutoff

    @cached_property
    def half_weights(self) -> np.ndarray:
        """Multiplicity of each stored rfft coefficient in the full spectrum."""
        w = np.full(self.spectral_shape, 2.0)
        w[:, 0] = 1.0
        w[:, -1] = 1.0
        return w

    def fft(self, arr: np.ndarray) -> np.ndarray:
        """Physical array(s) -> normalized coefficients (leading axes batched)."""
        return np.fft.rfft2(arr, axes=(-2, -1)) / self.n**2

    def ifft(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.irfft2(coeffs * self.n**2, s=(self.n, self.n), axes=(-2, -1))


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A real scalar field given by its Fourier amplitudes."""

    grid: TorusGrid
    coeffs: np.ndarray

    @classmethod
    def from_physical(cls, grid: TorusGrid, values) -> "ScalarField":
        values = np.broadcast_to(np.asarray(values, dtype=float), (grid.n, grid.n))
        return cls(grid, grid.fft(values))

    @classmethod
    def zeros(cls, grid: TorusGrid) -> "ScalarField":
        return cls(grid, np.zeros(grid.spectral_shape, dtype=complex))

    def physical(self) -> np.ndarray:
        return self.grid.ifft(self.coeffs)

    @property
    def mean(self) -> float:
        return float(self.coeffs[0, 0].real)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))

    def _check(self, other):
        if other.grid != self.grid:
            raise GridMismatchError(f"grid n={self.grid.n} vs n={other.grid.n}")

    def __add__(self, other):
        if isinstance(other, ScalarField):
            self._check(other)
            return ScalarField(self.grid, self.coeffs + other.coeffs)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, ScalarField):
            self._check(other)
            return ScalarField(self.grid, self.coeffs - other.coeffs)
        return NotImplemented

    def __mul__(self, a):
        if np.isscalar(a):
            return ScalarField(self.grid, self.coeffs * a)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, a):
        if np.isscalar(a):
            return ScalarField(self.grid, self.coeffs / a)
        return NotImplemented

    def __neg__(self):
        return ScalarField(self.grid, -self.coeffs)


@dataclass(frozen=True, eq=False)
class VectorField:
    """A real planar vector field; ``coeffs`` has shape (2, n, n//2 + 1)."""

    grid: TorusGrid
    coeffs: np.ndarray

    @classmethod
    def from_components(cls, a: ScalarField, b: ScalarField) -> "VectorField":
        a._check(b)
        return cls(a.grid, np.stack([a.coeffs, b.coeffs]))

    @classmethod
    def from_physical(cls, grid: TorusGrid, v1, v2) -> "VectorField":
        shape = (grid.n, grid.n)
        arr = np.stack([np.broadcast_to(np.asarray(v, dtype=float), shape) for v in (v1, v2)])
        return cls(grid, grid.fft(arr))

    @classmethod
    def zeros(cls, grid: TorusGrid) -> "VectorField":
        return cls(grid, np.zeros((2,) + grid.spectral_shape, dtype=complex))

    def component(self, i: int) -> ScalarField:
        return ScalarField(self.grid, self.coeffs[i])

    @property
    def x1(self) -> ScalarField:
        return self.component(0)

    @property
    def x2(self) -> ScalarField:
        return self.component(1)

    def physical(self) -> np.ndarray:
        return self.grid.ifft(self.coeffs)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))

    def _check(self, other):
        if other.grid != self.grid:
            raise GridMismatchError(f"grid n={self.grid.n} vs n={other.grid.n}")

    def __add__(self, other):
        if isinstance(other, VectorField):
            self._check(other)
            return VectorField(self.grid, self.coeffs + other.coeffs)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, VectorField):
            self._check(other)
            return VectorField(self.grid, self.coeffs - other.coeffs)
        return NotImplemented

    def __mul__(self, a):
        if np.isscalar(a):
            return VectorField(self.grid, self.coeffs * a)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, a):
        if np.isscalar(a):
            return VectorField(self.grid, self.coeffs / a)
        return NotImplemented

    def __neg__(self):
        return VectorField(self.grid, -self.coeffs)


Field = Union[ScalarField, VectorField]


def same_grid(*fields: Field) -> TorusGrid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError(f"grid n={grid.n} vs n={f.grid.n}")
    return grid


# --- differential operators -------------------------------------------------


def spectral_derivative(f: ScalarField, axis: int) -> ScalarField:
    """Partial derivative along x1 (axis=1) or x2 (axis=2)."""
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis!r}")
    k = f.grid.kd[axis - 1]
    return ScalarField(f.grid, 1j * k * f.coeffs)


def grad(f: ScalarField) -> VectorField:
    k1, k2 = f.grid.kd
    return VectorField(f.grid, np.stack([1j * k1 * f.coeffs, 1j * k2 * f.coeffs]))


def div(v: VectorField) -> ScalarField:
    k1, k2 = v.grid.kd
    return ScalarField(v.grid, 1j * (k1 * v.coeffs[0] + k2 * v.coeffs[1]))


def curl2(v: VectorField) -> ScalarField:
    """Scalar curl d1 v2 - d2 v1."""
    k1, k2 = v.grid.kd
    return ScalarField(v.grid, 1j * (k1 * v.coeffs[1] - k2 * v.coeffs[0]))


def perp(v: VectorField) -> VectorField:
    """Rotation by +pi/2: (v1, v2) -> (-v2, v1)."""
    return VectorField(v.grid, np.stack([-v.coeffs[1], v.coeffs[0]]))


def perp_grad(f: ScalarField) -> VectorField:
    """(-d2 f, d1 f)."""
    return perp(grad(f))


def laplacian(f: Field) -> Field:
    return type(f)(f.grid, -f.grid.ksq * f.coeffs)


def leray_project(v: VectorField) -> VectorField:
    """L2-orthogonal projection onto divergence-free fields; the mean passes through."""
    k1, k2 = v.grid.kd
    kdotv = (k1 * v.coeffs[0] + k2 * v.coeffs[1]) * v.grid.inv_ksq
    return VectorField(v.grid, np.stack([v.coeffs[0] - k1 * kdotv, v.coeffs[1] - k2 * kdotv]))


def inv_laplacian(f: ScalarField, rtol: float = 1e-12) -> ScalarField:
    """Solve Lap g = f for mean-free f; the returned g is mean-free.

    Modes annihilated by the derivative symbols (pure Nyquist modes) are
    mapped to zero.
    """
    scale = np.sqrt(np.sum(f.grid.half_weights * np.abs(f.coeffs) ** 2))
    if abs(f.coeffs[0, 0]) > rtol * max(scale, 1e-300) and abs(f.coeffs[0, 0]) > 0:
        raise MeanViolationError(f"inverse Laplacian needs a mean-free input (mean={f.mean:.3e})")
    return ScalarField(f.grid, -f.coeffs * f.grid.inv_ksq)


def dealias(f: Field) -> Field:
    """Two-thirds rule: zero every mode with max(|k1|, |k2|) > n/3."""
    return type(f)(f.grid, f.coeffs * f.grid.dealias_mask)


# --- integrals and norms ----------------------------------------------------


def _pointwise_magnitude(f: Field) -> np.ndarray:
    phys = f.physical()
    if isinstance(f, VectorField):
        return np.sqrt(np.sum(phys**2, axis=0))
    return np.abs(phys)


def lp_norm_array(values: np.ndarray, p: float, cell_area: float) -> float:
    """L^p norm of nonnegative grid values by midpoint quadrature."""
    if p < 1:
        raise ValueError(f"Lebesgue exponent must be >= 1, got {p}")
    if np.isinf(p):
        return float(np.max(values))
    if p == 2:
        return float(np.sqrt(cell_area * np.sum(values * values)))
    return float((cell_area * np.sum(values**p)) ** (1.0 / p))


def norm(f: Field, p: float = 2) -> float:
    """L^p norm on the physical grid; p = inf gives the grid maximum."""
    if p < 1:
        raise ValueError(f"Lebesgue exponent must be >= 1, got {p}")
    return lp_norm_array(_pointwise_magnitude(f), p, f.grid.cell_area)


def l2_norm_parseval(f: Field) -> float:
    """L^2 norm straight from the coefficients."""
    w = f.grid.half_weights
    total = np.sum(w * np.abs(f.coeffs) ** 2)
    return float(np.sqrt(f.grid.area * total))


def integrate(values: np.ndarray, grid: TorusGrid) -> float:
    """Grid quadrature of a physical array over the torus."""
    return float(np.sum(values) * grid.cell_area)


def inner(f: Field, g: Field) -> float:
    """L^2 inner product by Parseval (exact for the grid representation)."""
    same_grid(f, g)
    w = f.grid.half_weights
    return float(f.grid.area * np.sum(w * (f.coeffs * np.conj(g.coeffs)).real))
