"""
Discrete Littlewood-Paley analysis on the torus.

Blocks are Fourier multipliers built from one smooth radial cutoff ``chi``:

    phi(r)     = chi(r) - chi(2 r)          supported in [1/2, 2]
    Delta_{-1} = chi(2 |D|)                 (only the zero mode on the torus)
    Delta_j    = phi(2^{-j} |D|),  j >= 0
    S_j        = sum_{k <= j-1} Delta_k = chi(2^{1-j} |D|)

With these conventions the blocks form an exact partition of unity, and the
grid resolves every radius up to 2^jmax where 2^(jmax+1) <= n/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np

from .errors import DegenerateInputError, GridMismatchError, MeanViolationError, ResolutionError
from .spectral import (
    ScalarField,
    TorusGrid,
    VectorField,
    grad,
    lp_norm_array,
    norm,
    same_grid,
)


def chi(r) -> np.ndarray:
    """Smooth monotone cutoff: 1 on [0, 1], 0 on [2, inf)."""
    r = np.asarray(r, dtype=float)
    out = np.where(r <= 1.0, 1.0, 0.0)
    mid = (r > 1.0) & (r < 2.0)
    if np.any(mid):
        x = r[mid]
        a = np.exp(1.0 / (x - 2.0))
        b = np.exp(-1.0 / (x - 1.0))
        out = out.astype(float)
        out[mid] = a / (a + b)
    return out


def phi(r) -> np.ndarray:
    """Annulus profile chi(r) - chi(2r), supported in [1/2, 2]."""
    r = np.asarray(r, dtype=float)
    return chi(r) - chi(2.0 * r)


def max_block_index(n: int) -> int:
    """Largest j with 2^(j+1) <= n/2."""
    j = int(np.floor(np.log2(n / 2.0))) - 1
    while 2 ** (j + 1) > n / 2:
        j -= 1
    return j


@dataclass(frozen=True)
class BesovIndex:
    s: float
    p: float = 2.0
    r: float = 2.0

    def __post_init__(self):
        if not np.isfinite(self.s):
            raise ValueError(f"regularity s must be finite, got {self.s}")
        for name in ("p", "r"):
            v = getattr(self, name)
            if not (v >= 1):
                raise ValueError(f"exponent {name} must lie in [1, inf], got {v}")

    @property
    def lipschitz(self) -> bool:
        """Whether B^s_{p,r} embeds in the Lipschitz class (dimension two)."""
        crit = 1.0 + 2.0 / self.p
        return self.s > crit or (self.s == crit and self.r == 1)


@dataclass(frozen=True)
class DyadicDecomposition:
    grid: TorusGrid

    @property
    def jmax(self) -> int:
        return max_block_index(self.grid.n)

    @property
    def resolved_radius(self) -> float:
        return float(2**self.jmax)

    @cached_property
    def _block_symbols(self) -> dict[int, np.ndarray]:
        kabs = self.grid.kabs
        table = {-1: chi(2.0 * kabs)}
        for j in range(self.jmax + 1):
            table[j] = phi(kabs / 2.0**j)
        return table

    def block_symbol(self, j: int) -> np.ndarray:
        if j < -1:
            raise ValueError(f"block index must be >= -1, got {j}")
        if j > self.jmax:
            raise ResolutionError(f"block j={j} exceeds jmax={self.jmax} for n={self.grid.n}")
        return self._block_symbols[j]

    def low_pass_symbol(self, j: int) -> np.ndarray:
        if j < 0:
            raise ValueError(f"low-pass index must be >= 0, got {j}")
        if j > self.jmax + 1:
            raise ResolutionError(f"low-pass j={j} exceeds jmax+1={self.jmax + 1}")
        return chi(2.0 ** (1 - j) * self.grid.kabs)

    @property
    def indices(self) -> range:
        return range(-1, self.jmax + 1)


def _check_dec(f, dec: DyadicDecomposition):
    if f.grid != dec.grid:
        raise GridMismatchError(f"field on n={f.grid.n}, decomposition on n={dec.grid.n}")


def dyadic_block(f, j: int, dec: DyadicDecomposition):
    """Delta_j f for a scalar or vector field."""
    _check_dec(f, dec)
    return type(f)(f.grid, f.coeffs * dec.block_symbol(j))


def low_pass(f, j: int, dec: DyadicDecomposition):
    """S_j f = sum of blocks below j."""
    _check_dec(f, dec)
    return type(f)(f.grid, f.coeffs * dec.low_pass_symbol(j))


def _low_pass_or_zero(coeffs: np.ndarray, j: int, dec: DyadicDecomposition) -> np.ndarray:
    if j <= -1:
        return np.zeros_like(coeffs)
    return coeffs * dec.low_pass_symbol(j)


# --- Besov norms ------------------------------------------------------------


def _stack_block_norms(coeffs: np.ndarray, dec: DyadicDecomposition, p: float) -> np.ndarray:
    """L^p norms of every block of a stack of components (pointwise Euclidean magnitude)."""
    grid = dec.grid
    coeffs = coeffs.reshape((-1,) + grid.spectral_shape)
    out = []
    for j in dec.indices:
        phys = grid.ifft(coeffs * dec.block_symbol(j))
        mag = np.sqrt(np.sum(phys**2, axis=0))
        out.append(lp_norm_array(mag, p, grid.cell_area))
    return np.array(out)


def sequence_norm(values: np.ndarray, r: float) -> float:
    values = np.asarray(values, dtype=float)
    if np.isinf(r):
        return float(np.max(values)) if values.size else 0.0
    return float(np.sum(values**r) ** (1.0 / r))


def block_norms(f, dec: DyadicDecomposition, p: float = 2.0) -> np.ndarray:
    """(||Delta_j f||_{L^p}) for j = -1..jmax."""
    _check_dec(f, dec)
    return _stack_block_norms(f.coeffs, dec, p)


def besov_weighted_blocks(coeffs: np.ndarray, idx: BesovIndex, dec: DyadicDecomposition) -> np.ndarray:
    js = np.arange(-1, dec.jmax + 1)
    return 2.0 ** (js * idx.s) * _stack_block_norms(coeffs, dec, idx.p)


def besov_norm(f, idx: BesovIndex, dec: DyadicDecomposition) -> float:
    """Resolved B^s_{p,r} norm: l^r norm of 2^{js} ||Delta_j f||_{L^p}."""
    _check_dec(f, dec)
    return sequence_norm(besov_weighted_blocks(f.coeffs, idx, dec), idx.r)


def besov_norm_bundle(fields, idx: BesovIndex, dec: DyadicDecomposition) -> float:
    """Besov norm of a tuple of fields treated as one vector-valued field."""
    stack = np.concatenate([f.coeffs.reshape((-1,) + dec.grid.spectral_shape) for f in fields])
    return sequence_norm(besov_weighted_blocks(stack, idx, dec), idx.r)


def sobolev_norm(f, s: float) -> float:
    """(4 pi^2 sum_k (1+|k|^2)^s |c_k|^2)^{1/2}; equals the L2 norm at s = 0."""
    grid = f.grid
    w = grid.half_weights * (1.0 + grid.kabs**2) ** s
    c = f.coeffs.reshape((-1,) + grid.spectral_shape)
    return float(np.sqrt(grid.area * np.sum(w * np.abs(c) ** 2)))


# --- paraproducts -----------------------------------------------------------


def _grid_product(a: np.ndarray, b: np.ndarray, grid: TorusGrid) -> np.ndarray:
    return grid.fft(grid.ifft(a) * grid.ifft(b)) * grid.dealias_mask


def bony_decompose(u: ScalarField, v: ScalarField, dec: DyadicDecomposition):
    """Split the dealiased product uv into T_u v, T_v u and the remainder R(u, v)."""
    grid = same_grid(u, v)
    _check_dec(u, dec)
    idx = list(dec.indices)
    du = {j: u.coeffs * dec.block_symbol(j) for j in idx}
    dv = {j: v.coeffs * dec.block_symbol(j) for j in idx}
    t_uv = np.zeros(grid.spectral_shape, dtype=complex)
    t_vu = np.zeros_like(t_uv)
    rem = np.zeros_like(t_uv)
    for j in idx:
        t_uv += _grid_product(_low_pass_or_zero(u.coeffs, j - 1, dec), dv[j], grid)
        t_vu += _grid_product(_low_pass_or_zero(v.coeffs, j - 1, dec), du[j], grid)
        near = sum(dv[jp] for jp in (j - 1, j, j + 1) if jp in dv)
        rem += _grid_product(du[j], near, grid)
    return ScalarField(grid, t_uv), ScalarField(grid, t_vu), ScalarField(grid, rem)


# --- inequality probes ------------------------------------------------------


def derivative_tensor_norm(f: ScalarField, k: int, p: float) -> float:
    """L^p norm of |nabla^k f|, with |nabla^k f|^2 = sum_a C(k,a) |d1^a d2^(k-a) f|^2."""
    grid = f.grid
    k1, k2 = grid.kd
    total = np.zeros((grid.n, grid.n))
    for a in range(k + 1):
        sym = (1j * k1) ** a * (1j * k2) ** (k - a)
        total += comb(k, a) * grid.ifft(f.coeffs * sym) ** 2
    return lp_norm_array(np.sqrt(total), p, grid.cell_area)


@dataclass(frozen=True)
class BernsteinReport:
    lam: float
    ball_ratio: float
    annulus_ratio: float


def spectral_radius(f: ScalarField, rtol: float = 1e-13) -> float:
    mag = np.abs(f.coeffs)
    top = mag.max()
    if top == 0:
        raise DegenerateInputError("field has an empty spectrum")
    return float(f.grid.kabs[mag > rtol * top].max())


def bernstein_check(f: ScalarField, p: float, q: float, k: int, lam: float | None = None) -> BernsteinReport:
    """Bernstein ratios for a band-limited field of spectral radius lam.

    ball_ratio    = ||nabla^k f||_q / (lam^{k + 2(1/p - 1/q)} ||f||_p)
    annulus_ratio = ||nabla^k f||_p / (lam^k ||f||_p)
    """
    if p > q:
        raise ValueError(f"need p <= q, got p={p}, q={q}")
    if lam is None:
        lam = spectral_radius(f)
    if lam <= 0:
        raise DegenerateInputError("spectral radius must be positive")
    fp = norm(f, p)
    if fp == 0:
        raise DegenerateInputError("field has an empty spectrum")
    inv = lambda x: 0.0 if np.isinf(x) else 1.0 / x
    expo = k + 2.0 * (inv(p) - inv(q))
    ball = derivative_tensor_norm(f, k, q) / (lam**expo * fp)
    ann = derivative_tensor_norm(f, k, p) / (lam**k * fp)
    return BernsteinReport(float(lam), float(ball), float(ann))


def gn_check(u: ScalarField, p: float) -> float:
    """||u||_p / (||u||_2^{2/p} ||grad u||_2^{1-2/p}) for a mean-free field."""
    if not (2 <= p < np.inf):
        raise ValueError(f"exponent must lie in [2, inf), got {p}")
    g2 = norm(grad(u), 2)
    if g2 == 0:
        raise DegenerateInputError("gradient vanishes identically")
    l2 = norm(u, 2)
    if abs(u.mean) > 1e-12 * l2:
        raise MeanViolationError("Gagliardo-Nirenberg probe needs a mean-free field")
    return norm(u, p) / (l2 ** (2.0 / p) * g2 ** (1.0 - 2.0 / p))


def _grad_tensor_coeffs(v: VectorField) -> np.ndarray:
    k1, k2 = v.grid.kd
    return np.stack([1j * k * v.coeffs[i] for i in range(2) for k in (k1, k2)])


def commutator_check(v: VectorField, f: ScalarField, idx: BesovIndex, dec: DyadicDecomposition):
    """Measured commutator norm against its bound.

    Returns (lhs, rhs) with lhs the l^r norm of 2^{js} ||v.grad Delta_j f - Delta_j(v.grad f)||_p
    and rhs = ||grad v||_inf ||f||_{B^s} + ||grad v||_{B^{s-1}} ||grad f||_inf.
    """
    grid = same_grid(v, f)
    _check_dec(f, dec)
    vphys = v.physical()

    def advect(c):
        g = grid.ifft(np.stack([1j * k * c for k in grid.kd]))
        return grid.fft(np.sum(vphys * g, axis=0)) * grid.dealias_mask

    vgf = advect(f.coeffs)
    weighted = []
    for j in dec.indices:
        sym = dec.block_symbol(j)
        comm = grid.ifft(advect(f.coeffs * sym) - vgf * sym)
        weighted.append(2.0 ** (j * idx.s) * lp_norm_array(np.abs(comm), idx.p, grid.cell_area))
    lhs = sequence_norm(np.array(weighted), idx.r)

    gv = _grad_tensor_coeffs(v)
    gv_inf = float(np.max(np.sqrt(np.sum(grid.ifft(gv) ** 2, axis=0))))
    gf_inf = norm(grad(f), np.inf)
    lower = BesovIndex(idx.s - 1, idx.p, idx.r)
    rhs = gv_inf * besov_norm(f, idx, dec) + sequence_norm(besov_weighted_blocks(gv, lower, dec), idx.r) * gf_inf
    return float(lhs), float(rhs)
