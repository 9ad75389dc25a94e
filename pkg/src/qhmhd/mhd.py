"""
Right-hand sides of the primitive, limit and Elsasser systems, plus pressure
recovery and physical diagnostics.

On the torus the uniform velocity mode is not a gradient, so the Coriolis
force would drive it. Every momentum equation therefore carries a uniform
pressure gradient that holds the mean velocity fixed, as on the whole plane.

All states are kept dealiased. Quadratic terms are formed on the grid and
truncated, so for dealiased inputs every product equals the exact truncated
product and the usual product rule holds to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Callable

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .errors import EllipticSolverError, GridMismatchError, VacuumError
from .spectral import (
    ScalarField,
    TorusGrid,
    VectorField,
    div,
    integrate,
    inv_laplacian,
    leray_project,
    lp_norm_array,
    norm,
)

ROTATION = np.array([[0.0, -1.0], [1.0, 0.0]])


# --- parameters -------------------------------------------------------------


@dataclass(frozen=True)
class Coefficient:
    """Closed-form transport coefficient of the density, floored at ``floor``.

    constant: base
    affine:   base + L (rho - 1)
    holder:   base + L |rho - 1|^gamma
    """

    family: str = "constant"
    base: float = 0.05
    L: float = 0.0
    gamma: float = 1.0
    floor: float | None = None

    def __post_init__(self):
        if self.family not in ("constant", "affine", "holder"):
            raise ValueError(f"unknown coefficient family {self.family!r}")
        if self.family == "holder" and not (0 < self.gamma <= 1):
            raise ValueError(f"Holder exponent must lie in (0, 1], got {self.gamma}")
        if self.lower_bound < 0:
            raise ValueError("coefficient floor must be nonnegative")

    @property
    def lower_bound(self) -> float:
        return self.base if self.floor is None else self.floor

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.family == "constant":
            val = np.full_like(rho, self.base)
        elif self.family == "affine":
            val = self.base + self.L * (rho - 1.0)
        else:
            val = self.base + self.L * np.abs(rho - 1.0) ** self.gamma
        return np.maximum(val, self.lower_bound)

    def sigma(self, z) -> np.ndarray:
        """Modulus of continuity of the family."""
        z = np.asarray(z, dtype=float)
        if self.family == "constant":
            return np.zeros_like(z)
        if self.family == "affine":
            return abs(self.L) * z
        return abs(self.L) * z**self.gamma

    @property
    def sigma_exponent(self) -> float:
        """Power of z in sigma; infinity for the constant family."""
        if self.family == "constant" or self.L == 0:
            return np.inf
        return 1.0 if self.family == "affine" else self.gamma


@dataclass(frozen=True)
class HProfile:
    """Viscosity scaling h(eps): 'one', 'power' (eps^a) or 'zero'."""

    family: str = "one"
    a: float = 1.0

    def __post_init__(self):
        if self.family not in ("one", "power", "zero"):
            raise ValueError(f"unknown h family {self.family!r}")
        if self.family == "power" and self.a <= 0:
            raise ValueError(f"h exponent must be positive, got {self.a}")

    def __call__(self, eps: float) -> float:
        if self.family == "one":
            return 1.0
        if self.family == "zero":
            return 0.0
        return float(eps) ** self.a


@dataclass(frozen=True, eq=False)
class PhysParams:
    eps: float = 0.1
    h: HProfile = field(default_factory=HProfile)
    nu: Coefficient = field(default_factory=Coefficient)
    mu: Coefficient = field(default_factory=Coefficient)
    rotation: np.ndarray = field(default_factory=lambda: ROTATION.copy())

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")

    @property
    def h_eps(self) -> float:
        return self.h(self.eps)

    def with_eps(self, eps: float) -> "PhysParams":
        return PhysParams(eps, self.h, self.nu, self.mu, self.rotation)


# --- states -----------------------------------------------------------------


class _StateOps:
    """Vector-space arithmetic over the field members of a state dataclass."""

    def parts(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))

    @classmethod
    def from_parts(cls, parts):
        return cls(*parts)

    @property
    def grid(self) -> TorusGrid:
        return self.parts()[0].grid

    def _check(self, other):
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.grid != self.grid:
            raise GridMismatchError(f"grid n={self.grid.n} vs n={other.grid.n}")

    def __add__(self, other):
        self._check(other)
        return self.from_parts([a + b for a, b in zip(self.parts(), other.parts())])

    def __sub__(self, other):
        self._check(other)
        return self.from_parts([a - b for a, b in zip(self.parts(), other.parts())])

    def __mul__(self, c):
        return self.from_parts([c * a for a in self.parts()])

    __rmul__ = __mul__

    def is_finite(self) -> bool:
        return all(p.is_finite() for p in self.parts())

    def project(self):
        """Leray-project the vector members and drop modes above the dealiasing cutoff."""
        mask = self.grid.dealias_mask
        out = []
        for p in self.parts():
            if isinstance(p, VectorField):
                p = leray_project(p)
            out.append(type(p)(p.grid, p.coeffs * mask))
        return self.from_parts(out)

    def coefficient_arrays(self) -> list[np.ndarray]:
        return [p.coeffs for p in self.parts()]


@dataclass(frozen=True, eq=False)
class PrimitiveState(_StateOps):
    r: ScalarField
    u: VectorField
    b: VectorField

    def velocity(self) -> VectorField:
        return self.u

    def magnetic(self) -> VectorField:
        return self.b

    def density(self) -> ScalarField:
        return self.r


@dataclass(frozen=True, eq=False)
class LimitState(_StateOps):
    R: ScalarField
    U: VectorField
    B: VectorField

    def velocity(self) -> VectorField:
        return self.U

    def magnetic(self) -> VectorField:
        return self.B

    def density(self) -> ScalarField:
        return self.R


@dataclass(frozen=True, eq=False)
class ElsasserState(_StateOps):
    R: ScalarField
    alpha: VectorField
    beta: VectorField

    def velocity(self) -> VectorField:
        return 0.5 * (self.alpha + self.beta)

    def magnetic(self) -> VectorField:
        return 0.5 * (self.alpha - self.beta)

    def density(self) -> ScalarField:
        return self.R


def to_elsasser(s: LimitState) -> ElsasserState:
    return ElsasserState(s.R, s.U + s.B, s.U - s.B)


def from_elsasser(e: ElsasserState) -> LimitState:
    return LimitState(e.R, 0.5 * (e.alpha + e.beta), 0.5 * (e.alpha - e.beta))


def divergence_error(v: VectorField) -> float:
    """||div v||_2 / ||v||_2 (zero for the zero field)."""
    vn = norm(v, 2)
    return 0.0 if vn == 0 else norm(div(v), 2) / vn


# --- grid helpers -----------------------------------------------------------


def _spec(grid: TorusGrid, arr: np.ndarray) -> np.ndarray:
    return grid.fft(arr) * grid.dealias_mask


def _div_tensor(grid: TorusGrid, t: np.ndarray) -> np.ndarray:
    """Spectral divergence over the first index of a (2, 2, ...) coefficient tensor."""
    k1, k2 = grid.kd
    return 1j * (k1 * t[0] + k2 * t[1])


def _div_vec(grid: TorusGrid, v: np.ndarray) -> np.ndarray:
    k1, k2 = grid.kd
    return 1j * (k1 * v[0] + k2 * v[1])


def _grad_scalar(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    k1, k2 = grid.kd
    return np.stack([1j * k1 * f, 1j * k2 * f])


def _outer_div(grid: TorusGrid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Coefficients of div(a (x) b)_j = d_i(a_i b_j) from physical a, b."""
    t = _spec(grid, a[:, None] * b[None, :])
    return _div_tensor(grid, t)


def _rotate(rotation: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("ij,j...->i...", rotation, v)


def _project(grid: TorusGrid, v: np.ndarray) -> np.ndarray:
    return leray_project(VectorField(grid, v)).coeffs


def _project_momentum(grid: TorusGrid, v: np.ndarray) -> np.ndarray:
    """Leray projection that also removes the uniform part (a uniform pressure gradient)."""
    out = _project(grid, v)
    out[:, 0, 0] = 0.0
    return out


def _lorentz_and_induction(grid: TorusGrid, U: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Coefficients of -div(U (x) B - B (x) U)."""
    e = _spec(grid, U[0] * B[1] - U[1] * B[0])
    k1, k2 = grid.kd
    return np.stack([1j * k2 * e, -1j * k1 * e])


# --- limit systems ----------------------------------------------------------


def _limit_rhs(s: LimitState, params: PhysParams, nu: float, mu: float) -> LimitState:
    grid = s.grid
    R = s.R.physical()
    U = s.U.physical()
    B = s.B.physical()
    mom = _outer_div(grid, U, U) - _outer_div(grid, B, B)
    mom = mom + _spec(grid, R * _rotate(params.rotation, U))
    dU = -_project_momentum(grid, mom)
    dB = _project(grid, _lorentz_and_induction(grid, U, B))
    if nu:
        dU = dU - nu * grid.ksq * s.U.coeffs
    if mu:
        dB = dB - mu * grid.ksq * s.B.coeffs
    dR = -_div_vec(grid, _spec(grid, R * U))
    return LimitState(ScalarField(grid, dR), VectorField(grid, dU), VectorField(grid, dB))


def rhs_ideal_original(s: LimitState, params: PhysParams) -> LimitState:
    """Quasi-homogeneous ideal MHD in (R, U, B) form."""
    return _limit_rhs(s, params, 0.0, 0.0)


def rhs_viscous_limit(s: LimitState, params: PhysParams) -> LimitState:
    """Ideal right-hand side plus nu(1) Lap U and mu(1) Lap B."""
    nu1 = float(params.nu(1.0))
    mu1 = float(params.mu(1.0))
    return _limit_rhs(s, params, nu1, mu1)


def limit_viscosities(params: PhysParams, scenario: str) -> tuple[float, float]:
    """(nu, mu) of the limit system for a sweep scenario."""
    if scenario == "viscous":
        return float(params.nu(1.0)), float(params.mu(1.0))
    return 0.0, 0.0


def rhs_ideal_elsasser(e: ElsasserState, params: PhysParams) -> ElsasserState:
    """Projected transport form in the Elsasser unknowns (R, alpha, beta)."""
    grid = e.grid
    R = e.R.physical()
    a = e.alpha.physical()
    b = e.beta.physical()
    cor = 0.5 * _spec(grid, R * _rotate(params.rotation, a + b))
    da = -_project_momentum(grid, _outer_div(grid, b, a) + cor)
    db = -_project_momentum(grid, _outer_div(grid, a, b) + cor)
    dR = -0.5 * _div_vec(grid, _spec(grid, R * (a + b)))
    return ElsasserState(ScalarField(grid, dR), VectorField(grid, da), VectorField(grid, db))


# --- primitive system -------------------------------------------------------


@dataclass
class _PressureOperator:
    grid: TorusGrid
    inv_rho: np.ndarray

    def __post_init__(self):
        g = self.grid
        self.keep = g.dealias_mask & (g.ksq > 0)
        self.shape = (g.n, g.n)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """-div(P_N[(1/rho) grad phi]) on physical vectors."""
        g = self.grid
        c = g.fft(x.reshape(self.shape)) * self.keep
        flux = _spec(g, self.inv_rho * g.ifft(_grad_scalar(g, c)))
        return -g.ifft(_div_vec(g, flux) * self.keep).ravel()

    def precondition(self, x: np.ndarray) -> np.ndarray:
        g = self.grid
        c = g.fft(x.reshape(self.shape)) * self.keep
        return g.ifft(c * g.inv_ksq).ravel()


def _cg_solve(op: _PressureOperator, G: np.ndarray, tol: float, maxiter: int) -> np.ndarray:
    grid = op.grid
    b = -grid.ifft(_div_vec(grid, G) * op.keep).ravel()
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros(grid.spectral_shape, dtype=complex)
    size = grid.n * grid.n
    A = LinearOperator((size, size), matvec=op.apply, dtype=float)
    M = LinearOperator((size, size), matvec=op.precondition, dtype=float)
    x, info = cg(A, b, x0=op.precondition(b), rtol=tol, atol=0.0, maxiter=maxiter, M=M)
    res = np.linalg.norm(b - op.apply(x)) / bnorm
    if info != 0 or res > tol * (1 + 1e-6):
        raise EllipticSolverError(f"pressure solve stopped after {maxiter} iterations", res)
    return grid.fft(x.reshape(op.shape)) * op.keep


def _operator(rho: ScalarField) -> _PressureOperator:
    rho_phys = rho.physical()
    if np.min(rho_phys) <= 0:
        raise VacuumError(f"density reached {np.min(rho_phys):.3e}")
    return _PressureOperator(rho.grid, 1.0 / rho_phys)


def pressure_solve_variable_density(
    rho: ScalarField, G: VectorField, tol: float = 1e-10, maxiter: int = 500
) -> ScalarField:
    """Mean-free Phi with div((1/rho) grad Phi) = div G on the dealiased modes.

    Preconditioned conjugate gradients with the constant-density inverse
    Laplacian, started from the constant-density solution.
    """
    if G.grid != rho.grid:
        raise GridMismatchError(f"grid n={rho.grid.n} vs n={G.grid.n}")
    op = _operator(rho)
    return ScalarField(rho.grid, _cg_solve(op, G.coeffs, tol, maxiter))


def pressure_flux(rho: ScalarField, G: VectorField, tol: float = 1e-10, maxiter: int = 500) -> VectorField:
    """F = P_N[(1/rho)(grad Phi + c)] with div F = div G and mean F = mean G.

    The constant c is the uniform pressure gradient that keeps the mean
    velocity fixed; with rho = 1 it equals the mean of G.
    """
    if G.grid != rho.grid:
        raise GridMismatchError(f"grid n={rho.grid.n} vs n={G.grid.n}")
    grid = rho.grid
    op = _operator(rho)
    inv_rho = op.inv_rho

    def flux(phi_c, c):
        return _spec(grid, inv_rho * (grid.ifft(_grad_scalar(grid, phi_c)) + c[:, None, None]))

    F = flux(_cg_solve(op, G.coeffs, tol, maxiter), np.zeros(2))
    basis = []
    for i in range(2):
        e = np.zeros(2)
        e[i] = 1.0
        phi_i = _cg_solve(op, -_spec(grid, inv_rho * e[:, None, None] * np.ones(op.shape)), tol, maxiter)
        basis.append(flux(phi_i, e))
    mat = np.array([[w[j, 0, 0].real for w in basis] for j in range(2)])
    c = np.linalg.solve(mat, (G.coeffs[:, 0, 0] - F[:, 0, 0]).real)
    return VectorField(grid, F + c[0] * basis[0] + c[1] * basis[1])


def density_field(s: PrimitiveState, eps: float) -> np.ndarray:
    return 1.0 + eps * s.r.physical()


def rhs_primitive(s: PrimitiveState, params: PhysParams, tol: float = 1e-10) -> PrimitiveState:
    """Rotating non-homogeneous MHD, momentum advanced in velocity form."""
    grid = s.grid
    eps = params.eps
    h = params.h_eps
    r = s.r.physical()
    rho = 1.0 + eps * r
    if np.min(rho) <= 0:
        raise VacuumError(f"density reached {np.min(rho):.3e}")
    inv_rho = 1.0 / rho
    u = s.u.physical()
    b = s.b.physical()

    force = _outer_div(grid, b, b) - 0.5 * _grad_scalar(grid, _spec(grid, np.sum(b * b, axis=0)))
    if h:
        gu = grid.ifft(_grad_scalar(grid, s.u.coeffs))
        flux = _spec(grid, params.nu(rho) * gu)
        force = force + h * _div_tensor(grid, flux)
    G = -_outer_div(grid, u, u) - _spec(grid, _rotate(params.rotation, u)) / eps
    G = G + _spec(grid, inv_rho * grid.ifft(force))

    rho_f = ScalarField(grid, grid.fft(rho))
    corr = pressure_flux(rho_f, VectorField(grid, G), tol=tol).coeffs
    du = _project(grid, G - corr)
    du[:, 0, 0] = 0.0

    db = _lorentz_and_induction(grid, u, b)
    if h:
        j = grid.ifft(1j * (grid.kd[0] * s.b.coeffs[1] - grid.kd[1] * s.b.coeffs[0]))
        mj = _spec(grid, params.mu(rho) * j)
        k1, k2 = grid.kd
        db = db + h * np.stack([-1j * k2 * mj, 1j * k1 * mj])
    db = _project(grid, db)
    dr = -_div_vec(grid, _spec(grid, r * u))
    return PrimitiveState(ScalarField(grid, dr), VectorField(grid, du), VectorField(grid, db))


# --- pressure recovery ------------------------------------------------------


def _advective(grid: TorusGrid, w: np.ndarray, v_coeffs: np.ndarray) -> np.ndarray:
    """Coefficients of (w . grad) v for physical w and spectral v."""
    gv = grid.ifft(_grad_scalar(grid, v_coeffs))
    return _spec(grid, np.einsum("i...,ij...->j...", w, gv))


def pressure_sources(e: ElsasserState, params: PhysParams) -> tuple[ScalarField, ScalarField]:
    """Sources of -Lap pi from the alpha equation and from the beta equation."""
    grid = e.grid
    R = e.R.physical()
    a = e.alpha.physical()
    b = e.beta.physical()
    cor = 0.5 * _div_vec(grid, _spec(grid, R * _rotate(params.rotation, a + b)))
    src_a = _div_vec(grid, _advective(grid, b, e.alpha.coeffs)) + cor
    src_b = _div_vec(grid, _advective(grid, a, e.beta.coeffs)) + cor
    return ScalarField(grid, src_a), ScalarField(grid, src_b)


def recover_pressure_elsasser(e: ElsasserState, params: PhysParams, source: str = "alpha") -> ScalarField:
    """Mean-free pressure pi with -Lap pi equal to the alpha (or beta) source."""
    src_a, src_b = pressure_sources(e, params)
    src = {"alpha": src_a, "beta": src_b}[source]
    src = ScalarField(src.grid, src.coeffs.copy())
    src.coeffs[0, 0] = 0.0
    return -inv_laplacian(src)


def hydrodynamic_pressure(e: ElsasserState, params: PhysParams) -> ScalarField:
    """Pi = pi - |B|^2 / 2."""
    pi = recover_pressure_elsasser(e, params)
    B = from_elsasser(e).B.physical()
    return pi - ScalarField(pi.grid, _spec(pi.grid, 0.5 * np.sum(B * B, axis=0)))


# --- diagnostics ------------------------------------------------------------


def diagnostics(state, eps: float | None = None, lp=(2, 4, np.inf)) -> dict:
    """Energy, cross helicity and density L^p norms of a state.

    Primitive states weight the kinetic energy by rho = 1 + eps r.
    """
    grid = state.grid
    u = state.velocity().physical()
    b = state.magnetic().physical()
    dens = state.density()
    usq = np.sum(u * u, axis=0)
    if isinstance(state, PrimitiveState):
        if eps is None:
            raise ValueError("primitive diagnostics need eps")
        usq = (1.0 + eps * dens.physical()) * usq
    energy = 0.5 * integrate(usq + np.sum(b * b, axis=0), grid)
    cross = integrate(np.sum(u * b, axis=0), grid)
    dphys = np.abs(dens.physical())
    return {
        "energy": energy,
        "cross_helicity": cross,
        "density_lp": {p: lp_norm_array(dphys, p, grid.cell_area) for p in lp},
    }


def gradient_sup(v: VectorField) -> float:
    """max over the grid of the Frobenius norm of grad v."""
    grid = v.grid
    g = grid.ifft(_grad_scalar(grid, v.coeffs))
    return float(np.sqrt(np.max(np.sum(g * g, axis=(0, 1)))))


RHS = Callable[[object], object]
