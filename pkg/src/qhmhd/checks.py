"""Built-in property suite run by the ``check`` subcommand."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import random_scalar, random_solenoidal
from .entropy import remainder_jterms, unexpanded_remainder
from .integrate import StepperConfig, advance
from .littlewood_paley import DyadicDecomposition, bony_decompose, chi, phi
from .mhd import (
    LimitState,
    PhysParams,
    PrimitiveState,
    recover_pressure_elsasser,
    rhs_ideal_elsasser,
    rhs_ideal_original,
    rhs_viscous_limit,
    to_elsasser,
)
from .spectral import (
    ScalarField,
    TorusGrid,
    VectorField,
    curl2,
    div,
    grad,
    leray_project,
    norm,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tol)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name}: {self.value:.3e} (tol {self.tol:.1e})"


def _random_limit(rng, grid, k_hi=4.0, amp=0.5) -> LimitState:
    return LimitState(
        random_scalar(rng, grid, 1, k_hi, amp),
        random_solenoidal(rng, grid, 1, k_hi, amp),
        random_solenoidal(rng, grid, 1, k_hi, amp),
    )


def check_leray(grid, rng, count=10) -> CheckResult:
    worst = 0.0
    for _ in range(count):
        c = (rng.standard_normal((2,) + grid.spectral_shape) + 1j * rng.standard_normal((2,) + grid.spectral_shape))
        v = VectorField(grid, grid.fft(grid.ifft(c)))
        pv = leray_project(v)
        worst = max(worst, norm(div(pv)) / norm(v), norm(leray_project(pv) - pv) / norm(v))
    return CheckResult("Leray projection divergence and idempotence", worst, 1e-10)


def check_equivalence(grid, rng, params) -> CheckResult:
    s = _random_limit(rng, grid)
    a = to_elsasser(rhs_ideal_original(s, params))
    b = rhs_ideal_elsasser(to_elsasser(s), params)
    err = max(norm(x - y) for x, y in zip(a.parts(), b.parts()))
    return CheckResult("original and Elsasser right-hand sides agree", err, 1e-8)


def check_euler_vorticity(grid, rng, params) -> CheckResult:
    U = random_solenoidal(rng, grid, 1, 6, 1.0)
    z = VectorField.zeros(grid)
    dU = rhs_ideal_original(LimitState(ScalarField.zeros(grid), U, z), params).U
    w = curl2(U)
    adv = np.sum(U.physical() * grad(w).physical(), axis=0)
    oracle = ScalarField(grid, -grid.fft(adv) * grid.dealias_mask)
    err = norm(curl2(dU) - oracle) / max(norm(oracle), 1e-300)
    return CheckResult("Euler right-hand side matches vorticity transport", err, 1e-8)


def check_conservation(grid, rng, params) -> CheckResult:
    s = _random_limit(rng, grid, 3, 0.5)
    cfg = StepperConfig(dt=2e-3, t_end=0.1, sample_dt=0.1, monitor_bkm=False)
    tr = advance(s, lambda x: rhs_ideal_original(x, params), cfg)
    e0, e1 = tr.diagnostics[0]["energy"], tr.diagnostics[-1]["energy"]
    return CheckResult("ideal energy conservation over t = 0.1", abs(e1 - e0) / e0, 1e-6)


def check_pressure(grid, params) -> CheckResult:
    x1, x2 = grid.x
    U = VectorField.from_physical(grid, np.sin(x1) * np.cos(x2), -np.cos(x1) * np.sin(x2))
    e = to_elsasser(LimitState(ScalarField.zeros(grid), U, VectorField.zeros(grid)))
    pi = recover_pressure_elsasser(e, params)
    exact = (np.cos(2 * x1) + np.cos(2 * x2)) / 4.0
    return CheckResult("Taylor-Green pressure", float(np.max(np.abs(pi.physical() - exact))), 1e-10)


def check_jterms(grid, rng, params) -> CheckResult:
    l = _random_limit(rng, grid)
    q = _random_limit(rng, grid)
    p = PrimitiveState(q.R, q.U, q.B)
    dl = rhs_viscous_limit(l, params)
    nu1, mu1 = float(params.nu(1.0)), float(params.mu(1.0))
    J = remainder_jterms(p, l, params, dl, nu1, mu1)
    R = unexpanded_remainder(p, l, params, dl)
    return CheckResult("J-terms sum to the unexpanded remainder", abs(J.total - R) / max(abs(R), 1.0), 1e-8)


def check_partition(grid) -> CheckResult:
    dec = DyadicDecomposition(grid)
    r = np.linspace(0, 2**dec.jmax, 4001)
    total = chi(2 * r) + sum(phi(r / 2.0**j) for j in range(dec.jmax + 1))
    return CheckResult("Littlewood-Paley partition of unity", float(np.max(np.abs(total - 1))), 1e-10)


def check_bony(grid, rng) -> CheckResult:
    dec = DyadicDecomposition(grid)
    u = random_scalar(rng, grid, 1, dec.resolved_radius, 1.0)
    v = random_scalar(rng, grid, 1, dec.resolved_radius, 1.0)
    parts = bony_decompose(u, v, dec)
    prod = ScalarField(grid, grid.fft(u.physical() * v.physical()) * grid.dealias_mask)
    err = norm(parts[0] + parts[1] + parts[2] - prod) / norm(prod)
    return CheckResult("Bony decomposition reconstructs the product", err, 1e-8)


def run_checks(n: int = 32, seed: int = 0) -> list[CheckResult]:
    grid = TorusGrid(n)
    rng = np.random.default_rng(seed)
    params = PhysParams()
    return [
        check_leray(grid, rng),
        check_equivalence(grid, rng, params),
        check_euler_vorticity(grid, rng, params),
        check_conservation(grid, rng, params),
        check_pressure(grid, params),
        check_jterms(grid, rng, params),
        check_partition(grid),
        check_bony(grid, rng),
    ]
