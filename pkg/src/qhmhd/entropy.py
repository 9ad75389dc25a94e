"""
Relative entropy between a primitive solution and a limit solution, the
remainder split into J1..J6, and the epsilon sweeps that measure rates.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson

from .errors import QHMHDError, TraceAlignmentError
from .integrate import StepperConfig, advance
from .mhd import (
    LimitState,
    PhysParams,
    PrimitiveState,
    _grad_scalar,
    _rotate,
    limit_viscosities,
    rhs_ideal_original,
    rhs_primitive,
    rhs_viscous_limit,
)
from .spectral import integrate, norm, same_grid

JNAMES = ("J1", "J2", "J3", "J4", "J5", "J6")


def _check_pair(p: PrimitiveState, l: LimitState):
    same_grid(p.r, p.u, p.b, l.R, l.U, l.B)


def relative_entropy(p: PrimitiveState, l: LimitState, eps: float) -> float:
    """1/2 int (rho |u - U|^2 + |b - B|^2 + |r - R|^2) with rho = 1 + eps r."""
    _check_pair(p, l)
    g = p.grid
    rho = 1.0 + eps * p.r.physical()
    du = (p.u - l.U).physical()
    db = (p.b - l.B).physical()
    dr = (p.r - l.R).physical()
    return 0.5 * integrate(rho * np.sum(du * du, axis=0) + np.sum(db * db, axis=0) + dr * dr, g)


@dataclass
class _Pair:
    """Physical arrays shared by the remainder formulas."""

    grid: object
    rho: np.ndarray
    r: np.ndarray
    u: np.ndarray
    R: np.ndarray
    U: np.ndarray
    B: np.ndarray
    b: np.ndarray
    du: np.ndarray
    db: np.ndarray
    dr: np.ndarray
    gU: np.ndarray
    gB: np.ndarray
    gR: np.ndarray
    dtU: np.ndarray
    dtB: np.ndarray
    dtR: np.ndarray


def _curl(grid, v_coeffs):
    k1, k2 = grid.kd
    return grid.ifft(1j * (k1 * v_coeffs[1] - k2 * v_coeffs[0]))


def _pair(p: PrimitiveState, l: LimitState, dl: LimitState, eps: float) -> _Pair:
    _check_pair(p, l)
    g = p.grid
    ph = lambda c: g.ifft(c)
    r = p.r.physical()
    return _Pair(
        grid=g,
        rho=1.0 + eps * r,
        r=r,
        u=p.u.physical(),
        b=p.b.physical(),
        R=l.R.physical(),
        U=l.U.physical(),
        B=l.B.physical(),
        du=(p.u - l.U).physical(),
        db=(p.b - l.B).physical(),
        dr=(p.r - l.R).physical(),
        gU=ph(_grad_scalar(g, l.U.coeffs)),
        gB=ph(_grad_scalar(g, l.B.coeffs)),
        gR=ph(_grad_scalar(g, l.R.coeffs)),
        dtU=dl.U.physical(),
        dtB=dl.B.physical(),
        dtR=dl.R.physical(),
    )


def _adv(w, gv):
    """(w . grad) v from physical w and physical gradient gv[i, j] = d_i v_j."""
    return np.einsum("i...,ij...->j...", w, gv)


def _dot(a, b):
    return np.sum(a * b, axis=0)


@dataclass(frozen=True)
class JTerms:
    J1: float
    J2: float
    J3: float
    J4: float
    J5: float
    J6: float

    @property
    def total(self) -> float:
        return self.J1 + self.J2 + self.J3 + self.J4 + self.J5 + self.J6

    def as_tuple(self) -> tuple:
        return (self.J1, self.J2, self.J3, self.J4, self.J5, self.J6)


def remainder_jterms(
    p: PrimitiveState,
    l: LimitState,
    params: PhysParams,
    dl: LimitState,
    nu_lim: float,
    mu_lim: float,
) -> JTerms:
    """J1..J6 with the limit time derivative ``dl`` taken from the limit evaluator.

    nu_lim, mu_lim are the limit-system viscosities (nu(1), mu(1) in the viscous
    experiment, zero in the ideal one); J3 and J5 carry h(eps) nu(rho) - nu_lim.
    """
    q = _pair(p, l, dl, params.eps)
    g = q.grid
    h = params.h_eps
    eps = params.eps
    I = lambda arr: integrate(arr, g)
    Uperp = _rotate(params.rotation, q.U)

    j1 = -I(q.dr * _dot(q.du, q.gR))
    j2 = I(_dot(_adv(q.db, q.gU) - _adv(q.du, q.gB), q.db))
    curl_B = _curl(g, l.B.coeffs)
    curl_db = _curl(g, (p.b - l.B).coeffs)
    j3 = -I((h * params.mu(q.rho) - mu_lim) * curl_B * curl_db)
    j4 = -I(_dot(_adv(q.du, q.gU) - _adv(q.db, q.gB) + q.dr * Uperp, q.du))
    gdu = g.ifft(_grad_scalar(g, (p.u - l.U).coeffs))
    j5 = -I((h * params.nu(q.rho) - nu_lim) * np.sum(q.gU * gdu, axis=(0, 1)))
    j6 = -eps * I(q.r * _dot(q.dtU + _adv(q.u, q.gU), q.du))
    return JTerms(j1, j2, j3, j4, j5, j6)


def unexpanded_remainder(p: PrimitiveState, l: LimitState, params: PhysParams, dl: LimitState) -> float:
    """The remainder before any use of the limit equations."""
    q = _pair(p, l, dl, params.eps)
    g = q.grid
    h = params.h_eps
    eps = params.eps
    I = lambda arr: integrate(arr, g)
    Uperp = _rotate(params.rotation, q.U)
    gdu = g.ifft(_grad_scalar(g, (p.u - l.U).coeffs))
    out = -I(q.rho * _dot(q.dtU + _adv(q.u, q.gU) + Uperp / eps, q.du))
    out -= I(_dot(q.dtB + _adv(q.u, q.gB), q.db))
    out -= I((q.dtR + _dot(q.u, q.gR)) * q.dr)
    out += I(_dot(_adv(q.b, q.gU), q.db))
    out += I(_dot(_adv(q.b, q.gB), q.du))
    out -= h * I(params.nu(q.rho) * np.sum(q.gU * gdu, axis=(0, 1)))
    out -= h * I(params.mu(q.rho) * _curl(g, l.B.coeffs) * _curl(g, (p.b - l.B).coeffs))
    return out


def dissipation(p: PrimitiveState, l: LimitState, params: PhysParams) -> float:
    """h int (nu(rho) |grad du|^2 + mu(rho) |curl db|^2)."""
    _check_pair(p, l)
    g = p.grid
    rho = 1.0 + params.eps * p.r.physical()
    gdu = g.ifft(_grad_scalar(g, (p.u - l.U).coeffs))
    cdb = _curl(g, (p.b - l.B).coeffs)
    dens = params.nu(rho) * np.sum(gdu * gdu, axis=(0, 1)) + params.mu(rho) * cdb**2
    return params.h_eps * integrate(dens, g)


# --- records ----------------------------------------------------------------


@dataclass(frozen=True)
class EntropyRecord:
    t: float
    entropy: float
    dissipation: float
    jterms: JTerms
    residual: float = math.nan


def limit_rhs_for(scenario: str) -> Callable:
    return rhs_viscous_limit if scenario == "viscous" else rhs_ideal_original


def entropy_records(
    p_times: Sequence[float],
    p_states: Sequence[PrimitiveState],
    l_times: Sequence[float],
    l_states: Sequence[LimitState],
    params: PhysParams,
    scenario: str,
) -> list[EntropyRecord]:
    """Entropy, dissipation and J-terms at every shared sample time, with running residuals."""
    if len(p_times) != len(l_times) or np.any(np.abs(np.subtract(p_times, l_times)) > 1e-12):
        raise TraceAlignmentError("primitive and limit traces have different sample times")
    limit_rhs = limit_rhs_for(scenario)
    nu_lim, mu_lim = limit_viscosities(params, scenario)
    raw = []
    for t, ps, ls in zip(p_times, p_states, l_states):
        dl = limit_rhs(ls, params)
        raw.append(
            (t, relative_entropy(ps, ls, params.eps), dissipation(ps, ls, params),
             remainder_jterms(ps, ls, params, dl, nu_lim, mu_lim))
        )
    partial = [EntropyRecord(t, e, d, j) for t, e, d, j in raw]
    return [
        EntropyRecord(r.t, r.entropy, r.dissipation, r.jterms, entropy_residual(partial, r.t))
        for r in partial
    ]


def _cumulative(ts: np.ndarray, ys: np.ndarray) -> float:
    if len(ts) < 2:
        return 0.0
    if len(ts) == 2:
        return float(0.5 * (ts[1] - ts[0]) * (ys[0] + ys[1]))
    return float(simpson(ys, x=ts))


def entropy_residual(records: Sequence[EntropyRecord], t: float) -> float:
    """[E(t) + int_0^t D] - [E(0) + int_0^t sum J], integrals by Simpson's rule."""
    ts = np.array([r.t for r in records])
    upto = ts <= t + 1e-12
    if not np.any(np.abs(ts - t) <= 1e-12):
        raise TraceAlignmentError(f"t={t} is not a sample time")
    ts = ts[upto]
    recs = [r for r, k in zip(records, upto) if k]
    d_int = _cumulative(ts, np.array([r.dissipation for r in recs]))
    j_int = _cumulative(ts, np.array([r.jterms.total for r in recs]))
    return (recs[-1].entropy + d_int) - (recs[0].entropy + j_int)


# --- rates ------------------------------------------------------------------


def theoretical_exponent(scenario: str, params: PhysParams) -> float:
    if scenario == "synthetic":
        return 2.0
    if scenario == "viscous":
        gam = min(params.nu.sigma_exponent, params.mu.sigma_exponent)
        return min(2.0, 2.0 * gam)
    if params.h.family == "power":
        return min(2.0, params.h.a)
    return 2.0


def theoretical_bound(eps: float, params: PhysParams, M: float, delta0sq: float = 0.0, scenario: str = "viscous") -> float:
    """delta0^2 + max(eps^2, sigma(M eps)^2) (viscous) or delta0^2 + eps^2 + h(eps) (ideal)."""
    if scenario == "viscous":
        sig = max(float(params.nu.sigma(M * eps)), float(params.mu.sigma(M * eps)))
        return delta0sq + max(eps**2, sig**2)
    return delta0sq + eps**2 + params.h(eps)


def fit_rate(eps_values: Sequence[float], values: Sequence[float]) -> tuple[float, float]:
    """OLS slope and intercept of log(values) against log(eps)."""
    x = np.log(np.asarray(eps_values, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def data_scale(state: PrimitiveState) -> float:
    """M = ||r0||_inf + ||u0||_2 + ||b0||_2."""
    return norm(state.r, np.inf) + norm(state.u, 2) + norm(state.b, 2)


@dataclass
class SweepResult:
    eps_values: list
    sup_entropy: list
    slope: float
    intercept: float
    theoretical_exponent: float
    passed: bool
    scenario: str = "viscous"
    bounds: list = field(default_factory=list)
    M: float = math.nan
    status: str = "completed"
    messages: list = field(default_factory=list)
    records: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "scenario": self.scenario,
            "eps_values": list(self.eps_values),
            "sup_entropy": list(self.sup_entropy),
            "slope": self.slope,
            "intercept": self.intercept,
            "theoretical_exponent": self.theoretical_exponent,
            "pass": self.passed,
            "bounds": list(self.bounds),
            "M": self.M,
            "status": self.status,
            "messages": list(self.messages),
        }


def _validate_eps(eps_list: Sequence[float]):
    eps = list(map(float, eps_list))
    if len(eps) < 2:
        raise ValueError("a rate fit needs at least two eps values")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps values must be strictly decreasing")
    if any(e <= 0 for e in eps):
        raise ValueError("eps values must be positive")
    return eps


def _primitive_diffusivity(params: PhysParams, state: PrimitiveState) -> float:
    h = params.h_eps
    if h == 0:
        return 0.0
    rho = 1.0 + params.eps * state.r.physical()
    return h * float(max(np.max(params.nu(rho)), np.max(params.mu(rho))))


def _run_primitive(args):
    eps, params, data, cfg = args
    params = params.with_eps(eps)
    init = PrimitiveState(data.R, data.U, data.B)
    try:
        trace = advance(
            init,
            lambda s: rhs_primitive(s, params),
            cfg,
            diffusivity=1.5 * _primitive_diffusivity(params, init),
            diagnose=lambda s: {},
            raise_on_failure=False,
        )
    except QHMHDError as exc:
        return eps, None, None, "failed", str(exc)
    return eps, trace.times, trace.states, trace.status, trace.message


def run_limit(data: LimitState, params: PhysParams, scenario: str, cfg: StepperConfig):
    nu_lim, mu_lim = limit_viscosities(params, scenario)
    rhs = limit_rhs_for(scenario)
    return advance(
        data, lambda s: rhs(s, params), cfg, diffusivity=max(nu_lim, mu_lim), diagnose=lambda s: {}
    )


def run_sweep(
    scenario: str,
    eps_list: Sequence[float],
    params: PhysParams,
    data: LimitState | None,
    cfg: StepperConfig,
    workers: int = 1,
    synthetic_exponent: float = 2.0,
    keep_records: bool = False,
) -> SweepResult:
    """Measure sup_t E against eps from well-prepared data and fit the rate.

    scenario is 'viscous', 'ideal' or 'synthetic' (E = eps^synthetic_exponent,
    used to exercise the fitter).
    """
    eps = _validate_eps(eps_list)
    if scenario not in ("viscous", "ideal", "synthetic"):
        raise ValueError(f"unknown scenario {scenario!r}")
    theo = theoretical_exponent(scenario, params)
    if scenario == "synthetic":
        sup = [e**synthetic_exponent for e in eps]
        slope, icpt = fit_rate(eps, sup)
        return SweepResult(eps, sup, slope, icpt, synthetic_exponent, slope >= synthetic_exponent - 0.3, scenario)

    cfg = StepperConfig(cfg.dt, cfg.t_end, cfg.cfl, cfg.scheme, cfg.sample_dt, cfg.max_rejections, False, True)
    limit = run_limit(data, params, scenario, cfg)
    M = data_scale(PrimitiveState(data.R, data.U, data.B))
    jobs = [(e, params, data, cfg) for e in eps]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_primitive, jobs))
    else:
        outcomes = [_run_primitive(j) for j in jobs]

    sups, bounds, messages, records = [], [], [], {}
    status = "completed"
    for e, times, states, st, msg in outcomes:
        pe = params.with_eps(e)
        bounds.append(theoretical_bound(e, pe, M, 0.0, scenario))
        if st != "completed":
            status = "failed"
            messages.append(f"eps={e}: {st}: {msg}")
            sups.append(math.nan)
            continue
        recs = entropy_records(times, states, limit.times, limit.states, pe, scenario)
        if keep_records:
            records[e] = recs
        sups.append(max(r.entropy for r in recs))
    good = [(e, s) for e, s in zip(eps, sups) if np.isfinite(s) and s > 0]
    if len(good) >= 2:
        slope, icpt = fit_rate([g[0] for g in good], [g[1] for g in good])
    else:
        slope, icpt = math.nan, math.nan
    passed = status == "completed" and np.isfinite(slope) and slope >= theo - 0.3
    return SweepResult(eps, sups, slope, icpt, theo, bool(passed), scenario, bounds, M, status, messages, records)
