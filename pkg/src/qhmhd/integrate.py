"""Classical RK4 stepping with CFL control, sample-time alignment and a BKM monitor."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import EllipticSolverError, NumericalBlowUpError, VacuumError
from .littlewood_paley import BesovIndex, DyadicDecomposition, besov_norm_bundle
from .mhd import ElsasserState, diagnostics, from_elsasser, gradient_sup


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    t_end: float
    cfl: float = 0.5
    scheme: str = "rk4"
    sample_dt: float | None = None
    max_rejections: int = 10
    monitor_bkm: bool = True
    keep_states: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (0 < self.cfl <= 1):
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.t_end < 0:
            raise ValueError(f"t_end must be nonnegative, got {self.t_end}")
        if self.scheme != "rk4":
            raise ValueError(f"unsupported scheme {self.scheme!r}")

    def sample_times(self, t0: float = 0.0) -> np.ndarray:
        if self.sample_dt is None or self.t_end == t0:
            return np.array([t0, self.t_end]) if self.t_end > t0 else np.array([t0])
        m = max(1, int(round((self.t_end - t0) / self.sample_dt)))
        return np.linspace(t0, self.t_end, m + 1)


@dataclass
class RunTrace:
    times: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    bkm_integral: list = field(default_factory=list)
    states: list = field(default_factory=list)
    status: str = "completed"
    message: str = ""
    lifespan_hint: float = math.inf
    steps: int = 0
    rejections: int = 0

    @property
    def t_last(self) -> float:
        return self.times[-1] if self.times else math.nan


def step(state, rhs: Callable, dt: float):
    """One classical RK4 step followed by re-projection of the solenoidal members."""
    k1 = rhs(state)
    k2 = rhs(state + (0.5 * dt) * k1)
    k3 = rhs(state + (0.5 * dt) * k2)
    k4 = rhs(state + dt * k3)
    new = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return new.project() if hasattr(new, "project") else new


def cfl_limit(state, cfl: float, diffusivity: float = 0.0) -> float:
    """Largest step allowed by the advective and explicit-diffusion bounds."""
    dx = state.grid.spacing
    umax = float(np.max(np.sqrt(np.sum(state.velocity().physical() ** 2, axis=0))))
    bmax = float(np.max(np.sqrt(np.sum(state.magnetic().physical() ** 2, axis=0))))
    limit = cfl * dx / (umax + bmax + 1e-8)
    if diffusivity > 0:
        limit = min(limit, cfl * dx * dx / (2.0 * diffusivity))
    return limit


def bkm_integrand(state) -> float:
    """||grad U||_inf + ||grad B||_inf (pointwise Frobenius norms)."""
    return gradient_sup(state.velocity()) + gradient_sup(state.magnetic())


def lifespan_hint(state, s: float = 2.5) -> float:
    """1 / ||(R, U, B)||_{B^s_{2,2}}; a reference scale only."""
    if isinstance(state, ElsasserState):
        state = from_elsasser(state)
    dec = DyadicDecomposition(state.grid)
    val = besov_norm_bundle(state.parts(), BesovIndex(s, 2, 2), dec)
    return math.inf if val == 0 else 1.0 / val


def advance(
    state,
    rhs: Callable,
    cfg: StepperConfig,
    diffusivity: float = 0.0,
    diagnose: Callable | None = None,
    t0: float = 0.0,
    raise_on_failure: bool = True,
) -> RunTrace:
    """Integrate from t0 to cfg.t_end, landing exactly on every sample time.

    A step that violates the CFL bound or produces non-finite values is retried
    with half the step; the step size never grows again during the run.
    """
    diagnose = diagnose or diagnostics
    trace = RunTrace()
    if not state.is_finite():
        raise NumericalBlowUpError("non-finite initial data", t0)
    trace.lifespan_hint = lifespan_hint(state)

    bkm = 0.0
    g_prev = bkm_integrand(state) if cfg.monitor_bkm else 0.0
    t = t0

    def record(s):
        trace.times.append(t)
        trace.diagnostics.append(diagnose(s))
        trace.bkm_integral.append(bkm)
        if cfg.keep_states:
            trace.states.append(s)

    record(state)
    dt = cfg.dt
    try:
        for t_next in cfg.sample_times(t0)[1:]:
            while t < t_next:
                remaining = t_next - t
                nsub = max(1, math.ceil(remaining / dt * (1 - 1e-12)))
                h = remaining / nsub
                rejections = 0
                while True:
                    ok = h <= cfl_limit(state, cfg.cfl, diffusivity) * (1 + 1e-12)
                    if ok:
                        new = step(state, rhs, h)
                        ok = new.is_finite()
                    if ok:
                        break
                    rejections += 1
                    trace.rejections += 1
                    if rejections > cfg.max_rejections:
                        raise NumericalBlowUpError(
                            f"step rejected {rejections} times (dt={h:.3e})", t
                        )
                    dt = h = h / 2.0
                state = new
                t = t_next if nsub == 1 else t + h
                trace.steps += 1
                if cfg.monitor_bkm:
                    g_new = bkm_integrand(state)
                    bkm += 0.5 * h * (g_prev + g_new)
                    g_prev = g_new
            record(state)
    except NumericalBlowUpError as exc:
        if raise_on_failure:
            raise
        trace.status, trace.message = "blow-up-suspected", str(exc)
    except (EllipticSolverError, VacuumError) as exc:
        if raise_on_failure:
            raise
        trace.status, trace.message = "solver-error", str(exc)
    return trace


def final_state(trace: RunTrace):
    if not trace.states:
        raise ValueError("trace was recorded without states")
    return trace.states[-1]


def sample_values(trace: RunTrace, key: str) -> np.ndarray:
    return np.array([d[key] for d in trace.diagnostics])


def align(times_a: Sequence[float], times_b: Sequence[float], tol: float = 1e-12) -> bool:
    return len(times_a) == len(times_b) and bool(np.all(np.abs(np.subtract(times_a, times_b)) <= tol))
