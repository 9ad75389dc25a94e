"""Acceptance criteria 1-11, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the pytest
terminal summary under "acceptance criteria".
"""

import math
import os
import time

import numpy as np
import sympy as sp

from conftest import ACCEPTANCE_LINES, random_modes, random_solenoidal_oracle, vorticity_transport_oracle
from qhmhd.config import InitialSpec, generate_initial_data
from qhmhd.entropy import entropy_records, remainder_jterms, run_sweep, unexpanded_remainder
from qhmhd.integrate import StepperConfig, advance
from qhmhd.littlewood_paley import (
    BesovIndex,
    DyadicDecomposition,
    bernstein_check,
    besov_norm,
    bony_decompose,
    chi,
    commutator_check,
    phi,
)
from qhmhd.mhd import (
    Coefficient,
    ElsasserState,
    HProfile,
    LimitState,
    PhysParams,
    PrimitiveState,
    recover_pressure_elsasser,
    rhs_ideal_elsasser,
    rhs_ideal_original,
    rhs_primitive,
    rhs_viscous_limit,
    to_elsasser,
)
from qhmhd.spectral import ScalarField, TorusGrid, VectorField, curl2, div, grad, inner, integrate, laplacian, leray_project, norm

WORKERS = os.cpu_count() or 1
SWEEP_EPS = [0.1, 0.05, 0.025, 0.0125]
SWEEP_CFG = StepperConfig(dt=1e-2, t_end=1.0, cfl=0.5, sample_dt=0.02)


def report(num, name, checks):
    """checks: (label, value, op, bound) with op '<=' or '>='."""
    ok = True
    parts = []
    for label, value, op, bound in checks:
        good = bool(np.isfinite(value)) and (value <= bound if op == "<=" else value >= bound)
        ok &= good
        parts.append(f"{label}={value:.3e} {op} {bound:.1e}{'' if good else ' FAILED'}")
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} {name} | " + "; ".join(parts)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def sweep_data():
    return generate_initial_data(InitialSpec("random", 1, 2, 0.5, 0.5, 0.5), TorusGrid(64), 1)


def trend_violation(values):
    """Largest relative increase of sup E as eps decreases (5% tolerated)."""
    v = np.asarray(values)
    return float(np.max(v[1:] / v[:-1]) - 1.0)


def test_criterion_01_spectral_identities():
    t0 = time.perf_counter()
    g = TorusGrid(64)
    rng = np.random.default_rng(101)
    div_worst = idem_worst = 0.0
    for _ in range(100):
        v = VectorField.from_physical(g, *rng.standard_normal((2, 64, 64)))
        pv = leray_project(v)
        div_worst = max(div_worst, norm(div(pv)) / norm(v))
        idem_worst = max(idem_worst, norm(leray_project(pv) - pv) / norm(v))
    report(1, "Leray projection identities", [
        ("max ||div Pv||/||v||", div_worst, "<=", 1e-12),
        ("max ||PPv - Pv||/||v||", idem_worst, "<=", 1e-10),
        ("seconds", time.perf_counter() - t0, "<=", 1.0),
    ])


def test_criterion_02_formulation_equivalence():
    t0 = time.perf_counter()
    g = TorusGrid(64)
    data = generate_initial_data(InitialSpec("random", 1, 4, 0.5, 0.5, 0.5), g, 11)
    params = PhysParams()
    cfg = StepperConfig(1e-3, 0.5, sample_dt=0.05, keep_states=True, monitor_bkm=False)
    a = advance(data, lambda s: rhs_ideal_original(s, params), cfg, diagnose=lambda s: {})
    b = advance(to_elsasser(data), lambda s: rhs_ideal_elsasser(s, params), cfg, diagnose=lambda s: {})
    worst = 0.0
    for sa, sb in zip(a.states, b.states):
        mapped = to_elsasser(sa)
        worst = max(worst, math.sqrt(sum(norm(x - y) ** 2 for x, y in zip(mapped.parts(), sb.parts()))))
    report(2, "original vs Elsasser evolution", [
        ("sup_t L2 discrepancy", worst, "<=", 1e-6),
        ("samples", len(a.states), ">=", 11),
        ("seconds", time.perf_counter() - t0, "<=", 30.0),
    ])


def _drifts(data, keys):
    g = data.grid
    params = PhysParams()

    def diag(s):
        return {
            "energy": integrate(np.sum(s.U.physical() ** 2 + s.B.physical() ** 2, axis=0), g),
            "R2": norm(s.R, 2),
            "R4": norm(s.R, 4),
            "cross": inner(s.U, s.B),
        }

    tr = advance(data, lambda s: rhs_ideal_original(s, params),
                 StepperConfig(5e-4, 1.0, sample_dt=0.1, monitor_bkm=False), diagnose=diag)
    out = {}
    for k in keys:
        v = np.array([d[k] for d in tr.diagnostics])
        out[k] = float(np.max(np.abs(v - v[0])) / abs(v[0]))
    return out


def test_criterion_03_conservation():
    t0 = time.perf_counter()
    g = TorusGrid(128)
    data = generate_initial_data(InitialSpec("random", 1, 3, 0.5, 0.5, 0.5), g, 2024)
    d1 = _drifts(data, ("energy", "R2", "R4"))
    no_r = LimitState(ScalarField.zeros(g), data.U, data.B)
    d2 = _drifts(no_r, ("cross",))
    report(3, "ideal conservation at n=128", [
        ("energy drift", d1["energy"], "<=", 1e-6),
        ("||R||_2 drift", d1["R2"], "<=", 1e-6),
        ("||R||_4 drift", d1["R4"], "<=", 1e-6),
        ("cross helicity drift (R=0)", d2["cross"], "<=", 1e-6),
        ("seconds", time.perf_counter() - t0, "<=", 120.0),
    ])


def test_criterion_04_pressure_recovery():
    t0 = time.perf_counter()
    g = TorusGrid(64)
    y1, y2 = sp.symbols("y1 y2")
    ys = (y1, y2)
    Usym = (sp.sin(y1) * sp.cos(y2), -sp.cos(y1) * sp.sin(y2))
    source = sum(sp.diff(Usym[i] * Usym[j], ys[i], ys[j]) for i in range(2) for j in range(2))
    x1, x2 = g.x
    U = VectorField.from_physical(g, *(sp.lambdify(ys, c, "numpy")(x1, x2) for c in Usym))
    params = PhysParams()
    pi = recover_pressure_elsasser(to_elsasser(LimitState(ScalarField.zeros(g), U, VectorField.zeros(g))), params)
    src = ScalarField.from_physical(g, sp.lambdify(ys, source, "numpy")(x1, x2) + 0 * x1)
    exact = (np.cos(2 * x1) + np.cos(2 * x2)) / 4
    rng = np.random.default_rng(4)
    grad_gap = 0.0
    for _ in range(5):
        R = random_modes(rng, g, 6)
        e = ElsasserState(R * (0.5 / norm(R, np.inf)), random_solenoidal_oracle(rng, g, 6),
                          random_solenoidal_oracle(rng, g, 6))
        ga = grad(recover_pressure_elsasser(e, params, "alpha"))
        gb = grad(recover_pressure_elsasser(e, params, "beta"))
        grad_gap = max(grad_gap, norm(ga - gb) / norm(ga))
    report(4, "pressure recovery", [
        ("||-Lap pi - source||", norm(-laplacian(pi) - src), "<=", 1e-10),
        ("max |pi - (cos 2x1 + cos 2x2)/4|", float(np.max(np.abs(pi.physical() - exact))), "<=", 1e-10),
        ("||grad pi_a - grad pi_b|| rel", grad_gap, "<=", 1e-8),
        ("seconds", time.perf_counter() - t0, "<=", 1.0),
    ])


def test_criterion_05_entropy_bookkeeping():
    t0 = time.perf_counter()
    g = TorusGrid(64)
    rng = np.random.default_rng(55)
    params = PhysParams(eps=0.1, nu=Coefficient("holder", 0.05, L=0.5, gamma=0.5),
                        mu=Coefficient("affine", 0.05, L=0.3))
    nu1, mu1 = float(params.nu(1.0)), float(params.mu(1.0))

    def state(cls):
        R = random_modes(rng, g, 6)
        return cls(R * (0.5 / norm(R, np.inf)), random_solenoidal_oracle(rng, g, 6), random_solenoidal_oracle(rng, g, 6))

    worst = 0.0
    for _ in range(20):
        p, l = state(PrimitiveState), state(LimitState)
        dl = rhs_viscous_limit(l, params)
        J = remainder_jterms(p, l, params, dl, nu1, mu1)
        R = unexpanded_remainder(p, l, params, dl)
        worst = max(worst, abs(J.total - R) / max(1.0, abs(R)))
    t_jterms = time.perf_counter() - t0

    data = generate_initial_data(InitialSpec("random", 1, 3, 0.5, 0.5, 0.0), g, 5)
    base = PhysParams(eps=0.1)
    cfg = StepperConfig(1e-3, 0.5, sample_dt=0.05, keep_states=True, monitor_bkm=False)
    pt = advance(PrimitiveState(data.R, data.U, data.B), lambda s: rhs_primitive(s, base), cfg, 0.05,
                 diagnose=lambda s: {})
    lt = advance(data, lambda s: rhs_viscous_limit(s, base), cfg, 0.05, diagnose=lambda s: {})
    recs = entropy_records(pt.times, pt.states, lt.times, lt.states, base, "viscous")
    resid = max(abs(r.residual) for r in recs)
    report(5, "relative-entropy bookkeeping", [
        ("max |sum J - remainder| rel", worst, "<=", 1e-8),
        ("self-test |residual|", resid, "<=", 1e-6),
        ("seconds", time.perf_counter() - t0, "<=", 30.0),
        ("J-term seconds", t_jterms, "<=", 30.0),
    ])


def _sweep_checks(tag, scenario, params, lo, hi=None):
    t0 = time.perf_counter()
    res = run_sweep(scenario, SWEEP_EPS, params, sweep_data(), SWEEP_CFG, workers=WORKERS)
    checks = [(f"{tag}slope (theory {res.theoretical_exponent:g})", res.slope, ">=", lo)]
    if hi is not None:
        checks.append((f"{tag}slope", res.slope, "<=", hi))
    checks += [
        (f"{tag}failed runs", float(res.status != "completed"), "<=", 0),
        (f"{tag}sup E increase as eps falls", trend_violation(res.sup_entropy), "<=", 0.05),
        (f"{tag}seconds", time.perf_counter() - t0, "<=", 600.0),
    ]
    return checks


def test_criterion_06_viscous_rate():
    params = PhysParams(0.1, HProfile("one"), Coefficient("constant", 0.05), Coefficient("constant", 0.05))
    report(6, "viscous-limit rate, constant coefficients", _sweep_checks("", "viscous", params, 1.7))


def test_criterion_07_holder_rate():
    params = PhysParams(0.1, HProfile("one"), Coefficient("holder", 0.05, L=0.5, gamma=0.5),
                        Coefficient("constant", 0.05))
    report(7, "viscous-limit rate, Holder-1/2 viscosity", _sweep_checks("", "viscous", params, 0.7, 1.5))


def test_criterion_08_ideal_rate():
    checks = []
    for a, lo in ((1.0, 0.7), (2.0, 1.7)):
        params = PhysParams(0.1, HProfile("power", a), Coefficient("constant", 1.0), Coefficient("constant", 1.0))
        checks += _sweep_checks(f"h=eps^{a:g} ", "ideal", params, lo)
    report(8, "ideal-limit rates", checks)


def test_criterion_09_besov_toolkit():
    t0 = time.perf_counter()
    checks = []
    part = 0.0
    for n in (64, 128):
        dec = DyadicDecomposition(TorusGrid(n))
        r = np.linspace(0, dec.resolved_radius, 40001)
        total = chi(2 * r) + sum(phi(r / 2.0**j) for j in range(dec.jmax + 1))
        part = max(part, float(np.max(np.abs(total - 1))))
    checks.append(("partition residual", part, "<=", 1e-10))

    g = TorusGrid(64)
    dec = DyadicDecomposition(g)
    x1, x2 = g.x
    f = ScalarField.from_physical(g, np.cos(3 * x1) + 0 * x2)
    a = 0.5  # chi at radius 3/2, the midpoint of the bridge
    l2 = math.sqrt(2) * math.pi
    worst = 0.0
    for s in (-1.0, 0.5, 2.0):
        for r in (1.0, 2.0, np.inf):
            terms = np.array([2**s * a * l2, 4**s * (1 - a) * l2])
            expect = terms.max() if np.isinf(r) else np.sum(terms**r) ** (1 / r)
            worst = max(worst, abs(besov_norm(f, BesovIndex(s, 2, r), dec) / expect - 1))
    checks.append(("single-mode Besov rel error", worst, "<=", 1e-10))

    rng = np.random.default_rng(909)
    bony = 0.0
    for _ in range(50):
        u = random_modes(rng, g, dec.resolved_radius, k_lo=0)
        v = random_modes(rng, g, dec.resolved_radius, k_lo=0)
        parts = bony_decompose(u, v, dec)
        prod = ScalarField(g, g.fft(u.physical() * v.physical()) * g.dealias_mask)
        bony = max(bony, norm(parts[0] + parts[1] + parts[2] - prod) / norm(prod))
    checks.append(("Bony reconstruction rel error", bony, "<=", 1e-8))

    g128 = TorusGrid(128)
    lams = np.array([4.0, 8.0, 16.0])
    slopes = []
    for p, q, k in ((2, np.inf, 0), (2, np.inf, 1), (2, 4, 1), (2, 2, 1)):
        ratios = [bernstein_check(ScalarField(g128, phi(g128.kabs / lam).astype(complex)), p, q, k, lam=lam).ball_ratio
                  for lam in lams]
        slopes.append(np.polyfit(np.log(lams), np.log(ratios), 1)[0])
    ratios = []
    for lam in lams:
        band = (g128.kabs >= lam / 2) & (g128.kabs <= 2 * lam)
        c = np.zeros(g128.spectral_shape, dtype=complex)
        c[band] = rng.standard_normal(band.sum()) + 1j * rng.standard_normal(band.sum())
        ratios.append(bernstein_check(ScalarField(g128, g128.fft(g128.ifft(c))), 2, 2, 1, lam=lam).annulus_ratio)
    slopes.append(np.polyfit(np.log(lams), np.log(ratios), 1)[0])
    checks.append(("max |Bernstein log-slope|", float(np.max(np.abs(slopes))), "<=", 0.1))
    checks.append(("seconds", time.perf_counter() - t0, "<=", 60.0))
    report(9, "Besov toolkit", checks)


def test_criterion_10_commutator():
    t0 = time.perf_counter()
    g = TorusGrid(64)
    dec = DyadicDecomposition(g)
    rng = np.random.default_rng(1010)
    consts = []
    for idx in (BesovIndex(2, 2, 2), BesovIndex(3, 2, 1)):
        for _ in range(20):
            v = random_solenoidal_oracle(rng, g, 8)
            f = random_modes(rng, g, 8)
            lhs, rhs = commutator_check(v, f, idx, dec)
            consts.append(lhs / rhs)
    report(10, "commutator estimate", [
        ("max lhs/rhs", max(consts), "<=", 1e3),
        ("min lhs/rhs", min(consts), ">=", 0.0),
        ("seconds", time.perf_counter() - t0, "<=", 60.0),
    ])


def test_criterion_11_euler_cross_validation():
    t0 = time.perf_counter()
    g = TorusGrid(64)
    rng = np.random.default_rng(1111)
    params = PhysParams()
    worst = 0.0
    for _ in range(20):
        U = random_solenoidal_oracle(rng, g, 10)
        dU = rhs_ideal_original(LimitState(ScalarField.zeros(g), U, VectorField.zeros(g)), params).U
        oracle = vorticity_transport_oracle(U)
        worst = max(worst, norm(curl2(dU) - oracle) / norm(oracle))
    report(11, "Euler vs vorticity-stream", [
        ("max rel error", worst, "<=", 1e-8),
        ("seconds", time.perf_counter() - t0, "<=", 10.0),
    ])
