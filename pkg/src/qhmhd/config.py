"""Experiment configuration (sectioned INI text) and seeded initial data."""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .mhd import Coefficient, HProfile, LimitState, PhysParams
from .spectral import ScalarField, TorusGrid, VectorField, leray_project, norm

SYSTEMS = ("primitive", "viscous-limit", "ideal-limit", "elsasser")
INITIAL_KINDS = ("random", "taylor-green", "shear", "zero")

# section -> key -> (type, default, help)
SCHEMA: dict[str, dict[str, tuple]] = {
    "experiment": {
        "system": (str, "primitive", "primitive | viscous-limit | ideal-limit | elsasser"),
        "seed": (int, None, "RNG seed; mandatory for random initial data"),
    },
    "grid": {"n": (int, 64, "points per axis (even, >= 8)")},
    "time": {
        "dt": (float, 1e-3, "base time step"),
        "cfl": (float, 0.5, "CFL safety factor in (0, 1]"),
        "t_end": (float, 1.0, "final time"),
        "sample_dt": (float, 0.05, "spacing of trace samples"),
    },
    "params": {
        "eps": (float, 0.1, "Rossby number"),
        "h_family": (str, "one", "one | power | zero"),
        "h_exponent": (float, 1.0, "a in h(eps) = eps^a"),
        "nu_family": (str, "constant", "constant | affine | holder"),
        "nu_base": (float, 0.05, "nu at rho = 1"),
        "nu_L": (float, 0.0, "slope / Holder constant of nu"),
        "nu_gamma": (float, 1.0, "Holder exponent of nu"),
        "nu_floor": (float, None, "lower bound of nu (default nu_base)"),
        "mu_family": (str, "constant", "constant | affine | holder"),
        "mu_base": (float, 0.05, "mu at rho = 1"),
        "mu_L": (float, 0.0, "slope / Holder constant of mu"),
        "mu_gamma": (float, 1.0, "Holder exponent of mu"),
        "mu_floor": (float, None, "lower bound of mu (default mu_base)"),
    },
    "initial": {
        "kind": (str, "random", "random | taylor-green | shear | zero"),
        "k_lo": (float, 1.0, "lower radial wavenumber of the random band"),
        "k_hi": (float, 3.0, "upper radial wavenumber of the random band"),
        "u_amp": (float, 0.5, "sup norm of the velocity"),
        "b_amp": (float, 0.5, "sup norm of the magnetic field"),
        "r_amp": (float, 0.5, "sup norm of the density oscillation"),
    },
    "sweep": {
        "scenario": (str, "viscous", "viscous | ideal | synthetic"),
        "eps_list": (str, "0.1,0.05,0.025,0.0125", "comma-separated, strictly decreasing"),
        "synthetic_exponent": (float, 2.0, "exponent injected by the synthetic scenario"),
    },
    "besov": {
        "s": (float, 1.0, "regularity index"),
        "p": (float, 2.0, "Lebesgue exponent (inf allowed)"),
        "r": (float, 2.0, "summation exponent (inf allowed)"),
        "field": (str, "U", "R | U | B"),
    },
    "output": {
        "dir": (str, "out", "output directory (overridden by --out)"),
        "checkpoint": (str, "yes", "write a final-state checkpoint: yes | no"),
    },
}


def schema_help() -> str:
    lines = []
    for sec, keys in SCHEMA.items():
        lines.append(f"[{sec}]")
        for key, (_, default, text) in keys.items():
            lines.append(f"  {key} = {default!s:<22} {text}")
    return "\n".join(lines)


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "random"
    k_lo: float = 1.0
    k_hi: float = 3.0
    u_amp: float = 0.5
    b_amp: float = 0.5
    r_amp: float = 0.5


@dataclass
class ExperimentConfig:
    system: str = "primitive"
    seed: int | None = None
    n: int = 64
    dt: float = 1e-3
    cfl: float = 0.5
    t_end: float = 1.0
    sample_dt: float = 0.05
    params: PhysParams = field(default_factory=PhysParams)
    initial: InitialSpec = field(default_factory=InitialSpec)
    scenario: str = "viscous"
    eps_list: tuple = (0.1, 0.05, 0.025, 0.0125)
    synthetic_exponent: float = 2.0
    besov: tuple = (1.0, 2.0, 2.0, "U")
    out_dir: str = "out"
    checkpoint: bool = True


def _parse_value(kind, raw: str, where: str):
    raw = raw.strip()
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r} as {kind.__name__}") from None
    return raw


def _line_numbers(text: str) -> dict:
    where, sec = {}, None
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            sec = m.group(1).strip()
            where.setdefault((sec, None), no)
        elif s and not s.startswith(("#", ";")) and "=" in s and sec is not None:
            where.setdefault((sec, s.split("=", 1)[0].strip()), no)
    return where


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    lines = _line_numbers(text)
    vals = {sec: {k: d for k, (_, d, _) in keys.items()} for sec, keys in SCHEMA.items()}
    for sec in parser.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"{source}:{lines.get((sec, None), '?')}: unknown section [{sec}]")
        for key, raw in parser.items(sec):
            no = lines.get((sec, key), "?")
            where = f"{source}:{no}: [{sec}] {key}"
            if key not in SCHEMA[sec]:
                raise ConfigError(f"{where}: unknown key")
            vals[sec][key] = _parse_value(SCHEMA[sec][key][0], raw, where)
    return _build(vals, source)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, str(path))


def _coef(p: dict, prefix: str) -> Coefficient:
    return Coefficient(
        p[f"{prefix}_family"], p[f"{prefix}_base"], p[f"{prefix}_L"], p[f"{prefix}_gamma"], p[f"{prefix}_floor"]
    )


def _build(v: dict, source: str) -> ExperimentConfig:
    ex, gr, tm, pa, ini, sw, bs, out = (
        v[s] for s in ("experiment", "grid", "time", "params", "initial", "sweep", "besov", "output")
    )
    if ex["system"] not in SYSTEMS:
        raise ConfigError(f"{source}: [experiment] system must be one of {SYSTEMS}")
    if ini["kind"] not in INITIAL_KINDS:
        raise ConfigError(f"{source}: [initial] kind must be one of {INITIAL_KINDS}")
    try:
        params = PhysParams(pa["eps"], HProfile(pa["h_family"], pa["h_exponent"]), _coef(pa, "nu"), _coef(pa, "mu"))
        TorusGrid(gr["n"])
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if not tm["dt"] > 0 or not (0 < tm["cfl"] <= 1) or tm["t_end"] < 0 or not tm["sample_dt"] > 0:
        raise ConfigError(f"{source}: [time] needs dt > 0, 0 < cfl <= 1, t_end >= 0, sample_dt > 0")
    try:
        eps_list = tuple(float(x) for x in sw["eps_list"].split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"{source}: [sweep] eps_list must be comma-separated numbers") from None
    if sw["scenario"] not in ("viscous", "ideal", "synthetic"):
        raise ConfigError(f"{source}: [sweep] scenario must be viscous, ideal or synthetic")
    if bs["field"] not in ("R", "U", "B"):
        raise ConfigError(f"{source}: [besov] field must be R, U or B")
    if out["checkpoint"] not in ("yes", "no"):
        raise ConfigError(f"{source}: [output] checkpoint must be yes or no")
    return ExperimentConfig(
        system=ex["system"],
        seed=ex["seed"],
        n=gr["n"],
        dt=tm["dt"],
        cfl=tm["cfl"],
        t_end=tm["t_end"],
        sample_dt=tm["sample_dt"],
        params=params,
        initial=InitialSpec(**ini),
        scenario=sw["scenario"],
        eps_list=eps_list,
        synthetic_exponent=sw["synthetic_exponent"],
        besov=(bs["s"], bs["p"], bs["r"], bs["field"]),
        out_dir=out["dir"],
        checkpoint=out["checkpoint"] == "yes",
    )


# --- initial data -----------------------------------------------------------


def _band_mask(grid: TorusGrid, k_lo: float, k_hi: float) -> np.ndarray:
    return (grid.kabs >= k_lo) & (grid.kabs <= k_hi)


def _random_coeffs(rng, grid: TorusGrid, mask: np.ndarray, ncomp: int) -> np.ndarray:
    c = np.zeros((ncomp,) + grid.spectral_shape, dtype=complex)
    m = int(mask.sum())
    c[:, mask] = rng.standard_normal((ncomp, m)) + 1j * rng.standard_normal((ncomp, m))
    # round trip through physical space enforces Hermitian symmetry of the k2 = 0 column
    return grid.fft(grid.ifft(c))


def _rescale(f, amp: float):
    top = norm(f, np.inf)
    if amp == 0 or top == 0:
        return type(f).zeros(f.grid)
    return f * (amp / top)


def random_solenoidal(rng, grid: TorusGrid, k_lo: float, k_hi: float, amp: float) -> VectorField:
    v = leray_project(VectorField(grid, _random_coeffs(rng, grid, _band_mask(grid, k_lo, k_hi), 2)))
    return _rescale(v, amp)


def random_scalar(rng, grid: TorusGrid, k_lo: float, k_hi: float, amp: float) -> ScalarField:
    f = ScalarField(grid, _random_coeffs(rng, grid, _band_mask(grid, k_lo, k_hi), 1)[0])
    return _rescale(f, amp)


def generate_initial_data(spec: InitialSpec, grid: TorusGrid, seed: int | None) -> LimitState:
    """(R, U, B) initial data; primitive runs use it as well-prepared (r, u, b)."""
    if spec.kind == "zero":
        z = VectorField.zeros(grid)
        return LimitState(ScalarField.zeros(grid), z, z)
    if spec.kind == "taylor-green":
        x1, x2 = grid.x
        U = VectorField.from_physical(grid, np.sin(x1) * np.cos(x2), -np.cos(x1) * np.sin(x2))
        return LimitState(ScalarField.zeros(grid), spec.u_amp * U, VectorField.zeros(grid))
    if spec.kind == "shear":
        x1, x2 = grid.x
        U = VectorField.from_physical(grid, spec.u_amp * np.sin(x2), 0.0)
        B = VectorField.from_physical(grid, 0.0, spec.b_amp * np.sin(x1))
        R = ScalarField.from_physical(grid, spec.r_amp * np.cos(x1))
        return LimitState(R, U, B)
    if spec.k_lo < 0 or spec.k_hi < spec.k_lo:
        raise ConfigError(f"invalid band [{spec.k_lo}, {spec.k_hi}]")
    if spec.k_hi > grid.dealias_cutoff:
        raise ConfigError(f"band upper edge {spec.k_hi} exceeds n/3 = {grid.dealias_cutoff:.3f}")
    if spec.k_lo < 1:
        raise ConfigError("random band must exclude the zero mode (k_lo >= 1)")
    if seed is None:
        raise ConfigError("random initial data needs a seed")
    if not _band_mask(grid, spec.k_lo, spec.k_hi).any():
        raise ConfigError(f"band [{spec.k_lo}, {spec.k_hi}] contains no lattice modes")
    rng = np.random.default_rng(seed)
    U = random_solenoidal(rng, grid, spec.k_lo, spec.k_hi, spec.u_amp)
    B = random_solenoidal(rng, grid, spec.k_lo, spec.k_hi, spec.b_amp)
    R = random_scalar(rng, grid, spec.k_lo, spec.k_hi, spec.r_amp)
    return LimitState(R, U, B)
