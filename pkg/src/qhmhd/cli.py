"""Command-line entry point: run, sweep, besov and check subcommands."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from .checks import run_checks
from .config import ExperimentConfig, generate_initial_data, load_config, schema_help
from .entropy import entropy_records, limit_rhs_for, run_sweep
from .errors import ConfigError, QHMHDError
from .integrate import StepperConfig, advance
from .io import fmt, save_checkpoint, trace_rows, write_json, write_trace_csv
from .littlewood_paley import BesovIndex, DyadicDecomposition, besov_weighted_blocks, block_norms, sequence_norm
from .mhd import (
    PrimitiveState,
    diagnostics,
    limit_viscosities,
    rhs_ideal_elsasser,
    rhs_ideal_original,
    rhs_primitive,
    rhs_viscous_limit,
    to_elsasser,
)
from .spectral import TorusGrid

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CHECK = 0, 1, 2, 3


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.resolution is not None:
        try:
            TorusGrid(args.resolution)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        changes["n"] = args.resolution
    if args.out is not None:
        changes["out_dir"] = args.out
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _stepper(cfg: ExperimentConfig, keep_states: bool = False) -> StepperConfig:
    return StepperConfig(cfg.dt, cfg.t_end, cfg.cfl, sample_dt=cfg.sample_dt, keep_states=keep_states)


def _scenario(cfg: ExperimentConfig) -> str:
    return "viscous" if cfg.params.h.family == "one" else "ideal"


def _max_coef(params, state) -> float:
    rho = 1.0 + params.eps * state.r.physical()
    return float(max(np.max(params.nu(rho)), np.max(params.mu(rho))))


def cmd_run(cfg: ExperimentConfig, workers: int = 1) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = TorusGrid(cfg.n)
    data = generate_initial_data(cfg.initial, grid, cfg.seed)
    p = cfg.params
    records = None
    if cfg.system == "primitive":
        state = PrimitiveState(data.R, data.U, data.B)
        diff = 1.5 * p.h_eps * _max_coef(p, state)
        trace = advance(state, lambda s: rhs_primitive(s, p), _stepper(cfg, True), diff,
                        diagnose=lambda s: diagnostics(s, p.eps), raise_on_failure=False)
        if trace.status == "completed":
            scen = _scenario(cfg)
            limit_rhs = limit_rhs_for(scen)
            nu_l, mu_l = limit_viscosities(p, scen)
            lt = advance(data, lambda s: limit_rhs(s, p), _stepper(cfg, True), max(nu_l, mu_l),
                         raise_on_failure=False)
            if lt.status == "completed":
                records = entropy_records(trace.times, trace.states, lt.times, lt.states, p, scen)
    else:
        if cfg.system == "elsasser":
            state, rhs, diff = to_elsasser(data), rhs_ideal_elsasser, 0.0
        elif cfg.system == "viscous-limit":
            state, rhs, diff = data, rhs_viscous_limit, max(limit_viscosities(p, "viscous"))
        else:
            state, rhs, diff = data, rhs_ideal_original, 0.0
        trace = advance(state, lambda s: rhs(s, p), _stepper(cfg, True), diff, raise_on_failure=False)

    write_trace_csv(out / "trace.csv", trace_rows(trace, records))
    final = trace.diagnostics[-1] if trace.diagnostics else {}
    write_json(out / "summary.json", {
        "system": cfg.system,
        "n": cfg.n,
        "seed": cfg.seed,
        "status": trace.status,
        "message": trace.message,
        "t_last": trace.t_last,
        "steps": trace.steps,
        "rejections": trace.rejections,
        "bkm_integral": trace.bkm_integral[-1] if trace.bkm_integral else None,
        "lifespan_hint": trace.lifespan_hint,
        "lifespan_ratio": trace.t_last / trace.lifespan_hint if np.isfinite(trace.lifespan_hint) else None,
        "final_diagnostics": final,
    })
    if cfg.checkpoint and trace.states:
        save_checkpoint(out / "checkpoint.bin", trace.states[-1], cfg.system, trace.t_last, cfg.seed)
    print(f"run {cfg.system}: status={trace.status} t={trace.t_last:.6g} -> {out}")
    return EXIT_OK if trace.status == "completed" else EXIT_NUMERICAL


def cmd_sweep(cfg: ExperimentConfig, workers: int = 1) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = TorusGrid(cfg.n)
    data = None if cfg.scenario == "synthetic" else generate_initial_data(cfg.initial, grid, cfg.seed)
    try:
        res = run_sweep(cfg.scenario, cfg.eps_list, cfg.params, data,
                        StepperConfig(cfg.dt, cfg.t_end, cfg.cfl, sample_dt=cfg.sample_dt),
                        workers=workers, synthetic_exponent=cfg.synthetic_exponent, keep_records=True)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    for eps, recs in res.records.items():
        rows = []
        for r in recs:
            row = {"t": r.t, "energy": np.nan, "cross_helicity": np.nan, "bkm_integral": np.nan,
                   "entropy": r.entropy, "dissipation": r.dissipation, "residual": r.residual}
            row.update(dict(zip(("J1", "J2", "J3", "J4", "J5", "J6"), r.jterms.as_tuple())))
            rows.append(row)
        write_trace_csv(out / f"trace_eps_{eps:.6g}.csv", rows)
    write_json(out / "sweep.json", res.summary())
    with (out / "sweep.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eps", "sup_entropy", "bound"])
        bounds = res.bounds or [np.nan] * len(res.eps_values)
        for e, s, b in zip(res.eps_values, res.sup_entropy, bounds):
            w.writerow([fmt(e), fmt(s), fmt(b)])
    print(f"sweep {res.scenario}: slope={res.slope:.6g} theory={res.theoretical_exponent:.6g} "
          f"pass={res.passed} status={res.status}")
    return EXIT_OK if res.status == "completed" else EXIT_NUMERICAL


def cmd_besov(cfg: ExperimentConfig, workers: int = 1) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = TorusGrid(cfg.n)
    data = generate_initial_data(cfg.initial, grid, cfg.seed)
    s, p, r, name = cfg.besov
    try:
        idx = BesovIndex(s, p, r)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    f = {"R": data.R, "U": data.U, "B": data.B}[name]
    dec = DyadicDecomposition(grid)
    raw = block_norms(f, dec, p)
    weighted = besov_weighted_blocks(f.coeffs, idx, dec)
    lines = ["j,block_norm,weighted"]
    lines += [f"{j},{fmt(a)},{fmt(b)}" for j, a, b in zip(dec.indices, raw, weighted)]
    lines.append(f"total,,{fmt(sequence_norm(weighted, r))}")
    text = "\n".join(lines) + "\n"
    (out / "besov.csv").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_check(cfg: ExperimentConfig | None = None, workers: int = 1) -> int:
    results = run_checks()
    for res in results:
        print(res.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "besov": cmd_besov, "check": cmd_check}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qhmhd",
        description="Pseudo-spectral rotating MHD solvers, singular-limit rate experiments and Besov tools.",
        epilog="configuration keys (INI sections):\n" + schema_help()
        + "\n\nexit codes: 0 success, 1 config error, 2 numerical failure, 3 property-suite failure",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("run", "integrate one system and write trace.csv, summary.json and a checkpoint"),
        ("sweep", "eps sweep: per-eps traces, sweep.json and sweep.csv"),
        ("besov", "per-block norms of the initial data as CSV"),
        ("check", "run the built-in property suite"),
    ):
        sp = sub.add_parser(name, help=helptext, description=helptext)
        sp.add_argument("--config", type=Path, required=name != "check", help="INI configuration file")
        sp.add_argument("--out", help="output directory (overrides [output] dir)")
        sp.add_argument("--seed", type=int, help="override [experiment] seed")
        sp.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="worker processes for sweeps")
        sp.add_argument("--resolution", type=int, help="override [grid] n")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check" and args.config is None:
            cfg = None
        else:
            cfg = _apply_overrides(load_config(args.config), args)
        return COMMANDS[args.command](cfg, max(1, args.workers))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QHMHDError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
