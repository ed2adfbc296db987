"""Command-line entry point: ``oceanswr <subcommand> --config FILE``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime
import os
import sys

import numpy as np

from . import symbols
from .config import RunConfig, config_hash, dump_config, parse_config
from .core import ConfigurationError, DomainError, GridSpec, SolverError, State, layout_for
from .mono import read_initial_csv, run, transport_convergence, write_field_csv, write_surface_csv
from .optimizer import beta_sensitivity, optimize_alpha, write_alpha_csv
from .swr import swr_run, write_errors_csv

SUBCOMMANDS = {
    "run-mono": ("mono",),
    "run-swr": ("swr-zero-test", "swr-step"),
    "optimize-alpha": ("optimize-alpha",),
    "analyze-symbols": ("analyze-symbols",),
    "convergence-study": ("convergence-study",),
}


def initial_state(cfg: RunConfig, grid: GridSpec) -> State:
    lay = layout_for("mono", grid)
    if cfg.initial == "csv":
        return read_initial_csv(cfg.initial_csv, grid)
    state = State.zeros(grid.nz + 1, lay.ncols, lay.ncells)
    if cfg.initial == "step":
        L = cfg.half_length
        band = (lay.x_cells >= cfg.step_start * L) & (lay.x_cells <= cfg.step_end * L)
        state.surface.zeta[band] = cfg.step_height
    return state


class _Writer:
    def __init__(self, out: str):
        self.out = out
        self.files: list[str] = []
        os.makedirs(out, exist_ok=True)

    def path(self, name: str) -> str:
        self.files.append(name)
        return os.path.join(self.out, name)


def _snapshot_steps(cfg: RunConfig, nt: int) -> list:
    steps = {0, nt}
    if cfg.snapshot_every > 0:
        steps.update(range(0, nt + 1, cfg.snapshot_every))
    return sorted(steps)


def _write_snapshots(w: _Writer, states, kind: str, prefix: str, cfg: RunConfig, grid: GridSpec) -> None:
    lay = layout_for(kind, grid)
    for k in _snapshot_steps(cfg, len(states) - 1):
        write_field_csv(states[k], lay, grid, w.path(f"{prefix}_k{k}.csv"))
        write_surface_csv(states[k], lay, w.path(f"{prefix}_zeta_k{k}.csv"))


def _run_mono(cfg, w):
    params, grid = cfg.physical(), cfg.grid()
    traj = run(initial_state(cfg, grid), params, grid)
    _write_snapshots(w, traj.states, "mono", cfg.run_id, cfg, grid)


def _run_swr(cfg, w):
    params, grid = cfg.physical(), cfg.grid()
    res = swr_run(cfg.swr(), initial_state(cfg, grid), params, grid)
    write_errors_csv(res.report, w.path("errors.csv"))
    _write_snapshots(w, res.reference.states, "mono", f"{cfg.run_id}_mono", cfg, grid)
    _write_snapshots(w, res.minus.states, "minus", f"{cfg.run_id}_minus", cfg, grid)
    _write_snapshots(w, res.plus.states, "plus", f"{cfg.run_id}_plus", cfg, grid)


def _run_optimize(cfg, w):
    grid, spec = cfg.grid(), cfg.sweep()
    results, betas = [], []
    for eps in cfg.epsilons:
        params = dataclasses.replace(cfg.physical(), epsilon=eps)
        res = optimize_alpha(spec, params, grid)
        results.append(res)
        if cfg.beta_sweep:
            betas.append(beta_sensitivity(spec, params, grid, alpha=res.alpha_opt))
    write_alpha_csv(results, w.path("alpha_sweep.csv"), w.path("alpha_opt.csv"))
    if betas:
        with open(w.path("beta_sweep.csv"), "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["epsilon", "factor", "mean_error"])
            for t in betas:
                for f, e in zip(t.factors, t.mean_error):
                    out.writerow([f"{t.epsilon:.17g}", f"{f:.17g}", f"{e:.17g}"])


def _run_symbols(cfg, w):
    params = cfg.physical()
    eps = np.asarray(cfg.epsilons, dtype=float)
    base = symbols.SymbolInput(cfg.s, cfg.eta, max(cfg.mode, 1), params)
    gaps = symbols.symbol_gap_series(base, "plus", eps)
    roots = symbols.root_gap_series(dataclasses.replace(base, n=0), eps)
    cols = [("root0", "0"), ("root_pp", (1, 1)), ("root_pm", (1, -1)), ("root_mp", (-1, 1)), ("root_mm", (-1, -1))]
    with open(w.path("symbols.csv"), "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["epsilon", "symbol_gap"] + [c for c, _ in cols])
        for i, e in enumerate(eps):
            out.writerow([f"{e:.17g}", f"{gaps[i]:.17g}"] + [f"{roots[k][i]:.17g}" for _, k in cols])
    if eps.size >= 2:
        with open(w.path("symbol_slopes.csv"), "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["quantity", "slope"])
            out.writerow(["symbol_gap", f"{symbols.loglog_slope(eps, gaps):.17g}"])
            for c, k in cols:
                out.writerow([c, f"{symbols.loglog_slope(eps, roots[k]):.17g}"])


def _run_convergence(cfg, w):
    rows = transport_convergence(cfg.physical(), levels=cfg.levels)
    with open(w.path("convergence.csv"), "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["h", "error", "observed_order"])
        for r in rows:
            out.writerow([f"{r.h:.17g}", f"{r.error:.17g}", "" if np.isnan(r.observed_order) else
                          f"{r.observed_order:.17g}"])


DISPATCH = {
    "mono": _run_mono,
    "swr-zero-test": _run_swr,
    "swr-step": _run_swr,
    "optimize-alpha": _run_optimize,
    "analyze-symbols": _run_symbols,
    "convergence-study": _run_convergence,
}


def run_experiment(cfg: RunConfig) -> list:
    """Run the configured experiment, write its CSVs and ``manifest.txt``; returns the file list."""
    w = _Writer(cfg.out)
    DISPATCH[cfg.experiment](cfg, w)
    with open(os.path.join(cfg.out, "manifest.txt"), "w") as fh:
        fh.write(f"config_sha256 = {config_hash(cfg)}\n")
        fh.write(f"seed = {cfg.seed}\n")
        fh.write(f"experiment = {cfg.experiment}\n")
        for name in w.files:
            fh.write(f"file = {name}\n")
        fh.write(f"created = {datetime.datetime.now(datetime.timezone.utc).isoformat()}\n")
    return list(w.files)


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in an unsigned 64-bit integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oceanswr", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in list(SUBCOMMANDS) + ["dump-config"]:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="flat key=value file")
        if name != "dump-config":
            sp.add_argument("--out", help="output directory (overrides 'out')")
            sp.add_argument("--seed", type=_u64, help="random seed (overrides 'seed')")
            sp.add_argument("--threads", type=int, help="worker threads (overrides 'threads')")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.command == "dump-config":
            sys.stdout.write(dump_config(cfg))
            return 0
        if cfg.experiment not in SUBCOMMANDS[args.command]:
            raise ConfigurationError(
                f"{args.command} cannot run experiment {cfg.experiment!r} (expects {SUBCOMMANDS[args.command]})")
        changes = {k: v for k, v in (("out", args.out), ("seed", args.seed), ("threads", args.threads))
                   if v is not None}
        if changes:
            cfg = dataclasses.replace(cfg, **changes)
        files = run_experiment(cfg)
    except (ConfigurationError, DomainError, SolverError, OSError) as exc:
        print(f"oceanswr: error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(files)} files to {cfg.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
