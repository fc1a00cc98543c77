"""Command-line front end: ``python -m debyewave {run,probe,norms,convert}``.

Exit status is 0 on success, 1 for invalid input (bad flags, config errors,
unreadable files) and 2 when a run aborts on a non-finite state.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, build_initial_data, config_hash, default_out_dir, load_config
from .grid import read_snapshot, write_snapshot
from .heat import smoothing_probe
from .littlewood_paley import block_profile, build_filter_bank, random_bandlimited
from .mild import _probe, estimate_constants
from .output import (RunManifest, diagnostics_plot_data, read_diagnostics, snapshot_plot_data,
                     write_diagnostics)
from .simulation import SimulationError, run
from .wave import strichartz_energy_probe

__all__ = ["main", "run_command", "UsageError"]


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="debyewave", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="integrate a configuration and write outputs")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="output directory (default: config output.dir or $DEBYE_OUT_DIR)")
    r.add_argument("--stride", type=int, help="snapshot stride in steps (overrides the config)")

    pr = sub.add_parser("probe", help="empirical constants and estimate ratios")
    kind = pr.add_mutually_exclusive_group(required=True)
    kind.add_argument("--constants", action="store_true")
    kind.add_argument("--smoothing", action="store_true")
    kind.add_argument("--strichartz", action="store_true")
    pr.add_argument("--config", required=True)
    pr.add_argument("--trials", type=int, default=16)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--sigma", type=float, default=0.0, help="regularity index for --smoothing")
    pr.add_argument("--out", help="report file (default: stdout)")

    n = sub.add_parser("norms", help="dyadic block profile of a snapshot")
    n.add_argument("--snapshot", required=True)
    n.add_argument("--s", type=float, default=0.0)
    n.add_argument("--out")

    c = sub.add_parser("convert", help="two-column plot data from a snapshot or diagnostics")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--snapshot")
    src.add_argument("--diagnostics")
    c.add_argument("--column", default="value")
    c.add_argument("--out")
    return p


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _cmd_run(args) -> None:
    cfg = load_config(args.config)
    stride = args.stride if args.stride is not None else cfg.output.stride
    if stride < 1:
        raise UsageError("--stride must be >= 1")
    out = Path(args.out or cfg.output.directory or default_out_dir())
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config_hash(cfg), __version__, _now(), seed=cfg.seed)
    u0, V0, V1 = build_initial_data(cfg)
    result = run(u0, V0, V1, cfg.solver)

    outputs = []
    for j, rows in enumerate(result.diagnostics, start=1):
        path = out / ("diagnostics.csv" if j == 1 else f"diagnostics_{j}.csv")
        write_diagnostics(path, rows)
        outputs.append(path)
    if cfg.output.snapshots:
        nt = len(result.V)
        frames = sorted(set(range(0, nt, stride)) | {nt - 1})
        for k in frames:
            for j, u in enumerate(result.u, start=1):
                path = out / f"u{j}_{k:06d}.dbw1"
                write_snapshot(path, u.frame(k))
                outputs.append(path)
            path = out / f"V_{k:06d}.dbw1"
            write_snapshot(path, result.V.frame(k))
            outputs.append(path)
    manifest.finished = _now()
    manifest.outputs = [str(p) for p in outputs]
    (out / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")


def _cmd_probe(args) -> str:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    cfg = load_config(args.config)
    solver = cfg.solver
    g = solver.grid
    u0, V0, V1 = build_initial_data(cfg)
    if args.constants:
        report = estimate_constants(solver, args.trials, args.seed, V0, V1, u0[0])
        return report.to_text()
    rng = np.random.default_rng(args.seed)
    bank = build_filter_bank(g)
    if args.smoothing:
        lines = [f"sigma={args.sigma!r}", f"T={solver.T!r}", f"trials={args.trials}"]
        for q, name in ((1, "q1"), (2, "q2"), (np.inf, "qinf")):
            best = 0.0
            sub = np.random.default_rng(rng.integers(2**63))
            for _ in range(args.trials):
                best = max(best, smoothing_probe(random_bandlimited(g, sub), args.sigma,
                                                 solver.T, q, bank))
            lines.append(f"max_ratio_{name}={best:.17g}")
        return "\n".join(lines) + "\n"
    s = g.dim / 2 - 1
    best = 0.0
    for _ in range(args.trials):
        u = _probe(solver, rng)
        best = max(best, strichartz_energy_probe(u, random_bandlimited(g, rng),
                                                 random_bandlimited(g, rng), s, bank))
    return f"s={s!r}\nT={solver.T!r}\ntrials={args.trials}\nmax_ratio={best:.17g}\n"


def _cmd_convert(args) -> str:
    if args.snapshot:
        return snapshot_plot_data(read_snapshot(args.snapshot), args.column)
    return diagnostics_plot_data(read_diagnostics(args.diagnostics), args.column)


def run_command(argv=None) -> int:
    """Execute one subcommand and return the process exit status."""
    try:
        args = _build_parser().parse_args(argv)
        if args.command == "run":
            _cmd_run(args)
        elif args.command == "probe":
            _emit(_cmd_probe(args), args.out)
        elif args.command == "norms":
            f = read_snapshot(args.snapshot)
            _emit(block_profile(f, args.s, build_filter_bank(f.grid)).to_csv(), args.out)
        else:
            _emit(_cmd_convert(args), args.out)
    except SimulationError as exc:
        print(f"debyewave: run aborted: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"debyewave: invalid configuration:\n{exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"debyewave: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_command())
