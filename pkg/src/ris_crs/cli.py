"""Command-line entry points for the experiment harness.

Subcommands: sweep-snr, sweep-n, trace, oracle-check. All take --config
(flat key = value file), --out, --seed, --trials; sweeps add their ranges
(--snr start:step:stop, --n comma list). Exit code 0 on success.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from .ao import Strategy, run_ao
from .channel import ScenarioConfig, build_channel_set
from .harness import (SweepSpec, run_convergence_trace,
                      run_ris_elements_sweep, run_snr_sweep)
from .oracle import GridSpec, grid_search


def _parse_snr_range(text: str) -> tuple[float, ...]:
    try:
        start, step, stop = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            "expected start:step:stop, e.g. 0:5:30") from exc
    if step <= 0:
        raise argparse.ArgumentTypeError("step must be positive")
    values = []
    v = start
    while v <= stop + 1e-9:
        values.append(round(v, 9))
        v += step
    return tuple(values)


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            "expected a comma-separated integer list") from exc


def _parse_strategies(text: str) -> tuple[Strategy, ...]:
    try:
        return tuple(Strategy(v.strip()) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"unknown strategy in {text!r}; choices: "
            f"{', '.join(s.value for s in Strategy)}") from exc


def _load_config(args) -> ScenarioConfig:
    cfg = (ScenarioConfig.from_file(args.config) if args.config
           else ScenarioConfig())
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _add_common(p: argparse.ArgumentParser, with_out: bool = True) -> None:
    p.add_argument("--config", help="scenario config file (key = value)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--starts", type=int, default=1,
                   help="AO restarts per run, best kept")
    p.add_argument("--strategies", type=_parse_strategies,
                   default=tuple(Strategy))
    if with_out:
        p.add_argument("--out", required=True, help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ris-crs",
        description="Max-min rate experiments for RIS-aided cooperative "
                    "rate splitting")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep-snr", help="max-min rate versus transmit SNR")
    _add_common(p)
    p.add_argument("--snr", type=_parse_snr_range, default=(0, 5, 10, 15, 20,
                                                            25, 30),
                   metavar="START:STEP:STOP")

    p = sub.add_parser("sweep-n", help="max-min rate versus RIS elements")
    _add_common(p)
    p.add_argument("--n", type=_parse_int_list, default=(2, 4, 6, 8),
                   metavar="N1,N2,...")

    p = sub.add_parser("trace", help="per-iteration convergence trace")
    _add_common(p)

    p = sub.add_parser("oracle-check",
                       help="compare the AO result against a toy-scale grid")
    _add_common(p, with_out=False)
    p.add_argument("--n-ris", type=int, default=1, choices=(0, 1, 2))
    p.add_argument("--phase-points", type=int, default=16)
    p.add_argument("--power-grid", type=int, default=11)
    p.add_argument("--slack", type=float, default=0.05,
                   help="allowed shortfall versus the grid, bits/s/Hz")
    return parser


def _cmd_sweep_snr(args) -> int:
    cfg = _load_config(args)
    spec = SweepSpec(kind="snr_sweep", snr_values_db=args.snr,
                     trials=args.trials, strategies=args.strategies,
                     n_starts=args.starts, out_path=args.out)
    rows = run_snr_sweep(cfg, spec)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_sweep_n(args) -> int:
    cfg = _load_config(args)
    spec = SweepSpec(kind="ris_elements_sweep", n_values=args.n,
                     trials=args.trials, strategies=args.strategies,
                     n_starts=args.starts, out_path=args.out)
    rows = run_ris_elements_sweep(cfg, spec)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_trace(args) -> int:
    cfg = _load_config(args)
    spec = SweepSpec(kind="convergence_trace", trials=1,
                     strategies=args.strategies, n_starts=args.starts,
                     out_path=args.out)
    rows = run_convergence_trace(cfg, spec)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_oracle_check(args) -> int:
    cfg = _load_config(args)
    cfg = replace(cfg, nt=1, n_ris=args.n_ris)
    spec = GridSpec(phase_points=args.phase_points,
                    power_grid=args.power_grid)
    hits = 0
    for trial in range(args.trials):
        seed = cfg.seed + trial
        ch = build_channel_set(cfg, seed)
        _, t_grid = grid_search(ch, cfg, spec)
        sol = run_ao(ch, Strategy.RIS_CRS, cfg,
                     rng=np.random.SeedSequence((seed, 0)),
                     n_starts=args.starts)
        ok = sol.report.min_rate >= t_grid - args.slack
        hits += ok
        print(f"seed {seed}: algorithm {sol.report.min_rate:.6g} "
              f"grid {t_grid:.6g} {'ok' if ok else 'SHORT'}")
    print(f"{hits}/{args.trials} within {args.slack} bits/s/Hz of the grid")
    return 0 if hits == args.trials else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "sweep-snr": _cmd_sweep_snr,
        "sweep-n": _cmd_sweep_n,
        "trace": _cmd_trace,
        "oracle-check": _cmd_oracle_check,
    }
    try:
        return handlers[args.command](args)
    except Exception as exc:  # diagnostic line + nonzero exit, per contract
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
