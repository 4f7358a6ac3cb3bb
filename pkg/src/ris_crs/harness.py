"""Monte Carlo experiment driver: paired sweeps over SNR or RIS size and
per-iteration convergence traces, written as CSV.

Pairing: all strategies at one (parameter, trial) point share the identical
channel realization, drawn from seed + trial. Each AO run gets its own
deterministic phase-init stream derived from (trial seed, strategy index),
so re-running a sweep reproduces the same numbers; only the wall_ms column
is timing and varies between runs.
"""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .ao import Solution, Strategy, run_ao
from .channel import ScenarioConfig, build_channel_set

SWEEP_HEADER = ("strategy", "snr_db", "n_ris", "nt", "trial", "seed",
                "min_rate", "iters_outer", "wall_ms")
TRACE_HEADER = ("strategy", "snr_db", "n_ris", "nt", "trial", "seed",
                "iteration", "t")

ALL_STRATEGIES = tuple(Strategy)


@dataclass
class SweepSpec:
    """What to sweep and where to write it."""

    kind: str = "snr_sweep"  # snr_sweep | ris_elements_sweep | convergence_trace
    snr_values_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    n_values: tuple[int, ...] = (2, 4, 6, 8)
    trials: int = 25
    strategies: tuple[Strategy, ...] = ALL_STRATEGIES
    n_starts: int = 1
    out_path: str | None = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.strategies:
            raise ValueError("strategies must be non-empty")
        if self.kind == "snr_sweep" and not self.snr_values_db:
            raise ValueError("snr_values_db must be non-empty")
        if self.kind == "ris_elements_sweep" and not self.n_values:
            raise ValueError("n_values must be non-empty")


@dataclass
class ResultRow:
    strategy: str
    snr_db: float
    n_ris: int
    nt: int
    trial: int
    seed: int
    min_rate: float
    iters_outer: int
    wall_ms: float

    def astuple(self):
        return (self.strategy, _fmt(self.snr_db), self.n_ris, self.nt,
                self.trial, self.seed, _fmt(self.min_rate), self.iters_outer,
                _fmt(self.wall_ms))


def _fmt(x: float) -> str:
    return repr(float(x))


def _run_one(ch, strategy, cfg, trial_seed, strat_index, n_starts) -> Solution:
    rng = np.random.SeedSequence((trial_seed, strat_index))
    return run_ao(ch, strategy, cfg, rng=rng, n_starts=n_starts)


def run_snr_sweep(cfg: ScenarioConfig, spec: SweepSpec) -> list[ResultRow]:
    """One row per (strategy, SNR, trial); Pt is set so Pt/sigma^2 matches
    the SNR point and Pr tracks Pt."""
    rows = []
    for snr in spec.snr_values_db:
        cfg_s = cfg.with_snr_db(snr)
        for trial in range(spec.trials):
            trial_seed = cfg.seed + trial
            ch = build_channel_set(cfg_s, trial_seed)
            for si, strat in enumerate(spec.strategies):
                t0 = time.perf_counter()
                sol = _run_one(ch, strat, cfg_s, trial_seed, si,
                               spec.n_starts)
                wall = (time.perf_counter() - t0) * 1e3
                rows.append(ResultRow(
                    strategy=strat.value, snr_db=snr, n_ris=cfg_s.n_ris,
                    nt=cfg_s.nt, trial=trial, seed=trial_seed,
                    min_rate=sol.report.min_rate,
                    iters_outer=len(sol.ao_trace) - 1, wall_ms=wall))
    rows.sort(key=lambda r: (r.strategy, r.snr_db, r.n_ris, r.trial))
    _write_csv(spec.out_path, SWEEP_HEADER, [r.astuple() for r in rows])
    return rows


def run_ris_elements_sweep(cfg: ScenarioConfig,
                           spec: SweepSpec) -> list[ResultRow]:
    """As run_snr_sweep, with the element count varying at the config's
    operating SNR."""
    rows = []
    snr = cfg.snr_db
    for n in spec.n_values:
        cfg_n = replace(cfg, n_ris=int(n))
        for trial in range(spec.trials):
            trial_seed = cfg.seed + trial
            ch = build_channel_set(cfg_n, trial_seed)
            for si, strat in enumerate(spec.strategies):
                t0 = time.perf_counter()
                sol = _run_one(ch, strat, cfg_n, trial_seed, si,
                               spec.n_starts)
                wall = (time.perf_counter() - t0) * 1e3
                rows.append(ResultRow(
                    strategy=strat.value, snr_db=snr, n_ris=cfg_n.n_ris,
                    nt=cfg_n.nt, trial=trial, seed=trial_seed,
                    min_rate=sol.report.min_rate,
                    iters_outer=len(sol.ao_trace) - 1, wall_ms=wall))
    rows.sort(key=lambda r: (r.strategy, r.snr_db, r.n_ris, r.trial))
    _write_csv(spec.out_path, SWEEP_HEADER, [r.astuple() for r in rows])
    return rows


def run_convergence_trace(cfg: ScenarioConfig, spec: SweepSpec) -> list[tuple]:
    """Per-outer-iteration exact objective for each strategy on a single
    channel realization."""
    rows = []
    trial_seed = cfg.seed
    ch = build_channel_set(cfg, trial_seed)
    for si, strat in enumerate(spec.strategies):
        sol = _run_one(ch, strat, cfg, trial_seed, si, spec.n_starts)
        for it, t in enumerate(sol.ao_trace):
            rows.append((strat.value, _fmt(cfg.snr_db), cfg.n_ris, cfg.nt, 0,
                         trial_seed, it, _fmt(t)))
    rows.sort(key=lambda r: (r[0], r[6]))
    _write_csv(spec.out_path, TRACE_HEADER, rows)
    return rows


def _write_csv(path, header, rows) -> None:
    """Atomic CSV write: build a temp file, rename into place; nothing is
    left behind on failure."""
    if path is None:
        return
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
