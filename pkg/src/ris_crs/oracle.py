"""Brute-force verification at toy scale.

Enumerates per-element slot-1 phases on a uniform grid, matched-filter
beam directions with a gridded power split, and a beta grid; for each point
the exact rates are computed and the common-rate budget is split by the
closed-form allocator. At nt = 1 the direction restriction is exhaustive up
to a global phase, so the grid optimum is a true discretized optimum; at
nt = 2 it is a lower-bound oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .ao import Strategy
from .channel import ChannelSet, ScenarioConfig
from .rates import (PhaseConfig, TxDesign, effective_channel,
                    phase2_closed_form, slot1_rates, slot2_common_rate)


@dataclass
class GridSpec:
    """Grid resolution and a guard against combinatorial blowup."""

    phase_points: int = 16  # per RIS element
    power_grid: int = 11  # samples per power-split axis (common, private)
    beta_grid: tuple[float, ...] = tuple(round(0.1 * i, 1)
                                         for i in range(1, 11))
    budget: int = 2_000_000  # max enumerated design points

    def __post_init__(self) -> None:
        if self.phase_points < 1 or self.power_grid < 1:
            raise ValueError("grid counts must be at least 1")
        if not self.beta_grid:
            raise ValueError("beta_grid must be non-empty")

    def total_points(self, n_ris: int) -> int:
        return (self.phase_points ** n_ris
                * self.power_grid ** 2 * len(self.beta_grid))


def allocate_common_rate(r1: float, r2: float, rc: float
                         ) -> tuple[float, float, float]:
    """Exact maximizer of min(r1 + a1, r2 + a2) with a1 + a2 <= rc, a >= 0.

    The budget first tops up the weaker user, the remainder is split to keep
    both totals equal; the optimum is min((r1 + r2 + rc)/2, min(r1, r2) + rc).
    """
    if r1 < 0 or r2 < 0 or rc < 0:
        raise ValueError("rates must be nonnegative")
    gap = abs(r2 - r1)
    if rc <= gap:
        a_weak, a_strong = rc, 0.0
    else:
        extra = (rc - gap) / 2.0
        a_weak, a_strong = gap + extra, extra
    a = (a_weak, a_strong) if r1 <= r2 else (a_strong, a_weak)
    t = min(r1 + a[0], r2 + a[1])
    return a[0], a[1], t


def grid_search(ch: ChannelSet, cfg: ScenarioConfig, spec: GridSpec,
                strategy: Strategy = Strategy.RIS_CRS):
    """Exhaustive grid search; returns ((TxDesign, PhaseConfig), best t).

    Power splits: a fraction q of Pt goes to the common stream (pointed at
    the weaker user's effective channel), the rest is divided w : (1 - w)
    between the private streams. Ties break by enumeration order (phases,
    then q, then w, then beta), so the result is deterministic.
    """
    wch = ch if strategy.use_ris else ch.without_ris()
    n = wch.n_ris
    if spec.total_points(n) > spec.budget:
        raise ValueError(f"grid of {spec.total_points(n)} points exceeds the "
                         f"budget of {spec.budget}")

    pt, pr = cfg.pt_w, cfg.pr_w
    betas = (1.0,) if strategy.fix_beta_one else tuple(spec.beta_grid)
    q_common = ((0.0,) if strategy.zero_common
                else tuple(np.linspace(0.0, 1.0, spec.power_grid)))
    w_private = tuple(np.linspace(0.0, 1.0, spec.power_grid))
    phase_angles = 2.0 * np.pi * np.arange(spec.phase_points) \
        / spec.phase_points
    theta2 = phase2_closed_form(wch)
    slot2_coeff_cache: dict[float, float] = {}

    best_t = -math.inf
    best = None
    for combo in itertools.product(phase_angles, repeat=n):
        theta1 = np.exp(1j * np.asarray(combo, dtype=float))
        gt = [effective_channel(k, wch, theta1) for k in (1, 2)]
        dirs = [_unit(g) for g in gt]
        weaker = int(np.argmin([np.linalg.norm(g) for g in gt]))
        for q in q_common:
            for w in w_private:
                P = np.zeros((wch.nt, 3), dtype=complex)
                P[:, 0] = math.sqrt(q * pt) * dirs[weaker]
                P[:, 1] = math.sqrt((1.0 - q) * w * pt) * dirs[0]
                P[:, 2] = math.sqrt((1.0 - q) * (1.0 - w) * pt) * dirs[1]
                for beta in betas:
                    c1, c2, r1, r2 = slot1_rates(wch, theta1, P, beta)
                    if strategy.zero_common:
                        a1 = a2 = 0.0
                        t = min(r1, r2)
                    else:
                        c2_2 = slot2_common_rate(wch, theta2, pr, beta)
                        rc = min(c1, c2 + c2_2)
                        a1, a2, t = allocate_common_rate(r1, r2, rc)
                    if t > best_t:
                        best_t = t
                        design = TxDesign(P=P.copy(), pr=pr,
                                          a=np.array([a1, a2]), beta=beta)
                        best = (design, PhaseConfig(theta1, theta2))
    return best, best_t


def _unit(g: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(g)
    if norm == 0.0:
        out = np.zeros_like(g)
        if out.size:
            out[0] = 1.0
        return out
    return g / norm
