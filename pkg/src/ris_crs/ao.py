"""Alternating optimization over (beam design, common rate, time slot) and
slot-1 RIS phases, plus the six strategy variants as configuration.

Strategies: CRS / RSMA / SDMA, each with or without RIS. RSMA pins beta = 1
(no cooperative slot), SDMA removes the common stream (zero common power and
split), and the no-RIS variants zero the RIS channels and skip the phase
step. Each outer iteration runs the beam SCA and, when there is an active
RIS, the phase SCA; the recorded trace is the exact max-min rate of the
current design and is nondecreasing.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import ChannelSet, ScenarioConfig
from .rates import (PhaseConfig, RateReport, TxDesign, evaluate_design,
                    phase2_closed_form, slot2_spectral_efficiency)
from .sca_beam import (BeamIterate, SolverFailure, build_beam_subproblem,
                       init_beam_iterate, iterate_from_design, run_algorithm1)
from .sca_phase import run_algorithm2


class Strategy(Enum):
    RIS_CRS = "RIS_CRS"
    RIS_RSMA = "RIS_RSMA"
    RIS_SDMA = "RIS_SDMA"
    NORIS_CRS = "NORIS_CRS"
    NORIS_RSMA = "NORIS_RSMA"
    NORIS_SDMA = "NORIS_SDMA"

    @property
    def use_ris(self) -> bool:
        return self.name.startswith("RIS")

    @property
    def fix_beta_one(self) -> bool:
        """RSMA has no cooperative slot: beta pinned to 1."""
        return "RSMA" in self.name

    @property
    def zero_common(self) -> bool:
        """SDMA carries no common stream: p0 = 0 and a = (0, 0)."""
        return "SDMA" in self.name


@dataclass
class Solution:
    """Result of one AO run; `report` is the exact evaluation of `design`."""

    strategy: Strategy
    design: TxDesign
    phases: PhaseConfig
    report: RateReport
    ao_trace: list[float]
    iters_algorithm1: list[int]
    iters_algorithm2: list[int]
    status: str = "ok"


def apply_strategy_constraints(builder, strategy: Strategy):
    """Wrap a beam-subproblem builder with the strategy's variable pins."""
    return functools.partial(builder, fix_beta_one=strategy.fix_beta_one,
                             zero_common=strategy.zero_common)


def _as_seedseq(rng, default_seed: int) -> np.random.SeedSequence:
    if rng is None:
        return np.random.SeedSequence(default_seed)
    if isinstance(rng, (int, np.integer)):
        return np.random.SeedSequence(int(rng))
    if isinstance(rng, np.random.SeedSequence):
        return rng
    raise TypeError("rng must be None, an int seed, or a SeedSequence")


def run_ao(ch: ChannelSet, strategy: Strategy, cfg: ScenarioConfig,
           rng=None, n_starts: int = 1, warm_start: Solution | None = None
           ) -> Solution:
    """Alternating optimization for one channel realization.

    Slot-1 phases are initialized uniformly on the unit circle from the
    run's RNG stream (one fresh draw per start); a warm start reuses the
    given solution's design and phases instead. The best start by exact
    max-min rate wins. Inner solver failures degrade gracefully to the best
    incumbent, flagged in `status`.
    """
    wch = ch if strategy.use_ris else ch.without_ris()
    rng = np.random.default_rng(_as_seedseq(rng, cfg.seed))
    if warm_start is not None:
        n_starts = 1
    best: Solution | None = None
    for _ in range(max(1, n_starts)):
        sol = _single_start(wch, strategy, cfg, rng, warm_start)
        if best is None or sol.report.min_rate > best.report.min_rate:
            best = sol
    return best


def _single_start(wch: ChannelSet, strategy: Strategy, cfg: ScenarioConfig,
                  rng: np.random.Generator,
                  warm_start: Solution | None) -> Solution:
    n = wch.n_ris
    theta2 = phase2_closed_form(wch)
    if warm_start is not None:
        theta1 = np.asarray(warm_start.phases.theta1, dtype=complex).copy()
        c2_coeff = slot2_spectral_efficiency(wch, theta2, cfg.pr_w)
        ws = warm_start.design
        iterate = iterate_from_design(wch, theta1, ws.P, ws.beta, ws.a,
                                      c2_coeff)
    else:
        theta1 = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n))
        iterate = init_beam_iterate(wch, theta1, cfg,
                                    fix_beta_one=strategy.fix_beta_one,
                                    zero_common=strategy.zero_common)

    builder = apply_strategy_constraints(build_beam_subproblem, strategy)
    run_phase_step = strategy.use_ris and n > 0
    trace = [iterate.t]
    iters1: list[int] = []
    iters2: list[int] = []
    status = "ok"
    try:
        for _ in range(cfg.max_iters[1]):
            iterate, tr1 = run_algorithm1(wch, theta1, theta2, iterate, cfg,
                                          builder=builder)
            iters1.append(len(tr1) - 1)
            if run_phase_step:
                theta1, tr2 = run_algorithm2(wch, iterate.P, iterate.a,
                                             iterate.beta, theta1, cfg)
                iters2.append(len(tr2) - 1)
                # refresh the beam iterate's slacks against the new phases
                c2_coeff = slot2_spectral_efficiency(wch, theta2, cfg.pr_w)
                iterate = iterate_from_design(wch, theta1, iterate.P,
                                              iterate.beta, iterate.a,
                                              c2_coeff, repair=True)
            else:
                iters2.append(0)
            trace.append(iterate.t)
            if abs(trace[-1] - trace[-2]) < cfg.ao_tol:
                break
    except SolverFailure as exc:
        status = f"degraded: {exc}"
        if isinstance(exc.last_iterate, BeamIterate):
            iterate = exc.last_iterate

    design = TxDesign(P=iterate.P, pr=cfg.pr_w, a=iterate.a,
                      beta=iterate.beta)
    report = evaluate_design(wch, PhaseConfig(theta1, theta2), design,
                             pt=cfg.pt_w)
    return Solution(strategy=strategy, design=design,
                    phases=PhaseConfig(theta1, theta2), report=report,
                    ao_trace=trace, iters_algorithm1=iters1,
                    iters_algorithm2=iters2, status=status)


def embed_solution(ch: ChannelSet, sol: Solution,
                   into_strategy: Strategy,
                   pt: float | None = None) -> RateReport:
    """Evaluate a solution inside another strategy's feasible set.

    Valid embeddings: any solution into CRS of the same RIS class, an RSMA
    solution into RSMA (beta = 1), an SDMA solution into SDMA, and a no-RIS
    solution into the RIS class (phases are free there). Anything else is an
    invalid-argument error.
    """
    if into_strategy.fix_beta_one and sol.design.beta != 1.0:
        raise ValueError("embedding requires beta = 1")
    if into_strategy.zero_common:
        if np.any(np.abs(sol.design.P[:, 0]) > 0) or np.any(sol.design.a > 0):
            raise ValueError("embedding requires a zero common stream")
    if not into_strategy.use_ris and sol.strategy.use_ris:
        raise ValueError("a RIS-aided design does not embed into a no-RIS "
                         "strategy")
    wch = ch if into_strategy.use_ris else ch.without_ris()
    return evaluate_design(wch, sol.phases, sol.design, pt=pt)


def solution_to_json(sol: Solution) -> str:
    """Serialize a solution to a structured text record (phases as angles)."""
    payload = {
        "strategy": sol.strategy.value,
        "status": sol.status,
        "design": {
            "P_re": np.real(sol.design.P).tolist(),
            "P_im": np.imag(sol.design.P).tolist(),
            "pr": sol.design.pr,
            "a": sol.design.a.tolist(),
            "beta": sol.design.beta,
        },
        "phases": {
            "theta1_rad": np.angle(sol.phases.theta1).tolist(),
            "theta2_rad": np.angle(sol.phases.theta2).tolist(),
        },
        "report": {
            "c1_1": sol.report.c1_1, "c2_1": sol.report.c2_1,
            "r1_1": sol.report.r1_1, "r2_1": sol.report.r2_1,
            "c2_2": sol.report.c2_2, "rc": sol.report.rc,
            "r_tot": list(sol.report.r_tot),
            "min_rate": sol.report.min_rate,
            "feasible": sol.report.feasible,
            "violations": sol.report.violations,
        },
        "ao_trace": sol.ao_trace,
        "iters_algorithm1": sol.iters_algorithm1,
        "iters_algorithm2": sol.iters_algorithm2,
    }
    return json.dumps(payload, indent=2)
