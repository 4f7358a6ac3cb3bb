"""Joint beamforming, common-rate, and time-slot optimization (fixed phases).

Each iteration solves a convex inner approximation of the max-min problem:
bilinear rate terms beta*alpha are lower-bounded by a first-order surrogate,
the SINR fractions are split into difference-of-convex constraints with the
concave side linearized at the current point, and the 2^rate <= 1 + SINR
couplings go through exponential cones. The surrogates are tangent at the
expansion point, which makes the objective trace nondecreasing.

Internally the subproblem is scaled: precoders are normalized by sqrt(Pt)
and effective channels absorb sqrt(Pt)/sigma, so the power budget is 1 and
the noise is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import conic
from .channel import ChannelSet, ScenarioConfig
from .conic import Lin, add_exp_rate_constraint, add_quadratic_upper_bound
from .rates import (effective_channel, slot1_rates, slot1_sinrs,
                    slot2_spectral_efficiency)

BETA_MIN = 0.01
#: Slack under which a reference SINR is treated as exactly zero (the
#: associated stream carries nothing and its SINR slack is pinned to 0).
RHO_PIN_TOL = 1e-12
REGRESSION_TOL = 1e-6


class SolverFailure(RuntimeError):
    """Inner conic solve failed; carries the last good iterate and trace."""

    def __init__(self, message: str, last_iterate, trace):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.trace = trace


@dataclass
class BeamIterate:
    """One SCA point: the design plus the exact slacks of that design."""

    P: np.ndarray  # (nt, 3) complex
    beta: float
    a: np.ndarray  # (2,)
    t: float  # exact max-min rate of this design
    alpha: np.ndarray  # (2,) private rate slacks r_k / beta
    alpha_c: np.ndarray  # (2,) common rate slacks c_k / beta
    rho: np.ndarray  # (2,) private SINRs
    rho_c: np.ndarray  # (2,) common SINRs


def phi_lower_bound(beta: float, alpha: float, beta_ref: float,
                    alpha_ref: float) -> float:
    """Concave lower bound of the product beta*alpha, tangent at the
    reference point: 0.5 (br+ar)(b+a) - 0.25 (br+ar)^2 - 0.25 (b-a)^2."""
    s = beta_ref + alpha_ref
    return 0.5 * s * (beta + alpha) - 0.25 * s * s - 0.25 * (beta - alpha) ** 2


@dataclass
class BeamVars:
    """Variable handles of one beam subproblem (None = pinned)."""

    t: Lin
    a: list[Lin] | None
    beta: Lin | None
    alpha: list[Lin]
    alpha_c: list[Lin] | None
    rho: list[Lin]
    rho_c: list[Lin] | None
    p_re: list[list[Lin] | None]  # per stream 0..2, lists of nt vars
    p_im: list[list[Lin] | None]
    scale: float  # precoder un-normalization factor sqrt(Pt)


def _phi_bound_expr(beta: Lin | None, alpha: Lin, beta_ref: float,
                    alpha_ref: float) -> tuple[Lin, Lin | None]:
    """Return (linear part L, difference D) with Phi = L - 0.25 D^2.

    With beta pinned to 1 the product is exact and linear: L = alpha, D = None.
    """
    if beta is None:
        return alpha, None
    s = beta_ref + alpha_ref
    lin = 0.5 * s * (beta + alpha) - 0.25 * s * s
    return lin, beta - alpha


def build_beam_subproblem(ch: ChannelSet, theta1: np.ndarray,
                          c2_2_coeff: float, iterate: BeamIterate, pt: float,
                          *, fix_beta_one: bool = False,
                          zero_common: bool = False,
                          beta_min: float = BETA_MIN):
    """Convex inner approximation of the beam design problem at `iterate`.

    c2_2_coeff is the fixed slot-2 spectral efficiency; the slot-2 common
    rate enters the constraints linearly as (1-beta)*c2_2_coeff. Returns
    (ConicProblem, BeamVars).
    """
    nt = ch.nt
    if np.asarray(theta1).shape != (ch.n_ris,):
        raise ValueError("theta1 length does not match n_ris")
    if iterate.P.shape != (nt, 3):
        raise ValueError("iterate P has the wrong shape")
    if pt < 0:
        raise ValueError("pt must be nonnegative")
    if np.any(iterate.rho < 0) or np.any(iterate.rho_c < 0):
        raise ValueError("reference SINR slacks must be nonnegative")

    sigma = math.sqrt(ch.noise_power)
    scale = math.sqrt(pt) if pt > 0 else 1.0
    gt = [effective_channel(k, ch, theta1) * (scale / sigma) for k in (1, 2)]
    p_ref = iterate.P / scale
    power_cap = 1.0 if pt > 0 else 0.0

    prob = conic.ConicProblem()
    t = prob.add_var("t")
    a = None if zero_common else [prob.add_var("a1"), prob.add_var("a2")]
    beta = None if fix_beta_one else prob.add_var("beta")
    alpha = [prob.add_var(f"alpha{k}") for k in (1, 2)]
    rho = [prob.add_var(f"rho{k}") for k in (1, 2)]
    if zero_common:
        alpha_c = rho_c = None
    else:
        alpha_c = [prob.add_var(f"alphac{k}") for k in (1, 2)]
        rho_c = [prob.add_var(f"rhoc{k}") for k in (1, 2)]
    p_re: list[list[Lin] | None] = [None, None, None]
    p_im: list[list[Lin] | None] = [None, None, None]
    for i in (0, 1, 2):
        if i == 0 and zero_common:
            continue
        p_re[i] = prob.add_vars(nt, f"p{i}re")
        p_im[i] = prob.add_vars(nt, f"p{i}im")

    prob.set_objective(t)
    beta_ref = 1.0 if fix_beta_one else iterate.beta
    a_expr = [Lin.constant(0.0)] * 2 if a is None else a

    # per-user rate floor: Phi(beta, alpha_k) + a_k >= t
    for k in (0, 1):
        lin, diff = _phi_bound_expr(beta, alpha[k], beta_ref,
                                    iterate.alpha[k])
        bound = lin + a_expr[k] - t
        if diff is None:
            prob.add_block(conic.NONNEG, [bound], f"rate_floor_{k + 1}")
        else:
            add_quadratic_upper_bound(prob, [diff * 0.5], bound,
                                      f"rate_floor_{k + 1}")

    if not zero_common:
        a_sum = a[0] + a[1]
        # U1 decodes the whole common rate in slot 1
        lin, diff = _phi_bound_expr(beta, alpha_c[0], beta_ref,
                                    iterate.alpha_c[0])
        add_quadratic_upper_bound(
            prob, [] if diff is None else [diff * 0.5], lin - a_sum,
            "common_u1")
        # U2 combines slot 1 with the fixed-coefficient slot-2 rate
        lin, diff = _phi_bound_expr(beta, alpha_c[1], beta_ref,
                                    iterate.alpha_c[1])
        slot2 = (Lin.constant(0.0) if fix_beta_one
                 else (1.0 - beta) * c2_2_coeff)
        add_quadratic_upper_bound(
            prob, [] if diff is None else [diff * 0.5],
            lin + slot2 - a_sum, "common_u2")
        prob.add_block(conic.NONNEG, [a[0], a[1]], "a_nonneg")

    # rate <-> SINR couplings 2^alpha <= 1 + rho
    for k in (0, 1):
        add_exp_rate_constraint(prob, alpha[k], rho[k], f"exp_private_{k + 1}")
        if not zero_common:
            add_exp_rate_constraint(prob, alpha_c[k], rho_c[k],
                                    f"exp_common_{k + 1}")

    # DC surrogates of the SINR floors
    for k in (0, 1):
        other = 1 - k
        _add_dc_constraint(prob, gt[k], p_re, p_im, p_ref,
                           signal_stream=k + 1,
                           interference_streams=[other + 1],
                           rho_var=rho[k], rho_ref=float(iterate.rho[k]),
                           label=f"dc_private_{k + 1}")
        if not zero_common:
            _add_dc_constraint(prob, gt[k], p_re, p_im, p_ref,
                               signal_stream=0,
                               interference_streams=[1, 2],
                               rho_var=rho_c[k],
                               rho_ref=float(iterate.rho_c[k]),
                               label=f"dc_common_{k + 1}")

    # transmit power: ||P||_F^2 <= Pt (normalized to <= 1)
    p_rows = [v for i in (0, 1, 2) if p_re[i] is not None
              for v in (*p_re[i], *p_im[i])]
    add_quadratic_upper_bound(prob, p_rows, power_cap, "power")

    if beta is not None:
        prob.add_block(conic.NONNEG, [beta - beta_min, 1.0 - beta],
                       "beta_box")

    return prob, BeamVars(t=t, a=a, beta=beta, alpha=alpha, alpha_c=alpha_c,
                          rho=rho, rho_c=rho_c, p_re=p_re, p_im=p_im,
                          scale=scale)


def _stream_rows(gt, p_re, p_im, stream) -> list[Lin]:
    if p_re[stream] is None:
        return []
    re, im = conic.complex_row_pair(np.conj(gt), p_re[stream], p_im[stream])
    return [re, im]


def _add_dc_constraint(prob, gt, p_re, p_im, p_ref, signal_stream,
                       interference_streams, rho_var, rho_ref, label):
    """Linearized SINR floor: interference + noise <= lin(signal, rho).

    The signal term |g^H p|^2 / rho is tangent-linearized at (p_ref, rho_ref):
    2 Re{u_ref^* g^H p}/rho_ref - |u_ref|^2 rho / rho_ref^2. A zero reference
    SINR pins rho to 0 (the stream carries nothing at the expansion point,
    so rho = 0 is the only inner-feasible choice).

    The whole inequality is divided by |u_ref|/rho_ref, which balances the
    coefficient spread between the precoder and SINR columns at very low
    SINR (the constraint itself is unchanged).
    """
    if rho_ref < 0:
        raise ValueError("reference SINR slack must be nonnegative")
    if rho_ref < RHO_PIN_TOL or p_re[signal_stream] is None:
        prob.add_block(conic.ZERO, [rho_var], label + "_pinned")
        return
    u_ref = complex(np.conj(gt) @ p_ref[:, signal_stream])
    s = abs(u_ref) / rho_ref
    sig_re, sig_im = conic.complex_row_pair(np.conj(gt), p_re[signal_stream],
                                            p_im[signal_stream])
    lin = (2.0 / abs(u_ref)) * (u_ref.real * sig_re + u_ref.imag * sig_im) \
        - s * rho_var
    rows = []
    for i in interference_streams:
        rows.extend(_stream_rows(gt, p_re, p_im, i))
    inv_sqrt_s = 1.0 / math.sqrt(s)
    add_quadratic_upper_bound(prob, [r * inv_sqrt_s for r in rows],
                              lin - 1.0 / s, label)  # noise = 1


def iterate_from_design(ch: ChannelSet, theta1: np.ndarray, P: np.ndarray,
                        beta: float, a: np.ndarray, c2_2_coeff: float,
                        repair: bool = False) -> BeamIterate:
    """Build a BeamIterate whose slacks are the exact rates/SINRs of the
    design. With repair=True the split a is scaled down into the achievable
    common rate (used after solver extraction)."""
    P = np.asarray(P, dtype=complex)
    a = np.asarray(a, dtype=float).copy()
    c1, c2, r1, r2 = slot1_rates(ch, theta1, P, beta)
    rho, rho_c = slot1_sinrs(ch, theta1, P)
    rc = min(c1, c2 + (1.0 - beta) * c2_2_coeff)
    if repair:
        a = np.maximum(a, 0.0)
        s = a.sum()
        if s > rc:
            a *= 0.0 if rc <= 0 else rc / s
    rates = np.array([r1, r2])
    return BeamIterate(P=P, beta=beta, a=a, t=float(np.min(rates + a)),
                       alpha=rates / beta,
                       alpha_c=np.array([c1, c2]) / beta,
                       rho=rho, rho_c=rho_c)


def init_beam_iterate(ch: ChannelSet, theta1: np.ndarray,
                      cfg: ScenarioConfig, *, fix_beta_one: bool = False,
                      zero_common: bool = False,
                      common_fraction: float = 0.5) -> BeamIterate:
    """Deterministic feasible start: matched-filter precoders, half power on
    the common stream (pointed at the weaker user), beta = 0.5, a = 0."""
    pt = cfg.pt_w
    q = 0.0 if zero_common else common_fraction
    gt = [effective_channel(k, ch, theta1) for k in (1, 2)]
    P = np.zeros((ch.nt, 3), dtype=complex)
    for k in (0, 1):
        P[:, k + 1] = _matched(gt[k], (1.0 - q) * pt / 2.0)
    if q > 0:
        weaker = int(np.argmin([np.linalg.norm(g) for g in gt]))
        P[:, 0] = _matched(gt[weaker], q * pt)
    beta = 1.0 if fix_beta_one else 0.5
    theta2 = _closed_form_theta2(ch)
    coeff = slot2_spectral_efficiency(ch, theta2, cfg.pr_w)
    return iterate_from_design(ch, theta1, P, beta, np.zeros(2), coeff)


def _matched(g: np.ndarray, power: float) -> np.ndarray:
    norm = np.linalg.norm(g)
    if norm == 0.0 or power <= 0.0:
        return np.zeros_like(g)
    return math.sqrt(power) * g / norm


def _closed_form_theta2(ch: ChannelSet) -> np.ndarray:
    from .rates import phase2_closed_form

    return phase2_closed_form(ch)


def _extract(res, vars_: BeamVars, nt: int) -> tuple[np.ndarray, float,
                                                     np.ndarray]:
    x = res.x
    P = np.zeros((nt, 3), dtype=complex)
    for i in (0, 1, 2):
        if vars_.p_re[i] is None:
            continue
        re = np.array([v.evaluate(x) for v in vars_.p_re[i]])
        im = np.array([v.evaluate(x) for v in vars_.p_im[i]])
        P[:, i] = (re + 1j * im) * vars_.scale
    beta = 1.0 if vars_.beta is None else float(vars_.beta.evaluate(x))
    beta = min(max(beta, BETA_MIN), 1.0)
    a = (np.zeros(2) if vars_.a is None
         else np.array([v.evaluate(x) for v in vars_.a]))
    return P, beta, a


def usable_solution(prob, res, feas_tol: float = 1e-6) -> bool:
    """Accept certified optima, or an uncertified last iterate whose block
    residuals pass our own arithmetic check (stalled interior-point runs at
    very low SNR still carry a near-optimal feasible point)."""
    if res.ok:
        return True
    if res.x is None or res.status in ("infeasible", "unbounded"):
        return False
    return max(prob.residuals(res.x), default=0.0) <= feas_tol


def run_algorithm1(ch: ChannelSet, theta1: np.ndarray, theta2: np.ndarray,
                   init: BeamIterate, cfg: ScenarioConfig, *,
                   builder=build_beam_subproblem,
                   solver_tol: float = conic.DEFAULT_TOL):
    """SCA loop for the beam design problem; returns (iterate, trace of t).

    The trace starts at the exact objective of `init` and appends each
    subproblem optimum; it is nondecreasing up to solver tolerance (a
    regression beyond REGRESSION_TOL keeps the incumbent and stops), and a
    step is only accepted if it does not degrade the exact objective. The
    returned iterate's design is exactly feasible: power within Pt, the
    split a within the achieved common rate.
    """
    pt = cfg.pt_w
    c2_coeff = slot2_spectral_efficiency(ch, theta2, cfg.pr_w)
    iterate = init
    trace = [init.t]
    for _ in range(cfg.max_iters[0]):
        prob, vars_ = builder(ch, theta1, c2_coeff, iterate, pt)
        res = conic.solve(prob, solver_tol)
        if not usable_solution(prob, res):
            raise SolverFailure(f"beam subproblem: {res.status}", iterate,
                                trace)
        t_new = float(vars_.t.evaluate(res.x))
        if t_new < iterate.t - REGRESSION_TOL:
            break  # numerical regression: keep the incumbent
        P, beta, a = _extract(res, vars_, ch.nt)
        P = _project_power(P, pt)
        new_iterate = iterate_from_design(ch, theta1, P, beta, a, c2_coeff,
                                          repair=True)
        if new_iterate.t < iterate.t - 1e-12:
            break  # exact objective must never regress
        iterate = new_iterate
        converged = abs(t_new - trace[-1]) < cfg.sca_tol
        trace.append(t_new)
        if converged:
            break
    return iterate, trace


def _project_power(P: np.ndarray, pt: float) -> np.ndarray:
    tr = float(np.sum(np.abs(P) ** 2))
    if tr > pt:
        P = P * (0.0 if pt <= 0 else math.sqrt(pt / tr))
    return P
