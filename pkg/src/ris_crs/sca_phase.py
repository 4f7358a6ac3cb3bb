"""Slot-1 RIS phase optimization by penalty method and SCA (fixed beam design).

The unit-modulus constraint is relaxed to |nu_n| <= 1 and a penalty
C * sum(|nu_n|^2 - 1) is added to the objective; both the penalty and the
quadratic signal terms are tangent-linearized at the current point. After
convergence the relaxed vector is projected back to unit modulus and kept
only if the projected design stays feasible and does not degrade the exact
objective (incumbent rule). Slot-2 phases always come from the closed form.

Interference-plus-noise slacks (kappa) are carried in units of the noise
power, so the subproblem sees noise = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import conic
from .channel import ChannelSet, ScenarioConfig
from .conic import (LN2, Lin, add_exp_rate_constraint,
                    add_quadratic_upper_bound)
from .rates import (PhaseConfig, TxDesign, evaluate_design,
                    phase2_closed_form, slot2_spectral_efficiency)
from .sca_beam import (BETA_MIN, REGRESSION_TOL, SolverFailure,
                       usable_solution)


@dataclass
class PhaseIterate:
    """One SCA point of the phase problem (relaxed phases plus slacks)."""

    nu: np.ndarray  # (n_ris,) complex, |nu_n| <= 1
    eta: np.ndarray  # (2,) private SINRs
    delta: np.ndarray  # (2,) private rate slacks log2(1 + eta)
    eta_c2: float  # U2 common SINR (slot 1)
    delta_c2: float
    kappa: np.ndarray  # (2,) private interference-plus-noise, noise units
    kappa_c2: float
    t: float
    penalty_c: float


def cascade_vectors(ch: ChannelSet, P: np.ndarray):
    """Cascade vectors d[k-1, i] = (diag(h_k^H) G p_i)^* and direct scalars
    g[k-1, i] = g_k^H p_i, so that g_tilde_k^H p_i = d^H nu + g for every
    unit-modulus nu."""
    P = np.asarray(P, dtype=complex)
    if P.shape != (ch.nt, 3):
        raise ValueError(f"P has shape {P.shape}, expected {(ch.nt, 3)}")
    d = np.zeros((2, 3, ch.n_ris), dtype=complex)
    g = np.zeros((2, 3), dtype=complex)
    for k in (1, 2):
        hk = ch.h(k)
        gk = ch.g(k)
        for i in (0, 1, 2):
            if ch.n_ris:
                d[k - 1, i] = np.conj(np.conj(hk) * (ch.G @ P[:, i]))
            g[k - 1, i] = gk.conj() @ P[:, i]
    return d, g


def common_sinr_threshold(a: np.ndarray, beta: float) -> float:
    """SINR that U1 must reach on the common stream: 2^((a1+a2)/beta) - 1."""
    if beta < BETA_MIN:
        raise ValueError(f"beta must be at least {BETA_MIN}")
    return 2.0 ** (float(np.sum(a)) / beta) - 1.0


def phase_quantities(d: np.ndarray, g: np.ndarray, nu: np.ndarray,
                     noise_power: float) -> dict:
    """Exact SINR bookkeeping at a (possibly relaxed) nu.

    Returns received powers s[k, i] = |d^H nu + g|^2 / noise plus the private
    and common SINRs and interference terms, all in noise units.
    """
    v = np.einsum("kin,n->ki", np.conj(d), nu) + g if d.shape[2] else g.copy()
    s = np.abs(v) ** 2 / noise_power
    kappa = np.array([s[0, 2] + 1.0, s[1, 1] + 1.0])
    eta = np.array([s[0, 1] / kappa[0], s[1, 2] / kappa[1]])
    kappa_c2 = s[1, 1] + s[1, 2] + 1.0
    eta_c2 = s[1, 0] / kappa_c2
    kappa_c1 = s[0, 1] + s[0, 2] + 1.0
    eta_c1 = s[0, 0] / kappa_c1
    return {"s": s, "eta": eta, "kappa": kappa, "eta_c2": eta_c2,
            "kappa_c2": kappa_c2, "eta_c1": eta_c1, "kappa_c1": kappa_c1}


def init_phase_iterate(d: np.ndarray, g: np.ndarray, nu: np.ndarray,
                       a: np.ndarray, beta: float, noise_power: float,
                       penalty_c: float) -> PhaseIterate:
    q = phase_quantities(d, g, nu, noise_power)
    delta = np.log2(1.0 + q["eta"])
    return PhaseIterate(
        nu=np.asarray(nu, dtype=complex).copy(),
        eta=q["eta"], delta=delta,
        eta_c2=q["eta_c2"], delta_c2=math.log2(1.0 + q["eta_c2"]),
        kappa=q["kappa"], kappa_c2=q["kappa_c2"],
        t=float(np.min(beta * delta + np.asarray(a, dtype=float))),
        penalty_c=penalty_c,
    )


@dataclass
class PhaseVars:
    """Variable handles; nu is represented as an offset from the expansion
    point (nu = nu_ref + dnu), which keeps the solver's objective at the
    rate scale instead of the penalty scale."""

    t: Lin
    dnu_re: list[Lin]
    dnu_im: list[Lin]
    nu_ref: np.ndarray
    eta: list[Lin]
    delta: list[Lin]
    kappa: list[Lin]
    eta_c2: Lin | None
    delta_c2: Lin | None
    kappa_c2: Lin | None

    def nu_value(self, x: np.ndarray) -> np.ndarray:
        d = np.array([vr.evaluate(x) + 1j * vi.evaluate(x)
                      for vr, vi in zip(self.dnu_re, self.dnu_im)])
        return self.nu_ref + d


def build_phase_subproblem(d: np.ndarray, g: np.ndarray, R0: float,
                           c2_2_coeff: float, a: np.ndarray, beta: float,
                           iterate: PhaseIterate, *,
                           noise_power: float = 1.0):
    """Convex inner approximation of the phase problem at `iterate`.

    d, g are raw cascade quantities (normalized internally by the noise);
    the slot-2 common rate enters as the constant (1 - beta) * c2_2_coeff.
    Common-stream machinery is included only when a1 + a2 > 0; the QoS
    surrogate for U1 is skipped when R0 = 0 (the original constraint is
    vacuous there). Returns (ConicProblem, PhaseVars).
    """
    n = d.shape[2]
    a = np.asarray(a, dtype=float)
    sigma = math.sqrt(noise_power)
    dn = d / sigma
    gn = g / sigma
    nu_ref = iterate.nu
    if nu_ref.shape != (n,):
        raise ValueError("iterate nu length does not match cascade vectors")
    c2_2 = (1.0 - beta) * c2_2_coeff
    a_sum = float(a.sum())
    include_common = a_sum > 0.0

    def stream_dead(k: int, i: int) -> bool:
        # largest achievable received SNR of stream i at user k+1 over the
        # relaxed ball; below this the stream is off for every phase vector
        amp = abs(gn[k, i]) + math.sqrt(n) * np.linalg.norm(dn[k, i])
        return amp * amp <= 1e-12

    prob = conic.ConicProblem()
    t = prob.add_var("t")
    # nu enters as the offset dnu = nu - nu_ref so the penalty's large
    # near-constant part stays out of the solver's objective value
    dnu_re = prob.add_vars(n, "dnure")
    dnu_im = prob.add_vars(n, "dnuim")
    nu_re = [dnu_re[j] + nu_ref[j].real for j in range(n)]
    nu_im = [dnu_im[j] + nu_ref[j].imag for j in range(n)]
    eta = [prob.add_var(f"eta{k}") for k in (1, 2)]
    delta = [prob.add_var(f"delta{k}") for k in (1, 2)]
    kappa = [prob.add_var(f"kappa{k}") for k in (1, 2)]
    if include_common:
        eta_c2 = prob.add_var("etac2")
        delta_c2 = prob.add_var("deltac2")
        kappa_c2 = prob.add_var("kappac2")
    else:
        eta_c2 = delta_c2 = kappa_c2 = None

    # objective: t plus the linearized penalty C * sum(|nu_n|^2 - 1)
    obj = t
    for j in range(n):
        obj = obj + 2.0 * iterate.penalty_c * (nu_ref[j].real * nu_re[j]
                                               + nu_ref[j].imag * nu_im[j])
    prob.set_objective(obj)

    # relaxed modulus box |nu_n| <= 1
    for j in range(n):
        prob.add_block(conic.SOC, [Lin.constant(1.0), nu_re[j], nu_im[j]],
                       f"box_{j}")

    # rate floors (beta and a are constants here)
    for k in (0, 1):
        prob.add_block(conic.NONNEG, [beta * delta[k] + float(a[k]) - t],
                       f"rate_floor_{k + 1}")
        add_exp_rate_constraint(prob, delta[k], eta[k], f"exp_private_{k + 1}")
    if include_common:
        prob.add_block(conic.NONNEG, [beta * delta_c2 + (c2_2 - a_sum)],
                       "common_u2")
        add_exp_rate_constraint(prob, delta_c2, eta_c2, "exp_common_2")

    def cascade_rows(k: int, i: int) -> list[Lin]:
        re, im = conic.complex_row_pair(np.conj(dn[k, i]), nu_re, nu_im,
                                        complex(gn[k, i]))
        return [re, im]

    def signal_lin(k: int, i: int) -> Lin:
        # tangent of |d^H nu + g|^2 at nu_ref
        u_ref = complex(np.conj(dn[k, i]) @ nu_ref)
        w = u_ref + complex(gn[k, i])
        re_v, im_v = conic.complex_row_pair(np.conj(dn[k, i]), nu_re, nu_im)
        lin = 2.0 * (w.real * re_v + w.imag * im_v)
        return lin - abs(u_ref) ** 2 + abs(complex(gn[k, i])) ** 2

    def add_signal_floor(k: int, i: int, eta_v: Lin, kappa_v: Lin,
                         eta_ref: float, kappa_ref: float, label: str):
        # linearized |d^H nu + g|^2 >= eta*kappa with
        # eta*kappa = 0.25 ((eta+kappa)^2 - (eta-kappa)^2), the subtracted
        # square tangent-linearized at the reference point
        dref = eta_ref - kappa_ref
        bound = signal_lin(k, i) + 0.5 * dref * (eta_v - kappa_v) \
            - 0.25 * dref * dref
        add_quadratic_upper_bound(prob, [(eta_v + kappa_v) * 0.5], bound,
                                  label)

    def add_stream_blocks(k: int, i: int, eta_v: Lin, kappa_v: Lin,
                          interf_rows: list[Lin], eta_ref: float,
                          kappa_ref: float, tag: str):
        """Interference bound plus signal floor; a stream whose signal is
        identically zero gets its slacks pinned instead (the floor would
        otherwise leave the subproblem without a strict interior)."""
        if stream_dead(k, i):
            prob.add_block(conic.ZERO, [eta_v, kappa_v - kappa_ref],
                           f"pinned_{tag}")
            return
        add_quadratic_upper_bound(prob, interf_rows, kappa_v - 1.0,
                                  f"interf_{tag}")
        add_signal_floor(k, i, eta_v, kappa_v, eta_ref, kappa_ref,
                         f"signal_{tag}")

    for k in (0, 1):
        other = 2 if k == 0 else 1
        add_stream_blocks(k, k + 1, eta[k], kappa[k],
                          cascade_rows(k, other), float(iterate.eta[k]),
                          float(iterate.kappa[k]), f"private_{k + 1}")
    if include_common:
        add_stream_blocks(1, 0, eta_c2, kappa_c2,
                          cascade_rows(1, 1) + cascade_rows(1, 2),
                          float(iterate.eta_c2), float(iterate.kappa_c2),
                          "common_2")

    if R0 > 0.0:
        # U1 common-stream QoS: linearized signal >= R0 * (interference + 1)
        rows = cascade_rows(0, 1) + cascade_rows(0, 2)
        s = math.sqrt(R0)
        add_quadratic_upper_bound(prob, [r * s for r in rows],
                                  signal_lin(0, 0) - R0, "qos_common_1")

    return prob, PhaseVars(t=t, dnu_re=dnu_re, dnu_im=dnu_im,
                           nu_ref=nu_ref.copy(), eta=eta, delta=delta,
                           kappa=kappa, eta_c2=eta_c2, delta_c2=delta_c2,
                           kappa_c2=kappa_c2)


def project_unit_modulus(nu: np.ndarray) -> np.ndarray:
    """nu_n / |nu_n| with zero entries mapped to phase 0."""
    out = np.ones_like(nu)
    nz = np.abs(nu) > 0
    out[nz] = nu[nz] / np.abs(nu[nz])
    return out


#: Leading iterations of the phase SCA run with a sensitivity-scaled penalty.
EXPLORE_ROUNDS = 3


def _movement_scale(dn: np.ndarray, gn: np.ndarray, nu: np.ndarray,
                    a: np.ndarray, beta: float, _noise: float) -> float:
    """Phase-sensitivity scale of the max-min objective at nu: the largest
    |d(rate)/d(nu)| over the streams that enter the problem, in bits per
    unit phase move. Zero when the RIS does not couple (all d = 0)."""
    q = phase_quantities(dn, gn, nu, 1.0)
    include_common = float(np.sum(a)) > 0.0
    best = 0.0
    streams = [(0, 1, q["eta"][0], q["kappa"][0], True),
               (1, 2, q["eta"][1], q["kappa"][1], True),
               (0, 2, q["eta"][0], q["kappa"][0], False),
               (1, 1, q["eta"][1], q["kappa"][1], False)]
    if include_common:
        streams += [(1, 0, q["eta_c2"], q["kappa_c2"], True),
                    (1, 1, q["eta_c2"], q["kappa_c2"], False),
                    (1, 2, q["eta_c2"], q["kappa_c2"], False)]
    for k, i, eta, kappa, is_signal in streams:
        amp = math.sqrt(float(q["s"][k, i]))
        grad = 2.0 * float(np.linalg.norm(dn[k, i])) * amp
        weight = beta / ((1.0 + eta) * kappa * LN2)
        if not is_signal:
            weight *= eta
        best = max(best, weight * grad)
    return best


def run_algorithm2(ch: ChannelSet, P: np.ndarray, a: np.ndarray, beta: float,
                   init_theta1: np.ndarray, cfg: ScenarioConfig, *,
                   solver_tol: float = conic.DEFAULT_TOL):
    """Phase SCA loop; returns (theta1, trace of t).

    Keeps the input phases (incumbent) unless the projected relaxed solution
    is feasible and at least as good on the exact objective (within
    REGRESSION_TOL).
    """
    init_theta1 = np.asarray(init_theta1, dtype=complex)
    theta2 = phase2_closed_form(ch)
    design = TxDesign(P=P, pr=cfg.pr_w, a=np.asarray(a, dtype=float),
                      beta=beta)

    def exact(theta1: np.ndarray):
        return evaluate_design(ch, PhaseConfig(theta1, theta2), design,
                               pt=cfg.pt_w)

    incumbent_report = exact(init_theta1)
    if ch.n_ris == 0:
        return init_theta1.copy(), [incumbent_report.min_rate]

    d, g = cascade_vectors(ch, P)
    c2_coeff = slot2_spectral_efficiency(ch, theta2, cfg.pr_w)
    a = np.asarray(a, dtype=float)
    R0 = common_sinr_threshold(a, beta)
    scale = _movement_scale(d / math.sqrt(ch.noise_power),
                            g / math.sqrt(ch.noise_power), init_theta1, a,
                            beta, ch.noise_power)
    iterate = init_phase_iterate(d, g, init_theta1, a, beta, ch.noise_power,
                                 cfg.penalty_c)
    trace = [iterate.t]
    for it_no in range(cfg.max_iters[0]):
        # short penalty continuation: the first rounds use a penalty at the
        # objective's phase-sensitivity scale so the relaxed point can
        # actually travel; the remainder enforce the modulus at the
        # configured constant (a fixed large C freezes the tangential step
        # at slope/(2C) and would pin the phases to their initialization)
        explore = it_no < EXPLORE_ROUNDS and scale > 0.0
        iterate.penalty_c = 0.5 * scale if explore else cfg.penalty_c
        prob, vars_ = build_phase_subproblem(d, g, R0, c2_coeff, a, beta,
                                             iterate,
                                             noise_power=ch.noise_power)
        res = conic.solve(prob, solver_tol)
        if not usable_solution(prob, res):
            raise SolverFailure(f"phase subproblem: {res.status}",
                                init_theta1, trace)
        t_new = float(vars_.t.evaluate(res.x))
        if t_new < trace[-1] - REGRESSION_TOL:
            break
        nu = vars_.nu_value(res.x)
        nu /= np.maximum(np.abs(nu), 1.0)  # clip solver eps outside the box
        new_iterate = init_phase_iterate(d, g, nu, a, beta, ch.noise_power,
                                         cfg.penalty_c)
        converged = (not explore) and abs(t_new - trace[-1]) < cfg.sca_tol
        iterate = new_iterate
        trace.append(t_new)
        if converged:
            break

    projected = project_unit_modulus(iterate.nu)
    report = exact(projected)
    if report.feasible and report.min_rate >= (incumbent_report.min_rate
                                               - REGRESSION_TOL):
        return projected, trace
    return init_theta1.copy(), trace
