"""Exact rate model for the two-slot cooperative rate-splitting downlink.

Slot 1: the BS superposes a common stream and two private streams; each user
first decodes the common stream treating both private streams as noise, then
cancels it and decodes its private stream against the other user's private
stream. Slot 2 (fraction 1-beta): user 1 relays the common stream to user 2
over the direct U1-U2 link plus the RIS reflection.

These functions are the ground truth for every optimizer and test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet

UNIT_MODULUS_TOL = 1e-9


@dataclass
class PhaseConfig:
    """Unit-modulus RIS reflection coefficients for both time slots."""

    theta1: np.ndarray  # (n_ris,) entries e^{j*angle}, slot 1
    theta2: np.ndarray  # (n_ris,) slot 2

    def __post_init__(self) -> None:
        self.theta1 = np.asarray(self.theta1, dtype=complex)
        self.theta2 = np.asarray(self.theta2, dtype=complex)

    @classmethod
    def from_angles(cls, angles1, angles2) -> "PhaseConfig":
        return cls(np.exp(1j * np.asarray(angles1, dtype=float)),
                   np.exp(1j * np.asarray(angles2, dtype=float)))

    def violations(self, tol: float = UNIT_MODULUS_TOL) -> list[str]:
        out = []
        for name, th in (("theta1", self.theta1), ("theta2", self.theta2)):
            if th.size and np.max(np.abs(np.abs(th) - 1.0)) > tol:
                out.append(f"unit_modulus:{name}")
        return out


@dataclass
class TxDesign:
    """Transmit design: beamformers, relay power, rate split, time fraction."""

    P: np.ndarray  # (nt, 3) columns = (common, private-1, private-2)
    pr: float  # relay power, W
    a: np.ndarray  # (2,) common-rate split, bits/s/Hz
    beta: float  # slot-1 time fraction, in (0, 1]

    def __post_init__(self) -> None:
        self.P = np.asarray(self.P, dtype=complex)
        self.a = np.asarray(self.a, dtype=float)

    def power(self) -> float:
        """trace(P P^H)."""
        return float(np.sum(np.abs(self.P) ** 2))

    def violations(self, pt: float | None = None) -> list[str]:
        out = []
        if self.P.ndim != 2 or self.P.shape[1] != 3:
            out.append("beam_shape")
        if self.a.shape != (2,) or np.any(self.a < -1e-12):
            out.append("rate_split")
        if not (0.0 < self.beta <= 1.0):
            out.append("beta_range")
        if self.pr < 0:
            out.append("relay_power")
        if pt is not None and self.power() > pt * (1.0 + 1e-9) + 1e-300:
            out.append("power")
        return out


@dataclass
class RateReport:
    """Every rate of one design, the max-min objective, and feasibility."""

    c1_1: float  # slot-1 common rate at U1
    c2_1: float  # slot-1 common rate at U2
    r1_1: float  # slot-1 private rate of U1
    r2_1: float  # slot-1 private rate of U2
    c2_2: float  # slot-2 common rate at U2
    rc: float  # achievable common rate min(c1_1, c2_1 + c2_2)
    r_tot: tuple[float, float]  # total user rates r_k + a_k
    min_rate: float
    feasible: bool
    violations: list[str] = field(default_factory=list)


def effective_channel(k: int, ch: ChannelSet, theta1: np.ndarray) -> np.ndarray:
    """Slot-1 effective channel g_k + G^H diag(theta1)^H h_k for user k."""
    if k not in (1, 2):
        raise ValueError("user index must be 1 or 2")
    theta1 = np.asarray(theta1, dtype=complex)
    g, h = ch.g(k), ch.h(k)
    if theta1.shape != h.shape:
        raise ValueError(f"theta1 has shape {theta1.shape}, expected {h.shape}")
    if ch.n_ris == 0:
        return g.copy()
    if ch.G.shape != (ch.n_ris, ch.nt):
        raise ValueError("G shape inconsistent with channel dimensions")
    return g + ch.G.conj().T @ (np.conj(theta1) * h)


def slot1_rates(ch: ChannelSet, theta1: np.ndarray, P: np.ndarray,
                beta: float) -> tuple[float, float, float, float]:
    """Slot-1 rates (c1_1, c2_1, r1_1, r2_1) in bits/s/Hz."""
    c, r = _slot1_rates_sinrs(ch, theta1, P, beta)[:2]
    return c[0], c[1], r[0], r[1]


def slot1_sinrs(ch: ChannelSet, theta1: np.ndarray,
                P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact slot-1 SINRs: (private rho[k], common rho_c[k]) for k = 1, 2."""
    _, _, rho, rho_c = _slot1_rates_sinrs(ch, theta1, P, 1.0)
    return rho, rho_c


def _slot1_rates_sinrs(ch, theta1, P, beta):
    P = np.asarray(P, dtype=complex)
    if P.shape != (ch.nt, 3):
        raise ValueError(f"P has shape {P.shape}, expected {(ch.nt, 3)}")
    sigma2 = ch.noise_power
    c = np.zeros(2)
    r = np.zeros(2)
    rho = np.zeros(2)
    rho_c = np.zeros(2)
    for k in (1, 2):
        gt = effective_channel(k, ch, theta1)
        s = np.abs(gt.conj() @ P) ** 2  # received powers of (s0, s1, s2)
        rho_c[k - 1] = s[0] / (s[1] + s[2] + sigma2)
        rho[k - 1] = s[k] / (s[3 - k] + sigma2)
        c[k - 1] = beta * math.log2(1.0 + rho_c[k - 1])
        r[k - 1] = beta * math.log2(1.0 + rho[k - 1])
    return c, r, rho, rho_c


def composite_slot2_channel(ch: ChannelSet, theta2: np.ndarray) -> complex:
    """h12 + h_r2^H diag(theta2) h_1r, the slot-2 relay-to-U2 channel."""
    theta2 = np.asarray(theta2, dtype=complex)
    if theta2.shape != ch.h_1r.shape:
        raise ValueError("theta2 length does not match n_ris")
    return complex(ch.h12 + np.sum(np.conj(ch.h_r2) * theta2 * ch.h_1r))


def slot2_spectral_efficiency(ch: ChannelSet, theta2: np.ndarray,
                              pr: float) -> float:
    """log2(1 + pr |h12 + h_r2^H diag(theta2) h_1r|^2 / sigma^2)."""
    if pr < 0:
        raise ValueError("relay power must be nonnegative")
    comp = composite_slot2_channel(ch, theta2)
    return math.log2(1.0 + pr * abs(comp) ** 2 / ch.noise_power)


def slot2_common_rate(ch: ChannelSet, theta2: np.ndarray, pr: float,
                      beta: float) -> float:
    """Slot-2 common rate (1-beta) log2(1 + pr |composite|^2 / sigma^2)."""
    if beta >= 1.0:
        return 0.0
    return (1.0 - beta) * slot2_spectral_efficiency(ch, theta2, pr)


def phase2_closed_form(ch: ChannelSet) -> np.ndarray:
    """Slot-2 phases aligning every reflected term with the direct U1-U2 path.

    theta2[n] = exp(j (arg(h12) - arg(h_1r[n] * conj(h_r2[n])))), which makes
    the composite magnitude equal |h12| + sum_n |h_1r[n]| |h_r2[n]| (the
    maximum over all unit-modulus phase vectors). Zero-magnitude entries get
    phase 0.
    """
    angles = np.angle(ch.h12) - np.angle(ch.h_1r * np.conj(ch.h_r2))
    return np.exp(1j * angles)


def evaluate_design(ch: ChannelSet, phases: PhaseConfig, design: TxDesign,
                    pt: float | None = None,
                    feas_tol: float = 1e-9) -> RateReport:
    """Exact evaluation of one design: all rates, the max-min objective, and
    a feasibility verdict (common-rate split within rc + feas_tol and all
    design invariants; the power check runs only when pt is given)."""
    c1_1, c2_1, r1_1, r2_1 = slot1_rates(ch, phases.theta1, design.P,
                                         design.beta)
    c2_2 = slot2_common_rate(ch, phases.theta2, design.pr, design.beta)
    rc = min(c1_1, c2_1 + c2_2)
    a1, a2 = float(design.a[0]), float(design.a[1])
    r_tot = (r1_1 + a1, r2_1 + a2)
    violations = design.violations(pt=pt) + phases.violations()
    if a1 + a2 > rc + feas_tol:
        violations.append("common_rate")
    return RateReport(
        c1_1=c1_1, c2_1=c2_1, r1_1=r1_1, r2_1=r2_1, c2_2=c2_2, rc=rc,
        r_tot=r_tot, min_rate=min(r_tot), feasible=not violations,
        violations=violations,
    )
