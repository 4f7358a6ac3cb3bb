"""Scenario geometry and Rayleigh-fading channel generation.

All powers are handled internally in linear watts; the config carries the
usual dBm/dB values and converts once. Channel realizations are reproducible:
every channel member draws from its own child stream of a single seed
sequence, so e.g. the direct links are identical across runs that differ
only in the RIS element count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

Vec2 = tuple[float, float]

#: Child-stream order used by build_channel_set (one stream per member).
CHANNEL_MEMBERS = ("G", "g1", "g2", "h1", "h2", "h12", "h_1r", "h_r2")


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass
class ScenarioConfig:
    """Scenario parameters (geometry, powers, dimensions, tolerances)."""

    # positions in meters
    bs_pos: Vec2 = (0.0, 0.0)
    ris_pos: Vec2 = (40.0, 10.0)
    u1_pos: Vec2 = (40.0, 0.0)
    u2_pos: Vec2 = (60.0, 0.0)
    # antenna / element counts (n_ris = 0 encodes the no-RIS baselines)
    nt: int = 2
    n_ris: int = 4
    # path-loss exponents: BS-U1, BS-U2, BS-RIS, RIS-users, U1-U2
    exponents: tuple[float, ...] = (2.0, 3.0, 3.0, 3.5, 1.5)
    l0_db: float = -30.0  # reference path loss at d0 = 1 m
    # transmit powers; default operating point is a 15 dB transmit SNR
    pt_dbm: float = -51.0
    pr_dbm: float = -51.0
    noise_dbm: float = -66.0
    seed: int = 0
    sca_tol: float = 1e-3  # bits/s/Hz
    ao_tol: float = 1e-3  # bits/s/Hz
    max_iters: tuple[int, int] = (200, 50)  # (inner SCA cap, outer AO cap)
    penalty_c: float = 100.0

    def __post_init__(self) -> None:
        self.exponents = tuple(float(e) for e in self.exponents)
        self.max_iters = tuple(int(m) for m in self.max_iters)
        if self.nt < 1:
            raise ValueError("nt must be >= 1")
        if self.n_ris < 0:
            raise ValueError("n_ris must be >= 0")
        if len(self.exponents) != 5:
            raise ValueError("exponents must list 5 values "
                             "(BS-U1, BS-U2, BS-RIS, RIS-users, U1-U2)")
        if any(e <= 0 for e in self.exponents):
            raise ValueError("path-loss exponents must be positive")
        for name in ("pt_dbm", "pr_dbm", "noise_dbm"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.sca_tol <= 0 or self.ao_tol <= 0:
            raise ValueError("tolerances must be positive")
        if len(self.max_iters) != 2 or any(m < 1 for m in self.max_iters):
            raise ValueError("max_iters must be a pair of positive caps")
        if self.penalty_c <= 0:
            raise ValueError("penalty_c must be positive")

    @property
    def pt_w(self) -> float:
        return dbm_to_watt(self.pt_dbm)

    @property
    def pr_w(self) -> float:
        return dbm_to_watt(self.pr_dbm)

    @property
    def noise_w(self) -> float:
        return dbm_to_watt(self.noise_dbm)

    @property
    def snr_db(self) -> float:
        """Transmit SNR Pt/sigma^2 in dB."""
        return self.pt_dbm - self.noise_dbm

    def with_snr_db(self, snr_db: float) -> "ScenarioConfig":
        """Copy with Pt (and Pr, which tracks Pt) set to the given transmit SNR."""
        p = self.noise_dbm + snr_db
        return replace(self, pt_dbm=p, pr_dbm=p)

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        """Load from a flat `key = value` file; unknown keys are an error."""
        parsed = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected 'key = value'")
                key, value = (s.strip() for s in line.split("=", 1))
                parsed[key] = value
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in parsed.items():
            if key not in known:
                raise ValueError(f"unknown config key: {key!r}")
            kwargs[key] = _parse_field(key, value)
        return cls(**kwargs)


_PAIR_KEYS = {"bs_pos", "ris_pos", "u1_pos", "u2_pos"}
_INT_KEYS = {"nt", "n_ris", "seed"}


def _parse_field(key: str, value: str):
    if key in _PAIR_KEYS:
        parts = [float(v) for v in value.split(",")]
        if len(parts) != 2:
            raise ValueError(f"{key} needs two comma-separated coordinates")
        return tuple(parts)
    if key == "exponents":
        return tuple(float(v) for v in value.split(","))
    if key == "max_iters":
        return tuple(int(v) for v in value.split(","))
    if key in _INT_KEYS:
        return int(value)
    return float(value)


@dataclass
class ChannelSet:
    """All complex channel gains of one realization, plus the noise power in W.

    Shapes: G is (n_ris, nt), g1/g2 are (nt,), h1/h2/h_1r/h_r2 are (n_ris,),
    h12 is scalar. With n_ris = 0 the RIS members are empty and the model
    degenerates to the direct links.
    """

    G: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    h12: complex
    h_1r: np.ndarray
    h_r2: np.ndarray
    noise_power: float

    @property
    def nt(self) -> int:
        return self.g1.shape[0]

    @property
    def n_ris(self) -> int:
        return self.h1.shape[0]

    def g(self, k: int) -> np.ndarray:
        return self.g1 if k == 1 else self.g2

    def h(self, k: int) -> np.ndarray:
        return self.h1 if k == 1 else self.h2

    def without_ris(self) -> "ChannelSet":
        """Copy with all RIS-side gains zeroed (shape-preserving)."""
        return ChannelSet(
            G=np.zeros_like(self.G),
            g1=self.g1.copy(),
            g2=self.g2.copy(),
            h1=np.zeros_like(self.h1),
            h2=np.zeros_like(self.h2),
            h12=self.h12,
            h_1r=np.zeros_like(self.h_1r),
            h_r2=np.zeros_like(self.h_r2),
            noise_power=self.noise_power,
        )


def path_loss(distance_m: float, exponent: float, l0_db: float) -> float:
    """Linear power gain L0 * d^(-alpha) at distance d meters."""
    if distance_m <= 0:
        raise ValueError("distance must be positive")
    return db_to_linear(l0_db) * distance_m ** (-exponent)


def sample_complex_gaussian(rows: int, cols: int, variance: float,
                            rng: np.random.Generator) -> np.ndarray:
    """I.i.d. circularly symmetric complex Gaussian entries of the given
    per-entry variance (zero mean)."""
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    std = math.sqrt(variance / 2.0)
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return std * (re + 1j * im)


def _distance(p: Vec2, q: Vec2) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def build_channel_set(cfg: ScenarioConfig, rng=None) -> ChannelSet:
    """Draw one channel realization from the scenario geometry.

    `rng` may be an integer seed, a numpy SeedSequence, or None (uses
    cfg.seed). Each member of CHANNEL_MEMBERS is drawn from its own spawned
    child stream, so realizations of the direct links do not depend on n_ris.
    """
    if rng is None:
        rng = cfg.seed
    if isinstance(rng, (int, np.integer)):
        rng = np.random.SeedSequence(int(rng))
    if not isinstance(rng, np.random.SeedSequence):
        raise TypeError("rng must be an int seed or a numpy SeedSequence")
    streams = {name: np.random.default_rng(child)
               for name, child in zip(CHANNEL_MEMBERS, rng.spawn(len(CHANNEL_MEMBERS)))}

    e_bs_u1, e_bs_u2, e_bs_ris, e_ris_u, e_u1_u2 = cfg.exponents
    d_bs_u1 = _distance(cfg.bs_pos, cfg.u1_pos)
    d_bs_u2 = _distance(cfg.bs_pos, cfg.u2_pos)
    d_u1_u2 = _distance(cfg.u1_pos, cfg.u2_pos)
    for name, d in (("BS-U1", d_bs_u1), ("BS-U2", d_bs_u2), ("U1-U2", d_u1_u2)):
        if d <= 0:
            raise ValueError(f"coincident endpoints on link {name}")

    n, nt = cfg.n_ris, cfg.nt
    if n > 0:
        d_bs_ris = _distance(cfg.bs_pos, cfg.ris_pos)
        d_ris_u1 = _distance(cfg.ris_pos, cfg.u1_pos)
        d_ris_u2 = _distance(cfg.ris_pos, cfg.u2_pos)
        for name, d in (("BS-RIS", d_bs_ris), ("RIS-U1", d_ris_u1),
                        ("RIS-U2", d_ris_u2)):
            if d <= 0:
                raise ValueError(f"coincident endpoints on link {name}")
        var_G = path_loss(d_bs_ris, e_bs_ris, cfg.l0_db)
        var_h1 = path_loss(d_ris_u1, e_ris_u, cfg.l0_db)
        var_h2 = path_loss(d_ris_u2, e_ris_u, cfg.l0_db)
        # U1->RIS reuses the RIS-user exponent over the RIS-U1 distance and is
        # drawn independently of h1.
        var_h1r = path_loss(d_ris_u1, e_ris_u, cfg.l0_db)
        var_hr2 = path_loss(d_ris_u2, e_ris_u, cfg.l0_db)
    else:
        var_G = var_h1 = var_h2 = var_h1r = var_hr2 = 0.0

    G = sample_complex_gaussian(n, nt, var_G, streams["G"])
    g1 = sample_complex_gaussian(nt, 1, path_loss(d_bs_u1, e_bs_u1, cfg.l0_db),
                                 streams["g1"]).ravel()
    g2 = sample_complex_gaussian(nt, 1, path_loss(d_bs_u2, e_bs_u2, cfg.l0_db),
                                 streams["g2"]).ravel()
    h1 = sample_complex_gaussian(n, 1, var_h1, streams["h1"]).ravel()
    h2 = sample_complex_gaussian(n, 1, var_h2, streams["h2"]).ravel()
    h12 = complex(sample_complex_gaussian(
        1, 1, path_loss(d_u1_u2, e_u1_u2, cfg.l0_db), streams["h12"])[0, 0])
    h_1r = sample_complex_gaussian(n, 1, var_h1r, streams["h_1r"]).ravel()
    h_r2 = sample_complex_gaussian(n, 1, var_hr2, streams["h_r2"]).ravel()

    return ChannelSet(G=G, g1=g1, g2=g2, h1=h1, h2=h2, h12=h12,
                      h_1r=h_1r, h_r2=h_r2, noise_power=cfg.noise_w)
