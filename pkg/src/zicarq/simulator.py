"""Finite-SNR Monte Carlo of the ARQ protocols at mutual-information level.

Episodes draw one set of Rayleigh channel gains per message, accumulate
per-round mutual information, and run the feedback state machine of the
selected scheme.  Error means information outage when the protocol
terminates; no codewords are transmitted and feedback is error-free.

Randomness contract: the gains of trial ``t`` are a fixed function of
(master seed, stream, t) through a counter-based generator, so estimates
are bit-identical however trials are partitioned into blocks or workers.
Each trial consumes exactly four uniforms (one squared-magnitude per
link, drawn as Exp(1), matching |CN(0,1)|^2); phases never enter the
outage tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import COOP_SCHEMES, SchemeId
from .core import ParameterError, SystemParams, validate

_MASK64 = (1 << 64) - 1
_DRAWS_PER_TRIAL = 4  # uniforms per episode: g11, g21, g22, g_relay


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo driver settings."""

    rho_db_grid: tuple[float, ...]
    trials: int
    T: int = 1000
    seed: int = 0
    scheme: SchemeId = SchemeId.CMO

    def check(self) -> "SimConfig":
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.T < 1:
            raise ParameterError("T must be >= 1")
        grid = tuple(self.rho_db_grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ParameterError("rho_db_grid must be strictly increasing")
        return self


@dataclass(frozen=True)
class ChannelRealization:
    """Per-message channel gains, constant over all L rounds."""

    h11: complex
    h21: complex
    h22: complex
    h_relay: complex

    @classmethod
    def sample(cls, rng: np.random.Generator) -> "ChannelRealization":
        z = (rng.standard_normal(8) * math.sqrt(0.5)).view(np.complex128)
        return cls(*z)

    @classmethod
    def from_trial(cls, seed: int, trial: int, stream: int = 0) -> "ChannelRealization":
        """The exact gains estimate_outage uses for this trial index.

        Only squared magnitudes matter for outage, so the reconstructed
        gains carry zero phase.
        """
        g = _trial_gains(seed, trial, 1, stream)[0]
        return cls(*(complex(math.sqrt(x)) for x in g))


@dataclass(frozen=True)
class EpisodeOutcome:
    """Result of one simulated message."""

    err1: bool
    err2: bool
    rounds_used: int
    zeta: int


@dataclass(frozen=True)
class PointEstimate:
    rho_db: float
    p_out: float
    ci_lo: float
    ci_hi: float


@dataclass(frozen=True)
class OutageEstimate:
    p_out1: float
    p_out2: float
    ci1: tuple[float, float]
    ci2: tuple[float, float]
    trials: int


@dataclass(frozen=True)
class DiversityEstimate:
    """Log-log regression of outage probability against SNR."""

    slope: float
    stderr: float
    points: tuple[PointEstimate, ...]
    dropped_rho_db: tuple[float, ...] = ()


@dataclass(frozen=True)
class ThroughputEstimate:
    eta1: float
    eta2: float
    ratio1: float
    ratio2: float
    mean_zeta: float


# ---------------------------------------------------------------------------
# counter-based trial randomness
# ---------------------------------------------------------------------------

def _philox_at(seed: int, trial0: int, stream: int) -> np.random.Generator:
    bg = np.random.Philox(key=np.array([seed & _MASK64, stream & _MASK64],
                                       dtype=np.uint64))
    # advance() counts 128-bit counter blocks; one block yields 4 uint64
    # words = the 4 uniforms of one trial, so trial t starts at block t
    bg.advance(trial0)
    return np.random.Generator(bg)


def _trial_gains(seed: int, trial0: int, n: int, stream: int) -> np.ndarray:
    """|h|^2 draws for trials [trial0, trial0+n): shape (n, 4) Exp(1)."""
    gen = _philox_at(seed, trial0, stream)
    u = gen.random((n, _DRAWS_PER_TRIAL))
    return -np.log1p(-u)


# ---------------------------------------------------------------------------
# episode kernels (vectorized over trials)
# ---------------------------------------------------------------------------

def _episode_batch(scheme: SchemeId, p: SystemParams, rho: float,
                   g11, g21, g22, grelay, T: int,
                   private_divisor: float | None = None):
    """Run one episode per array entry; returns (err1, err2, zeta) arrays.

    private_divisor overrides the finite-SNR private-power denominator
    1 + rho**b (tests use 1.0 to collapse rate splitting onto the
    private-only scheme exactly).
    """
    if rho <= 1.0:
        raise ParameterError("rho must exceed 1 (linear scale)")
    validate(p)
    if scheme in COOP_SCHEMES:
        if scheme is SchemeId.COOP_STATIC:
            raise ParameterError(
                "coop-static is an envelope of coop-cmo/coop-tian, not a protocol")
        if p.L != 2:
            raise ParameterError("cooperative schemes require L=2")
        return _episode_batch_coop(scheme, p, rho, g11, g21, g22, grelay, T)
    if scheme in (SchemeId.HK_KEEP, SchemeId.HK_STOP):
        raise ParameterError(f"scheme {scheme.value} is analysis-only")
    return _episode_batch_noncoop(scheme, p, rho, g11, g21, g22, private_divisor)


def _episode_batch_noncoop(scheme, p, rho, g11, g21, g22, private_divisor):
    L = p.L
    lg = math.log2(rho)
    R1, R2, T2 = p.r1 * lg, p.r2 * lg, p.t2 * lg
    S2 = R2 - T2
    A = g11 * rho
    B = g21 * rho**p.beta
    C = g22 * rho
    n = A.shape[0]

    if scheme is SchemeId.HK:
        div = (1.0 + rho**p.b) if private_divisor is None else private_divisor
        m2_full = np.log2(1.0 + C)
        m2_priv = np.log2(1.0 + C / div)
        Bn = B / div
        m1_int = np.log2(1.0 + A / (1.0 + Bn))
        m1_clean = np.log2(1.0 + A)
        m1s_int = np.log2(1.0 + (A + B) / (1.0 + Bn))
        m1s_clean = np.log2(1.0 + A + B)

        def rx2_ok(l):
            return (l * m2_full >= R2) & (l * m2_full >= T2) & (l * m2_priv >= S2)

        def rx1_ok(l, i_eff):
            c1 = i_eff * m1_int + (l - i_eff) * m1_clean
            c2 = i_eff * m1s_int + (l - i_eff) * m1s_clean
            return (c1 >= R1) & (c2 >= R1 + T2)

    elif scheme is SchemeId.CMO:
        m2 = np.log2(1.0 + C)
        m1 = np.log2(1.0 + A)
        m1s = np.log2(1.0 + A + B)

        def rx2_ok(l):
            return l * m2 >= R2

        def rx1_ok(l, i_eff):
            # TX2 keeps sending the same message after its ACK, so both
            # joint constraints keep accumulating over every round
            return (l * m1 >= R1) & (l * m1s >= R1 + R2)

    elif scheme is SchemeId.TIAN:
        m2 = np.log2(1.0 + C)
        m1_int = np.log2(1.0 + A / (1.0 + B))
        m1_clean = np.log2(1.0 + A)

        def rx2_ok(l):
            return l * m2 >= R2

        def rx1_ok(l, i_eff):
            # TX2 goes silent after its ACK: clean rounds afterwards
            return i_eff * m1_int + (l - i_eff) * m1_clean >= R1

    else:
        raise ParameterError(f"unknown scheme {scheme}")

    ack2 = np.full(n, L + 1, dtype=np.int64)
    for l in range(1, L + 1):
        newly = rx2_ok(l) & (ack2 > L)
        ack2[newly] = l

    ack1 = np.full(n, L + 1, dtype=np.int64)
    for l in range(1, L + 1):
        i_eff = np.minimum(ack2, l)
        newly = rx1_ok(l, i_eff) & (ack1 > L)
        ack1[newly] = l

    err1 = ack1 > L
    err2 = ack2 > L
    zeta = np.maximum(np.minimum(ack1, L), np.minimum(ack2, L))
    return err1, err2, zeta


def _episode_batch_coop(scheme, p, rho, g11, g21, g22, grelay, T):
    lg = math.log2(rho)
    R1, R2 = p.r1 * lg, p.r2 * lg
    A = g11 * rho
    B = g21 * rho**p.beta
    C = g22 * rho

    m1 = np.log2(1.0 + A)
    m1s = np.log2(1.0 + A + B)
    m1n = np.log2(1.0 + A / (1.0 + B))
    m2 = np.log2(1.0 + C)

    cmo_ok1 = (m1 >= R1) & (m1s >= R1 + R2)
    tian_ok1 = m1n >= R1
    if scheme is SchemeId.COOP_CMO:
        rx1_ack1 = cmo_ok1
    elif scheme is SchemeId.COOP_TIAN:
        rx1_ack1 = tian_ok1
    else:  # dynamic decoding: RX1 picks the better decoder per realization
        rx1_ack1 = cmo_ok1 | tian_ok1

    # listening threshold: symbols TX2 needs to decode TX1's message
    clog = np.log2(1.0 + grelay * rho)
    with np.errstate(divide="ignore", over="ignore"):
        need = np.where(clog > 0.0, np.ceil(T * R1 / clog), np.inf)
    Tp = np.minimum(float(T), need)
    f = Tp / float(T)

    # accumulated information at RX1 by the end of the relayed round 2
    acc_own = (1.0 + f) * m1 + (1.0 - f) * m1s
    acc_joint = m1s + f * m1 + (1.0 - f) * m1s
    acc_noise = m1n + f * m1 + (1.0 - f) * m1s
    o1_bad = acc_own < R1
    o2_bad = acc_joint < R1 + R2
    o3_bad = acc_noise < R1
    if scheme is SchemeId.COOP_CMO:
        err1_r2 = o1_bad | o2_bad
    elif scheme is SchemeId.COOP_TIAN:
        err1_r2 = o3_bad
    else:
        err1_r2 = o3_bad & (o1_bad | o2_bad)

    err1 = np.where(rx1_ack1, False, err1_r2)
    # TX2 retransmits its own message in round 2 only when RX1 ACKed;
    # after an RX1 NACK it relays instead, whatever its own feedback was
    rx2_ack1 = m2 >= R2
    err2 = np.where(rx1_ack1, 2.0 * m2 < R2, ~rx2_ack1)
    zeta = np.where(rx1_ack1 & rx2_ack1, 1, 2).astype(np.int64)
    return err1, err2, zeta


def run_episode(scheme: SchemeId | str, params: SystemParams, rho: float,
                realization: ChannelRealization, T: int = 1000) -> EpisodeOutcome:
    """Run the protocol state machine for one message."""
    scheme = SchemeId(scheme)
    g = [abs(realization.h11) ** 2, abs(realization.h21) ** 2,
         abs(realization.h22) ** 2, abs(realization.h_relay) ** 2]
    arrs = [np.asarray([x], dtype=np.float64) for x in g]
    err1, err2, zeta = _episode_batch(scheme, params, rho, *arrs, T=T)
    z = int(zeta[0])
    return EpisodeOutcome(bool(err1[0]), bool(err2[0]), z, z)


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    """95% Wilson score interval; always contains the point estimate."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    ph = successes / trials
    z2 = z * z
    den = 1.0 + z2 / trials
    center = (ph + z2 / (2.0 * trials)) / den
    half = z * math.sqrt(ph * (1.0 - ph) / trials + z2 / (4.0 * trials * trials)) / den
    # rounding at the p=0/1 edges must not push the estimate outside
    return max(0.0, min(center - half, ph)), min(1.0, max(center + half, ph))


def estimate_outage(scheme: SchemeId | str, params: SystemParams, rho: float,
                    trials: int, seed: int, *, stream: int = 0, T: int = 1000,
                    block_size: int = 1 << 16) -> OutageEstimate:
    """Empirical outage probabilities at one SNR point.

    Aggregation uses integer event counts, so the result is independent
    of ``block_size`` (the partition of trials into vectorized blocks).
    """
    scheme = SchemeId(scheme)
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    k1 = k2 = 0
    done = 0
    while done < trials:
        n = min(block_size, trials - done)
        g = _trial_gains(seed, done, n, stream)
        err1, err2, _ = _episode_batch(scheme, params, rho,
                                       g[:, 0], g[:, 1], g[:, 2], g[:, 3], T)
        k1 += int(np.count_nonzero(err1))
        k2 += int(np.count_nonzero(err2))
        done += n
    return OutageEstimate(k1 / trials, k2 / trials,
                          wilson_interval(k1, trials),
                          wilson_interval(k2, trials), trials)


def fit_loglog_slope(points: list[PointEstimate]):
    """Least-squares slope of -log10(p_out) vs log10(rho).

    Returns (slope, stderr, dropped) where dropped lists the SNR points
    with zero empirical outage (excluded rather than imputed), or None
    in place of the pair when fewer than two points are usable.
    """
    usable = [pt for pt in points if pt.p_out > 0.0]
    dropped = tuple(pt.rho_db for pt in points if pt.p_out == 0.0)
    if len(usable) < 2:
        return None, None, dropped
    x = np.array([pt.rho_db / 10.0 for pt in usable])  # log10(rho)
    y = np.array([-math.log10(pt.p_out) for pt in usable])
    n = len(x)
    xbar = x.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    slope = float(np.sum((x - xbar) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * xbar)
    rss = float(np.sum((y - intercept - slope * x) ** 2))
    stderr = math.sqrt(rss / (n - 2) / sxx) if n > 2 else math.inf
    return slope, stderr, dropped


def estimate_diversity(scheme: SchemeId | str, params: SystemParams,
                       cfg: SimConfig) -> tuple[DiversityEstimate, DiversityEstimate]:
    """Slope estimates for RX1 and RX2 over the configured SNR grid.

    Point k of the grid draws from stream k, so points are independent
    yet individually reproducible.
    """
    cfg = cfg.check()
    pts1, pts2 = [], []
    for k, db in enumerate(cfg.rho_db_grid):
        rho = 10.0 ** (db / 10.0)
        est = estimate_outage(scheme, params, rho, cfg.trials, cfg.seed,
                              stream=k, T=cfg.T)
        pts1.append(PointEstimate(db, est.p_out1, *est.ci1))
        pts2.append(PointEstimate(db, est.p_out2, *est.ci2))

    out = []
    for pts in (pts1, pts2):
        slope, stderr, dropped = fit_loglog_slope(pts)
        if slope is None:
            raise ValueError("fewer than 2 usable points for the slope fit "
                             f"(dropped {dropped})")
        out.append(DiversityEstimate(slope, stderr, tuple(pts), dropped))
    return out[0], out[1]


def estimate_throughput(scheme: SchemeId | str, params: SystemParams, rho: float,
                        trials: int, seed: int, *, stream: int = 0, T: int = 1000,
                        block_size: int = 1 << 16) -> ThroughputEstimate:
    """Empirical per-user throughput: first-block rate over mean renewal time."""
    scheme = SchemeId(scheme)
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    zsum = 0
    done = 0
    while done < trials:
        n = min(block_size, trials - done)
        g = _trial_gains(seed, done, n, stream)
        _, _, zeta = _episode_batch(scheme, params, rho,
                                    g[:, 0], g[:, 1], g[:, 2], g[:, 3], T)
        zsum += int(np.sum(zeta))
        done += n
    mean_zeta = zsum / trials
    lg = math.log2(rho)
    R1, R2 = params.r1 * lg, params.r2 * lg
    return ThroughputEstimate(R1 / mean_zeta, R2 / mean_zeta,
                              1.0 / mean_zeta, 1.0 / mean_zeta, mean_zeta)
