"""Stochastic oracle: simulate the recruitment stage and compare with the analytics.

Replications are drawn in fixed-size chunks, each with its own child seed
spawned from the caller's seed, and aggregated through sums and sums of
squares, so reports are reproducible and independent of chunk order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from psg_pdos.model import PdosScenario, Scenario, StrategyProfile
from psg_pdos.poisson_engine import action_rate_array, sample_counts

CHUNK = 20_000
SE_BAND = 3.0
VARIANCE_REL_TOL = 0.05
VARIANCE_MIN_RATE = 5.0


def _chunks(total: int, size: int = CHUNK):
    while total > 0:
        n = min(size, total)
        yield n
        total -= n


@dataclass(frozen=True)
class MomentStats:
    n: int
    mean: float
    variance: float  # sample variance (ddof = 1)

    @property
    def standard_error(self) -> float:
        return float(np.sqrt(self.variance / self.n)) if self.n > 1 else float("nan")

    @classmethod
    def from_sums(cls, n: int, s1: float, s2: float) -> "MomentStats":
        mean = s1 / n
        var = (s2 - n * mean * mean) / (n - 1) if n > 1 else 0.0
        return cls(n, mean, max(var, 0.0))


@dataclass(frozen=True)
class SimulationReport:
    sender_type: str
    replications: int
    seed: int
    utility: MomentStats
    persisted: int  # replications in which the sender sent p (first message)
    rates: dict[str, MomentStats] = field(default_factory=dict)  # counts given the message was sent
    lockouts: int = 0
    active_defense_events: int = 0
    infections: int = 0

    @property
    def empirical_sender_utility(self) -> float:
        return self.utility.mean

    @property
    def standard_error(self) -> float:
        return self.utility.standard_error


def simulate(s: PdosScenario | Scenario, profile: StrategyProfile, x: str, replications: int,
             seed: int) -> SimulationReport:
    """Play the recruitment stage ``replications`` times for a sender of type ``x``.

    Each replication draws a message from sigma_x^S, then (for a message with
    payoffs) a Poisson population of receivers, and records the sender's
    payoff sum_a omega_x^a c_a. Rate statistics are over replications where
    the persist message (first message) was sent.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    base = s.base if isinstance(s, PdosScenario) else s
    ix = base.ix("x", x)
    msg_p = base.messages[0]
    na = len(base.actions)
    malicious = base.sender_types[-1]

    u1 = u2 = 0.0
    c1, c2 = np.zeros(na), np.zeros(na)
    n_sent = 0
    children = np.random.SeedSequence(seed).spawn(len(list(_chunks(replications))))
    for n, child in zip(_chunks(replications), children):
        rng = np.random.default_rng(child)
        msgs = rng.choice(len(base.messages), size=n, p=profile.sender[ix] / profile.sender[ix].sum())
        payoff = np.zeros(n)
        for im, m in enumerate(base.messages):
            hit = msgs == im
            k = int(hit.sum())
            if k == 0:
                continue
            counts = sample_counts(base, profile, x, m, k, rng)
            payoff[hit] = counts @ base.sender_weights[ix, im]
            if m == msg_p:
                n_sent += k
                c1 += counts.sum(axis=0)
                c2 += (counts.astype(float) ** 2).sum(axis=0)
        u1 += payoff.sum()
        u2 += (payoff ** 2).sum()

    rates = {a: MomentStats.from_sums(n_sent, c1[i], c2[i]) for i, a in enumerate(base.actions)} if n_sent else {}
    totals = dict(zip(base.actions, c1.astype(int)))
    return SimulationReport(
        sender_type=x, replications=replications, seed=seed,
        utility=MomentStats.from_sums(replications, u1, u2), persisted=n_sent, rates=rates,
        lockouts=int(totals.get("g", 0)), active_defense_events=int(totals.get("f", 0)),
        infections=int(totals.get("t", 0)) if x == malicious else 0,
    )


@dataclass(frozen=True)
class RateCheck:
    action: str
    expected_rate: float
    stats: MomentStats
    mean_ok: bool
    variance_ok: bool | None  # None when the rate is below VARIANCE_MIN_RATE

    @property
    def passed(self) -> bool:
        return self.mean_ok and self.variance_ok is not False


def empirical_rate_check(s: PdosScenario | Scenario, profile: StrategyProfile, x: str, m: str,
                         replications: int, seed: int) -> dict[str, RateCheck]:
    """Compare the sampled count of each action with its Poisson rate.

    Mean: |mean - lam_a| <= 3 sqrt(lam_a / n). Variance (lam_a >= 5 only):
    |variance / mean - 1| <= 0.05.
    """
    if replications < 10_000:
        raise ValueError("rate checks need at least 10^4 replications")
    base = s.base if isinstance(s, PdosScenario) else s
    expected = action_rate_array(base, profile, base.ix("x", x), base.ix("m", m))
    s1 = np.zeros(len(base.actions))
    s2 = np.zeros(len(base.actions))
    children = np.random.SeedSequence(seed).spawn(len(list(_chunks(replications))))
    for n, child in zip(_chunks(replications), children):
        counts = sample_counts(base, profile, x, m, n, np.random.default_rng(child)).astype(float)
        s1 += counts.sum(axis=0)
        s2 += (counts ** 2).sum(axis=0)

    out = {}
    for i, a in enumerate(base.actions):
        st = MomentStats.from_sums(replications, s1[i], s2[i])
        lam_a = float(expected[i])
        mean_ok = abs(st.mean - lam_a) <= SE_BAND * np.sqrt(lam_a / replications)
        var_ok = None
        if lam_a >= VARIANCE_MIN_RATE:
            var_ok = bool(abs(st.variance / st.mean - 1.0) <= VARIANCE_REL_TOL)
        out[a] = RateCheck(a, lam_a, st, bool(mean_ok), var_ok)
    return out


# --------------------------------------------------------------------------
# Login traces
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LoginEpisode:
    """One sender's login attempts at one device.

    ``failures`` counts consecutive failed attempts; ``psg`` is False when the
    sender got in with fewer than tau_low failures. ``message`` is p or w
    (None without a PSG), ``evidence`` b or n (None unless the sender persisted).
    """

    device_type: str
    attempts: tuple[str, ...]
    success: bool
    failures: int
    psg: bool
    message: str | None
    evidence: str | None


def _passwords(dictionary, count):
    return tuple(dictionary[i % len(dictionary)] for i in range(count))


def login_episode(ps: PdosScenario, y: str, success_attempt: int | None, persist: bool = True) -> LoginEpisode:
    """Deterministic narrative for one device.

    ``success_attempt`` is the 1-based attempt at which the sender's password
    would be accepted (None: never). Attempts cycle through the dictionary.
    Fewer than tau_low failures means no PSG. Otherwise a sender who persists
    keeps trying up to tau_high attempts: success in that window is evidence
    n; failing throughout is evidence b for detector-equipped devices, while a
    device without a detector (type k) always reports n.
    """
    lo, hi, words = ps.tau_low, ps.tau_high, ps.password_dictionary
    if success_attempt is not None and success_attempt - 1 < lo:
        return LoginEpisode(y, _passwords(words, success_attempt), True, success_attempt - 1, False, None, None)
    if not persist:
        return LoginEpisode(y, _passwords(words, lo), False, lo, True, "w", None)
    if success_attempt is not None and success_attempt <= hi:
        return LoginEpisode(y, _passwords(words, success_attempt), True, success_attempt - 1, True, "p", "n")
    has_detector = ps.delta(y, "b", "d") != ps.delta(y, "b", "l")
    return LoginEpisode(y, _passwords(words, hi), False, hi, True, "p", "b" if has_detector else "n")


@dataclass(frozen=True)
class LoginTrace:
    sender_type: str
    seed: int
    calibrated: bool
    episodes: tuple[LoginEpisode, ...]
    warnings: tuple[str, ...] = ()

    def evidence_frequency(self, y: str, e: str = "b") -> tuple[int, int]:
        """(# episodes at type-y devices with evidence e, # persisted episodes at type y)."""
        persisted = [ep for ep in self.episodes if ep.device_type == y and ep.message == "p"]
        return sum(ep.evidence == e for ep in persisted), len(persisted)


def generate_login_trace(ps: PdosScenario, x: str, seed: int, *, devices: int | None = None,
                         calibrated: bool = True, early_success: float = 0.0) -> LoginTrace:
    """Login narratives for one sender facing a Poisson population of devices.

    The sender persists per sigma_x^S(p) = 1 (every episode that reaches the
    PSG persists). With probability ``early_success`` the sender gets in
    before tau_low and no PSG takes place.

    Uncalibrated: a sender who persists never succeeds, so detector-equipped
    devices always see b. Calibrated: the episode succeeds within tau_high
    with probability delta_y(n | x, p), so evidence frequencies follow the
    scenario's detector.
    """
    warnings = []
    if not ps.password_dictionary:
        raise ValueError("password dictionary is empty")
    if len(ps.password_dictionary) < ps.tau_low:
        warnings.append(f"dictionary has {len(ps.password_dictionary)} entries, fewer than tau_low = "
                        f"{ps.tau_low}; attempts repeat passwords")
    rng = np.random.default_rng(seed)
    n = int(rng.poisson(ps.lam)) if devices is None else int(devices)
    types = rng.choice(len(ps.base.receiver_types), size=n, p=ps.base.q_receiver)
    early = rng.random(n) < early_success
    late_draw = rng.random(n)
    attempt_draw = rng.integers(ps.tau_low + 1, ps.tau_high + 1, size=n)
    episodes = []
    for i in range(n):
        y = ps.base.receiver_types[types[i]]
        if early[i]:
            success = int(rng.integers(1, ps.tau_low + 1))
        elif calibrated and late_draw[i] < ps.delta(y, "n", x):
            success = int(attempt_draw[i])
        else:
            success = None
        episodes.append(login_episode(ps, y, success, persist=True))
    return LoginTrace(x, seed, calibrated, tuple(episodes), tuple(warnings))
