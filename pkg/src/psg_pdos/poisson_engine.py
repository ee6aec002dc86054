"""Per-action Poisson rates, count probabilities and population sampling.

When a population of Poisson(lam) receivers is thinned by type, evidence and
action, the count of receivers playing each action is an independent Poisson
variable with rate

    lam_a = lam * sum_y sum_e q^R(y) delta_y(e | x, m) sigma_y^R(a | m, e).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from psg_pdos.model import ActionCount, Scenario, StrategyProfile


@dataclass(frozen=True)
class ActionRates:
    actions: tuple[str, ...]
    rates: tuple[float, ...]

    def __getitem__(self, a: str) -> float:
        return self.rates[self.actions.index(a)]

    def as_array(self) -> np.ndarray:
        return np.array(self.rates)

    @property
    def total(self) -> float:
        return float(sum(self.rates))


def action_rate_array(s: Scenario, profile: StrategyProfile, ix: int, im: int) -> np.ndarray:
    # (Y,) x (Y, E) x (Y, E, A) -> (A,)
    return s.lam * np.einsum("y,ye,yea->a", s.q_receiver, s.detector[:, ix, im, :],
                             profile.receiver[:, im, :, :])


def action_rates(s: Scenario, profile: StrategyProfile, x: str, m: str) -> ActionRates:
    """Poisson rate of each action's count, conditional on type ``x`` sending ``m``."""
    rates = action_rate_array(s, profile, s.ix("x", x), s.ix("m", m))
    return ActionRates(s.actions, tuple(float(r) for r in rates))


def poisson_logpmf(k: int, mean: float) -> float:
    """log P{K = k} for K ~ Poisson(mean), via lgamma so large k never overflows."""
    if k < 0:
        return -math.inf
    if mean == 0:
        return 0.0 if k == 0 else -math.inf
    return k * math.log(mean) - mean - math.lgamma(k + 1)


def poisson_pmf_vector(kmax: int, mean: float) -> np.ndarray:
    """P{K = k} for k = 0..kmax."""
    k = np.arange(kmax + 1)
    if mean == 0:
        out = np.zeros(kmax + 1)
        out[0] = 1.0
        return out
    return np.exp(k * math.log(mean) - mean - gammaln(k + 1))


def count_probability(rates: ActionRates, c: ActionCount) -> float:
    """Probability of the joint count vector ``c`` (independent Poisson entries)."""
    total = 0.0
    for a, lam_a in zip(rates.actions, rates.rates):
        total += poisson_logpmf(c[a], lam_a)
        if total == -math.inf:
            return 0.0
    return min(1.0, math.exp(total))


def _joint_cells(s: Scenario, profile: StrategyProfile, ix: int, im: int):
    return s.q_receiver, s.detector[:, ix, im, :], profile.receiver[:, im, :, :]


def _multinomial_rows(rng: np.random.Generator, n: np.ndarray, pvals: np.ndarray) -> np.ndarray:
    # Normalize against rounding so numpy accepts the row; zero rows stay zero.
    p = np.clip(np.asarray(pvals, dtype=float), 0.0, None)
    total = p.sum()
    if total <= 0:
        return np.zeros(n.shape + p.shape, dtype=np.int64)
    return rng.multinomial(n, p / total)


def sample_counts(s: Scenario, profile: StrategyProfile, x: str, m: str, n: int,
                  rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` independent populations; returns an (n, A) array of action counts.

    Each population has N ~ Poisson(lam) receivers. Receivers are split by
    type, then by the evidence they observe, then by the action they take;
    each split is a multinomial, which is exactly the tally of independent
    per-receiver draws.
    """
    ix, im = s.ix("x", x), s.ix("m", m)
    q, delta, sigma = _joint_cells(s, profile, ix, im)
    ny, ne, na = sigma.shape
    total = rng.poisson(s.lam, size=n) if s.lam > 0 else np.zeros(n, dtype=np.int64)
    by_type = _multinomial_rows(rng, total, q)
    counts = np.zeros((n, na), dtype=np.int64)
    for iy in range(ny):
        by_evidence = _multinomial_rows(rng, by_type[:, iy], delta[iy])
        for ie in range(ne):
            counts += _multinomial_rows(rng, by_evidence[:, ie], sigma[iy, ie])
    return counts


def sample_population(s: Scenario, profile: StrategyProfile, x: str, m: str, seed) -> ActionCount:
    """One seeded draw of the receivers' action counts."""
    rng = np.random.default_rng(seed)
    counts = sample_counts(s, profile, x, m, 1, rng)[0]
    return ActionCount(s.actions, tuple(int(c) for c in counts))
