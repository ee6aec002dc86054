"""Expected utilities and Bayesian beliefs.

The sender's payoff is linear in the action counts, so its expectation only
needs the Poisson means (``sender_expected_utility``). The truncated double
sum over count vectors is kept as an independent check on that reduction.
Receiver utilities use the decoupled form: a receiver's payoff depends on the
sender's type, the message and her own action, not on other receivers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from psg_pdos.model import BeliefTable, Scenario, StrategyProfile
from psg_pdos.poisson_engine import action_rate_array, poisson_pmf_vector


@dataclass(frozen=True)
class BruteForceValue:
    value: float
    truncated_mass: float  # largest probability mass left outside the lattice, over messages


@dataclass(frozen=True)
class ReceiverActionValues:
    actions: tuple[str, ...]
    values: np.ndarray
    prohibited: np.ndarray

    def __getitem__(self, a: str) -> float:
        i = self.actions.index(a)
        if self.prohibited[i]:
            raise KeyError(f"action {a!r} is prohibited for this receiver type")
        return float(self.values[i])

    def best_value(self) -> float:
        return float(np.max(self.values[~self.prohibited]))

    def allowed(self) -> dict[str, float]:
        return {a: float(v) for a, v, p in zip(self.actions, self.values, self.prohibited) if not p}


def sender_expected_utility(s: Scenario, profile: StrategyProfile, x: str) -> float:
    """Expected payoff of sender type ``x``: sum_m sigma_x(m) sum_a lam_a(x, m) omega_x^a(m)."""
    ix = s.ix("x", x)
    total = 0.0
    for im in range(len(s.messages)):
        weight = profile.sender[ix, im]
        if weight == 0:
            continue
        total += weight * float(action_rate_array(s, profile, ix, im) @ s.sender_weights[ix, im])
    return total


def sender_expected_utility_bruteforce(s: Scenario, profile: StrategyProfile, x: str,
                                       truncation) -> BruteForceValue:
    """Sum P{c} U_x^S(m, c) over the lattice c_a <= truncation[a], for each message.

    ``truncation`` is an int (same bound for every action) or a sequence with
    one bound per action.
    """
    ix = s.ix("x", x)
    na = len(s.actions)
    bounds = [int(truncation)] * na if np.isscalar(truncation) else [int(b) for b in truncation]
    value, worst_mass = 0.0, 0.0
    for im in range(len(s.messages)):
        weight = profile.sender[ix, im]
        if weight == 0:
            continue
        rates = action_rate_array(s, profile, ix, im)
        joint = np.ones(())
        for a in range(na):
            joint = np.multiply.outer(joint, poisson_pmf_vector(bounds[a], rates[a]))
        grids = np.meshgrid(*[np.arange(b + 1) for b in bounds], indexing="ij")
        payoff = sum(s.sender_weights[ix, im, a] * grids[a] for a in range(na))
        value += weight * float(np.sum(joint * payoff))
        worst_mass = max(worst_mass, 1.0 - float(joint.sum()))
    return BruteForceValue(value, max(worst_mass, 0.0))


def posterior(s: Scenario, sender_strat: np.ndarray, iy: int, im: int, ie: int) -> tuple[np.ndarray, bool]:
    """Posterior over sender types and whether Bayes' rule applied (on path)."""
    weights = s.detector[iy, :, im, ie] * sender_strat[:, im] * s.q_sender
    total = weights.sum()
    if total > 0:
        return weights / total, True
    return np.array(s.offpath_belief, dtype=float), False


def belief_update(s: Scenario, sender_strat: np.ndarray, y: str, m: str, e: str) -> np.ndarray:
    """mu_y^R(. | m, e) over sender types; the scenario's off-path belief where the
    information set has probability zero."""
    mu, _ = posterior(s, np.asarray(sender_strat, dtype=float), s.ix("y", y), s.ix("m", m), s.ix("e", e))
    return mu


def belief_table(s: Scenario, sender_strat: np.ndarray) -> BeliefTable:
    ny, nm, ne = s.shape[1], s.shape[2], s.shape[3]
    mu = np.empty((ny, nm, ne, s.shape[0]))
    sender_strat = np.asarray(sender_strat, dtype=float)
    for iy in range(ny):
        for im in range(nm):
            for ie in range(ne):
                mu[iy, im, ie], _ = posterior(s, sender_strat, iy, im, ie)
    return BeliefTable(mu)


def receiver_action_values(s: Scenario, belief, y: str, m: str, e: str) -> ReceiverActionValues:
    """Belief-weighted value of each pure action for type ``y`` at (m, e).

    ``e`` does not enter the payoff directly; it is accepted so the signature
    names the information set the belief belongs to.
    """
    s.ix("e", e)
    iy, im = s.ix("y", y), s.ix("m", m)
    mu = np.asarray(belief, dtype=float)
    prohibited = s.prohibited[iy].copy()
    values = mu @ np.where(prohibited[None, :], 0.0, s.receiver_utility[iy, :, im, :])
    values = np.where(prohibited, np.nan, values)
    return ReceiverActionValues(s.actions, values, prohibited)
