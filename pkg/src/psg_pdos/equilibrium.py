"""Closed-form perfect Bayesian equilibria of the PDoS recruitment game.

Within the parameter regime below, every receiver trusts on evidence n, weak
receivers trust on b, legitimate senders persist, and the equilibrium is
pinned down by three numbers: sigma_d^S(p), sigma_o^R(.|p,b), sigma_v^R(.|p,b).
Which of the four regions applies depends on

    BP(a_k, a_o, a_v)  the malicious sender's per-receiver benefit of
                       persisting when receivers answer b with pure actions,
    TD                 the prior on d above which active receivers prefer f.

The mixed regions make one side indifferent through the other's mixture. The
receiver mixture comes from sender indifference (BP = 0, BP is linear in the
mixing weight). The sender's persistence rate comes from receiver
indifference: it is the rate that puts the posterior mu(d | p, b) exactly on
the indifference belief of the mixing receiver, with sigma_l^S(p) = 1.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from psg_pdos.model import (
    ACTIONS, EVIDENCE, MESSAGES, RECEIVER_TYPES, SENDER_TYPES, BeliefTable, PdosScenario,
    Scenario, StrategyProfile, validate_scenario,
)
from psg_pdos.payoff import belief_table, posterior, sender_expected_utility

BOUNDARY_TOL = 1e-12


class Region(str, enum.Enum):
    STATUS_QUO = "status_quo"
    ACTIVE_DETERRENCE = "active_deterrence"
    RESISTANT_ATTACKER = "resistant_attacker"
    VULNERABLE_ATTACKER = "vulnerable_attacker"
    BOUNDARY = "boundary"
    # BP(t,g,g) < 0 < BP(t,g,f): not a cell of the region table
    UNCLASSIFIED = "unclassified"

    def __str__(self):
        return self.value


MIXED_REGIONS = (Region.ACTIVE_DETERRENCE, Region.VULNERABLE_ATTACKER)


class ScenarioError(ValueError):
    """The scenario violates a model invariant."""


class AssumptionError(ValueError):
    """The scenario is outside the regime where the closed forms are equilibria."""


class InconsistencyError(ValueError):
    """A closed-form probability fell outside [0, 1]."""


# --------------------------------------------------------------------------
# Thresholds and assumptions
# --------------------------------------------------------------------------

def _ratio(num: float, den: float, what: str) -> float:
    if den == 0:
        raise ZeroDivisionError(f"degenerate denominator in {what}")
    return num / den


def trust_threshold(ps: PdosScenario) -> float:
    """Prior on d below which an undetecting receiver trusts: U(l,t) / (U(l,t) - U(d,t))."""
    ul, ud = ps.u_r("k", "l", "t"), ps.u_r("k", "d", "t")
    return _ratio(ul, ul - ud, "trust threshold")


def lockdown_threshold(ps: PdosScenario) -> float:
    """Prior on d above which a type-o receiver locks down on b (detector-weighted)."""
    ul = ps.u_r("o", "l", "t") * ps.delta("o", "b", "l")
    ud = ps.u_r("o", "d", "t") * ps.delta("o", "b", "d")
    return _ratio(ul, ul - ud, "lockdown threshold")


def threshold_td(ps: PdosScenario) -> float:
    """Prior on d above which a type-v receiver uses active defense on b."""
    ul = ps.u_r("v", "l", "f") * ps.delta("v", "b", "l")
    ud = ps.u_r("v", "d", "f") * ps.delta("v", "b", "d")
    return _ratio(ul, ul - ud, "TD threshold")


def indifference_belief(ps: PdosScenario, y: str, a: str) -> float:
    """Posterior mu(d | p, b) at which action ``a`` is worth exactly as much as g (zero)."""
    ul, ud = ps.u_r(y, "l", a), ps.u_r(y, "d", a)
    return _ratio(ul, ul - ud, f"indifference belief for {y}, {a}")


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of the regime checks.

    ``v_lockdown_*`` is the lock-down condition: some persistence rate phi leaves a
    type-v receiver strictly preferring g on b, i.e. both t and f are worth
    less than 0. ``v_reversed_*`` evaluates the same search with both
    inequalities reversed (t > 0 and f > 0); it is reported for comparison and
    does not gate the solver.
    """

    q_d: float
    trust_n_rhs: float
    trust_n_holds: bool
    lockdown_b_rhs: float
    lockdown_b_holds: bool
    v_lockdown_holds: bool
    v_lockdown_witness: float | None
    v_reversed_holds: bool
    v_reversed_witness: float | None

    @property
    def all_hold(self) -> bool:
        return self.trust_n_holds and self.lockdown_b_holds and self.v_lockdown_holds

    def failures(self) -> list[str]:
        out = []
        if not self.trust_n_holds:
            out.append(f"trust-on-n assumption fails: q_d = {self.q_d:.12g} >= {self.trust_n_rhs:.12g}")
        if not self.lockdown_b_holds:
            out.append(f"lockdown-on-b assumption fails: q_d = {self.q_d:.12g} <= {self.lockdown_b_rhs:.12g}")
        if not self.v_lockdown_holds:
            out.append("no persistence rate makes lockdown strictly optimal for type v on b")
        return out


def _belief_window(ps: PdosScenario, lo: float, hi: float) -> float | None:
    """A persistence rate phi in [0, 1] whose posterior mu_v(d | p, b) lies strictly
    inside (lo, hi), or None.

    With sigma_l(p) = 1 the posterior is a phi / (a phi + c), increasing in phi,
    so the reachable beliefs form an interval and the check is exact.
    """
    if not lo < hi:
        return None
    a = ps.delta("v", "b", "d") * ps.q_d
    c = ps.delta("v", "b", "l") * (1.0 - ps.q_d)
    if c == 0:
        # perfect detector: belief 1 whenever phi > 0, the off-path belief at phi = 0
        for phi, mu in ((1.0, 1.0 if a > 0 else float(ps.base.offpath_belief[1])),
                        (0.0, float(ps.base.offpath_belief[1]))):
            if lo < mu < hi:
                return phi
        return None
    # reachable beliefs: [0, mu_max]
    mu_max = a / (a + c)
    if lo >= mu_max:
        return None
    target = (max(lo, 0.0) + min(hi, mu_max)) / 2
    return min(1.0, max(0.0, persistence_for_posterior(ps, "v", target)))


def check_assumptions(ps: PdosScenario) -> AssumptionReport:
    q = ps.q_d
    a2 = trust_threshold(ps)
    a3 = lockdown_threshold(ps)
    mu_t = indifference_belief(ps, "v", "t")
    mu_f = indifference_belief(ps, "v", "f")
    # lockdown strictly best for v: t loses (mu > mu_t) and f loses (mu < mu_f)
    lock = _belief_window(ps, mu_t, mu_f)
    # both inequalities reversed: t and f both beat g
    printed = _belief_window(ps, mu_f, mu_t)
    return AssumptionReport(
        q_d=q, trust_n_rhs=a2, trust_n_holds=q < a2, lockdown_b_rhs=a3, lockdown_b_holds=q > a3,
        v_lockdown_holds=lock is not None, v_lockdown_witness=lock,
        v_reversed_holds=printed is not None, v_reversed_witness=printed,
    )


# --------------------------------------------------------------------------
# Strategies
# --------------------------------------------------------------------------

def build_profile(sigma_d_p: float, o_pb: dict[str, float], v_pb: dict[str, float]) -> StrategyProfile:
    """Full PDoS profile from the three free pieces; every other row follows the
    constant-strategy lemma (legitimate senders persist, everyone trusts on n,
    type k trusts on b). Rows after m = w are payoff-irrelevant and set to t."""
    sender = np.array([[1.0, 0.0], [sigma_d_p, 1.0 - sigma_d_p]])
    receiver = np.zeros((3, 2, 2, 3))
    receiver[:, :, :, 0] = 1.0  # trust everywhere by default
    for iy, row in ((1, o_pb), (2, v_pb)):
        receiver[iy, 0, 0, :] = [row.get(a, 0.0) for a in ACTIONS]
    return StrategyProfile(sender, receiver)


def constant_strategies(ps: PdosScenario) -> StrategyProfile:
    """The rows fixed by the constant-strategy lemma.

    The entries the lemma leaves open (sigma_d^S, sigma_v^R(.|p,b)) are NaN.
    sigma_o^R(g|p,b) = 1 is included as the lemma states it; it assumes
    sigma_d^S(p) = 1 and is replaced by a mixture in the vulnerable-attacker
    region.
    """
    report = check_assumptions(ps)
    if not report.all_hold:
        raise AssumptionError("; ".join(report.failures()))
    profile = build_profile(1.0, {"g": 1.0}, {"t": 1.0})
    sender = profile.sender.copy()
    sender[1, :] = np.nan
    receiver = profile.receiver.copy()
    receiver[2, 0, 0, :] = np.nan
    return StrategyProfile(sender, receiver)


def benefit_persist(ps: PdosScenario, receiver_strat: np.ndarray) -> float:
    """Per-receiver benefit to a malicious sender of persisting, given receiver rows
    sigma_y^R(a | p, e) as a (Y, M, E, A) or (Y, E, A) table."""
    sigma = np.asarray(receiver_strat, dtype=float)
    if sigma.ndim == 4:
        sigma = sigma[:, MESSAGES.index("p")]
    b = ps.base
    ix_d, im_p = b.ix("x", "d"), b.ix("m", "p")
    return float(np.einsum("y,ye,yea,a->", b.q_receiver, b.detector[:, ix_d, im_p, :],
                           sigma, b.sender_weights[ix_d, im_p]))


def benefit_persist_pure(ps: PdosScenario, a_k: str, a_o: str, a_v: str) -> float:
    """BP when types k, o, v answer b with the given pure actions and trust on n."""
    profile = build_profile(1.0, {a_o: 1.0}, {a_v: 1.0})
    receiver = profile.receiver.copy()
    receiver[0, 0, 0, :] = [1.0 if a == a_k else 0.0 for a in ACTIONS]
    return benefit_persist(ps, receiver)


@dataclass(frozen=True)
class RegionQuantities:
    q_d: float
    td: float
    bp_tgg: float
    bp_tgf: float


def region_quantities(ps: PdosScenario) -> RegionQuantities:
    return RegionQuantities(
        q_d=ps.q_d, td=threshold_td(ps),
        bp_tgg=benefit_persist_pure(ps, "t", "g", "g"),
        bp_tgf=benefit_persist_pure(ps, "t", "g", "f"),
    )


def region_from_quantities(qty: RegionQuantities, tol: float = BOUNDARY_TOL) -> Region:
    """Region table lookup; any defining quantity within ``tol`` of its threshold
    yields BOUNDARY."""
    near = lambda v: abs(v) <= tol  # noqa: E731
    if near(qty.bp_tgg):
        return Region.BOUNDARY
    if qty.bp_tgg < 0:
        if near(qty.bp_tgf):
            return Region.BOUNDARY
        return Region.VULNERABLE_ATTACKER if qty.bp_tgf < 0 else Region.UNCLASSIFIED
    if near(qty.q_d - qty.td):
        return Region.BOUNDARY
    if qty.q_d < qty.td:
        return Region.STATUS_QUO
    if near(qty.bp_tgf):
        return Region.BOUNDARY
    return Region.ACTIVE_DETERRENCE if qty.bp_tgf < 0 else Region.RESISTANT_ATTACKER


def classify_region(ps: PdosScenario, tol: float = BOUNDARY_TOL) -> Region:
    """Region label from BP(t,g,g), BP(t,g,f), TD and q^S(d).

    Pure table arithmetic: it does not check the regime assumptions. Use
    :func:`check_assumptions` (or :func:`solve_pdos`) for that.
    """
    return region_from_quantities(region_quantities(ps), tol)


def persistence_for_posterior(ps: PdosScenario, y: str, target: float) -> float:
    """sigma_d^S(p) that makes mu_y(d | p, b) equal ``target`` when sigma_l^S(p) = 1."""
    odds = target / (1.0 - target)
    return odds * ps.delta(y, "b", "l") * (1.0 - ps.q_d) / (ps.delta(y, "b", "d") * ps.q_d)


@dataclass(frozen=True)
class PrintedForms:
    """The region table's textbook closed forms, evaluated as written.

    ad_defense_prob: sigma_v(f|p,b) = [w_t q_k + w_g (q_o + q_v)] / [(w_g - w_f) q_v delta_v(b|d,p)]
    ad_persistence: sigma_d(p) = TD / q_d
    va_lockout_prob: sigma_{o,v}(g|p,b) = w_t / [(q_o + q_v) delta_o(b|d,p) (w_t - w_g)]
    va_persistence: sigma_d(p) = lockdown_threshold / q_d
    """

    ad_defense_prob: float
    ad_persistence: float
    va_lockout_prob: float
    va_persistence: float


def printed_forms(ps: PdosScenario) -> PrintedForms:
    wt, wg, wf = (ps.omega("d", a) for a in ACTIONS)
    qk, qo, qv = (ps.q_r(y) for y in RECEIVER_TYPES)
    dvb = ps.delta("v", "b", "d")
    return PrintedForms(
        ad_defense_prob=(wt * qk + wg * (qo + qv)) / ((wg - wf) * qv * dvb),
        ad_persistence=threshold_td(ps) / ps.q_d,
        va_lockout_prob=wt / ((qo + qv) * ps.delta("o", "b", "d") * (wt - wg)),
        va_persistence=lockdown_threshold(ps) / ps.q_d,
    )


@dataclass(frozen=True)
class PbneDiagnostics:
    """Deviation gains of a candidate equilibrium.

    sender_gain[(x, m)]     value of always sending m minus value of the mixture
    receiver_gain[(y,m,e)]  best pure action's value minus the mixture's value
    belief_error[(y,m,e)]   |mu - Bayes posterior|, on-path information sets only
    """

    tolerance: float
    sender_gain: dict = field(default_factory=dict)
    receiver_gain: dict = field(default_factory=dict)
    belief_error: dict = field(default_factory=dict)
    off_path: tuple = ()

    @property
    def max_sender_gain(self) -> float:
        return max(self.sender_gain.values(), default=0.0)

    @property
    def max_receiver_gain(self) -> float:
        return max(self.receiver_gain.values(), default=0.0)

    @property
    def max_belief_error(self) -> float:
        return max(self.belief_error.values(), default=0.0)

    @property
    def max_gain(self) -> float:
        return max(self.max_sender_gain, self.max_receiver_gain, self.max_belief_error)

    @property
    def passed(self) -> bool:
        return self.max_gain <= self.tolerance

    def worst(self) -> tuple[str, tuple, float]:
        """The single largest violation as (kind, where, amount)."""
        items = [("sender", k, v) for k, v in self.sender_gain.items()]
        items += [("receiver", k, v) for k, v in self.receiver_gain.items()]
        items += [("belief", k, v) for k, v in self.belief_error.items()]
        return max(items, key=lambda t: t[2])


@dataclass(frozen=True)
class EquilibriumResult:
    region: Region
    profile: StrategyProfile
    beliefs: BeliefTable
    diagnostics: PbneDiagnostics
    quantities: RegionQuantities
    assumptions: AssumptionReport
    printed: PrintedForms

    # convenience views of the free strategy entries
    @property
    def sigma_d_p(self) -> float:
        return float(self.profile.sender[1, 0])

    def receiver_pb(self, y: str, a: str) -> float:
        return float(self.profile.receiver[RECEIVER_TYPES.index(y), 0, 0, ACTIONS.index(a)])

    def mu_d_pb(self, y: str) -> float:
        return float(self.beliefs.mu[RECEIVER_TYPES.index(y), 0, 0, 1])


def _check_prob(value: float, what: str, tol: float = 1e-12) -> float:
    if not (-tol <= value <= 1 + tol) or math.isnan(value):
        raise InconsistencyError(f"{what} = {value:.12g} lies outside [0, 1]")
    return min(1.0, max(0.0, value))


def solve_pdos(ps: PdosScenario, *, require_assumptions: bool = True,
               tolerance: float = 1e-9, boundary_tol: float = BOUNDARY_TOL) -> EquilibriumResult:
    """Closed-form equilibrium for the scenario's region, verified on the spot.

    With ``require_assumptions=False`` the region's strategies are emitted even
    outside the regime; the attached diagnostics then show where they fail.
    """
    violations = validate_scenario(ps, symmetric=True)
    if violations:
        raise ScenarioError("; ".join(map(str, violations)))
    report = check_assumptions(ps)
    if require_assumptions and not report.all_hold:
        raise AssumptionError("; ".join(report.failures()))
    qty = region_quantities(ps)
    region = region_from_quantities(qty, boundary_tol)

    if region in (Region.STATUS_QUO, Region.RESISTANT_ATTACKER):
        v_action = "g" if region is Region.STATUS_QUO else "f"
        profile = build_profile(1.0, {"g": 1.0}, {v_action: 1.0})
    elif region is Region.ACTIVE_DETERRENCE:
        # BP is linear in the weight on f: (1 - s) BP(t,g,g) + s BP(t,g,f) = 0
        s_f = _check_prob(qty.bp_tgg / (qty.bp_tgg - qty.bp_tgf), "sigma_v(f|p,b)")
        target = indifference_belief(ps, "v", "f")
        sigma = _check_prob(persistence_for_posterior(ps, "v", target), "sigma_d(p)")
        profile = build_profile(sigma, {"g": 1.0}, {"g": 1.0 - s_f, "f": s_f})
    elif region is Region.VULNERABLE_ATTACKER:
        bp_ttt = benefit_persist_pure(ps, "t", "t", "t")
        s_g = _check_prob(bp_ttt / (bp_ttt - qty.bp_tgg), "sigma_{o,v}(g|p,b)")
        target = indifference_belief(ps, "o", "t")
        sigma = _check_prob(persistence_for_posterior(ps, "o", target), "sigma_d(p)")
        row = {"t": 1.0 - s_g, "g": s_g}
        profile = build_profile(sigma, row, row)
    else:
        raise AssumptionError(f"no closed form for region {region.value}")

    beliefs = belief_table(ps.base, profile.sender)
    diagnostics = verify_profile(ps.base, profile, beliefs, tolerance)
    return EquilibriumResult(region, profile, beliefs, diagnostics, qty, report, printed_forms(ps))


# --------------------------------------------------------------------------
# Verification (general PSG)
# --------------------------------------------------------------------------

def verify_profile(s: Scenario, profile: StrategyProfile, beliefs: BeliefTable | None = None,
                   tolerance: float = 1e-9) -> PbneDiagnostics:
    """Check sender optimality, receiver sequential rationality and Bayes
    consistency of beliefs for any finite PSG with decoupled receiver payoffs.

    ``beliefs=None`` uses the Bayes posteriors of ``profile`` (and the
    scenario's off-path belief where Bayes' rule is silent).
    """
    if beliefs is None:
        beliefs = belief_table(s, profile.sender)
    nx, ny, nm, ne, na = s.shape

    sender_gain = {}
    for ix, x in enumerate(s.sender_types):
        base_value = sender_expected_utility(s, profile, x)
        for im, m in enumerate(s.messages):
            pure = profile.sender.copy()
            pure[ix] = 0.0
            pure[ix, im] = 1.0
            sender_gain[(x, m)] = sender_expected_utility(s, profile.replace(sender=pure), x) - base_value

    receiver_gain, belief_error, off_path = {}, {}, []
    for iy, y in enumerate(s.receiver_types):
        allowed = ~s.prohibited[iy]
        for im, m in enumerate(s.messages):
            for ie, e in enumerate(s.evidence):
                bayes, on_path = posterior(s, profile.sender, iy, im, ie)
                if not on_path:
                    off_path.append((y, m, e))
                    continue
                mu = beliefs.mu[iy, im, ie]
                belief_error[(y, m, e)] = float(np.max(np.abs(mu - bayes)))
                values = mu @ np.where(allowed[None, :], s.receiver_utility[iy, :, im, :], 0.0)
                row = profile.receiver[iy, im, ie]
                if np.any(row[~allowed] > 0):
                    receiver_gain[(y, m, e)] = math.inf
                    continue
                receiver_gain[(y, m, e)] = float(values[allowed].max() - row[allowed] @ values[allowed])
    return PbneDiagnostics(tolerance, sender_gain, receiver_gain, belief_error, tuple(off_path))


def verify_pbne(ps: PdosScenario | Scenario, result: EquilibriumResult,
                tolerance: float = 1e-9) -> PbneDiagnostics:
    """Deviation-gain table for a solved (or hand-edited) equilibrium result."""
    s = ps.base if isinstance(ps, PdosScenario) else ps
    return verify_profile(s, result.profile, result.beliefs, tolerance)


__all__ = [
    "AssumptionError", "AssumptionReport", "EquilibriumResult", "InconsistencyError", "MIXED_REGIONS",
    "PbneDiagnostics", "PrintedForms", "Region", "RegionQuantities", "ScenarioError",
    "benefit_persist", "benefit_persist_pure", "build_profile", "check_assumptions", "classify_region",
    "constant_strategies", "indifference_belief", "lockdown_threshold", "persistence_for_posterior",
    "printed_forms", "region_from_quantities", "region_quantities", "solve_pdos", "threshold_td",
    "trust_threshold", "verify_pbne", "verify_profile", "SENDER_TYPES", "EVIDENCE",
]
