"""Monte Carlo oracle and login traces."""
import numpy as np
import pytest

from psg_pdos.equilibrium import Region, solve_pdos
from psg_pdos.fixtures import region_fixture
from psg_pdos.model import StrategyProfile, canonical_pdos, modify_pdos, uniform_profile
from psg_pdos.montecarlo import (
    MomentStats, empirical_rate_check, generate_login_trace, login_episode, simulate,
)
from psg_pdos.payoff import sender_expected_utility


def all_trust(s, sigma_d=1.0):
    return uniform_profile(s, "t").replace(sender=np.array([[1.0, 0.0], [sigma_d, 1 - sigma_d]]))


def test_moment_stats():
    x = np.array([1.0, 2.0, 4.0, 7.0])
    st = MomentStats.from_sums(4, x.sum(), (x ** 2).sum())
    assert st.mean == pytest.approx(x.mean())
    assert st.variance == pytest.approx(x.var(ddof=1))
    assert st.standard_error == pytest.approx(x.std(ddof=1) / 2)


def test_never_persisting_gives_zero(canonical):
    rep = simulate(canonical, all_trust(canonical.base, 0.0), "d", 1000, seed=1)
    assert rep.utility.mean == 0.0 and rep.persisted == 0


def test_all_trust_utility(canonical):
    rep = simulate(canonical, all_trust(canonical.base), "d", 20_000, seed=2)
    assert abs(rep.utility.mean - 100.0) <= 3 * rep.standard_error
    assert rep.lockouts == 0 and rep.active_defense_events == 0
    assert rep.infections > 0


def test_simulate_deterministic(canonical):
    prof = solve_pdos(region_fixture(Region.ACTIVE_DETERRENCE)).profile
    a = simulate(canonical, prof, "d", 5000, seed=9)
    b = simulate(canonical, prof, "d", 5000, seed=9)
    assert a == b


def test_simulate_rejects_zero_replications(canonical):
    with pytest.raises(ValueError):
        simulate(canonical, all_trust(canonical.base), "d", 0, seed=0)


def test_rate_check_all_trust(canonical):
    checks = empirical_rate_check(canonical, all_trust(canonical.base), "d", "p", 10_000, seed=4)
    assert checks["g"].stats.mean == 0.0 and checks["g"].passed
    assert checks["t"].variance_ok is True
    assert checks["f"].variance_ok is None


def test_rate_check_needs_enough_replications(canonical):
    with pytest.raises(ValueError):
        empirical_rate_check(canonical, all_trust(canonical.base), "d", "p", 100, seed=4)


def test_rate_check_active_defense_count():
    ps = region_fixture(Region.ACTIVE_DETERRENCE)
    prof = solve_pdos(ps).profile
    checks = empirical_rate_check(ps, prof, "d", "p", 20_000, seed=8)
    assert checks["f"].mean_ok
    assert all(c.passed for c in checks.values())
    again = empirical_rate_check(ps, prof, "d", "p", 20_000, seed=8)
    assert again == checks


def test_sender_deviation_not_profitable():
    ps = region_fixture(Region.ACTIVE_DETERRENCE)
    res = solve_pdos(ps)
    base = simulate(ps, res.profile, "d", 20_000, seed=31)
    for delta in (-0.1, 0.1):
        s = res.sigma_d_p + delta
        dev = res.profile.replace(sender=np.array([[1.0, 0.0], [s, 1 - s]]))
        rep = simulate(ps, dev, "d", 20_000, seed=32)
        se = np.hypot(rep.standard_error, base.standard_error)
        assert rep.utility.mean - base.utility.mean <= 3 * se


def test_sender_deviation_status_quo_loses():
    ps = region_fixture(Region.STATUS_QUO)
    res = solve_pdos(ps)
    base = simulate(ps, res.profile, "d", 20_000, seed=5)
    dev = res.profile.replace(sender=np.array([[1.0, 0.0], [0.9, 0.1]]))
    rep = simulate(ps, dev, "d", 20_000, seed=6)
    assert rep.utility.mean < base.utility.mean


# ---- login traces ------------------------------------------------------

def test_episode_full_dictionary_reaches_tau_low(canonical):
    ep = login_episode(canonical, "o", success_attempt=None, persist=False)
    assert ep.failures == 5 and ep.psg and ep.message == "w"
    assert ep.attempts == canonical.password_dictionary


def test_episode_early_success_no_psg(canonical):
    ep = login_episode(canonical, "o", success_attempt=1)
    assert ep.success and not ep.psg and ep.message is None


def test_episode_persist_failure_gives_b(canonical):
    ep = login_episode(canonical, "o", success_attempt=None)
    assert ep.failures == 9 and ep.evidence == "b" and ep.message == "p"
    assert ep.attempts[5:] == canonical.password_dictionary[:4]   # dictionary cycles
    assert login_episode(canonical, "k", success_attempt=None).evidence == "n"


def test_episode_late_success_gives_n(canonical):
    ep = login_episode(canonical, "v", success_attempt=8)
    assert ep.success and ep.psg and ep.evidence == "n"


def test_short_dictionary_flagged(canonical):
    short = canonical.replace(password_dictionary=("admin", "root"))
    assert generate_login_trace(short, "d", seed=0).warnings
    assert not generate_login_trace(canonical, "d", seed=0).warnings
    with pytest.raises(ValueError):
        generate_login_trace(canonical.replace(password_dictionary=()), "d", seed=0)


def test_uncalibrated_trace_always_b(canonical):
    trace = generate_login_trace(canonical, "d", seed=3, calibrated=False)
    hits, total = trace.evidence_frequency("o")
    assert total > 0 and hits == total


@pytest.mark.parametrize("x", ["d", "l"])
def test_calibrated_trace_matches_detector(canonical, x):
    trace = generate_login_trace(canonical, x, seed=12, devices=40_000)
    hits, total = trace.evidence_frequency("o")
    p = canonical.delta("o", "b", x)
    se = np.sqrt(p * (1 - p) / total)
    assert abs(hits / total - p) <= 3 * se


def test_trace_early_success(canonical):
    trace = generate_login_trace(canonical, "l", seed=1, devices=500, early_success=1.0)
    assert not any(ep.psg for ep in trace.episodes)


def test_trace_deterministic(canonical):
    assert generate_login_trace(canonical, "d", seed=4) == generate_login_trace(canonical, "d", seed=4)


def test_zero_population_trace(canonical):
    assert generate_login_trace(modify_pdos(canonical, lam=0.0), "d", seed=1).episodes == ()


def test_analytic_matches_simulation_vulnerable():
    ps = region_fixture(Region.VULNERABLE_ATTACKER)
    prof = solve_pdos(ps).profile
    rep = simulate(ps, prof, "d", 20_000, seed=77)
    assert abs(rep.utility.mean - sender_expected_utility(ps.base, prof, "d")) <= 3 * rep.standard_error
    assert isinstance(prof, StrategyProfile)
