"""Hand-built and randomized scenarios inside the closed-form regime.

The canonical fixture's defense payoff U_v(d,p,f) = 2 puts the active
receiver's indifference belief (1/3) below the trust/lockdown belief (1/2),
so no persistence rate makes lockdown optimal for type v and the region
table's mixed strategies are not equilibria there. The regime fixtures keep
every canonical number except U_v(d,p,f) = 0.5, which restores the
lockdown condition, and then move one knob per region.
"""
from __future__ import annotations

import numpy as np

from psg_pdos.equilibrium import (
    BOUNDARY_TOL, Region, check_assumptions, classify_region, indifference_belief,
    lockdown_threshold, threshold_td, trust_threshold,
)
from psg_pdos.model import PdosScenario, canonical_pdos, modify_pdos, pdos_scenario

REGIME_DEFENSE_UTILITY = (-1.0, 0.5)


def regime_pdos() -> PdosScenario:
    """Canonical fixture with U_v(d,p,f) = 0.5 (active deterrence)."""
    return modify_pdos(canonical_pdos(), defense_utility=REGIME_DEFENSE_UTILITY)


def region_fixture(region: Region | str) -> PdosScenario:
    """A hand-constructed scenario in ``region`` satisfying every regime assumption."""
    region = Region(region)
    base = regime_pdos()
    if region is Region.ACTIVE_DETERRENCE:
        return base
    if region is Region.STATUS_QUO:
        return modify_pdos(base, q_d=0.15)
    if region is Region.RESISTANT_ATTACKER:
        return modify_pdos(base, omega_d={"t": 1.0, "g": -0.5, "f": -0.2})
    if region is Region.VULNERABLE_ATTACKER:
        return modify_pdos(base, omega_d={"t": 1.0, "g": -3.0, "f": -6.0})
    raise ValueError(f"no fixture for {region.value}")


def sharp_detector_pdos(false_alarm: float = 1e-5) -> PdosScenario:
    """Regime fixture whose o/v detectors rarely flag legitimate logins."""
    return modify_pdos(regime_pdos(), detector_b={
        "k": (0.0, 0.0), "o": (false_alarm, 0.9), "v": (false_alarm, 0.9)})


def _interior(rng, lo, hi, margin=0.05):
    width = hi - lo
    return lo + width * rng.uniform(margin, 1 - margin)


def random_region_pdos(region: Region | str, rng: np.random.Generator,
                       max_tries: int = 10_000) -> PdosScenario:
    """Rejection-sample a symmetric scenario in ``region`` that satisfies C1-C5,
    the detector ordering and the three regime assumptions."""
    region = Region(region)
    for _ in range(max_tries):
        ut_l, ut_d = rng.uniform(0.2, 3.0), -rng.uniform(0.2, 3.0)
        uf_l = -rng.uniform(0.2, 3.0)
        # lockdown condition: f's indifference belief above t's
        uf_d = rng.uniform(0.05, 0.95) * (-uf_l) * (-ut_d) / ut_l
        d_hi = rng.uniform(0.5, 0.99)
        d_lo = rng.uniform(0.005, 0.9) * d_hi
        q_r = rng.dirichlet([2.0, 2.0, 2.0])
        if q_r.min() < 0.02:
            continue
        omega = {"t": rng.uniform(0.2, 3.0), "g": -rng.uniform(0.05, 4.0), "f": -rng.uniform(0.05, 12.0)}
        s = pdos_scenario(
            lam=rng.uniform(1.0, 200.0), q_d=0.5,
            q_receiver=dict(zip("kov", q_r)),
            detector_b={"k": (0.0, 0.0), "o": (d_lo, d_hi), "v": (d_lo, d_hi)},
            trust_utility={y: (ut_l, ut_d) for y in "kov"},
            defense_utility=(uf_l, uf_d),
            omega_d=omega,
        )
        lo, hi = lockdown_threshold(s), trust_threshold(s)
        td = threshold_td(s)
        if region is Region.STATUS_QUO:
            hi = min(hi, td)
        elif region in (Region.ACTIVE_DETERRENCE, Region.RESISTANT_ATTACKER):
            lo = max(lo, td)
        if hi - lo < 1e-3:
            continue
        s = modify_pdos(s, q_d=_interior(rng, lo, hi))
        if classify_region(s, tol=1e3 * BOUNDARY_TOL) is not region:
            continue
        if check_assumptions(s).all_hold:
            return s
    raise RuntimeError(f"could not sample a {region.value} scenario in {max_tries} tries")


__all__ = [
    "REGIME_DEFENSE_UTILITY", "random_region_pdos", "region_fixture", "regime_pdos",
    "sharp_detector_pdos", "indifference_belief",
]
