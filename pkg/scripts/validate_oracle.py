"""Cross-check the closed forms against the brute-force and Monte Carlo oracles.

    python scripts/validate_oracle.py [--replications 100000] [--seed 0]
"""
import argparse

import numpy as np

from psg_pdos.equilibrium import Region, solve_pdos
from psg_pdos.fixtures import region_fixture
from psg_pdos.model import modify_pdos
from psg_pdos.montecarlo import empirical_rate_check, simulate
from psg_pdos.payoff import sender_expected_utility, sender_expected_utility_bruteforce

REGIONS = (Region.STATUS_QUO, Region.ACTIVE_DETERRENCE, Region.RESISTANT_ATTACKER, Region.VULNERABLE_ATTACKER)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replications", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    seeds = np.random.SeedSequence(args.seed).generate_state(3 * len(REGIONS))

    print(f"{'region':22s} {'max gain':>10s} {'lattice err':>12s} {'MC mean':>10s} {'analytic':>10s} "
          f"{'3SE':>8s}  rates")
    for i, region in enumerate(REGIONS):
        ps = region_fixture(region)
        res = solve_pdos(ps)
        small = modify_pdos(ps, lam=3.0)
        prof_small = solve_pdos(small).profile
        bf = sender_expected_utility_bruteforce(small.base, prof_small, "d", 40)
        lattice_err = abs(bf.value - sender_expected_utility(small.base, prof_small, "d"))
        rep = simulate(ps, res.profile, "d", args.replications, int(seeds[3 * i]))
        analytic = sender_expected_utility(ps.base, res.profile, "d")
        checks = empirical_rate_check(ps, res.profile, "d", "p", max(args.replications, 10_000),
                                      int(seeds[3 * i + 1]))
        rates = "ok" if all(c.passed for c in checks.values()) else "FAIL"
        print(f"{region.value:22s} {res.diagnostics.max_gain:10.2g} {lattice_err:12.2g} "
              f"{rep.utility.mean:10.4g} {analytic:10.4g} {3 * rep.standard_error:8.3g}  {rates}")


if __name__ == "__main__":
    main()
