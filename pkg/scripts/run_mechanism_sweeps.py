"""Legal and active-defense sweeps on the regime fixtures; writes CSVs to results/.

    python scripts/run_mechanism_sweeps.py [--out results] [--steps 50]
"""
import argparse
from pathlib import Path

import numpy as np

from psg_pdos.cli import fmt
from psg_pdos.equilibrium import Region
from psg_pdos.fixtures import region_fixture, regime_pdos, sharp_detector_pdos
from psg_pdos.mechanism_lab import SweepRow, SweepSpec, persistence_floor, run_sweep


def write(result, path):
    cols = SweepRow.columns()
    lines = [",".join(cols)]
    lines += [",".join(fmt(getattr(r, c)) for c in cols) for r in result.rows]
    path.write_text("\n".join(lines) + "\n")


def summarize(name, result):
    regions = [r.region for r in result.rows]
    ok = sum(r.status == "ok" for r in result.rows)
    sig = result.column("sigma_dS_p")
    print(f"{name}: {ok}/{len(regions)} solved, regions {sorted(set(regions))}, "
          f"sigma_d range {np.nanmin(sig):.4g}..{np.nanmax(sig):.4g}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--steps", type=int, default=50)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    sweeps = {
        # legal mechanism: shrink the weak-device share inside the vulnerable segment
        "legal_vulnerable": SweepSpec(region_fixture(Region.VULNERABLE_ATTACKER), "legal",
                                      tuple(np.linspace(0.5, 0.05, args.steps))),
        # active defense: raise the reward for catching a malicious login
        "incentive_regime": SweepSpec(regime_pdos(), "incentive", tuple(np.geomspace(0.01, 0.99, args.steps))),
        "incentive_sharp": SweepSpec(sharp_detector_pdos(), "incentive",
                                     tuple(np.geomspace(1e-4, 0.99, args.steps))),
        # heavier active-defense penalty on the attacker
        "defense_weight": SweepSpec(regime_pdos(), "defense_weight", tuple(np.linspace(-12, -0.05, args.steps))),
    }
    for name, spec in sweeps.items():
        res = run_sweep(spec)
        write(res, out / f"sweep_{name}.csv")
        summarize(name, res)
    print(f"persistence floor, regime fixture: {persistence_floor(regime_pdos()):.4g}")
    print(f"persistence floor, sharp detector: {persistence_floor(sharp_detector_pdos()):.4g}")


if __name__ == "__main__":
    main()
