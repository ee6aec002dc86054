"""Command-line entry point: ``psg-pdos {classify,solve,sweep,simulate,canonical}``.

Exit codes: 0 success, 1 verification failed, 2 unreadable or invalid
scenario, 3 scenario outside the closed-form regime (or no closed form).
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from psg_pdos.equilibrium import (
    AssumptionError, InconsistencyError, Region, ScenarioError, check_assumptions,
    region_from_quantities, region_quantities, solve_pdos,
)
from psg_pdos.mechanism_lab import KNOBS, SweepRow, SweepSpec, bounded_activity, run_sweep
from psg_pdos.model import ACTIONS, SENDER_TYPES, canonical_pdos, validate_scenario
from psg_pdos.montecarlo import empirical_rate_check, simulate
from psg_pdos.payoff import sender_expected_utility
from psg_pdos.scenario_io import ScenarioFileError, load_scenario, save_scenario

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_REGIME = 0, 1, 2, 3

SOLVE_COLUMNS = (
    "region", "sigma_dS_p", "sigma_oR_g_pb", "sigma_vR_g_pb", "sigma_vR_f_pb", "mu_o_d_pb", "mu_v_d_pb",
    "bp_tgg", "bp_tgf", "td", "bounded_activity", "max_deviation_gain",
)
SIMULATE_COLUMNS = (
    ("sender_type", "replications", "seed", "utility_mean", "utility_se", "utility_analytic",
     "utility_within_3se")
    + tuple(f"{k}_{a}" for a in ACTIONS for k in ("rate_mean", "rate_var", "rate_expected", "rate_ok"))
    + ("lockouts", "active_defense_events", "infections")
)


def fmt(value) -> str:
    """CSV cell: numbers to 12 significant digits, everything else via str."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "nan" if math.isnan(value) else format(float(value), ".12g")
    return str(value)


def write_csv(columns, rows, out: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    if out in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(out, "w", newline="") as fh:
            fh.write(buf.getvalue())


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _load(path: str):
    """Scenario from ``path`` plus an exit code (nonzero: report already printed)."""
    try:
        ps = load_scenario(path)
    except (OSError, ScenarioFileError) as exc:
        _err(f"{path}: {exc}")
        return None, EXIT_INPUT
    violations = validate_scenario(ps, symmetric=True)
    if violations:
        _err(f"{path}: {len(violations)} violation(s)")
        for v in violations:
            print(f"  {v}", file=sys.stderr)
        return None, EXIT_INPUT
    return ps, EXIT_OK


def _solve(ps, args):
    try:
        return solve_pdos(ps, require_assumptions=not args.allow_outside_regime,
                          tolerance=args.verify_tolerance), EXIT_OK
    except AssumptionError as exc:
        _err(f"outside the closed-form regime: {exc}")
        return None, EXIT_REGIME
    except (InconsistencyError, ScenarioError, ZeroDivisionError) as exc:
        _err(str(exc))
        return None, EXIT_REGIME


def cmd_classify(args) -> int:
    ps, code = _load(args.scenario)
    if ps is None:
        return code
    try:
        qty = region_quantities(ps)
    except ZeroDivisionError as exc:
        _err(str(exc))
        return EXIT_INPUT
    region = region_from_quantities(qty)
    report = check_assumptions(ps)
    print(region.value)
    if region is Region.BOUNDARY:
        print("boundary: a defining quantity is within tolerance of its threshold")
    print(f"q_d\t{fmt(qty.q_d)}")
    print(f"td\t{fmt(qty.td)}")
    print(f"bp_tgg\t{fmt(qty.bp_tgg)}")
    print(f"bp_tgf\t{fmt(qty.bp_tgf)}")
    print(f"trust_on_n\t{'holds' if report.trust_n_holds else 'fails'}\t(q_d < {fmt(report.trust_n_rhs)})")
    print(f"lockdown_on_b\t{'holds' if report.lockdown_b_holds else 'fails'}\t(q_d > {fmt(report.lockdown_b_rhs)})")
    witness = "" if report.v_lockdown_witness is None else f"\t(phi = {fmt(report.v_lockdown_witness)})"
    print(f"v_lockdown\t{'holds' if report.v_lockdown_holds else 'fails'}{witness}")
    return EXIT_OK


def cmd_solve(args) -> int:
    ps, code = _load(args.scenario)
    if ps is None:
        return code
    res, code = _solve(ps, args)
    if res is None:
        return code
    q = res.quantities
    row = dict(
        region=res.region.value, sigma_dS_p=res.sigma_d_p, sigma_oR_g_pb=res.receiver_pb("o", "g"),
        sigma_vR_g_pb=res.receiver_pb("v", "g"), sigma_vR_f_pb=res.receiver_pb("v", "f"),
        mu_o_d_pb=res.mu_d_pb("o"), mu_v_d_pb=res.mu_d_pb("v"), bp_tgg=q.bp_tgg, bp_tgf=q.bp_tgf,
        td=q.td, bounded_activity=bounded_activity(res, ps),
        max_deviation_gain=res.diagnostics.max_gain,
    )
    write_csv(SOLVE_COLUMNS, [row], args.out)
    if not res.diagnostics.passed:
        kind, where, amount = res.diagnostics.worst()
        _err(f"verification failed: {kind} deviation gain {fmt(amount)} at {where} "
             f"exceeds {fmt(args.verify_tolerance)}")
        return EXIT_VERIFY
    return EXIT_OK


def cmd_sweep(args) -> int:
    ps, code = _load(args.scenario)
    if ps is None:
        return code
    if args.steps < 1:
        _err("--steps must be >= 1")
        return EXIT_INPUT
    if args.geometric:
        grid = np.geomspace(args.start, args.stop, args.steps)
    else:
        grid = np.linspace(args.start, args.stop, args.steps)
    result = run_sweep(SweepSpec(ps, args.knob, tuple(grid)), tolerance=args.verify_tolerance)
    cols = SweepRow.columns()
    write_csv(cols, [{c: getattr(r, c) for c in cols} for r in result.rows], args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    ps, code = _load(args.scenario)
    if ps is None:
        return code
    res, code = _solve(ps, args)
    if res is None:
        return code
    rows = []
    # one child seed per sender type keeps the rows independent
    seeds = np.random.SeedSequence(args.seed).generate_state(2 * len(SENDER_TYPES))
    for i, x in enumerate(SENDER_TYPES):
        rep = simulate(ps, res.profile, x, args.replications, int(seeds[2 * i]))
        analytic = sender_expected_utility(ps.base, res.profile, x)
        checks = empirical_rate_check(ps, res.profile, x, "p", max(args.replications, 10_000),
                                      int(seeds[2 * i + 1]))
        row = dict(sender_type=x, replications=rep.replications, seed=args.seed,
                   utility_mean=rep.utility.mean, utility_se=rep.standard_error,
                   utility_analytic=analytic,
                   utility_within_3se=abs(rep.utility.mean - analytic) <= 3 * rep.standard_error,
                   lockouts=rep.lockouts, active_defense_events=rep.active_defense_events,
                   infections=rep.infections)
        for a in ACTIONS:
            c = checks[a]
            row.update({f"rate_mean_{a}": c.stats.mean, f"rate_var_{a}": c.stats.variance,
                        f"rate_expected_{a}": c.expected_rate, f"rate_ok_{a}": c.passed})
        rows.append(row)
    write_csv(SIMULATE_COLUMNS, rows, args.out)
    return EXIT_OK


def cmd_canonical(args) -> int:
    save_scenario(canonical_pdos(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="psg-pdos", description="Poisson signaling games for botnet recruitment.")
    sub = p.add_subparsers(dest="command", required=True)

    def solver_flags(sp):
        sp.add_argument("--verify-tolerance", type=float, default=1e-9,
                        help="largest acceptable deviation gain (default 1e-9)")
        sp.add_argument("--allow-outside-regime", action="store_true",
                        help="emit the region's strategies even when the regime assumptions fail")

    sp = sub.add_parser("classify", help="print region, thresholds and assumption checks")
    sp.add_argument("scenario")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("solve", help="solve and verify; one CSV row")
    sp.add_argument("scenario")
    sp.add_argument("--out", default="-")
    solver_flags(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("sweep", help="sweep a mechanism knob; one CSV row per grid point")
    sp.add_argument("scenario")
    sp.add_argument("--knob", choices=KNOBS, required=True)
    sp.add_argument("--from", dest="start", type=float, required=True)
    sp.add_argument("--to", dest="stop", type=float, required=True)
    sp.add_argument("--steps", type=int, default=50)
    sp.add_argument("--geometric", action="store_true", help="geometric instead of linear grid")
    sp.add_argument("--verify-tolerance", type=float, default=1e-9)
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("simulate", help="Monte Carlo check of the solved equilibrium")
    sp.add_argument("scenario")
    sp.add_argument("--replications", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="-")
    solver_flags(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("canonical", help="write the reference scenario file")
    sp.add_argument("--out", default="canonical.yaml")
    sp.set_defaults(func=cmd_canonical)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
