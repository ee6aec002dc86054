"""Parameter sweeps for the legal and active-defense mechanisms.

Knobs:
    legal           grid value is the new q^R(k); the removed mass goes to
                    q^R(o), q^R(v) is held fixed
    incentive       grid value is U_v^R(d, p, f)
    defense_weight  grid value is omega_d^f
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from psg_pdos.equilibrium import (
    AssumptionError, EquilibriumResult, InconsistencyError, Region, ScenarioError,
    lockdown_threshold, region_quantities, region_from_quantities, solve_pdos, threshold_td,
)
from psg_pdos.model import PdosScenario, modify_pdos, pdos_params, validate_scenario

KNOBS = ("legal", "incentive", "defense_weight")


@dataclass(frozen=True)
class SweepSpec:
    base: PdosScenario
    knob: str
    grid: tuple[float, ...]

    def __post_init__(self):
        if self.knob not in KNOBS:
            raise ValueError(f"unknown knob {self.knob!r}; expected one of {KNOBS}")
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))


@dataclass(frozen=True)
class SweepRow:
    knob_value: float
    region: str
    sigma_dS_p: float
    sigma_oR_g_pb: float
    sigma_vR_g_pb: float
    sigma_vR_f_pb: float
    bounded_activity: float
    bp_tgg: float
    bp_tgf: float
    td: float
    q_sender_d: float
    max_deviation_gain: float
    status: str  # "ok" or a short error description

    @classmethod
    def columns(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple[SweepRow, ...]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=object if name in ("region", "status")
                        else float)

    def segment(self, region: Region | str) -> list[SweepRow]:
        """Rows solved successfully in ``region``."""
        label = Region(region).value
        return [r for r in self.rows if r.region == label and r.status == "ok"]


def apply_knob(base: PdosScenario, knob: str, value: float) -> PdosScenario:
    params = pdos_params(base)
    if knob == "legal":
        q = dict(params["q_receiver"])
        q["o"] += q["k"] - value
        q["k"] = value
        return modify_pdos(base, q_receiver=q)
    if knob == "incentive":
        return modify_pdos(base, defense_utility=(params["defense_utility"][0], value))
    if knob == "defense_weight":
        return modify_pdos(base, omega_d={**params["omega_d"], "f": value})
    raise ValueError(f"unknown knob {knob!r}")


def bounded_activity(result: EquilibriumResult, s: PdosScenario) -> float:
    """Total scanning activity sigma_d^S(p) * q^S(d)."""
    return result.sigma_d_p * s.q_d


def _failed_row(value: float, s: PdosScenario | None, status: str) -> SweepRow:
    nan = math.nan
    region, bp_tgg, bp_tgf, td, q = "error", nan, nan, nan, nan
    if s is not None:
        try:
            qty = region_quantities(s)
            region = region_from_quantities(qty).value
            bp_tgg, bp_tgf, td, q = qty.bp_tgg, qty.bp_tgf, qty.td, qty.q_d
        except (ZeroDivisionError, ValueError):
            pass
    return SweepRow(value, region, nan, nan, nan, nan, nan, bp_tgg, bp_tgf, td, q, nan, status)


def sweep_point(spec: SweepSpec, value: float, tolerance: float = 1e-9) -> SweepRow:
    try:
        s = apply_knob(spec.base, spec.knob, value)
    except (ValueError, KeyError) as exc:
        return _failed_row(value, None, f"invalid: {exc}")
    violations = validate_scenario(s)
    if violations:
        return _failed_row(value, s, "invalid: " + "; ".join(map(str, violations)))
    try:
        res = solve_pdos(s, tolerance=tolerance)
    except AssumptionError as exc:
        return _failed_row(value, s, f"outside regime: {exc}")
    except (InconsistencyError, ScenarioError, ZeroDivisionError) as exc:
        return _failed_row(value, s, f"error: {exc}")
    qty = res.quantities
    return SweepRow(
        knob_value=value, region=res.region.value, sigma_dS_p=res.sigma_d_p,
        sigma_oR_g_pb=res.receiver_pb("o", "g"), sigma_vR_g_pb=res.receiver_pb("v", "g"),
        sigma_vR_f_pb=res.receiver_pb("v", "f"), bounded_activity=bounded_activity(res, s),
        bp_tgg=qty.bp_tgg, bp_tgf=qty.bp_tgf, td=qty.td, q_sender_d=qty.q_d,
        max_deviation_gain=res.diagnostics.max_gain,
        status="ok" if res.diagnostics.passed else "verification failed",
    )


def run_sweep(spec: SweepSpec, tolerance: float = 1e-9) -> SweepResult:
    """Solve and verify every grid point; failures are recorded, never raised."""
    return SweepResult(spec, tuple(sweep_point(spec, v, tolerance) for v in spec.grid))


def incentive_for_persistence(base: PdosScenario, target: float) -> float:
    """U_v^R(d,p,f) at which the active-deterrence persistence rate equals ``target``.

    Inverts sigma_d(p) = [TD / (1 - TD)] (1 - q_d) / q_d for TD, then TD for the
    incentive. Only meaningful while the scenario stays in the regime.
    """
    q = base.q_d
    odds = target * q / (1.0 - q)
    td = odds / (1.0 + odds)
    ul = base.u_r("v", "l", "f") * base.delta("v", "b", "l")
    # td = ul / (ul - ud * delta_d)  =>  ud = ul (td - 1) / (td delta_d)
    return ul * (td - 1.0) / (td * base.delta("v", "b", "d"))


def persistence_floor(base: PdosScenario) -> float:
    """Smallest active-deterrence persistence rate reachable by raising the incentive
    while type v still strictly prefers lockdown somewhere (the regime's edge,
    where TD meets the lockdown threshold)."""
    r = lockdown_threshold(base)
    return r / (1.0 - r) * (1.0 - base.q_d) / base.q_d


__all__ = [
    "KNOBS", "SweepResult", "SweepRow", "SweepSpec", "apply_knob", "bounded_activity",
    "incentive_for_persistence", "persistence_floor", "run_sweep", "sweep_point", "threshold_td",
]
