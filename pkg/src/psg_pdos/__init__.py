"""Poisson signaling games for botnet recruitment in PDoS attacks."""
from psg_pdos.equilibrium import (
    EquilibriumResult, Region, check_assumptions, classify_region, solve_pdos, threshold_td,
    verify_pbne, verify_profile,
)
from psg_pdos.model import PdosScenario, Scenario, StrategyProfile, canonical_pdos, pdos_scenario, validate_scenario

__version__ = "0.1.0"
