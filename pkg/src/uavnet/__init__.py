"""Seeded discrete-event simulator for UAV ad-hoc networks."""

from .config import ScenarioConfig, parse_config, dump_config
from .simulation import RunReport, Simulation, run_scenario

__version__ = "0.1.0"
__all__ = ["ScenarioConfig", "parse_config", "dump_config", "RunReport", "Simulation", "run_scenario"]
