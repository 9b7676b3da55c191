"""Scenario orchestration: configuration, round loop, reports."""
from .config import (PRESET_NAMES, ScenarioConfig, config_from_dict, derive_seed, load_config,
                     preset)
from .report import RunReport, overhead_summary
from .simulation import (RoundReport, Simulation, pretrained_snapshot, pretraining_stream,
                         run_pretraining, run_scenario)

__all__ = [
    "PRESET_NAMES", "RoundReport", "RunReport", "ScenarioConfig", "Simulation", "config_from_dict",
    "derive_seed", "load_config", "overhead_summary", "preset", "pretrained_snapshot",
    "pretraining_stream", "run_pretraining", "run_scenario",
]
