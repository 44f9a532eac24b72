"""Seeded mock agent: synthetic task streams, the agent loop and scenario replay."""

from .agent import (RandomOracle, SimResult, TaskOutcome, default_seed_library, new_cache,
                    prefix_hash, run_stream, run_task)
from .config import (BrittleInjection, CacheModel, Domain, Models, SimConfig, Template,
                     config_from_dict, default_config, default_config_path, load_config)
from .scenario import (Scenario, ScriptedOracle, default_scenario_path, load_scenario,
                       run_scenario, scenario_from_dict)
from .shared import concat_ledgers, run_shared, worker_run_id
from .stream import SubgoalSpec, SyntheticTask, domain_quotas, generate_stream, should_reflect

__all__ = [
    "BrittleInjection", "CacheModel", "Domain", "Models", "RandomOracle", "Scenario",
    "ScriptedOracle", "SimConfig", "SimResult", "SubgoalSpec", "SyntheticTask",
    "TaskOutcome", "Template", "concat_ledgers", "config_from_dict", "default_config",
    "default_config_path", "default_scenario_path", "default_seed_library", "domain_quotas",
    "generate_stream", "load_config", "load_scenario", "new_cache", "prefix_hash",
    "run_scenario", "run_shared", "run_stream", "run_task", "scenario_from_dict",
    "should_reflect", "worker_run_id",
]
