"""Configuration, Monte-Carlo orchestration and the command line interface."""

from .config import (SCHEMES, SWEEP_AXES, ExperimentConfig, from_dict, load_config,
                     parse_override)
from .experiment import (CSV_COLUMNS, ExperimentResult, run_drop, run_experiment,
                         solve_instance, sweep_points)
