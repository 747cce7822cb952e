"""Two-scale online control of energy trading and beamforming for storage-equipped CoMP base stations."""
from .config import (BoundsError, CapacityRangeError, ConfigError, LeakageCompensationError, PriceOrderError,
                     SystemConfig, load_config, reference_config, validate_config)
from .controller import TSOCController, classify_soc, parameter_window, select_parameters
from .gap import gap_constants, gap_vs_capacity_curve, min_gap
from .model import sample_path
from .socp import InfeasibleError, RealtimeTemplate, SolverError, build_realtime_problem, solve_realtime
from .sim import ExperimentSpec, queue_price_trace, run_experiment, running_average

__version__ = "0.1.0"
