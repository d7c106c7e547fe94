__version__ = "0.1.0"

from .dynamics import DensityMatrix, build_hamiltonian, evolve, initial_state, marginal
from .experiments import PRESETS, figure_preset, kappa_sweep, time_sweep, validate_closed_forms
from .logging_utils import configure_logger, get_logger, set_logger
from .models import InfoMode, PartitionId, Propagator, SweepConfig, SystemParams

__all__ = [
    "__version__",
    "DensityMatrix",
    "InfoMode",
    "PRESETS",
    "PartitionId",
    "Propagator",
    "SweepConfig",
    "SystemParams",
    "build_hamiltonian",
    "configure_logger",
    "evolve",
    "figure_preset",
    "get_logger",
    "initial_state",
    "kappa_sweep",
    "marginal",
    "set_logger",
    "time_sweep",
    "validate_closed_forms",
]
