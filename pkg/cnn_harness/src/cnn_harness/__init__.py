"""CNN classification harness for frame/mode image dataset trees."""

__version__ = "0.1.0"

from .config import CnnConfig
from .data import DatasetTreeError, audit_sample_leak, load_split
from .experiment import AnalysisParams, ExperimentPlan, run_experiment

__all__ = [
    "CnnConfig", "DatasetTreeError", "audit_sample_leak", "load_split",
    "AnalysisParams", "ExperimentPlan", "run_experiment", "__version__",
]
