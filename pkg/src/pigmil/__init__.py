"""Multiple-instance learning by detecting true positive instances with a ranked candidate graph."""

from .classify import PIGMIL, PigmilConfig, Prototypes, detect, dump_model, embed, load_model, predict, run_pigmil
from .core import Bag, DataError, Dataset, Scaler, apply_scaler, as_dataset, distance, fit_scaler
from .io import read_bags, write_bags
from .svm import SolverError

__all__ = [
    "PIGMIL", "PigmilConfig", "Prototypes", "detect", "dump_model", "embed", "load_model", "predict",
    "run_pigmil", "Bag", "DataError", "Dataset", "Scaler", "apply_scaler", "as_dataset", "distance",
    "fit_scaler", "read_bags", "write_bags", "SolverError",
]
__version__ = "0.1.0"
