"""Linear-chain CRF engine and CLI toolkit for transmembrane-helix
prediction from protein primary sequence."""

from .chain import backend_name, forward_backward, marginals, viterbi
from .config import ExperimentConfig, FeatureConfig, TrainConfig, preset
from .features import FeatureIndex, build_index
from .metrics import compute_metrics
from .model import CrfModel, load_model, save_model
from .sequence import Dataset, ProteinRecord, load_dataset, parse_dataset, segmentize
from .states import binary_topology, derive_states, extended_topology, project
from .training import train

__version__ = "0.1.0"

__all__ = [
    "CrfModel",
    "Dataset",
    "ExperimentConfig",
    "FeatureConfig",
    "FeatureIndex",
    "ProteinRecord",
    "TrainConfig",
    "backend_name",
    "binary_topology",
    "build_index",
    "compute_metrics",
    "derive_states",
    "extended_topology",
    "forward_backward",
    "load_dataset",
    "load_model",
    "marginals",
    "parse_dataset",
    "preset",
    "project",
    "save_model",
    "segmentize",
    "train",
    "viterbi",
]
