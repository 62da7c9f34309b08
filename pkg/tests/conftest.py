from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # oracles / synthetic helpers

from tmcrf.chain import get_backends
from tmcrf.config import ExperimentConfig, load_config
from tmcrf.sequence import Dataset, load_dataset

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def toy_dataset() -> Dataset:
    return load_dataset(str(DATA_DIR / "toy_train.txt"))


@pytest.fixture(scope="session")
def toy_config() -> ExperimentConfig:
    return load_config(str(DATA_DIR / "toy.cfg"))


def _backend_params():
    return sorted(get_backends().keys())


@pytest.fixture(params=_backend_params())
def kernels(request):
    """Each importable chain-recursion backend in turn."""
    return get_backends()[request.param]
