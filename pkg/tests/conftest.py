import numpy as np
import pytest

from neuralssm.numerics import SeededRng
from neuralssm.plant import Dataset, Partition, build_default_plant, make_dataset


@pytest.fixture(scope="session")
def plant():
    return build_default_plant()


@pytest.fixture(scope="session")
def dataset(plant):
    return make_dataset(plant, SeededRng(0))


def truncate(part: Partition, steps: int) -> Partition:
    return Partition(
        name=part.name,
        start=part.start,
        x0=part.x0.copy(),
        states=part.states[:steps].copy(),
        signals=part.signals.window(0, steps),
    )


@pytest.fixture(scope="session")
def small_dataset(dataset):
    """Short partitions (160 steps) for fast training-path tests."""
    return Dataset(
        train=truncate(dataset.train, 160),
        val=truncate(dataset.val, 160),
        test=truncate(dataset.test, 160),
    )


@pytest.fixture()
def rng():
    return SeededRng(1234)
