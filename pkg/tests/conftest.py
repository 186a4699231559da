import numpy as np
import pytest

from fgnarx.gaussian_sim import stream
from fgnarx.noise import NoiseModel

ALL_FAMILIES = [
    NoiseModel.fgn(0.55),
    NoiseModel.fgn(0.6),
    NoiseModel.fgn(0.75),
    NoiseModel.ar1(0.6),
    NoiseModel.ma1(0.5),
    NoiseModel.white(),
]


@pytest.fixture
def rng() -> np.random.Generator:
    return stream(20240601)


@pytest.fixture(params=ALL_FAMILIES, ids=lambda model: model.label)
def family(request) -> NoiseModel:
    return request.param


@pytest.fixture
def fgn06() -> NoiseModel:
    return NoiseModel.fgn(0.6)


@pytest.fixture
def white() -> NoiseModel:
    return NoiseModel.white()
