import numpy as np
import pytest

from swervefall import RobotParams


@pytest.fixture
def params() -> RobotParams:
    return RobotParams()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240901)
