import numpy as np
import pytest

from trigrip.ls_cvt import CvtGeometry
from trigrip.quick_return import FingerGeometry


@pytest.fixture(scope="session")
def finger() -> FingerGeometry:
    return FingerGeometry.default()


@pytest.fixture(scope="session")
def cvt() -> CvtGeometry:
    return CvtGeometry.default()


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
