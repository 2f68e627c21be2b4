"""
测试公共夹具
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.core.datum_parser import load_datum
from src.core.hypergeom import ZETA0, classify_horopoint
from src.models.transform_models import QuadratureSpec
from src.utils.config import get_fixtures_dir

# 降低分辨率的求积参数，足以让测试中的点达到 1e−8 量级精度
REDUCED = QuadratureSpec(t_max=10.0, n_t=320, n_theta=128, fiber_t_max=12.0, fiber_n=192)


def fixture_path(name: str) -> str:
    return os.path.join(get_fixtures_dir(), name)


@pytest.fixture
def reduced_spec() -> QuadratureSpec:
    return REDUCED


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def sl2():
    return load_datum(fixture_path("sl2.rd"))


@pytest.fixture
def su21():
    return load_datum(fixture_path("su21.rd"))


@pytest.fixture
def group_case():
    return load_datum(fixture_path("group_case.rd"))


@pytest.fixture
def rank1_m3():
    return load_datum(fixture_path("rank1_m3.rd"))


@pytest.fixture
def w_plus():
    """w = 2ζ₀，定向 +1"""
    return classify_horopoint(2.0 * ZETA0)


@pytest.fixture
def zeta_minus():
    """ζ = 2ζ̄₀，定向 −1"""
    return classify_horopoint(2.0 * np.conj(ZETA0))
