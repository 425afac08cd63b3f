import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from radvar import Constant, ProblemParams, RadialWeightSpec, build_aux_weight, decompose_degeneracy

settings.register_profile("radvar", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("radvar")

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def oracles():
    return json.loads((DATA / "oracles.json").read_text())


@pytest.fixture
def unit():
    """eta = 1 on (0, 1), d = 1, p = 2."""
    params = ProblemParams(1, 2.0, 0.0, 1.0)
    spec = RadialWeightSpec((Constant(1.0, 0.0, 1.0),))
    decomp = decompose_degeneracy(spec, params)
    return spec, params, decomp, build_aux_weight(decomp, spec, params)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
