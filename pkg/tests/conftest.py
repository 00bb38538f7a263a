import numpy as np
import pytest

from vranphy.backends.emulated import make_emulated_t2
from vranphy.backends.model import JitterSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture
def t2_quiet():
    """Calibrated emulated device without the contention tail, payloads on."""
    return make_emulated_t2(compute_payloads=True, spike=JitterSpec())


@pytest.fixture
def t2_shapes():
    """Calibrated emulated device, timing only."""
    return make_emulated_t2(compute_payloads=False, spike=JitterSpec())
