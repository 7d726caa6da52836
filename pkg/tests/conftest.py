import numpy as np
import pytest

from difflab import GaussianMixture, make_schedule
from difflab.schedules import SCHEDULE_KINDS


@pytest.fixture
def bimodal():
    """The 1-D two-mode reference mixture 0.5 N(2, 1/4) + 0.5 N(-2, 1/4)."""
    return GaussianMixture([0.5, 0.5], [[2.0], [-2.0]], [[0.25], [0.25]])


@pytest.fixture(params=SCHEDULE_KINDS)
def any_schedule(request):
    return make_schedule(request.param)


def all_schedules():
    return [make_schedule(k) for k in SCHEDULE_KINDS]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
