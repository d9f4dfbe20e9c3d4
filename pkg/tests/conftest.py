import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from tnut.geometry import MetricParams

settings.register_profile(
    "tnut",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("tnut")


@st.composite
def admissible_params(draw, allow_a_zero=False):
    a = draw(st.floats(0.0 if allow_a_zero else 0.2, 2.0))
    b = draw(st.floats(0.2, 2.0))
    d = draw(st.floats(0.2, 2.0))
    c = draw(st.floats(-1.9 * math.sqrt(d), 2.0))
    return MetricParams(a, b, c, d)


@st.composite
def standard_params(draw):
    return MetricParams.standard(draw(st.floats(0.3, 2.5)), draw(st.floats(0.3, 2.5)))


@st.composite
def spherical_points(draw, r_min=0.3, r_max=5.0, margin=0.2):
    return (
        draw(st.floats(r_min, r_max)),
        draw(st.floats(margin, math.pi - margin)),
        draw(st.floats(0.0, 2 * math.pi)),
        draw(st.floats(0.0, 4 * math.pi)),
    )


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=20261015))


@pytest.fixture
def generic():
    return MetricParams(1.0, 1.0, 0.0, 1.0)


@pytest.fixture
def skewed():
    return MetricParams(1.5, 0.8, -0.5, 1.3)


def rel_close(a, b, rtol):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale <= rtol
