import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from gwbox import _kernels
from gwbox.geometry import Box

settings.register_profile("gwbox", max_examples=200, deadline=None)
settings.load_profile("gwbox")


@st.composite
def boxes(draw, min_size=1e-3):
    cx = draw(st.floats(0.0, 1.0))
    cy = draw(st.floats(0.0, 1.0))
    w = draw(st.floats(min_size, 1.0))
    h = draw(st.floats(min_size, 1.0))
    return Box(cx, cy, w, h)


def random_box(rng, lo=0.02, hi=0.6):
    w, h = rng.uniform(lo, hi, size=2)
    return Box(float(rng.uniform(0, 1)), float(rng.uniform(0, 1)), float(w), float(h))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["python", "compiled"])
def backend(request):
    if request.param == "compiled" and not _kernels.has_compiled():
        pytest.skip("compiled extension not built")
    prev = _kernels.backend_name()
    _kernels.use_backend(request.param)
    yield request.param
    _kernels.use_backend(prev)
