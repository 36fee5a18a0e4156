import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from renewal_intrusion import EventSequence, IntervalModel, MarkModel

settings.register_profile(
    "default", max_examples=100, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

SHAPES = (1.0, 2.0, 4.0, 8.0)
RATES = (0.5, 1.0, 4.0)


@st.composite
def random_case(draw, max_events=10, min_events=1, marks=None):
    """A sequence with strictly increasing times, a model, a prior and optional marks."""
    n = draw(st.integers(min_events, max_events))
    shape = draw(st.sampled_from(SHAPES))
    rate = draw(st.sampled_from(RATES))
    p = draw(st.sampled_from((0.05, 0.2)))
    use_marks = draw(st.booleans()) if marks is None else marks
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    gaps = rng.exponential(1.0 / rate, size=n + 1) + 1e-3
    edges = np.cumsum(np.r_[0.0, gaps])
    t_start = float(rng.uniform(-5, 5))
    times = t_start + edges[1:-1]
    t_end = t_start + edges[-1]
    mark_values = rng.lognormal(0.0, 0.5, size=n) if use_marks else None
    seq = EventSequence(t_start, t_end, times, mark_values)
    model = IntervalModel.gamma(shape, rate)
    mark_model = MarkModel(0.1, 0.6) if use_marks else None
    return seq, model, p, mark_model


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_example():
    """One event at 1 in the window [0, 2]."""
    return EventSequence(0.0, 2.0, [1.0])
