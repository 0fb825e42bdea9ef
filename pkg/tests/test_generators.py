import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowembed.errors import ParameterError, WindowError
from flowembed.generators import periodic_marker, random_b_signal, random_marker


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.integers(5, 15), st.integers(0, 10))
def test_random_marker_valid(seed, M, extra):
    M1 = M + 1 + extra
    m = random_marker(seed, (0, 8 * M1), M, M1)
    assert m.violations() == []
    assert all(0.5 < v <= 1.0 for v in m.values.values())


def test_deterministic():
    assert random_marker(7, (0, 600)).values == random_marker(7, (0, 600)).values
    assert random_marker(7, (0, 600)).values != random_marker(8, (0, 600)).values


def test_gap_histogram():
    gaps = []
    for seed in range(400):
        m = random_marker(seed, (0, 1200))
        ones = [n for n in m.positive_indices if m.values[n] == 1.0]
        gaps += list(np.diff(ones))
    gaps = np.array(gaps)
    assert gaps.size > 10_000
    assert gaps.min() == 10 and gaps.max() == 49
    # every value of [M, 2 M1 - 1] is hit
    assert set(range(10, 50)) <= set(gaps.tolist())


def test_infeasible():
    with pytest.raises(ParameterError):
        random_marker(0, (0, 600), M=60, M1=25)
    with pytest.raises(WindowError):
        random_marker(0, (0, 100))


def test_periodic_marker():
    m = periodic_marker(30, (-95, 95), 10, 25, phase=5)
    assert m.positive_indices == (-85, -55, -25, 5, 35, 65, 95)


def test_random_b_signal_sup():
    for seed in range(20):
        f = random_b_signal(seed, 2.0, 40.0, 0.25)
        assert f.sup <= 1.0
        assert np.all(f.samples.imag == 0)
