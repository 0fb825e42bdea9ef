import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowembed.errors import GridError, ParameterError, WindowError
from flowembed.generators import random_b1_signal, random_b_signal
from flowembed.signals import (REAL, BandLimitedSignal, b1_to_real, fourier_leakage, in_B, in_B1,
                               interpolation_stencil, load_signal, metric_d, save_signal, translate)


def tone(xi, T=60.0, step=0.25, band=(-1.0, 1.0)):
    return BandLimitedSignal.from_function(lambda x: np.exp(2j * np.pi * xi * x), T, step, band)


def test_grid_and_validation():
    f = tone(0.3, T=10.0, step=0.5)
    assert f.samples.size == 41
    assert f.grid[0] == -10.0 and f.grid[-1] == 10.0
    with pytest.raises(ParameterError):
        BandLimitedSignal(10.0, 0.6, np.zeros(34), (-1.0, 1.0))  # under Nyquist
    with pytest.raises(GridError):
        BandLimitedSignal(10.0, 0.5, np.zeros(40), (-1.0, 1.0))
    with pytest.raises(ParameterError):
        BandLimitedSignal(10.0, 0.5, np.full(41, 1j), (-1.0, 1.0), REAL)
    assert not f.samples.flags.writeable


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.9, 0.9), st.floats(-10.0, 10.0))
def test_translate_pure_tone(xi, r):
    f = tone(xi)
    g = translate(f, r)
    exact = np.exp(2j * np.pi * xi * (g.grid + r))
    assert np.abs(g.samples - exact).max() < 1e-9
    # output grid is a sub-grid of the input grid
    k = round((f.window_radius - g.window_radius) / f.sample_step)
    assert np.allclose(g.grid, f.grid[k:k + g.samples.size])


def test_translate_off_centre_band_and_composition():
    f = random_b1_signal(3, 1.0, 1.4, 80.0, 0.3)
    g = translate(translate(f, 0.7), 1.1)
    h = translate(f, 1.8)
    radius = min(g.window_radius, h.window_radius)
    assert np.abs(g.restrict(radius).samples - h.restrict(radius).samples).max() < 1e-9
    assert translate(f, 0.0) is f
    with pytest.raises(WindowError):
        translate(f, 25.0)


def test_stencil_needs_oversampling():
    assert interpolation_stencil(0.25, 1.0, 1e-10) > 2
    with pytest.raises(ParameterError):
        interpolation_stencil(0.5, 1.0, 1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000), st.integers(0, 10_000))
def test_metric_d_is_a_metric(s1, s2, s3):
    f, g, h = (random_b_signal(s, 2.0, 25.0, 0.25) for s in (s1, s2, s3))
    dfg, tail = metric_d(f, g)
    assert dfg == metric_d(g, f)[0]
    assert metric_d(f, f)[0] == 0.0
    assert dfg <= metric_d(f, h)[0] + metric_d(h, g)[0] + 1e-15
    assert tail <= 2 * 2.0**-20


def test_metric_d_closed_form():
    # constant difference c: sum_{n<=20} c / 2^n
    f = BandLimitedSignal.from_function(lambda x: 0 * x, 20.0, 0.25, (-1.0, 1.0))
    g = f.with_samples(np.full(f.samples.size, 0.5))
    assert math.isclose(metric_d(f, g)[0], 0.5 * (1 - 2.0**-20), rel_tol=1e-14)
    with pytest.raises(WindowError):
        metric_d(f, g, depth=30)
    with pytest.raises(GridError):
        metric_d(f, tone(0.1, T=20.0, step=0.5))


def test_leakage_band_edges():
    f = tone(0.4, T=100.0)
    assert fourier_leakage(f, (0.3, 0.5)) < 1e-8
    assert fourier_leakage(f, (-0.5, -0.3)) > 0.99
    assert fourier_leakage(f, [(-0.5, -0.3), (0.35, 0.45)]) < 1e-8
    zero = f.with_samples(np.zeros(f.samples.size))
    assert fourier_leakage(zero, (0.0, 0.1)) == 0.0


def test_membership():
    f = random_b_signal(1, 2.0, 30.0, 0.25)
    assert in_B(f, 2.0) and not in_B(f, 3.0)
    g = random_b1_signal(1, 1.0, 1.4, 30.0, 0.3)
    assert in_B1(g, 1.0, 1.4)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_b1_to_real(seed):
    f = random_b1_signal(seed, 1.0, 1.4, 60.0, 0.3)
    g = b1_to_real(f)
    assert g.value_kind == REAL and np.all(g.samples.imag == 0)
    assert g.sup <= f.sup
    assert g.band == (-1.4, 1.4)
    assert fourier_leakage(g, (-1.4, 1.4)) < 1e-3


def test_b1_to_real_rejects_low_band():
    with pytest.raises(ParameterError):
        b1_to_real(tone(0.1))


def test_save_load_roundtrip(tmp_path):
    f = random_b1_signal(5, 1.0, 1.4, 10.0, 0.3)
    csv_path, json_path = save_signal(f, tmp_path / "sig")
    g = load_signal(tmp_path / "sig")
    assert csv_path.exists() and json_path.exists()
    assert np.array_equal(f.samples, g.samples)
    assert (g.window_radius, g.sample_step, g.band, g.value_kind) == (f.window_radius, f.sample_step, f.band,
                                                                      f.value_kind)
