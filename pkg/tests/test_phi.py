import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowembed.errors import DomainError, ParameterError, WindowError
from flowembed.generators import random_b_signal, random_marker
from flowembed.kernel import eval_chi1
from flowembed.phi import (equivariance_defect, g2, ladder_delta, locate_zeros, make_phi, newton, perturb_step,
                           phi_eval, rigidity_lattice, shift_rigidity_margin, spectral_support_report, toy_phi,
                           winding_number)
from flowembed.quadrature import adaptive_gl
from flowembed.theta import theta


def direct_phi(cells, params, z):
    """Sum over cells of Theta(z - n) times a reference-path quadrature of chi_1."""
    total = 0j
    for n, (l, r) in cells.items():
        integral, _ = adaptive_gl(lambda t: eval_chi1(params.kernel, z - t + 0j), l, r, tol=1e-13)
        total += theta(z - n, params.L, params.b) * integral
    return total


TOY = {0: (-7.0, 5.5), 12: (5.5, 16.0), 31: (16.0, 40.0)}


@settings(max_examples=15, deadline=None)
@given(st.floats(-20, 60), st.floats(-1, 1))
def test_toy_matches_direct_quadrature(params, x, y):
    phi = toy_phi(TOY, params)
    z = complex(x, y)
    assert abs(phi_eval(phi, z) - direct_phi(TOY, params, z)) < 1e-10


def test_derivative_matches_difference(params):
    phi = toy_phi(TOY, params)
    z, h = 3.3 + 0.2j, 1e-5
    val, der = phi_eval(phi, z, derivative=True)
    fd = (phi_eval(phi, z + h) - phi_eval(phi, z - h)) / (2 * h)
    assert abs(der - fd) < 1e-7 * max(1.0, abs(fd))
    assert val == phi_eval(phi, z)


def test_sup_bounded_by_k1(phi, params):
    xs = np.linspace(-500, 500, 1000)
    assert np.abs(phi_eval(phi, xs.astype(complex))).max() <= params.K1 + 2e-9


def test_equivariance(phi):
    rng = np.random.default_rng(1)
    grid = rng.uniform(-300, 300, 60) + 1j * rng.uniform(-1, 1, 60)
    for k in (1, 2, 3):
        assert equivariance_defect(phi, k, grid) < 1e-8


def test_domains(phi):
    lo, hi = phi.real_domain()
    clo, chi = phi.complex_domain()
    seg = phi.segment
    assert seg[0] < clo and chi < seg[1]
    assert seg[0] < lo <= clo and chi <= hi < seg[1]
    with pytest.raises(DomainError):
        phi_eval(phi, complex(hi + 10.0))
    with pytest.raises(DomainError):
        phi_eval(phi, 1.5j)


def test_spectrum_in_band(phi):
    rep = spectral_support_report(phi, 200.0)
    assert rep["leakage"] < 1e-2
    assert rep["conjugate_leakage"] < 1e-2
    with pytest.raises(WindowError):
        spectral_support_report(phi, 50.0)


def test_winding_and_newton():
    w, low, dev = winding_number(lambda z: (z - 0.1) ** 2 * (z - 5), 0.0, 1.0)
    assert w == 2 and dev < 1e-9 and low > 0
    assert winding_number(lambda z: np.exp(z), 0.0, 1.0)[0] == 0
    root = newton(lambda z: (z * z - 2, 2 * z), 1.0 + 0.1j)
    assert abs(root - math.sqrt(2)) < 1e-13


def test_zeros_of_wide_toy_cell(params):
    # deep inside one huge cell the integral is ~1, so zeros sit on 0 + L Z
    phi = toy_phi({0: (-2000.0, 2000.0)}, params)
    zs = locate_zeros(phi, (-60.0, 60.0))
    centres = sorted(d.centre for d in zs.disks)
    assert centres == [10.0 * m for m in range(-6, 7)]
    for d in zs.disks:
        assert d.winding == 1
        assert abs(d.zero - d.centre) < 1e-10
    assert zs.off_disk["passed"] and zs.off_disk["min_modulus"] >= params.theta_L / 2


def test_zero_search_rejects_range_outside_domain(phi):
    lo, _ = phi.complex_domain()
    with pytest.raises(DomainError):
        locate_zeros(phi, (lo - 100, lo))


def test_rigidity_lattice():
    ks = rigidity_lattice(0.00390625, 1e-3)
    rs = ks * 1e-3
    assert rs.min() == pytest.approx(-0.5) and rs.max() == pytest.approx(0.5)
    assert np.abs(rs).min() >= 2 * 0.00390625 + 1e-3 - 1e-12
    assert np.abs(rs).min() < 2 * 0.00390625 + 2e-3


def test_rigidity_margin_independent_markers(params):
    px = make_phi(random_marker(21, (-2000, 2000)), params)
    py = make_phi(random_marker(22, (-2000, 2000)), params)
    margin, arg = shift_rigidity_margin(px, py, 1e-3, (-20.0, 20.0))
    assert margin > 0.1
    assert 2 * params.r1 < abs(arg) <= 0.5


def test_g2_scale_and_realness(phi, params):
    g = g2(phi, 40.0, 0.25)
    assert np.all(g.samples.imag == 0)
    assert g.sup <= params.delta / 2 * (1 + 1e-9)


def test_perturb_step(phi, params):
    f = random_b_signal(4, params.a, 40.0, 0.25)
    g, rep = perturb_step(f, phi)
    assert rep["distance_ok"] and rep["metric_d"] < params.delta
    assert rep["recovery_error"] < 1e-9
    assert g.band == (-1.4, 1.4)
    wrong = random_b_signal(4, 3.0, 40.0, 0.25)
    with pytest.raises(ParameterError):
        perturb_step(wrong, phi)


def test_ladder_delta():
    assert ladder_delta(1, 0.25, 2.0) == 0.125
    assert ladder_delta(3, 1.0, 2.0) == 0.125
    assert ladder_delta(9, 1.0, 1000.0) == 0.1
