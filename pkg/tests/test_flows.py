import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowembed.errors import (DepthError, InversionError, ParameterError, PreconditionError,
                              UnsupportedRoofError)
from flowembed.flows import (DiscreteSystem, ProductExtension, SolenoidFlow, SuspensionFlow, SuspensionPoint,
                             TorusFlow, TruncatedSolenoidPoint, conjugacy_roundtrip, first_return,
                             first_return_generic, flow_boundary_probe, in_section, last_crossing,
                             last_crossing_generic, parse_system, return_orbit_length, solenoid_flow,
                             solenoid_return_system, strong_embedding_probe, suspend_embedding, suspension_flow)
from flowembed.signals import BandLimitedSignal, translate

SOL = SolenoidFlow(4)


@given(st.floats(0, 24), st.floats(-50, 50), st.floats(-50, 50))
def test_flow_law_and_consistency(x, s, t):
    p = SOL.point(x)
    assert SOL.distance(solenoid_flow(solenoid_flow(p, s), t), solenoid_flow(p, s + t)) < 1e-12
    assert solenoid_flow(p, s).consistency_defect() < 1e-12


def test_point_layout():
    p = TruncatedSolenoidPoint.from_top(17.5, 4)
    assert p.coords == (0.5, 1.5, 5.5, 17.5)
    with pytest.raises(DepthError):
        TruncatedSolenoidPoint(4, (0.0, 0.0))
    with pytest.raises(DepthError):
        in_section(p, 5)
    with pytest.raises(DepthError):
        SolenoidFlow(0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_section_returns(n):
    sec = SOL.section(n)
    rng = np.random.default_rng(n)
    s = sec.sample(rng)
    assert in_section(s, n)
    rt, nxt = first_return(s, sec, SOL, 100.0)
    assert rt == math.factorial(n)
    assert SOL.distance(nxt, solenoid_flow(s, math.factorial(n))) == 0.0
    assert in_section(nxt, n)
    gen_t, gen_q = first_return_generic(SOL, sec, s, 100.0)
    assert abs(gen_t - rt) < 1e-9 and SOL.distance(gen_q, nxt) < 1e-9
    assert return_orbit_length(s, sec, SOL) == 24 // math.factorial(n)


@settings(max_examples=30)
@given(st.floats(0, 24))
def test_last_crossing_closed_form_vs_generic(x):
    sec = SOL.section(2)
    p = SOL.point(x)
    s, tau = last_crossing(SOL, sec, p, 100.0)
    s2, tau2 = last_crossing_generic(SOL, sec, p, 100.0)
    # within rounding of the section the two paths may pick crossings one return apart
    assert min(abs(tau - tau2), 2 - abs(tau - tau2)) < 1e-9
    assert in_section(s, 2) and in_section(s2, 2)
    assert SOL.distance(solenoid_flow(s, tau), p) < 1e-12
    assert SOL.distance(solenoid_flow(s2, tau2), p) < 1e-9
    assert 0 <= tau < 2


def test_conjugacy_solenoid_and_product():
    assert conjugacy_roundtrip(SOL, SOL.section(2), 50, seed=1)["passed"]
    prod = ProductExtension(4, 5)
    assert conjugacy_roundtrip(prod, prod.section(3), 50, seed=1)["passed"]


def test_boundary_probe_healthy_and_clipped():
    for n in (1, 2, 3, 4):
        sec = SOL.section(n)
        assert flow_boundary_probe(SOL, sec, sec.eta / 2, 50, seed=3)["passed"]
    tor = TorusFlow()
    rep = flow_boundary_probe(tor, tor.section(clipped=True), 0.2, 100, eps=0.05, seed=3)
    assert not rep["passed"]
    reach = 0.05 * (1 + tor.slope)
    assert all(min(abs(y), abs(y - 0.5)) <= reach for _, y in rep["failures"])
    full = flow_boundary_probe(tor, tor.section(), 0.2, 100, eps=0.05, seed=3)
    assert full["passed"]
    with pytest.raises(ParameterError):
        flow_boundary_probe(SOL, SOL.section(1), 5.0)
    with pytest.raises(PreconditionError):
        conjugacy_roundtrip(tor, tor.section(clipped=True), 10)


def test_torus_generic_return():
    tor = TorusFlow()
    sec = tor.section()
    t, q = first_return_generic(tor, sec, (0.0, 0.3), 10.0)
    assert abs(t - 1.0) < 1e-9
    assert abs(q[1] - (0.3 + tor.slope) % 1.0) < 1e-9


def test_discrete_systems(tmp_path):
    cyc = DiscreteSystem.cyclic(5)
    assert cyc.iterate(3, 4) == 2 and cyc.iterate(3, -4) == 4
    prod = DiscreteSystem.product(cyc, 3)
    assert prod.size == 15 and prod.T(4) == 0 and prod.T(9) == 5
    path = tmp_path / "sys.json"
    path.write_text(json.dumps(prod.to_json()))
    back = DiscreteSystem.from_json(json.loads(path.read_text()))
    assert back.mapping == prod.mapping and back.roof == prod.roof
    flow = parse_system(f"suspension:{path}")
    assert isinstance(flow, SuspensionFlow) and flow.system.size == 15
    sol_sys = solenoid_return_system(4, 2, 1)
    assert sol_sys.size == 12 and set(sol_sys.roof) == {2.0}
    with pytest.raises(ParameterError):
        DiscreteSystem((0, 5), (1.0, 1.0))
    with pytest.raises(ParameterError):
        DiscreteSystem((1, 0), (1.0, 0.0))
    with pytest.raises(InversionError):
        DiscreteSystem((0, 0), (1.0, 1.0)).T_inv(0)


@given(st.integers(0, 6), st.floats(0, 1), st.floats(-20, 20), st.floats(-20, 20))
def test_suspension_flow_law_variable_roof(i, frac, s, t):
    system = DiscreteSystem((1, 2, 3, 4, 5, 6, 0), (0.5, 1.0, 1.5, 0.7, 2.0, 1.0, 0.3))
    flow = SuspensionFlow(system)
    p = SuspensionPoint(i, frac * system.roof[i])
    lhs = flow.flow(flow.flow(p, s), t)
    rhs = flow.flow(p, s + t)
    assert lhs.base == rhs.base or flow.distance(lhs, rhs) < 1e-9
    assert flow.distance(lhs, rhs) < 1e-9


def test_suspension_needs_inverse_for_negative_time():
    with pytest.raises(InversionError):
        suspension_flow(SuspensionPoint(0, 0.2), -1.0, lambda i: 1.0, lambda i: 0)


def periodic_h(system, period=24):
    """h(i) = a 24-periodic band-limited signal read at x + i, so h(T i) = tau_1 h(i)."""
    amps = [0.3, -0.2, 0.25, 0.1]

    def h(i):
        fn = lambda x: sum(a * np.cos(2 * np.pi * (k + 1) * (x + i) / period + k) for k, a in enumerate(amps))
        return BandLimitedSignal.from_function(fn, 40.0, 0.25, (-0.25, 0.25), "real")

    return h


def test_suspend_embedding_two_paths():
    system = DiscreteSystem.cyclic(24)
    flow = SuspensionFlow(system)
    h = periodic_h(system)
    sp = SuspensionPoint(5, 0.3)
    moved = suspend_embedding(h, flow.flow(sp, 0.9), system)
    ref = h(6)  # (5, 0.3) + 0.9 = (6, 0.2)
    assert moved.window_radius < ref.window_radius
    expect = translate(ref, 0.2)
    assert np.abs(moved.samples - expect.samples).max() < 1e-9
    with pytest.raises(UnsupportedRoofError):
        suspend_embedding(h, sp, DiscreteSystem((1, 0), (1.0, 2.0)))


def test_strong_embedding_probe_flags_integers_only():
    system = DiscreteSystem.cyclic(24)
    h = periodic_h(system)
    rep = strong_embedding_probe(h, [(0, 2), (3, 3), (0, 23)], system, r_step=0.05, r_max=3.0)
    assert rep["passed"]
    assert [r["flagged"] for r in rep["pairs"]] == [[2.0], [0.0], [-1.0]]
    # a constant h is not injective: every shift is flagged and none is explained
    flat = lambda i: BandLimitedSignal.from_function(lambda x: 0 * x + 0.5, 40.0, 0.25, (-0.25, 0.25), "real")
    assert not strong_embedding_probe(flat, [(0, 1)], system, r_step=0.5, r_max=1.0)["passed"]


def test_parse_system():
    assert isinstance(parse_system("solenoid:3"), SolenoidFlow)
    assert isinstance(parse_system("product:4:5"), ProductExtension)
    assert isinstance(parse_system("torus"), TorusFlow)
    with pytest.raises(ParameterError):
        parse_system("nope")
