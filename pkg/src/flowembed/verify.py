"""The eight acceptance suites.

Each suite returns a JSON-ready dict ``{"criterion", "name", "checks", "passed"}``
where every check records its value, threshold and verdict.  Nothing here
reads the clock, so reports are reproducible per seed.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import ParameterError
from .flows import (DiscreteSystem, ProductExtension, SolenoidFlow, SuspensionFlow, SuspensionPoint,
                    TorusFlow, conjugacy_roundtrip, first_return, first_return_generic, flow_boundary_probe,
                    return_orbit_length, solenoid_flow, solenoid_return_system, strong_embedding_probe,
                    suspend_embedding)
from .generators import random_b1_signal, random_b_signal, random_marker
from .kernel import Y_GRID, make_chi1
from .phi import (equivariance_defect, g2, iterate_embedding, locate_zeros, make_phi, perturb_step,
                  phi_eval, shift_rigidity_margin, spectral_support_report)
from .signals import BandLimitedSignal, b1_to_real, fourier_leakage, metric_d, translate
from .theta import (build_params, r1_certificate, select_r1, theta_lower_bound, theta_sup,
                    validate_params)
from .tiling import MarkerSequence, build_tiling, check_geometry, shift_equivariance_defect, tiling_mismatch

DEFAULTS = dict(a=2.0, delta=0.8, L=10.0, M=10, M1=25, c=1.02)
PHI_WINDOW = (-2000, 2000)
WIDE = dict(M=1000, M1=2000, window=(-12000, 12000))


def _check(value, threshold, passed, **extra) -> dict:
    out = {"value": value, "threshold": threshold, "passed": bool(passed)}
    out.update(extra)
    return out


def _suite(criterion: int, name: str, checks: dict, **extra) -> dict:
    rep = {"criterion": criterion, "name": name, "checks": checks,
           "passed": all(c["passed"] for c in checks.values())}
    rep.update(extra)
    return rep


@lru_cache(maxsize=4)
def default_params(M: int = 10, M1: int = 25):
    base = build_params(DEFAULTS["a"], DEFAULTS["delta"], DEFAULTS["L"], 10, 25, DEFAULTS["c"])
    return base if (M, M1) == (10, 25) else base.with_markers(M, M1)


def phi_markers(seed: int, count: int = 3) -> list[MarkerSequence]:
    return [random_marker(seed * 100 + i, PHI_WINDOW, DEFAULTS["M"], DEFAULTS["M1"]) for i in range(count)]


# -- 1 ---------------------------------------------------------------------------


def suite_tiling(seed: int = 7, count: int = 100) -> dict:
    M, M1, c = DEFAULTS["M"], DEFAULTS["M1"], DEFAULTS["c"]
    worst_mismatch = 0.0
    uncovered = []
    worst_exact = 0.0
    worst_float = 0.0
    geo = {"value_gt_half": [], "within_ball": [], "length_ok": []}
    min_len = math.inf
    M2 = None
    for i in range(count):
        s = seed * 1000 + i
        marker = random_marker(s, (0, 600), M, M1)
        til = build_tiling(marker)
        worst_mismatch = max(worst_mismatch, tiling_mismatch(til))
        lo, hi = til.valid_range
        seg = til.covered_segment()
        if not (seg[0] <= lo + M1 + 1 and seg[1] >= hi - M1 - 1):
            uncovered.append(s)
        for k in (1, 2, 3):
            worst_exact = max(worst_exact, shift_equivariance_defect(marker, k, exact=True))
            worst_float = max(worst_float, shift_equivariance_defect(marker, k, exact=False))
        rep = check_geometry(til, marker, c)
        M2 = rep["M2"]
        if rep["min_length"] is not None:
            min_len = min(min_len, rep["min_length"])
        for key in geo:
            if not rep["checks"][key]:
                geo[key].append(s)
    checks = {
        "endpoint_mismatch": _check(worst_mismatch, 1e-9, worst_mismatch < 1e-9),
        "covers_valid_range": _check(len(uncovered), 0, not uncovered, seeds=uncovered),
        "equivariance_exact": _check(worst_exact, 1e-12, worst_exact < 1e-12),
        "equivariance_float": _check(worst_float, 1e-12, worst_float < 1e-12),
        "value_gt_half": _check(len(geo["value_gt_half"]), 0, not geo["value_gt_half"], seeds=geo["value_gt_half"]),
        "within_ball": _check(len(geo["within_ball"]), 0, not geo["within_ball"], seeds=geo["within_ball"]),
        "length_ge_2M2": _check(min_len, 2 * M2, not geo["length_ok"], seeds=geo["length_ok"]),
    }
    return _suite(1, "tiling", checks, markers=count, M2=M2)


# -- 2 ---------------------------------------------------------------------------


def suite_params(seed: int = 7) -> dict:
    a, delta, L = DEFAULTS["a"], DEFAULTS["delta"], DEFAULTS["L"]
    b = a + delta / 2
    kernel = make_chi1(delta)
    r1 = select_r1(L, b)
    cert = r1_certificate(L, b, r1, r1 / 1000)
    tl = theta_lower_bound(L, b, r1)
    tl_fine = theta_lower_bound(L, b, r1, r1 / 400)
    drift = abs(tl_fine - tl) / tl
    p = default_params()
    lhs = 1.1 * theta_sup(L, b) * max(kernel.tail_direct(p.E, y, order=64) for y in Y_GRID)
    fixture = build_params(a, delta, L, M=25600, M1=25601, c=DEFAULTS["c"])
    val = validate_params(fixture)
    checks = {
        "r1_below_cap": _check(r1, min(1 / 16, 1 / L), r1 < min(1 / 16, 1 / L)),
        "r1_fine_grid": _check(cert["min_value"] - cert["margin"], cert["threshold"], cert["certified"]),
        "theta_L_positive": _check(tl, 0.0, tl > 0),
        "theta_L_refinement": _check(drift, 0.05, drift < 0.05),
        "E_refined_quadrature": _check(lhs, tl / 2, lhs < tl / 2, E=p.E),
        "validate_params": _check(sum(not c["passed"] for c in val["conditions"]), 0, val["passed"],
                                  M=fixture.M, M2=fixture.M2, bound=4 * L + fixture.E + 1),
    }
    return _suite(2, "parameters", checks, params=p.to_json())


# -- 3 ---------------------------------------------------------------------------


def suite_phi(seed: int = 7, wide_count: int = 2) -> dict:
    p = default_params()
    rng = np.random.default_rng(seed)
    sup_excess, eqv, leak = -math.inf, 0.0, 0.0
    default_disks = 0
    default_off_ok = True
    for marker in phi_markers(seed):
        phi = make_phi(marker, p)
        xs = np.linspace(-500.0, 500.0, 1000)
        sup_excess = max(sup_excess, float(np.abs(phi_eval(phi, xs.astype(complex))).max()) - p.K1)
        grid = rng.uniform(-300, 300, 100) + 1j * rng.uniform(-1, 1, 100)
        for k in (1, 2, 3):
            eqv = max(eqv, equivariance_defect(phi, k, grid))
        leak = max(leak, spectral_support_report(phi, 200.0)["leakage"])
        zs = locate_zeros(phi, (-100.0, 100.0))
        default_disks += len(zs.disks)
        default_off_ok &= zs.off_disk["passed"]
    # wide cells: centres in Int_{E+1} exist, so the zero checks have content
    wp = default_params(WIDE["M"], WIDE["M1"])
    disks, windings_ok, confined, off_min, off_ok, points = 0, True, True, math.inf, True, 0
    for i in range(wide_count):
        marker = random_marker(seed * 100 + 50 + i, WIDE["window"], WIDE["M"], WIDE["M1"])
        phi = make_phi(marker, wp)
        zs = locate_zeros(phi, phi.complex_domain())
        disks += len(zs.disks)
        windings_ok &= all(d.winding == 1 for d in zs.disks)
        confined &= all(d.zero is not None and abs(d.zero - d.centre) <= wp.r1 for d in zs.disks)
        off = zs.off_disk
        points += off["points"]
        if off["min_modulus"] is not None:
            off_min = min(off_min, off["min_modulus"])
        off_ok &= off["passed"]
    checks = {
        "sup_le_K1": _check(sup_excess, 2e-9, sup_excess <= 2e-9, K1=p.K1),
        "equivariance": _check(eqv, 1e-8, eqv < 1e-8),
        "spectral_leakage": _check(leak, 1e-2, leak < 1e-2, window_radius=200.0),
        "disks_present": _check(disks, 0, disks > 0),
        "winding_one": _check(disks, None, windings_ok and disks > 0),
        "zeros_in_disks": _check(disks, None, confined),
        "off_disk_modulus": _check(off_min, p.theta_L / 2, off_ok and default_off_ok, points=points),
    }
    return _suite(3, "phi", checks, default_marker_disks=default_disks)


# -- 4 ---------------------------------------------------------------------------


def rigidity_margins(seed: int = 7, pairs: int = 3, window=(-50.0, 50.0)) -> list[dict]:
    p = default_params()
    rows = []
    for i in range(pairs):
        mx = random_marker(seed * 100 + 10 + 2 * i, PHI_WINDOW, DEFAULTS["M"], DEFAULTS["M1"])
        my = random_marker(seed * 100 + 11 + 2 * i, PHI_WINDOW, DEFAULTS["M"], DEFAULTS["M1"])
        margin, arg = shift_rigidity_margin(make_phi(mx, p), make_phi(my, p), 1e-3, window)
        rows.append({"pair": i, "margin": margin, "argmin_r": arg})
    return rows


def suite_rigidity(seed: int = 7, golden: dict | None = None) -> dict:
    p = default_params()
    rows = rigidity_margins(seed)
    worst = min(r["margin"] for r in rows)
    checks = {"margin_positive": _check(worst, 0.0, worst > 0, theta_L_quarter=p.theta_L / 4)}
    if golden is not None:
        drift = max(abs(r["margin"] - g) / g for r, g in zip(rows, golden["margins"]))
        checks["regression_lock"] = _check(drift, 0.01, drift < 0.01)
    return _suite(4, "rigidity", checks, margins=rows)


# -- 5 ---------------------------------------------------------------------------


def suite_perturb(seed: int = 7, count: int = 10) -> dict:
    p = default_params()
    markers = [random_marker(seed * 100 + 30 + i, PHI_WINDOW, DEFAULTS["M"], DEFAULTS["M1"]) for i in range(count)]
    fs = [random_b_signal(seed * 100 + i, p.a, 40.0, 0.25) for i in range(count)]
    phis = [make_phi(m, p) for m in markers]
    worst_d, worst_rec, min_rig = 0.0, 0.0, math.inf
    for i in range(count):
        second = (fs[(i + 1) % count], phis[(i + 1) % count]) if i < 3 else None
        g, rep = perturb_step(fs[i], phis[i], second)
        worst_d = max(worst_d, rep["metric_d"] + rep["metric_tail_bound"])
        worst_rec = max(worst_rec, rep["recovery_error"])
        if "rigidity_margin" in rep:
            min_rig = min(min_rig, rep["rigidity_margin"])
    it = iterate_embedding(None, steps=3, a=p.a, samples=5, seed=seed)
    ladder_ok = all(d < dl for d, dl in zip(it.distances, it.deltas)) and it.report["passed"]
    checks = {
        "metric_below_delta": _check(worst_d, p.delta, worst_d < p.delta),
        "g_minus_g1_is_g2": _check(worst_rec, 1e-9, worst_rec < 1e-9),
        "rigidity_vs_second_input": _check(min_rig, 0.0, min_rig > 0),
        "iteration_ladder": _check(it.distances, it.deltas, ladder_ok, epsilons=it.epsilons,
                                   partial_tail_sums=it.report["partial_tail_sums"]),
    }
    return _suite(5, "perturbation", checks)


# -- 6 ---------------------------------------------------------------------------


def suite_flows(seed: int = 7) -> dict:
    rng = np.random.default_rng(seed)
    sol = SolenoidFlow(4)
    period = sol.period
    law, consist = 0.0, 0.0
    for _ in range(100):
        q = sol.random_point(rng)
        s, t = rng.uniform(-50, 50, 2)
        lhs = solenoid_flow(solenoid_flow(q, s), t)
        rhs = solenoid_flow(q, s + t)
        law = max(law, sol.distance(lhs, rhs))
        consist = max(consist, lhs.consistency_defect())
    S2 = sol.section(2)
    start = S2.sample(rng)
    rt, _ = first_return(start, S2, sol, 100.0)
    gen_t, gen_q = first_return_generic(sol, S2, start, 100.0)
    orbit = return_orbit_length(start, S2, sol)
    conj_sol = conjugacy_roundtrip(sol, S2, 100, seed=seed)
    prod = ProductExtension(4, 5)
    conj_prod = conjugacy_roundtrip(prod, prod.section(2), 100, seed=seed)
    probes = [flow_boundary_probe(sol, sol.section(n), sol.section(n).eta / 2, 100, seed=seed) for n in range(1, 5)]
    tor = TorusFlow()
    clipped = flow_boundary_probe(tor, tor.section(clipped=True), 0.2, 100, eps=0.05, seed=seed)
    # every failing probe sits next to a clip edge
    reach = 0.05 * (1 + abs(tor.slope))
    edge_ok = all(min(abs(y), abs(y - 0.5)) <= reach + 1e-12 for _, y in clipped["failures"])
    checks = {
        "flow_law": _check(law, 1e-12, law < 1e-12),
        "consistency": _check(consist, 1e-12, consist < 1e-12),
        "return_time_S2": _check(rt, 2.0, rt == 2.0),
        "generic_return_agrees": _check(abs(gen_t - rt), 1e-9, abs(gen_t - rt) < 1e-9),
        "return_orbit_length": _check(orbit, int(period) // 2, orbit == int(period) // 2),
        "conjugacy_solenoid": _check(conj_sol["max_error"], 1e-9, conj_sol["passed"]),
        "conjugacy_product": _check(conj_prod["max_error"], 1e-9, conj_prod["passed"]),
        "boundary_probe_Sn": _check([r["passed_fraction"] for r in probes], 1.0, all(r["passed"] for r in probes)),
        "boundary_probe_clipped_fails": _check(clipped["passed_fraction"], 1.0,
                                               (not clipped["passed"]) and edge_ok),
    }
    return _suite(6, "flows", checks)


# -- 7 ---------------------------------------------------------------------------


SUB_VALUES = (0.95, 0.96, 0.97, 0.98, 0.99)


def fiber_marker(k: int, period: int = 24, half: int = 1000) -> MarkerSequence:
    """Period-24 marker: 1 at multiples of 24, ``SUB_VALUES[k]`` half way between."""
    vals = {}
    for n in range(-half, half + 1):
        if n % period == 0:
            vals[n] = 1.0
        elif n % period == period // 2:
            vals[n] = SUB_VALUES[k]
    return MarkerSequence(-half, half, vals, DEFAULTS["M"], DEFAULTS["M1"])


class PhiEmbedding:
    """``h(i + 24 k) = g2`` of the fiber-``k`` marker shifted by ``i``."""

    def __init__(self, params, states: int = 24, window_radius: float = 40.0, sample_step: float = 0.25):
        if not 2 * DEFAULTS["M"] <= states <= 2 * DEFAULTS["M1"]:
            raise ParameterError(f"{states} base states do not fit the marker scales")
        self.params = params
        self.states = states
        self.window_radius = window_radius
        self.sample_step = sample_step
        self._cache: dict = {}

    def __call__(self, state: int) -> BandLimitedSignal:
        if state not in self._cache:
            i, k = state % self.states, state // self.states
            marker = fiber_marker(k, self.states).shifted(i)
            self._cache[state] = g2(make_phi(marker, self.params), self.window_radius, self.sample_step)
        return self._cache[state]


def suspension_checks(system: DiscreteSystem, seed: int = 7, samples: int = 50, states: int = 24) -> dict:
    """Two-path equivariance, pairwise separation and the strong-embedding probe for ``h_f``."""
    if system.size % states or system.size // states > len(SUB_VALUES):
        raise ParameterError(f"system size {system.size} is not {states} x k with k <= {len(SUB_VALUES)}")
    p = default_params()
    flow = SuspensionFlow(system)
    h = PhiEmbedding(p, states)
    rng = np.random.default_rng(seed)
    two_path = 0.0
    for _ in range(10):
        x = int(rng.integers(0, system.size))
        s, t = float(rng.uniform(0, 1)), float(rng.uniform(0, 1))
        sp = SuspensionPoint(x, s)
        lhs = suspend_embedding(h, flow.flow(sp, t), system)
        rhs = translate(suspend_embedding(h, sp, system), t)
        radius = min(lhs.window_radius, rhs.window_radius)
        two_path = max(two_path, float(np.abs(lhs.restrict(radius).samples - rhs.restrict(radius).samples).max()))
    pts = set()
    while len(pts) < samples:
        pts.add((int(rng.integers(0, system.size)), round(float(rng.uniform(0, 1)), 6)))
    sigs = [suspend_embedding(h, SuspensionPoint(x, t), system) for x, t in sorted(pts)]
    radius = min(s.window_radius for s in sigs)
    sigs = [s.restrict(radius) for s in sigs]
    min_d = min(metric_d(sigs[i], sigs[j], 20)[0] for i in range(len(sigs)) for j in range(i))
    x0 = int(rng.integers(0, states))
    pairs = [(x0, system.iterate(x0, 2)), (x0, x0), (x0, system.iterate(x0, 1))]
    if system.size >= 4 * states:
        # fiber pairs: same base position, different symbol
        pairs += [(x0, x0 + states), (x0 + 2 * states, system.iterate(x0 + 3 * states, -1))]
    probe = strong_embedding_probe(h, pairs, system, r_step=0.05, r_max=3.0, threshold=1e-6)
    rows = probe["pairs"]
    flags_ok = (probe["passed"] and 2.0 in rows[0]["flagged"] and 0.0 in rows[1]["flagged"]
                and all(not r["flagged"] for r in rows[3:]))
    return {
        "two_path_equivariance": _check(two_path, 1e-6, two_path < 1e-6),
        "pairwise_metric_positive": _check(min_d, 0.0, min_d > 0, samples=samples),
        "strong_embedding_flags_integers": _check([r["flagged"] for r in rows], None, flags_ok),
    }


def suite_suspension(seed: int = 7) -> dict:
    return _suite(7, "suspension_embedding", suspension_checks(solenoid_return_system(4, 1, 5), seed))


# -- 8 ---------------------------------------------------------------------------


def suite_realification(seed: int = 7, count: int = 10) -> dict:
    a, b = 1.0, 1.4
    step = 1.0 / (2 * b) * 0.9
    worst_imag, sup_excess, worst_leak = 0.0, -math.inf, 0.0
    min_sep = math.inf
    outs = []
    for i in range(count):
        f = random_b1_signal(seed * 100 + i, a, b, 100.0, step)
        g = b1_to_real(f)
        worst_imag = max(worst_imag, float(np.abs(g.samples.imag).max()))
        sup_excess = max(sup_excess, g.sup - f.sup)
        worst_leak = max(worst_leak, fourier_leakage(g, (-b, b)))
        outs.append(g)
    for i in range(1, count):
        min_sep = min(min_sep, metric_d(outs[i], outs[i - 1], 20)[0])
    xi = 1.2
    tone = BandLimitedSignal.from_function(lambda x: np.exp(2j * np.pi * xi * x), 50.0, step, (a, b))
    tone_err = float(np.abs(b1_to_real(tone).samples - np.cos(2 * np.pi * xi * tone.grid)).max())
    checks = {
        "real_valued": _check(worst_imag, 0.0, worst_imag == 0.0),
        "sup_not_increased": _check(sup_excess, 0.0, sup_excess <= 0.0),
        "leakage_in_band": _check(worst_leak, 1e-3, worst_leak < 1e-3),
        "pure_tone": _check(tone_err, 1e-10, tone_err < 1e-10),
        "distinct_inputs_separated": _check(min_sep, 0.0, min_sep > 0),
    }
    return _suite(8, "realification", checks)


SUITES = {
    1: suite_tiling,
    2: suite_params,
    3: suite_phi,
    4: suite_rigidity,
    5: suite_perturb,
    6: suite_flows,
    7: suite_suspension,
    8: suite_realification,
}
