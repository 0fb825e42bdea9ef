"""The tiling-like band-limited map Phi and the checks built on it.

For a marker window with tiling cells ``W_n = [l_n, r_n]``::

    Phi(z) = sum_n Theta_L(z - n) * int_{W_n} chi_1(z - t) dt
           = sum_n Theta_L(z - n) * (G(z - l_n) - G(z - r_n))

with ``G`` the antiderivative of chi_1.  Far cells contribute at most
``sup|Theta_L| * tail(R)``, so each evaluation keeps only the part of the
tiling inside ``[Re z - R, Re z + R]`` with ``R`` chosen per ``|Im z|`` so the
discarded mass stays below half the evaluation tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import ContourError, DecompositionError, DomainError, IterationError, ParameterError, WindowError
from .kernel import Y_GRID, SpectralKernel, make_chi1
from .signals import REAL, BandLimitedSignal, fourier_leakage, metric_d, translate
from .theta import EmbeddingParams, build_params, theta, theta_derivative, theta_sup
from .tiling import Interval, IntervalTiling, MarkerSequence, build_tiling, int_e

_PAIR_CHUNK = 400_000


@dataclass(frozen=True, eq=False)
class PhiFunction:
    """Phi for one marker window.

    ``complete`` marks a hand-made tiling that is the whole tiling (every
    other cell EMPTY); its evaluation domain is then all of Omega.  Tilings
    built from a marker window are only trusted on their covered segment.
    """

    marker: Optional[MarkerSequence]
    tiling: IntervalTiling
    params: EmbeddingParams
    kernel: SpectralKernel
    eval_tolerance: float = 1e-9
    complete: bool = False
    _cells: tuple = field(init=False, repr=False)

    def __post_init__(self):
        rows = self.tiling.valid_cells()
        ns = np.array([n for n, _ in rows], dtype=float)
        lo = np.array([float(c.lo) for _, c in rows])
        hi = np.array([float(c.hi) for _, c in rows])
        if rows and (np.any(np.diff(lo) < 0) or np.any(np.diff(hi) < 0) or np.any(hi[:-1] > lo[1:] + 1e-9)):
            raise ParameterError("cells must be sorted and non-overlapping")
        object.__setattr__(self, "_cells", (ns, lo, hi))

    @cached_property
    def radii(self) -> np.ndarray:
        """Truncation radius for each imaginary-part level of ``Y_GRID``."""
        p = self.params
        return np.array([
            self.kernel.truncation_radius(self.eval_tolerance / 2, y_max=y, weight=theta_sup(p.L, p.b, y))
            for y in Y_GRID
        ])

    @property
    def segment(self) -> tuple[float, float]:
        return self.tiling.covered_segment()

    def real_domain(self) -> tuple[float, float]:
        """Range of ``Re z`` where real evaluation is within tolerance."""
        if self.complete:
            return (-math.inf, math.inf)
        lo, hi = self.segment
        return lo + self.radii[0], hi - self.radii[0]

    def complex_domain(self) -> tuple[float, float]:
        """Range of ``Re z`` valid for every ``|Im z| <= 1``."""
        if self.complete:
            return (-math.inf, math.inf)
        lo, hi = self.segment
        R = float(self.radii.max())
        return lo + R, hi - R

    def _radius_for(self, y: np.ndarray) -> np.ndarray:
        level = np.searchsorted(Y_GRID, y - 1e-12)
        return self.radii[np.minimum(level, Y_GRID.size - 1)]

    def __call__(self, z, derivative: bool = False):
        return phi_eval(self, z, derivative=derivative)


def make_phi(marker: MarkerSequence, params: EmbeddingParams, kernel: SpectralKernel | None = None,
             eval_tolerance: float = 1e-9, exact: bool = True) -> PhiFunction:
    kernel = make_chi1(params.delta) if kernel is None else kernel
    return PhiFunction(marker, build_tiling(marker, exact=exact), params, kernel, eval_tolerance)


def toy_phi(cells: dict, params: EmbeddingParams, kernel: SpectralKernel | None = None,
            eval_tolerance: float = 1e-9) -> PhiFunction:
    """Phi of an explicit complete tiling ``{site: (l, r)}``; all other cells EMPTY."""
    kernel = make_chi1(params.delta) if kernel is None else kernel
    tiling = IntervalTiling(
        params.H, {n: Interval(*c) for n, c in cells.items()}, (-(2**62), 2**62)
    )
    return PhiFunction(None, tiling, params, kernel, eval_tolerance, complete=True)


def phi_eval(phi: PhiFunction, z, derivative: bool = False):
    """Phi(z) for scalar or array ``z`` (and Phi'(z) when ``derivative``)."""
    z_in = np.asarray(z)
    flat = np.atleast_1d(z_in).astype(complex).ravel()
    y = np.abs(flat.imag)
    if np.any(y > 1.0 + 1e-12):
        raise DomainError("Phi is evaluated on the strip |Im z| <= 1")
    x = flat.real
    R = phi._radius_for(y)
    if not phi.complete:
        lo, hi = phi.segment
        bad = (x - R < lo) | (x + R > hi)
        if np.any(bad):
            raise DomainError(
                f"Re z = {x[bad][0]!r} outside the evaluation domain of this marker window"
            )
    ns, cl, ch = phi._cells
    out = np.zeros(flat.size, dtype=complex)
    dout = np.zeros(flat.size, dtype=complex) if derivative else None
    if ns.size:
        first = np.searchsorted(ch, x - R, side="right")
        last = np.searchsorted(cl, x + R, side="left")
        counts = np.maximum(last - first, 0)
        tab = phi.kernel.table
        L, b = phi.params.L, phi.params.b
        # chunk over points so the (point, cell) pair arrays stay bounded
        bounds = np.concatenate([[0], np.cumsum(counts)])
        start = 0
        while start < flat.size:
            stop = int(np.searchsorted(bounds, bounds[start] + _PAIR_CHUNK, side="right")) - 1
            stop = max(stop, start + 1)
            idx = np.arange(start, stop)
            c = counts[idx]
            pidx = np.repeat(idx, c)
            offs = np.arange(pidx.size) - np.repeat(np.cumsum(c) - c, c)
            cidx = first[pidx] + offs
            left = np.maximum(cl[cidx], x[pidx] - R[pidx])
            right = np.minimum(ch[cidx], x[pidx] + R[pidx])
            keep = left < right
            pidx, cidx, left, right = pidx[keep], cidx[keep], left[keep], right[keep]
            zp = flat[pidx]
            shifted = zp - ns[cidx]
            th = theta(shifted, L, b)
            integral = tab.G(zp - left) - tab.G(zp - right)
            np.add.at(out, pidx, th * integral)
            if derivative:
                dth = theta_derivative(shifted, L, b)
                dint = tab.chi(zp - left) - tab.chi(zp - right)
                np.add.at(dout, pidx, dth * integral + th * dint)
            start = stop
    shape = z_in.shape
    val = out.reshape(shape) if shape else out[0]
    if derivative:
        return val, (dout.reshape(shape) if shape else dout[0])
    return val


def equivariance_defect(phi: PhiFunction, k: int, grid) -> float:
    """``max |Phi(T^k x)(z) - Phi(x)(z + k)|`` over ``grid``."""
    grid = np.asarray(grid, dtype=complex)
    if k == 0:
        return 0.0
    if phi.marker is None:
        raise DomainError("equivariance needs a marker-built Phi")
    moved = PhiFunction(phi.marker.shifted(k), build_tiling(phi.marker.shifted(k)), phi.params,
                        phi.kernel, phi.eval_tolerance)
    return float(np.max(np.abs(phi_eval(moved, grid) - phi_eval(phi, grid + k))))


def sample_real(phi: PhiFunction, window_radius: float, sample_step: float, centre: float = 0.0,
                band=None) -> BandLimitedSignal:
    """Phi restricted to the reals, sampled on ``centre + [-T, T]``."""
    n = int(math.floor(2 * window_radius / sample_step + 1e-9)) + 1
    xs = centre - window_radius + sample_step * np.arange(n)
    p = phi.params
    band = (p.a / 2, p.a / 2 + p.delta / 2) if band is None else band
    return BandLimitedSignal(window_radius, sample_step, phi_eval(phi, xs.astype(complex)), band)


def spectral_support_report(phi: PhiFunction, window_radius: float = 200.0, sample_step: float = 0.25,
                            centre: float | None = None) -> dict:
    """Leakage of Phi|_R outside ``(a/2, a/2 + delta/2)`` and of its conjugate outside the mirror band."""
    p = phi.params
    M1 = phi.marker.M1 if phi.marker is not None else 0
    if window_radius < 4 * M1:
        raise WindowError(f"window radius {window_radius} < 4*M1 = {4 * M1}")
    band = (p.a / 2, p.a / 2 + p.delta / 2)
    mirror = (-band[1], -band[0])
    if centre is None:
        lo, hi = phi.real_domain()
        centre = 0.0 if phi.complete else float(round(0.5 * (lo + hi)))
    sig = sample_real(phi, window_radius, sample_step, centre)
    conj = sig.with_samples(np.conj(sig.samples), band=mirror)
    return {
        "band": list(band),
        "window_radius": window_radius,
        "sample_step": sample_step,
        "centre": centre,
        "leakage": fourier_leakage(sig, band),
        "conjugate_leakage": fourier_leakage(conj, mirror),
        "conjugate_in_phi_band": 1.0 - fourier_leakage(conj, band) if conj.sup > 0 else 0.0,
        # half-width of the taper main lobe added to the band on each side
        "taper_widening": 4.0 / (sig.samples.size * sample_step),
    }


# -- zeros -------------------------------------------------------------------


def winding_number(func: Callable, centre: complex, radius: float, nodes: int = 1024,
                   floor: float = 0.0, max_nodes: int = 1 << 15) -> tuple[int, float, float]:
    """Winding number of ``func`` around the circle ``|z - centre| = radius``.

    Sums principal phase increments between consecutive nodes, doubling the
    node count until every increment is below pi/4.  Returns
    ``(winding, min |func| on the contour, distance of the raw sum to an integer)``.
    Raises ContourError if ``|func|`` drops to ``floor`` on the contour.
    """
    while True:
        ang = 2 * np.pi * np.arange(nodes) / nodes
        vals = np.asarray(func(centre + radius * np.exp(1j * ang)))
        low = float(np.abs(vals).min())
        if low <= floor:
            raise ContourError(f"|f| = {low:.3e} on the contour around {centre}")
        inc = np.angle(np.roll(vals, -1) / vals)
        if np.abs(inc).max() < np.pi / 4 or nodes >= max_nodes:
            break
        nodes *= 2
    raw = inc.sum() / (2 * np.pi)
    w = int(round(raw))
    return w, low, abs(raw - w)


def newton(func_and_derivative: Callable, z0: complex, tol: float = 1e-13, max_iter: int = 60) -> complex:
    z = complex(z0)
    for _ in range(max_iter):
        f, df = func_and_derivative(z)
        if df == 0:
            break
        step = f / df
        z -= step
        if abs(step) <= tol * max(1.0, abs(z)):
            return z
    return z


@dataclass
class DiskRecord:
    centre: float
    site: int
    lattice_index: int
    radius: float
    winding: int
    contour_min: float
    zero: Optional[complex]
    residual: Optional[float]


@dataclass
class ZeroSearch:
    disks: list
    off_disk: dict

    @property
    def zeros(self) -> list[tuple[complex, float]]:
        return [(d.zero, d.centre) for d in self.disks if d.zero is not None]


def lattice_centres(phi: PhiFunction, re_range: tuple[float, float], erosion: float):
    """Pairs ``(site, m, n + L m)`` with the centre in ``Int_erosion W(n)`` and in ``re_range``."""
    L = phi.params.L
    out = []
    for n, cell in phi.tiling.valid_cells():
        inner = int_e(cell, erosion)
        if inner is None:
            continue
        lo = max(float(inner.lo), re_range[0])
        hi = min(float(inner.hi), re_range[1])
        if lo > hi:
            continue
        for m in range(math.ceil((lo - n) / L), math.floor((hi - n) / L) + 1):
            out.append((n, m, n + L * m))
    return out


def locate_zeros(phi: PhiFunction, re_range: tuple[float, float], nodes: int = 1024,
                 x_step: float = 0.25, y_levels: int = 11, certify: bool = True) -> ZeroSearch:
    """Winding numbers on every certified disk and a nonvanishing grid certificate.

    Disks are ``D_{r1}(n + L m)`` with centre in ``Int_{E+1} W(n)``.  The
    certificate checks ``|Phi| >= theta_L / 2`` at grid points whose real part
    lies in ``Int_E W(n)`` for some site and which avoid that site's disks.
    """
    p = phi.params
    lo_dom, hi_dom = phi.complex_domain()
    if re_range[0] < lo_dom or re_range[1] > hi_dom:
        raise DomainError(f"re_range {re_range} outside the complex domain [{lo_dom}, {hi_dom}]")
    floor = 10 * phi.eval_tolerance
    disks = []
    for n, m, c in lattice_centres(phi, re_range, p.E + 1):
        rec = None
        for j in range(11):
            rho = p.r1 * (1 - 0.05 * j)
            try:
                w, low, _ = winding_number(lambda zz: phi_eval(phi, zz), c, rho, nodes, floor)
            except ContourError:
                continue
            rec = DiskRecord(c, n, m, rho, w, low, None, None)
            break
        if rec is None:
            raise ContourError(f"no usable contour around {c} for radii in [r1/2, r1]")
        if rec.winding >= 1:
            z = newton(lambda zz: phi_eval(phi, zz, derivative=True), complex(c))
            if abs(z - c) <= p.r1:
                rec.zero = z
                rec.residual = float(abs(phi_eval(phi, z)))
        disks.append(rec)
    off = certify_nonvanishing(phi, re_range, x_step, y_levels) if certify else {}
    return ZeroSearch(disks, off)


def certify_nonvanishing(phi: PhiFunction, re_range: tuple[float, float], x_step: float = 0.25,
                         y_levels: int = 11) -> dict:
    """Grid check of ``|Phi| >= theta_L / 2`` off the disks, inside ``Int_E`` cells."""
    p = phi.params
    xs = np.arange(re_range[0], re_range[1] + x_step / 2, x_step)
    centres = np.array([c for _, _, c in lattice_centres(phi, re_range, p.E)])
    xs = np.union1d(xs, centres) if centres.size else xs
    ys = np.linspace(-1.0, 1.0, y_levels)
    # keep x inside Int_E of its owning cell
    ns, cl, ch = phi._cells
    owner = np.searchsorted(ch, xs, side="left")
    inside = owner < ns.size
    o = np.minimum(owner, max(ns.size - 1, 0))
    if ns.size:
        inside &= (xs >= cl[o] + p.E) & (xs <= ch[o] - p.E)
    xs, site = xs[inside], ns[o][inside]
    X = np.repeat(xs, ys.size)
    S = np.repeat(site, ys.size)
    Y = np.tile(ys, xs.size)
    Z = X + 1j * Y
    # distance to the nearest disk centre of the owning site
    rel = (X - S) / p.L
    dist = np.abs(Z - (S + p.L * np.round(rel)))
    Z = Z[dist > p.r1]
    # plus rings just outside every disk
    ring = []
    for c in centres:
        ring.append(c + 1.001 * p.r1 * np.exp(2j * np.pi * np.arange(32) / 32))
    if ring:
        Z = np.concatenate([Z, np.concatenate(ring)])
    if Z.size == 0:
        return {"points": 0, "min_modulus": None, "threshold": p.theta_L / 2, "passed": True}
    vals = np.abs(phi_eval(phi, Z))
    worst = int(np.argmin(vals))
    return {
        "points": int(Z.size),
        "min_modulus": float(vals[worst]),
        "argmin": [float(Z[worst].real), float(Z[worst].imag)],
        "threshold": p.theta_L / 2,
        "passed": bool(vals[worst] >= p.theta_L / 2),
    }


# -- rigidity ----------------------------------------------------------------


def rigidity_lattice(r1: float, r_step: float, r_max: float = 0.5) -> np.ndarray:
    """Integer multiples ``k`` of ``r_step`` with ``2 r1 + r_step <= |k r_step| <= r_max``."""
    kmin = math.ceil((2 * r1 + r_step) / r_step - 1e-9)
    kmax = math.floor(r_max / r_step + 1e-9)
    ks = np.arange(kmin, kmax + 1)
    return np.concatenate([-ks[::-1], ks])


def shift_rigidity_margin(phi_x: PhiFunction, phi_y: PhiFunction, r_step: float = 1e-3,
                          window: tuple[float, float] = (-50.0, 50.0), t_stride: int = 50,
                          with_curve: bool = False):
    """``min_r sup_t |Phi_y(t + r) - Phi_x(t)|`` over the rigidity lattice.

    ``t`` runs over ``window`` with step ``t_stride * r_step``, so every
    ``t + r`` lands on the lattice where Phi_y is sampled once.
    """
    ks = rigidity_lattice(phi_x.params.r1, r_step)
    kmax = int(np.abs(ks).max())
    n_t = int(math.floor((window[1] - window[0]) / (t_stride * r_step) + 1e-9)) + 1
    t_idx = np.arange(n_t) * t_stride
    base = window[0] - kmax * r_step
    u = base + r_step * np.arange(t_idx[-1] + 2 * kmax + 1)
    fy = phi_eval(phi_y, u.astype(complex))
    fx = phi_eval(phi_x, (window[0] + r_step * t_idx).astype(complex))
    sups = np.array([np.abs(fy[t_idx + kmax + k] - fx).max() for k in ks])
    i = int(np.argmin(sups))
    result = (float(sups[i]), float(ks[i] * r_step))
    if with_curve:
        return result, (ks * r_step, sups)
    return result


# -- perturbation ------------------------------------------------------------


def g2(phi: PhiFunction, window_radius: float = 40.0, sample_step: float = 0.25) -> BandLimitedSignal:
    """``delta / (2 K1) * Re Phi`` sampled on ``[-T, T]``."""
    p = phi.params
    edge = p.a / 2 + p.delta / 2
    sig = sample_real(phi, window_radius, sample_step, 0.0, band=(-edge, edge))
    scale = p.delta / (2 * p.K1)
    return sig.with_samples((scale * sig.samples.real).astype(complex), value_kind=REAL)


def signal_rigidity_margin(g: BandLimitedSignal, other: BandLimitedSignal, r_min: float,
                           r_step: float = 1e-3, r_max: float = 0.5) -> tuple[float, float]:
    """``min_r sup |tau_r other - g|`` over ``r_min + r_step <= |r| <= r_max`` on a common window."""
    ks = rigidity_lattice(r_min / 2, r_step, r_max)
    best, arg = math.inf, 0.0
    for k in ks:
        moved = translate(other, k * r_step)
        ref = g.restrict(moved.window_radius)
        d = float(np.abs(moved.samples - ref.samples).max())
        if d < best:
            best, arg = d, float(k * r_step)
    return best, arg


def perturb_step(f: BandLimitedSignal, phi: PhiFunction, second: tuple | None = None,
                 leakage_threshold: float = 1e-2, r_step: float = 1e-3):
    """One perturbation ``g = g1 + g2`` of ``f`` in B(a).

    ``g1`` is the placeholder for the band-confined part (``f`` itself);
    ``g2`` comes from Phi.  ``second = (f', phi')`` adds the rigidity margin of
    ``g`` against the perturbation of a second input.
    """
    p = phi.params
    if not np.allclose(f.band, (-p.a / 2, p.a / 2), rtol=0, atol=1e-12):
        raise ParameterError(f"f must declare band [-a/2, a/2] = [{-p.a / 2}, {p.a / 2}]")
    edge = p.a / 2 + p.delta / 2
    part2 = g2(phi, f.window_radius, f.sample_step)
    part1 = f
    g = BandLimitedSignal(f.window_radius, f.sample_step, part1.samples + part2.samples, (-edge, edge), REAL)
    low_band = (-p.a / 2, p.a / 2)
    high_bands = [(-edge, -p.a / 2), (p.a / 2, edge)]
    leak1 = fourier_leakage(part1, low_band)
    leak2 = fourier_leakage(part2, high_bands)
    if leak1 > leakage_threshold or leak2 > leakage_threshold:
        raise DecompositionError(
            f"spectral overlap between g1 and g2 (leakage {leak1:.3e}, {leak2:.3e})"
        )
    dist, tail = metric_d(g, f, 20)
    recovered = float(np.abs((g.samples - part2.samples) - part1.samples).max())
    report = {
        "metric_d": dist,
        "metric_tail_bound": tail,
        "delta": p.delta,
        "distance_ok": dist + tail < p.delta,
        "g2_sup": part2.sup,
        "g2_sup_ok": part2.sup <= p.delta / 2,
        "g1_leakage": leak1,
        "g2_leakage": leak2,
        "recovery_error": recovered,
    }
    if second is not None:
        f_b, phi_b = second
        g_b, _ = perturb_step(f_b, phi_b, None, leakage_threshold, r_step)
        margin, arg = signal_rigidity_margin(g, g_b, 2 * p.r1, r_step)
        report["rigidity_margin"] = margin
        report["rigidity_argmin"] = arg
    return g, report


# -- iteration ---------------------------------------------------------------


@dataclass
class IterationResult:
    maps: list  # maps[j][i]: h_{j+1} at sample point i
    deltas: list
    epsilons: list
    distances: list
    params: list
    report: dict


def ladder_delta(n: int, eps_next: float, a: float) -> float:
    """``min(1/(n+1), eps_{n+1}/2, a_{n+1} - a_n)`` with ``a_n = a (1 - 2^-n)``."""
    return min(1.0 / (n + 1), eps_next / 2.0, a * 2.0 ** -(n + 1))


def default_marker_factory(seed: int, window_radius: float):
    """Markers per step scaled to the step's kernel so Phi's domain covers the window."""
    from .generators import random_marker

    def factory(step: int, params: EmbeddingParams, count: int) -> list[MarkerSequence]:
        scale = 0.8 / params.delta
        M = max(10, int(round(10 * scale)))
        M1 = max(M + 1, int(round(25 * scale)))
        reach = make_chi1(params.delta).truncation_radius(1e-10, 0.0, 1.0)
        half = int(math.ceil(window_radius + reach + 2 * (M1 + 1) + 4 * M1))
        return [random_marker(seed + 1000 * step + i, (-half, half), M, M1) for i in range(count)]

    return factory


def iterate_embedding(markers, steps: int = 3, a: float = 2.0, samples: int = 5,
                      window_radius: float = 40.0, sample_step: float = 0.25, seed: int = 7,
                      eps_ratio: float = 0.25) -> IterationResult:
    """Finite run of the perturbation scheme starting from ``h_1 = 0``.

    ``markers`` is a callable ``(step, params, count) -> list of markers`` or a
    sequence indexed by step (1-based) of marker lists, one per sample point.
    The tolerance ladder is ``eps_1 = 1``, ``eps_{n+1} = eps_ratio * eps_n``.
    """
    if not 1 <= steps <= 5:
        raise ParameterError("steps must lie in 1..5")
    if markers is None:
        markers = default_marker_factory(seed, window_radius)
    eps = [1.0]
    grid_len = int(math.floor(2 * window_radius / sample_step + 1e-9)) + 1
    h = [BandLimitedSignal(window_radius, sample_step, np.zeros(grid_len), (-a / 4, a / 4), REAL)
         for _ in range(samples)]
    maps = [h]
    deltas, distances, plist = [], [], []
    for n in range(1, steps + 1):
        eps.append(eps_ratio * eps[-1])
        delta = ladder_delta(n, eps[n], a)
        a_n = a * (1 - 2.0 ** -n)
        L = 8.0 / delta
        params = build_params(a_n, delta, L, M=10, M1=25)
        batch = markers(n, params, samples) if callable(markers) else markers[n - 1]
        batch = list(batch)[:samples]
        if len(batch) < samples:
            raise ParameterError(f"step {n}: need {samples} markers, got {len(batch)}")
        params = params.with_markers(batch[0].M, batch[0].M1)
        nxt, dist = [], 0.0
        for f, mk in zip(h, batch):
            phi = make_phi(mk, params)
            g = g2(phi, window_radius, sample_step)
            edge = a_n / 2 + delta / 2
            new = BandLimitedSignal(window_radius, sample_step, f.samples + g.samples, (-edge, edge), REAL)
            dist = max(dist, float(np.abs(new.samples - f.samples).max()))
            nxt.append(new)
        if not dist < delta or not delta <= eps[n] / 2:
            raise IterationError(f"ladder violated at step {n}: distance {dist} vs delta {delta}", n)
        h = nxt
        maps.append(h)
        deltas.append(delta)
        distances.append(dist)
        plist.append(params)
    tails = [sum(distances[m:]) for m in range(len(distances))]
    report = {
        "steps": steps,
        "epsilons": eps,
        "deltas": deltas,
        "distances": distances,
        "partial_tail_sums": tails,
        "per_step_ok": [d < dl for d, dl in zip(distances, deltas)],
        # sum_{l >= m} dist_l < eps_{m+1}
        "cauchy_ok": [t < eps[m + 1] for m, t in enumerate(tails)],
    }
    report["passed"] = all(report["per_step_ok"]) and all(report["cauchy_ok"])
    return IterationResult(maps, deltas, eps, distances, plist, report)
