"""Desk-scale flows, cross-sections and first returns.

Registered flows:

* :class:`SolenoidFlow` - the solenoid truncated at depth N, i.e. the circle
  of length N! carried with its redundant coordinates ``x_n = x_N mod n!``.
* :class:`ProductExtension` - solenoid times a finite fiber with trivial action.
* :class:`SuspensionFlow` - suspension of a finite permutation system under a roof.
* :class:`TorusFlow` - linear flow on the 2-torus (home of the clipped-section fixture).

A cross-section is described by a signed *offset*: the flow time elapsed
since the point last met the section's hypersurface, folded into
``[-eta, xi)``.  Crossing detection, first returns and last crossings are all
phrased in terms of it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (DepthError, InversionError, ParameterError, PreconditionError, SearchError,
                     UnsupportedRoofError)
from .signals import BandLimitedSignal, metric_d, translate

SECTION_TOL = 1e-9
CROSSING_TOL = 1e-10


def _circ(a: float, b: float, period: float) -> float:
    d = (a - b) % period
    return min(d, period - d)


# -- solenoid -----------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedSolenoidPoint:
    depth: int
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != self.depth:
            raise DepthError("need one coordinate per level")

    @classmethod
    def from_top(cls, x_top: float, depth: int) -> "TruncatedSolenoidPoint":
        top = x_top % math.factorial(depth)
        return cls(depth, tuple(top % math.factorial(n) for n in range(1, depth + 1)))

    @property
    def top(self) -> float:
        return self.coords[-1]

    def consistency_defect(self) -> float:
        """max over n of the circular distance between ``x_{n+1} mod n!`` and ``x_n``."""
        worst = 0.0
        for n in range(1, self.depth):
            fac = math.factorial(n)
            worst = max(worst, _circ(self.coords[n] % fac, self.coords[n - 1], fac))
        return worst


def solenoid_flow(p: TruncatedSolenoidPoint, r: float) -> TruncatedSolenoidPoint:
    """Psi_r: ``x_n -> x_n + r mod n!`` coordinatewise."""
    return TruncatedSolenoidPoint(
        p.depth, tuple((x + r) % math.factorial(n) for n, x in enumerate(p.coords, start=1))
    )


def in_section(p: TruncatedSolenoidPoint, n: int, tol: float = SECTION_TOL) -> bool:
    """Membership in ``S_n = {x_1 = ... = x_n = 0}``."""
    if not 1 <= n <= p.depth:
        raise DepthError(f"section index {n} outside 1..{p.depth}")
    return _circ(p.coords[n - 1], 0.0, math.factorial(n)) <= tol


@dataclass(frozen=True, eq=False)
class CrossSectionData:
    """A cross-section given by its signed offset function.

    ``offset(p)`` is the signed flow time from the section hypersurface,
    ``member(s)`` restricts the hypersurface (full sections accept every
    point), ``eta`` is an injectivity time and ``xi`` a covering time.
    Closed forms for the return time/map and last crossing are optional.
    """

    section_id: str
    eta: float
    xi: float
    offset: Callable = field(repr=False)
    sample: Callable = field(repr=False)
    member: Callable = field(default=lambda s: True, repr=False)
    return_time: Optional[Callable] = field(default=None, repr=False)
    return_map: Optional[Callable] = field(default=None, repr=False)
    last_crossing: Optional[Callable] = field(default=None, repr=False)

    def contains(self, p, tol: float = SECTION_TOL) -> bool:
        return abs(self.offset(p)) <= tol and self.member(p)


class SolenoidFlow:
    """Solenoid truncated at ``depth`` (circle of length ``depth!``)."""

    def __init__(self, depth: int = 4):
        if depth < 1:
            raise DepthError("depth must be positive")
        self.depth = depth
        self.period = float(math.factorial(depth))
        self.name = f"solenoid:{depth}"

    def point(self, x_top: float) -> TruncatedSolenoidPoint:
        return TruncatedSolenoidPoint.from_top(x_top, self.depth)

    def flow(self, p, t):
        return solenoid_flow(p, t)

    def distance(self, p, q) -> float:
        return max(_circ(a, b, math.factorial(n)) for n, (a, b) in enumerate(zip(p.coords, q.coords), start=1))

    def random_point(self, rng):
        return self.point(rng.uniform(0.0, self.period))

    def neighbours(self, p, eps, rng, count=8):
        return [self.point(p.top + e) for e in rng.uniform(-eps, eps, count)]

    def coords(self, p) -> list:
        return list(p.coords)

    def section(self, n: int) -> CrossSectionData:
        if not 1 <= n <= self.depth:
            raise DepthError(f"section index {n} outside 1..{self.depth}")
        fac = float(math.factorial(n))
        steps = int(self.period // fac)

        def offset(p):
            return (p.coords[n - 1] + fac / 2) % fac - fac / 2

        def sample(rng):
            return self.point(fac * int(rng.integers(0, steps)))

        def last(p):
            tau = p.coords[n - 1] % fac
            return solenoid_flow(p, -tau), tau

        return CrossSectionData(
            f"S{n}", fac / 2, fac / 2, offset, sample,
            return_time=lambda s: fac,
            return_map=lambda s: solenoid_flow(s, fac),
            last_crossing=last,
        )


class ProductExtension:
    """``Y x K``: the solenoid times ``fiber_size`` points, fiber untouched by the flow."""

    def __init__(self, depth: int = 4, fiber_size: int = 5):
        self.base = SolenoidFlow(depth)
        self.fiber_size = fiber_size
        self.period = self.base.period
        self.name = f"product:{depth}:{fiber_size}"

    def flow(self, p, t):
        return (solenoid_flow(p[0], t), p[1])

    def distance(self, p, q) -> float:
        # discrete fiber: different symbols are far apart
        return self.base.distance(p[0], q[0]) + (0.0 if p[1] == q[1] else self.period)

    def random_point(self, rng):
        return (self.base.random_point(rng), int(rng.integers(0, self.fiber_size)))

    def neighbours(self, p, eps, rng, count=8):
        return [(q, p[1]) for q in self.base.neighbours(p[0], eps, rng, count)]

    def coords(self, p) -> list:
        return list(p[0].coords) + [p[1]]

    def section(self, n: int) -> CrossSectionData:
        """``pi^{-1}(S_n) = S_n x K``."""
        inner = self.base.section(n)
        fac = float(math.factorial(n))

        def sample(rng):
            return (inner.sample(rng), int(rng.integers(0, self.fiber_size)))

        def last(p):
            s, tau = inner.last_crossing(p[0])
            return (s, p[1]), tau

        return CrossSectionData(
            f"S{n}xK", fac / 2, fac / 2, lambda p: inner.offset(p[0]), sample,
            return_time=lambda s: fac,
            return_map=lambda s: (solenoid_flow(s[0], fac), s[1]),
            last_crossing=last,
        )


# -- suspensions --------------------------------------------------------------


@dataclass(frozen=True)
class SuspensionPoint:
    base: int
    height: float


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    """Map ``T`` on ``{0, ..., n-1}`` given by ``mapping[i] = T(i)``, with a roof per state."""

    mapping: tuple
    roof: tuple

    def __post_init__(self):
        n = len(self.mapping)
        if len(self.roof) != n:
            raise ParameterError("one roof value per state")
        if any(not 0 <= int(j) < n for j in self.mapping):
            raise ParameterError("mapping leaves the state set")
        if any(not r > 0 for r in self.roof):
            raise ParameterError("roof values must be positive")

    @classmethod
    def cyclic(cls, n: int, roof: float = 1.0) -> "DiscreteSystem":
        return cls(tuple((i + 1) % n for i in range(n)), (float(roof),) * n)

    @classmethod
    def product(cls, base: "DiscreteSystem", fiber_size: int) -> "DiscreteSystem":
        """``base x K`` with trivial fiber action; state ``i + n * k``."""
        n = len(base.mapping)
        mapping = tuple(base.mapping[s % n] + n * (s // n) for s in range(n * fiber_size))
        return cls(mapping, tuple(base.roof) * fiber_size)

    @property
    def size(self) -> int:
        return len(self.mapping)

    @property
    def invertible(self) -> bool:
        return len(set(self.mapping)) == len(self.mapping)

    def T(self, i: int) -> int:
        return self.mapping[i]

    def T_inv(self, i: int) -> int:
        if not self.invertible:
            raise InversionError("base map is not invertible")
        return self.mapping.index(i)

    def iterate(self, i: int, m: int) -> int:
        step = self.T if m >= 0 else self.T_inv
        for _ in range(abs(m)):
            i = step(i)
        return i

    def to_json(self) -> dict:
        return {"map": list(self.mapping), "roof": list(self.roof)}

    @classmethod
    def from_json(cls, data: dict) -> "DiscreteSystem":
        return cls(tuple(int(v) for v in data["map"]), tuple(float(v) for v in data["roof"]))


def solenoid_return_system(depth: int = 4, n: int = 1, fiber_size: int = 1) -> DiscreteSystem:
    """First-return system of ``S_n`` in the depth-``depth`` solenoid (a rotation), times a fiber."""
    states = math.factorial(depth) // math.factorial(n)
    base = DiscreteSystem.cyclic(states, roof=float(math.factorial(n)))
    return DiscreteSystem.product(base, fiber_size) if fiber_size > 1 else base


def suspension_flow(sp: SuspensionPoint, t: float, roof: Callable, base_map: Callable,
                    base_inverse: Callable | None = None) -> SuspensionPoint:
    """Vertical flow with the identification ``(x, roof(x)) ~ (T x, 0)``."""
    base, h = sp.base, sp.height + t
    while h >= roof(base):
        h -= roof(base)
        base = base_map(base)
    while h < 0:
        if base_inverse is None:
            raise InversionError("negative time needs an inverse base map")
        base = base_inverse(base)
        h += roof(base)
    return SuspensionPoint(base, h)


class SuspensionFlow:
    """Suspension of a :class:`DiscreteSystem` under its roof."""

    def __init__(self, system: DiscreteSystem, name: str = "suspension"):
        self.system = system
        self.name = name

    def roof(self, i: int) -> float:
        return self.system.roof[i]

    def flow(self, p: SuspensionPoint, t: float) -> SuspensionPoint:
        inv = self.system.T_inv if self.system.invertible else None
        return suspension_flow(p, t, self.roof, self.system.T, inv)

    def distance(self, p, q) -> float:
        # flow-time distance along the identification, or "far" across orbits
        best = math.inf
        for a, b in ((p, q), (q, p)):
            if a.base == b.base:
                best = min(best, abs(a.height - b.height))
            if self.system.T(a.base) == b.base:
                best = min(best, (self.roof(a.base) - a.height) + b.height)
        return best if best < math.inf else max(self.system.roof) + 1.0

    def random_point(self, rng):
        i = int(rng.integers(0, self.system.size))
        return SuspensionPoint(i, float(rng.uniform(0.0, self.roof(i))))

    def neighbours(self, p, eps, rng, count=8):
        return [self.flow(p, e) for e in rng.uniform(-eps, eps, count)]

    def coords(self, p) -> list:
        return [p.base, p.height]

    def section(self) -> CrossSectionData:
        """The base at height 0."""
        roofs = self.system.roof
        half = min(roofs) / 2

        def offset(p):
            return p.height if p.height < self.roof(p.base) / 2 else p.height - self.roof(p.base)

        def sample(rng):
            return SuspensionPoint(int(rng.integers(0, self.system.size)), 0.0)

        return CrossSectionData(
            "base", half, max(roofs), offset, sample,
            return_time=lambda s: self.roof(s.base),
            return_map=lambda s: SuspensionPoint(self.system.T(s.base), 0.0),
            last_crossing=lambda p: (SuspensionPoint(p.base, 0.0), p.height),
        )


class TorusFlow:
    """Linear flow ``(x, y) -> (x + t, y + slope t)`` on the unit torus."""

    def __init__(self, slope: float = math.sqrt(2) - 1):
        self.slope = slope
        self.name = "torus"

    def flow(self, p, t):
        return ((p[0] + t) % 1.0, (p[1] + self.slope * t) % 1.0)

    def distance(self, p, q) -> float:
        return max(_circ(p[0], q[0], 1.0), _circ(p[1], q[1], 1.0))

    def random_point(self, rng):
        return (float(rng.uniform()), float(rng.uniform()))

    def neighbours(self, p, eps, rng, count=8):
        d = rng.uniform(-eps, eps, (count, 2))
        return [((p[0] + a) % 1.0, (p[1] + b) % 1.0) for a, b in d]

    def coords(self, p) -> list:
        return list(p)

    def section(self, clipped: bool = False) -> CrossSectionData:
        """``{x = 0}``, or its half ``{x = 0, 0 <= y <= 1/2}`` when ``clipped``."""
        def offset(p):
            return (p[0] + 0.5) % 1.0 - 0.5

        if clipped:
            def member(s):
                return 0.0 <= s[1] <= 0.5

            def sample(rng):
                return (0.0, float(rng.uniform(0.0, 0.5)))
        else:
            def member(s):
                return True

            def sample(rng):
                return (0.0, float(rng.uniform()))

        return CrossSectionData("x=0,y<=1/2" if clipped else "x=0", 0.5, 0.5, offset, sample, member)


# -- returns and crossings ----------------------------------------------------


def _bisect(g, a, b, tol=CROSSING_TOL):
    """Shrink ``[a, b]`` with ``g(a) < 0 <= g(b)`` to width ``tol``; return ``b``."""
    while b - a > tol:
        m = 0.5 * (a + b)
        if g(m) < 0:
            a = m
        else:
            b = m
    return b


def first_return_generic(flow, section: CrossSectionData, p, t_max: float, step: float | None = None):
    """First return by marching forward and bisecting the offset's zero crossing."""
    dt = section.eta / 4 if step is None else step
    g = lambda t: section.offset(flow.flow(p, t))
    t_prev = min(dt, section.eta / 2)
    g_prev = g(t_prev)
    while t_prev < t_max:
        t = t_prev + dt
        g_cur = g(t)
        # a genuine crossing moves the offset up through 0 by about dt
        if g_prev < 0 <= g_cur and g_cur - g_prev < 2 * dt:
            tc = _bisect(g, t_prev, t)
            q = flow.flow(p, tc)
            if section.member(q):
                return tc, q
        t_prev, g_prev = t, g_cur
    raise SearchError(f"no return to {section.section_id} before t_max = {t_max}")


def first_return(p, section: CrossSectionData, flow, t_max: float):
    """``(t_S(p), T_S(p))``; closed form when the section provides one."""
    if section.return_time is not None and section.return_map is not None:
        t = section.return_time(p)
        if t > t_max:
            raise SearchError(f"return time {t} exceeds t_max = {t_max}")
        return t, section.return_map(p)
    return first_return_generic(flow, section, p, t_max)


def last_crossing_generic(flow, section: CrossSectionData, p, t_max: float, step: float | None = None):
    """``(s, tau)`` with ``s`` on the section and ``p = flow(s, tau)``, ``tau >= 0`` minimal."""
    dt = section.eta / 4 if step is None else step
    g = lambda tau: section.offset(flow.flow(p, -tau))
    g0 = g(0.0)
    if abs(g0) <= CROSSING_TOL and section.member(p):
        return p, 0.0
    tau_prev, g_prev = 0.0, g0
    while tau_prev < t_max:
        tau = tau_prev + dt
        g_cur = g(tau)
        if g_cur < 0 <= g_prev and g_prev - g_cur < 2 * dt:
            # g decreases in tau: find the zero of -g
            tc = _bisect(lambda s: -g(s), tau_prev, tau)
            tc = tau_prev if g(tau_prev) == 0 else tc
            s = flow.flow(p, -tc)
            if section.member(s):
                return s, tc
        tau_prev, g_prev = tau, g_cur
    raise SearchError("no earlier crossing found")


def last_crossing(flow, section: CrossSectionData, p, t_max: float):
    if section.last_crossing is not None:
        return section.last_crossing(p)
    return last_crossing_generic(flow, section, p, t_max)


def return_orbit_length(p, section: CrossSectionData, flow, max_len: int = 100_000, tol: float = 1e-9) -> int:
    """Number of first returns until the section point comes back to ``p``."""
    q = p
    for k in range(1, max_len + 1):
        _, q = first_return(q, section, flow, math.inf)
        if flow.distance(p, q) <= tol:
            return k
    raise SearchError("return orbit did not close")


# -- probes -------------------------------------------------------------------


def flow_boundary_probe(flow, section: CrossSectionData, gamma: float, probes: int = 100,
                        eps: float | None = None, neighbours: int = 16, seed: int = 0) -> dict:
    """Interiority test of the flow tube ``flow((-gamma, gamma), section)``.

    Each probe picks a section point ``s`` and ambient points within ``eps``;
    a neighbour passes when flowing it by minus its offset lands on the
    section within ``|t| < gamma``.  Passing every probe is the finite witness
    of an empty flow boundary.
    """
    if not 0 < gamma < section.eta:
        raise ParameterError(f"need 0 < gamma < eta = {section.eta}")
    eps = gamma / 2 if eps is None else eps
    rng = np.random.default_rng(seed)
    failures = []
    for _ in range(probes):
        s = section.sample(rng)
        ok = True
        for q in flow.neighbours(s, eps, rng, neighbours):
            t = section.offset(q)
            foot = flow.flow(q, -t)
            if not (abs(t) < gamma and section.member(foot)):
                ok = False
                break
        if not ok:
            failures.append(flow.coords(s))
    return {
        "section": section.section_id,
        "gamma": gamma,
        "eps": eps,
        "probes": probes,
        "passed_fraction": 1.0 - len(failures) / probes,
        "failures": failures,
        "passed": not failures,
    }


def _suspension_advance(section, flow, s, t, t_max):
    """Suspension flow over the first-return system of ``section``."""
    while True:
        rt, nxt = first_return(s, section, flow, t_max)
        if t < rt:
            return s, t
        s, t = nxt, t - rt


def conjugacy_roundtrip(flow, section: CrossSectionData, samples: int = 100, times=(0.3, 1.7, 5.0),
                        seed: int = 0, t_max: float = 1e4, probe: bool = True) -> dict:
    """Check the conjugacy between the suspension over ``T_S`` and the ambient flow.

    Forward map ``(s, t) -> flow(s, t)``; inverse ``p -> (last crossing, elapsed time)``.
    """
    if probe:
        gamma = section.eta / 2
        rep = flow_boundary_probe(flow, section, gamma, probes=20, seed=seed)
        if not rep["passed"]:
            raise PreconditionError(f"section {section.section_id} failed the boundary probe")
    rng = np.random.default_rng(seed)
    ambient_err = 0.0
    suspension_err = 0.0
    equivariance_err = 0.0
    for _ in range(samples):
        p = flow.random_point(rng)
        s, tau = last_crossing(flow, section, p, t_max)
        ambient_err = max(ambient_err, flow.distance(flow.flow(s, tau), p))
        # suspension side: (s, t) -> ambient -> back
        s0 = section.sample(rng)
        rt, _ = first_return(s0, section, flow, t_max)
        t0 = float(rng.uniform(0.0, rt))
        s1, t1 = last_crossing(flow, section, flow.flow(s0, t0), t_max)
        suspension_err = max(suspension_err, flow.distance(s1, s0) + abs(t1 - t0))
        for dt in times:
            s2, t2 = _suspension_advance(section, flow, s0, t0 + dt, t_max)
            equivariance_err = max(equivariance_err, flow.distance(flow.flow(s2, t2), flow.flow(s0, t0 + dt)))
    worst = max(ambient_err, suspension_err, equivariance_err)
    return {
        "section": section.section_id,
        "samples": samples,
        "ambient_roundtrip": ambient_err,
        "suspension_roundtrip": suspension_err,
        "equivariance": equivariance_err,
        "max_error": worst,
        "passed": worst < 1e-9,
    }


# -- embeddings ---------------------------------------------------------------


def suspend_embedding(h, sp: SuspensionPoint, system: DiscreteSystem) -> BandLimitedSignal:
    """``h_f(x, t) = tau_t(h(x))`` for roof identically 1."""
    if any(r != 1.0 for r in system.roof):
        raise UnsupportedRoofError("suspension embedding needs the constant roof 1")
    sig = h(sp.base)
    return translate(sig, sp.height) if sp.height else sig


def _sup_common(f: BandLimitedSignal, g: BandLimitedSignal) -> float:
    radius = min(f.window_radius, g.window_radius)
    a, b = f.restrict(radius), g.restrict(radius)
    return float(np.abs(a.samples - b.samples).max())


def common_metric(f: BandLimitedSignal, g: BandLimitedSignal, depth: int = 20) -> float:
    radius = min(f.window_radius, g.window_radius)
    return metric_d(f.restrict(radius), g.restrict(radius), depth)[0]


def strong_embedding_probe(h, sample_pairs, system: DiscreteSystem, r_step: float = 0.05,
                           r_max: float = 3.0, threshold: float = 1e-6) -> dict:
    """Scan ``r`` for near-coincidences ``tau_r h(x) = h(x')``.

    Every flagged ``r`` must be an integer ``m`` with ``x' = T^m x``.
    """
    k = int(round(r_max / r_step))
    rs = r_step * np.arange(-k, k + 1)
    rows = []
    ok = True
    for x, xp in sample_pairs:
        hx, hxp = h(x), h(xp)
        dists = np.array([_sup_common(translate(hx, r) if r else hx, hxp) for r in rs])
        flagged = [float(r) for r, d in zip(rs, dists) if d < threshold]
        explained = []
        for r in flagged:
            m = int(round(r))
            good = abs(r - m) <= r_step / 2 and system.iterate(x, m) == xp
            explained.append(good)
        ok &= all(explained)
        rows.append({
            "x": x,
            "x_prime": xp,
            "flagged": flagged,
            "all_explained": all(explained),
            "min_unflagged": float(dists[dists >= threshold].min()) if np.any(dists >= threshold) else None,
        })
    return {"pairs": rows, "threshold": threshold, "r_step": r_step, "passed": bool(ok)}


def parse_system(desc: str):
    """``solenoid:N``, ``product:N:k``, ``suspension:FILE`` or ``torus``."""
    kind, _, rest = desc.partition(":")
    if kind == "solenoid":
        return SolenoidFlow(int(rest or 4))
    if kind == "product":
        depth, _, k = rest.partition(":")
        return ProductExtension(int(depth or 4), int(k or 5))
    if kind == "suspension":
        with open(rest) as fh:
            return SuspensionFlow(DiscreteSystem.from_json(json.load(fh)), name=desc)
    if kind == "torus":
        return TorusFlow()
    raise ParameterError(f"unknown system {desc!r}")
