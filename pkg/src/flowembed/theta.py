"""The zero-placing factor Theta_L and the certified parameter selections.

``Theta_L(z) = exp(pi i b z) sin(pi z / L)`` has simple zeros exactly at
``L * Z`` and modulus

    |Theta_L(x + iy)|^2 = exp(-2 pi b y) (sin^2(pi x / L) + sinh^2(pi y / L)),

which drives every bound below.  ``Omega`` denotes the strip ``|Im z| <= 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ParameterError, SearchError
from .kernel import SpectralKernel, k1, make_chi1
from .tiling import m2_radius


def theta(z, L: float, b: float):
    z = np.asarray(z, dtype=complex)
    out = np.exp(1j * np.pi * b * z) * np.sin(np.pi * z / L)
    return out[()] if out.ndim == 0 else out


def theta_derivative(z, L: float, b: float):
    z = np.asarray(z, dtype=complex)
    w = np.pi * z / L
    return np.exp(1j * np.pi * b * z) * (1j * np.pi * b * np.sin(w) + np.pi / L * np.cos(w))


def theta_modulus(x, y, L: float, b: float):
    """``|Theta_L(x + iy)|`` from the closed-form identity."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.exp(-np.pi * b * y) * np.sqrt(np.sin(np.pi * x / L) ** 2 + np.sinh(np.pi * y / L) ** 2)


def theta_sup(L: float, b: float, y_max: float = 1.0) -> float:
    """``sup |Theta_L|`` over ``|Im z| <= y_max``: attained at ``x = L/2``, ``y = -sign(b) y_max``."""
    return math.exp(math.pi * abs(b) * y_max) * math.cosh(math.pi * y_max / L)


def _r1_functional(z, L, b):
    # pi |b sin(pi z / L) + cos(pi z / L) / L|
    w = np.pi * z / L
    return np.pi * np.abs(b * np.sin(w) + np.cos(w) / L)


def _r1_lipschitz(L, b, r):
    # |d/dz| of the inside, with |sin|, |cos| <= cosh(Im) on the disk
    return np.pi * (np.pi / L) * (abs(b) + 1.0 / L) * math.cosh(np.pi * r / L)


def r1_certificate(L: float, b: float, r: float, grid_step: float) -> dict:
    """Grid check of ``pi|b sin + cos/L| > 3/L`` on the closed disk ``|z| <= r``.

    The grid covers the bounding square, so every disk point is within
    ``grid_step/sqrt(2)`` of a node; the margin is ten times the Lipschitz
    bound over that distance.
    """
    n = int(math.ceil(r / grid_step))
    ax = np.linspace(-n * grid_step, n * grid_step, 2 * n + 1)
    X, Y = np.meshgrid(ax, ax)
    keep = X * X + Y * Y <= (r + grid_step) ** 2
    vals = _r1_functional(X[keep] + 1j * Y[keep], L, b)
    margin = 10.0 * _r1_lipschitz(L, b, r + grid_step) * grid_step / math.sqrt(2)
    lowest = float(vals.min())
    return {
        "radius": r,
        "grid_step": grid_step,
        "min_value": lowest,
        "margin": margin,
        "threshold": 3.0 / L,
        "certified": lowest - margin > 3.0 / L,
    }


def select_r1(L: float, b: float, grid_step: float | None = None, max_halvings: int = 40) -> float:
    """Largest ``min(1/16, 1/L) / 2^j`` (j >= 1) whose disk passes :func:`r1_certificate`.

    ``grid_step`` defaults to ``r / 100`` for each candidate ``r``.
    """
    if not L > 1:
        raise ParameterError("L must exceed 1")
    top = min(1.0 / 16.0, 1.0 / L)
    for j in range(1, max_halvings + 1):
        r = top / 2**j
        step = r / 100.0 if grid_step is None else min(grid_step, r / 100.0)
        if r1_certificate(L, b, r, step)["certified"]:
            return r
    raise SearchError("no certified r1 in the candidate ladder")


def theta_lower_bound(L: float, b: float, r1: float, grid_step: float | None = None) -> float:
    """Certified lower bound for ``|Theta_L|`` on Omega minus the disks ``D_{r1}(L Z)``, capped at 9/(16L).

    ``|Theta_L|`` is L-periodic in ``x`` and, for fixed ``y``, smallest where
    ``sin(pi x / L)`` is, i.e. as close to ``L Z`` as the excluded disks allow.
    The infimum is therefore attained either on the segment ``x = 0``,
    ``r1 <= |y| <= 1`` or on the circle ``|z| = r1``; both are 1-D and are
    gridded with a Lipschitz safety margin.
    """
    if not 0 < r1 < min(1.0 / 16.0, 1.0 / L):
        raise ParameterError("r1 must satisfy 0 < r1 < min(1/16, 1/L)")
    step = r1 / 100.0 if grid_step is None else grid_step
    # segment x = 0: g(y) = e^{-pi b y} |sinh(pi y / L)|, local Lipschitz bound per grid cell
    n = int(math.ceil((1.0 - r1) / step))
    ys = np.linspace(r1, 1.0, n + 1)
    h = (1.0 - r1) / n
    deriv = math.pi * abs(b) * np.sinh(math.pi * ys[1:] / L) + math.pi / L * np.cosh(math.pi * ys[1:] / L)
    seg_bound = math.inf
    for sign in (1.0, -1.0):
        g = theta_modulus(0.0, sign * ys, L, b)
        worst_exp = np.exp(-np.pi * b * sign * (ys[:-1] if sign * b > 0 else ys[1:]))
        cell = np.minimum(g[:-1], g[1:]) - worst_exp * deriv * h / 2.0
        seg_bound = min(seg_bound, float(cell.min()))
    # circle |z| = r1, parametrized by arc length
    m = int(math.ceil(2.0 * math.pi * r1 / step))
    ang = np.linspace(0.0, 2.0 * math.pi, m + 1)
    zc = r1 * np.exp(1j * ang)
    circ = theta_modulus(zc.real, zc.imag, L, b)
    growth = math.exp(math.pi * abs(b) * r1)
    lip_circ = growth * (math.pi * abs(b) * math.sinh(math.pi * r1 / L) * 1.01 + math.pi / L * math.cosh(math.pi * r1 / L))
    circ_bound = float(circ.min()) - lip_circ * (2.0 * math.pi * r1 / m) / 2.0
    bound = min(9.0 / (16.0 * L), seg_bound, circ_bound)
    if bound <= 0:
        raise ParameterError("theta lower bound is not positive; r1 too small for the grid")
    return bound


def theta_lower_bound_grid(L: float, b: float, r1: float, grid_step: float) -> float:
    """Brute-force minimum of ``|Theta_L|`` on a 2-D grid of the fundamental domain (no margin)."""
    nx = int(math.ceil(L / grid_step))
    ny = int(math.ceil(2.0 / grid_step))
    xs = np.linspace(0.0, L, nx + 1)
    ys = np.linspace(-1.0, 1.0, ny + 1)
    best = math.inf
    for chunk in np.array_split(xs, max(1, xs.size // 512)):
        X, Y = np.meshgrid(chunk, ys, indexing="ij")
        out = (X * X + Y * Y >= r1 * r1) & ((X - L) ** 2 + Y * Y >= r1 * r1)
        if out.any():
            best = min(best, float(theta_modulus(X[out], Y[out], L, b).min()))
    return min(best, 9.0 / (16.0 * L))


def e_criterion(L: float, b: float, kernel: SpectralKernel, E: float) -> float:
    """Left side ``1.1 * sup|Theta_L| * sup_y tail(E, y)`` of the E inequality."""
    return 1.1 * theta_sup(L, b) * kernel.tail(E, 1.0)


def select_E(L: float, b: float, theta_L: float, kernel: SpectralKernel,
             ladder_step: float | None = None, max_rungs: int = 2000) -> float:
    """Smallest ``E = ladder_step * k`` with ``e_criterion(E) < theta_L / 2``.

    The default rung is ``1 / half_width`` (10 for delta = 0.8), so the ladder
    scales with the kernel's decay length.
    """
    if not theta_L > 0:
        raise ParameterError("theta_L must be positive")
    if ladder_step is None:
        ladder_step = 1.0 / kernel.half_width
    target = theta_L / 2.0

    def ok(k):
        return e_criterion(L, b, kernel, k * ladder_step) < target

    if not ok(max_rungs):
        raise SearchError("kernel tails too heavy for the E ladder")
    lo, hi = 1, max_rungs
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo * ladder_step


@dataclass(frozen=True)
class EmbeddingParams:
    a: float
    delta: float
    b: float
    L: float
    r1: float
    theta_L: float
    E: float
    K1: float
    M: int
    M1: int
    M2: float
    c: float
    H: float

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "EmbeddingParams":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__})

    @property
    def kernel(self) -> SpectralKernel:
        return make_chi1(self.delta)

    def with_markers(self, M: int, M1: int) -> "EmbeddingParams":
        """Same analytic constants with new marker scales."""
        return EmbeddingParams(
            self.a, self.delta, self.b, self.L, self.r1, self.theta_L, self.E, self.K1,
            M, M1, m2_radius(M, M1, self.c), self.c, float((M1 + 1) ** 2),
        )


def build_params(a: float = 2.0, delta: float = 0.8, L: float = 10.0, M: int = 10, M1: int = 25,
                 c: float = 1.02, kernel: SpectralKernel | None = None) -> EmbeddingParams:
    """Run the selection pipeline: r1, theta_L, E, K1 and the marker-derived M2, H."""
    if not a > 0 or not delta > 0:
        raise ParameterError("a and delta must be positive")
    kernel = make_chi1(delta) if kernel is None else kernel
    b = a + delta / 2
    r1 = select_r1(L, b)
    tl = theta_lower_bound(L, b, r1)
    E = select_E(L, b, tl, kernel)
    return EmbeddingParams(
        a=a, delta=delta, b=b, L=L, r1=r1, theta_L=tl, E=E, K1=k1(kernel),
        M=M, M1=M1, M2=m2_radius(M, M1, c), c=c, H=float((M1 + 1) ** 2),
    )


def validate_params(p: EmbeddingParams) -> dict:
    """Every record invariant with its margin (positive margin means pass)."""
    rows = []

    def cond(name, margin, passed=None):
        rows.append({"name": name, "margin": float(margin), "passed": bool(margin > 0 if passed is None else passed)})

    cond("a>0", p.a)
    cond("delta>0", p.delta)
    cond("b=a+delta/2", 1.0, passed=p.b == p.a + p.delta / 2)
    cond("L>4/delta", p.L - 4.0 / p.delta)
    top = min(1.0 / 16.0, 1.0 / p.L)
    cond("0<r1<min(1/16,1/L)", min(p.r1, top - p.r1))
    cond("theta_L>0", p.theta_L)
    cond("theta_L<=9/(16L)", 9.0 / (16.0 * p.L) - p.theta_L, passed=p.theta_L <= 9.0 / (16.0 * p.L))
    cond("K1>=1", p.K1 - 1.0, passed=p.K1 >= 1.0)
    cond("M1>M", p.M1 - p.M)
    cond("c>1", p.c - 1.0)
    cond("H=(M1+1)^2", 1.0, passed=p.H == (p.M1 + 1) ** 2)
    expected = m2_radius(p.M, p.M1, p.c)
    cond("M2 matches (c-1)HM/(H+2)", 1.0, passed=abs(p.M2 - expected) <= 1e-12 * max(1.0, expected))
    cond("M2>4L+E+1", p.M2 - (4 * p.L + p.E + 1))
    return {"conditions": rows, "passed": all(r["passed"] for r in rows)}


def load_params(path) -> EmbeddingParams:
    """Read a params record, bare or wrapped in a ``flowembed params`` report."""
    with open(path) as fh:
        data = json.load(fh)
    return EmbeddingParams.from_json(data.get("params", data))
