"""The spectral kernel chi_1.

chi_1 is the inverse Fourier transform of a smooth compactly supported bump
living on ``[-delta/8, delta/8]``::

    chi_1(z) = int psi(xi) exp(2 pi i xi z) d xi,   psi(xi) = exp(1 - 1/(1 - (xi/w)^2))

with ``w = delta/8``.  ``psi(0) = 1`` so chi_1 integrates to one.  The kernel
is entire; on the strip ``|Im z| <= 1`` it is evaluated two ways:

* :func:`eval_chi1` integrates the frequency integral with adaptive
  Gauss-Legendre panels.  This is the reference path.
* :attr:`SpectralKernel.table` holds the antiderivative ``G`` and its
  derivatives on a uniform real grid (trapezoid rule in frequency, computed
  by FFT).  Off-axis values come from a Taylor series in ``Im z``.  This is
  the fast path used by the map Phi.

Tails ``int_{|t|>R} |chi_1(t + iy)| dt`` are needed for truncation radii and
for the parameter E.  They are integrated numerically up to ``R_far`` and
bounded beyond it by integrating by parts ``k`` times in frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import DomainError, ParameterError
from .quadrature import adaptive_gl, panel_nodes

#: imaginary parts at which tail integrals are tabulated (|Im z| <= 1)
Y_GRID = np.linspace(0.0, 1.0, 9)
#: Lagrange stencil width for table interpolation
STENCIL = 10
_FFT_SIZE = 1 << 17


def bump(s):
    """``exp(1 - 1/(1 - s^2))`` for ``|s| < 1`` and 0 elsewhere."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si))
    return out


@lru_cache(maxsize=None)
def _bump_derivative_l1(kmax: int = 12) -> tuple[float, ...]:
    """L1 norms of the first ``kmax`` derivatives of the unit bump.

    Uses psi^(k) = psi * P_k with P_k = sum_j C(k-1, j) g^(j+1) P_{k-1-j},
    where g = log psi = 1 - (1/(1-s) + 1/(1+s))/2 has closed-form derivatives.
    """
    s = np.linspace(-1.0, 1.0, 800_001)[1:-1]
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        psi = np.exp(1.0 - 1.0 / (1.0 - s * s))
        gder = [None] + [
            -0.5 * math.factorial(m) * (1.0 / (1.0 - s) ** (m + 1) + (-1) ** m / (1.0 + s) ** (m + 1))
            for m in range(1, kmax + 1)
        ]
        polys = [np.ones_like(s)]
        for k in range(1, kmax + 1):
            polys.append(sum(math.comb(k - 1, j) * gder[j + 1] * polys[k - 1 - j] for j in range(k)))
        norms = []
        for k in range(kmax + 1):
            d = np.nan_to_num(psi * polys[k], nan=0.0, posinf=0.0, neginf=0.0)
            norms.append(float(np.trapezoid(np.abs(d), s)))
    # 2% cushion over the trapezoid estimate
    return tuple(1.02 * n for n in norms)


def _lagrange_weights(t: np.ndarray, p: int) -> np.ndarray:
    """Weights of the degree p-1 interpolant on nodes 0..p-1 at offsets ``t``."""
    diff = t[:, None] - np.arange(p)[None, :]
    ones = np.ones((t.size, 1))
    prefix = np.cumprod(np.hstack([ones, diff[:, :-1]]), axis=1)
    suffix = np.cumprod(np.hstack([ones, diff[:, :0:-1]]), axis=1)[:, ::-1]
    i = np.arange(p)
    denom = np.array([(-1) ** (p - 1 - k) * math.factorial(k) * math.factorial(p - 1 - k) for k in i], dtype=float)
    return prefix * suffix / denom


class KernelTable:
    """G = int_{-inf}^u chi_1 and its derivatives sampled on ``u = j * step``."""

    def __init__(self, kernel: "SpectralKernel"):
        w = kernel.half_width
        self.step = 1.0 / (80.0 * w)
        self.r_far = 300.0 / w
        self.order = self._taylor_order(w)
        n = _FFT_SIZE
        period = n * self.step
        dxi = 1.0 / period
        m = np.fft.fftfreq(n, d=1.0 / n)  # integer frequency indices
        xi = m * dxi
        weights = dxi * kernel.profile(xi)
        self.half = int(math.ceil((self.r_far + 2 * STENCIL * self.step) / self.step))
        # the trapezoid rule sees chi_1 periodized with this period; keep aliases beyond r_far
        if (self.half + 1) * self.step + self.r_far > period:
            raise ParameterError("kernel table too large for the FFT size")
        idx = np.arange(-self.half, self.half + 1)
        rows = np.empty((self.order + 2, idx.size))
        # order 0: G(u) = 1/2 + dxi*psi(0)*u + sum_{m != 0} dxi psi_m e^{2 pi i xi_m u} / (2 pi i xi_m)
        c = np.zeros(n, dtype=complex)
        nz = m != 0
        c[nz] = weights[nz] / (2j * np.pi * xi[nz])
        vals = np.fft.ifft(c) * n
        u = idx * self.step
        rows[0] = 0.5 + weights[0] * u + vals[idx % n].real
        for k in range(1, self.order + 2):
            c = weights * (2j * np.pi * xi) ** (k - 1)
            vals = np.fft.ifft(c) * n
            rows[k] = vals[idx % n].real
        self.rows = rows
        self._inv_fact = np.array([1.0 / math.factorial(k) for k in range(self.order + 2)])

    @staticmethod
    def _taylor_order(w: float) -> int:
        # |G^(k)| <= (2 pi w)^(k-1) * int psi; stop once the y=1 term is negligible
        a = 2.0 * np.pi * w
        k = 2
        while a ** (k - 1) / math.factorial(k) > 1e-18 and k < 80:
            k += 1
        return k

    def _interp(self, x: np.ndarray, orders: int) -> np.ndarray:
        """Rows ``0..orders-1`` interpolated at real ``x``; clamped outside the grid."""
        p = STENCIL
        q = x / self.step + self.half
        i0 = np.floor(q).astype(np.int64) - (p // 2 - 1)
        lo_ok = i0 >= 0
        hi_ok = i0 + p <= self.rows.shape[1]
        inside = lo_ok & hi_ok
        out = np.zeros((orders, x.size))
        if inside.any():
            ii = i0[inside]
            t = q[inside] - ii
            wts = _lagrange_weights(t, p)
            gather = self.rows[:orders][:, ii[:, None] + np.arange(p)[None, :]]
            out[:, inside] = np.einsum("kbp,bp->kb", gather, wts)
        # beyond r_far: G is 1 to the right and 0 to the left, derivatives vanish
        out[0, ~inside & (x > 0)] = 1.0
        return out

    def _taylor(self, z, shift: int) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        z = z.ravel()
        x, y = z.real, z.imag
        real_only = not np.any(y)
        if real_only:
            return self._interp(x, shift + 1)[shift].astype(complex).reshape(shape)
        n = self.order + 1 - shift
        out = np.empty(z.size, dtype=complex)
        chunk = 4096
        for s in range(0, z.size, chunk):
            xs, ys = x[s:s + chunk], y[s:s + chunk]
            rows = self._interp(xs, self.order + 1)[shift:shift + n]
            # Horner in (i y): sum_k (iy)^k / k! * G^(k+shift)(x)
            iy = 1j * ys
            acc = rows[n - 1] * self._inv_fact[n - 1]
            for k in range(n - 2, -1, -1):
                acc = acc * iy + rows[k] * self._inv_fact[k]
            out[s:s + chunk] = acc
        return out.reshape(shape)

    def G(self, z) -> np.ndarray:
        """Antiderivative ``int_{-inf}^z chi_1``."""
        return self._taylor(z, 0)

    def chi(self, z) -> np.ndarray:
        """chi_1 on the strip via the table."""
        return self._taylor(z, 1)


@dataclass(frozen=True)
class SpectralKernel:
    """chi_1 with frequency support ``[-half_width, half_width]``.

    ``amplitude`` scales the whole kernel; :func:`make_chi1` always returns
    amplitude 1 (unit integral).
    """

    half_width: float
    quadrature_tolerance: float = 1e-9
    amplitude: float = 1.0

    @property
    def delta(self) -> float:
        return 8.0 * self.half_width

    def profile(self, xi):
        return self.amplitude * bump(np.asarray(xi, dtype=float) / self.half_width)

    @cached_property
    def table(self) -> KernelTable:
        return KernelTable(self)

    def scaled(self, factor: float) -> "SpectralKernel":
        return SpectralKernel(self.half_width, self.quadrature_tolerance, self.amplitude * factor)

    # -- tails -------------------------------------------------------------

    @property
    def tail_panel(self) -> float:
        return 0.05 / self.half_width

    @cached_property
    def _tail_cumulative(self) -> np.ndarray:
        """``tails[i, j] = int_{t_j}^{r_far} |chi_1(t + i y_i)| dt`` with ``t_j = j * tail_panel``."""
        tab = self.table
        npan = int(round(tab.r_far / self.tail_panel))
        edges = np.arange(npan + 1) * self.tail_panel
        nodes, wts = panel_nodes(edges[:-1], edges[1:], 16)
        out = np.zeros((Y_GRID.size, npan + 1))
        for i, y in enumerate(Y_GRID):
            vals = np.abs(tab.chi(nodes.ravel() + 1j * y)).reshape(nodes.shape)
            per_panel = (vals * wts).sum(axis=1)
            out[i, :-1] = np.cumsum(per_panel[::-1])[::-1]
        return out

    def tail_direct(self, R: float, y: float, order: int = 64, panel: float | None = None) -> float:
        """Two-sided tail at one ``y`` integrated afresh with ``order`` nodes per panel."""
        tab = self.table
        if R >= tab.r_far:
            return 2.0 * self.ibp_tail(R, y)
        width = self.tail_panel if panel is None else panel
        npan = max(1, int(math.ceil((tab.r_far - R) / width)))
        edges = np.linspace(R, tab.r_far, npan + 1)
        total = 0.0
        for chunk in np.array_split(np.arange(npan), max(1, npan // 4000)):
            nodes, wts = panel_nodes(edges[chunk], edges[chunk + 1], order)
            total += float((np.abs(tab.chi(nodes.ravel() + 1j * y)).reshape(nodes.shape) * wts).sum())
        return 2.0 * (total + self.ibp_tail(tab.r_far, y))

    def ibp_tail(self, R: float, y: float) -> float:
        """Bound on ``int_R^inf |chi_1(t + iy)| dt`` from k-fold integration by parts."""
        if R <= 0:
            return math.inf
        w = self.half_width
        norms = _bump_derivative_l1()
        ay = 2.0 * np.pi * abs(y)
        grow = math.exp(2.0 * np.pi * w * abs(y))
        best = math.inf
        for k in range(2, len(norms)):
            # ||d^k/dxi^k (psi(xi) e^{-2 pi xi y})||_1 in xi units
            ck = grow * sum(
                math.comb(k, j) * norms[j] * w ** (1 - j) * ay ** (k - j) for j in range(k + 1)
            )
            best = min(best, abs(self.amplitude) * ck / ((2 * np.pi) ** k * (k - 1) * R ** (k - 1)))
        return best

    def tail(self, R: float, y_max: float = 0.0) -> float:
        """Two-sided tail ``sup_{|y| <= y_max} int_{|t|>R} |chi_1(t+iy)| dt``.

        The supremum runs over the tabulated ``Y_GRID`` values up to the first
        grid point at or above ``y_max``.  ``R`` is rounded down to a panel edge,
        which only enlarges the value.
        """
        y_max = abs(y_max)
        if y_max > 1.0 + 1e-12:
            raise DomainError("tails are tabulated for |Im z| <= 1 only")
        rows = np.flatnonzero(Y_GRID <= y_max + 1e-12)
        top = min(rows[-1] + (0 if np.isclose(Y_GRID[rows[-1]], y_max) else 1), Y_GRID.size - 1)
        ys = Y_GRID[: top + 1]
        r_far = self.table.r_far
        if R >= r_far:
            return max(2.0 * self.ibp_tail(R, y) for y in ys)
        j = int(math.floor(max(R, 0.0) / self.tail_panel))
        cum = self._tail_cumulative
        return max(2.0 * (cum[i, j] + self.ibp_tail(r_far, y)) for i, y in enumerate(ys))

    def truncation_radius(self, budget: float, y_max: float = 0.0, weight: float = 1.0) -> float:
        """Smallest panel edge R with ``weight * tail(R, y_max) <= budget``."""
        cum = self._tail_cumulative
        step = self.tail_panel
        lo, hi = 0, cum.shape[1] - 1
        if weight * self.tail(hi * step, y_max) > budget:
            R = self.table.r_far
            while weight * self.tail(R, y_max) > budget:
                R *= 1.25
            return R
        while lo < hi:
            mid = (lo + hi) // 2
            if weight * self.tail(mid * step, y_max) <= budget:
                hi = mid
            else:
                lo = mid + 1
        return lo * step


@lru_cache(maxsize=16)
def make_chi1(delta: float, tolerance: float = 1e-9) -> SpectralKernel:
    """Build chi_1 for spectral radius ``delta/8``.

    Kernels are immutable, so repeated calls share one instance and its tables.
    """
    if not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta!r}")
    return SpectralKernel(half_width=delta / 8.0, quadrature_tolerance=tolerance)


def eval_chi1(kernel: SpectralKernel, z):
    """chi_1(z) by adaptive Gauss-Legendre quadrature of the frequency integral.

    Accepts scalars or arrays, real or complex with ``|Im z| <= 1``.  Real input
    gives real output.
    """
    z_arr = np.atleast_1d(np.asarray(z))
    if np.iscomplexobj(z_arr) and np.any(np.abs(z_arr.imag) > 1.0):
        raise DomainError("chi_1 is evaluated on the strip |Im z| <= 1")
    w = kernel.half_width
    zc = z_arr.astype(complex).ravel()
    reach = float(np.max(np.abs(zc.real))) if zc.size else 0.0
    n0 = 4 + int(math.ceil(4.0 * w * reach))
    brk = np.linspace(-w, w, n0 + 1)[1:-1]
    # even profile: integrate over [0, w] with cos, sin parts combined for complex z
    def integrand(xi):
        return kernel.profile(xi)[:, None] * np.exp(2j * np.pi * np.outer(xi, zc))

    val, _ = adaptive_gl(integrand, -w, w, tol=kernel.quadrature_tolerance * 0.1, order=24, breakpoints=brk)
    val = np.asarray(val).reshape(z_arr.shape)
    if not np.iscomplexobj(np.asarray(z)):
        val = val.real
    return val[()] if np.ndim(z) == 0 else val


def k1_with_error(kernel: SpectralKernel) -> tuple[float, float, float]:
    """``(K1, error_bound, truncation_radius)`` for ``K1 = int |chi_1|``.

    The real line is split at the sign changes of chi_1 so every panel is
    smooth; the piece beyond ``r_far`` is bounded by :meth:`SpectralKernel.ibp_tail`.
    """
    tab = kernel.table
    r_far = tab.r_far
    grid = np.arange(0.0, r_far + tab.step / 2, tab.step)
    vals = tab.chi(grid).real
    flips = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    a, b = grid[flips], grid[flips + 1]
    fa = vals[flips]
    for _ in range(60):
        mid = 0.5 * (a + b)
        fm = tab.chi(mid).real
        left = np.sign(fm) == np.sign(fa)
        a = np.where(left, mid, a)
        fa = np.where(left, fm, fa)
        b = np.where(left, b, mid)
    zeros = 0.5 * (a + b)
    val, err = adaptive_gl(lambda t: np.abs(tab.chi(t).real), 0.0, r_far,
                           tol=1e-12, order=20, breakpoints=zeros)
    tail = kernel.ibp_tail(r_far, 0.0)
    return 2.0 * float(val), 2.0 * (err + tail), r_far


def k1(kernel: SpectralKernel) -> float:
    """K1 = int |chi_1(t)| dt."""
    return k1_with_error(kernel)[0]
