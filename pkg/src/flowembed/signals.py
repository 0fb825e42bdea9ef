"""Windowed, uniformly sampled band-limited signals and the shift action on them."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal.windows import blackmanharris

from .errors import GridError, ParameterError, WindowError

COMPLEX = "complex"
REAL = "real"


def _grid_length(T: float, step: float) -> int:
    return int(math.floor(2.0 * T / step + 1e-9)) + 1


@dataclass(frozen=True, eq=False)
class BandLimitedSignal:
    """Samples of a band-limited function on ``x_j = -T + j * step``.

    ``band`` is the claimed support ``(lo, hi)`` of the Fourier transform,
    with the convention ``F f(xi) = int f(x) exp(-2 pi i xi x) dx``.
    """

    window_radius: float
    sample_step: float
    samples: np.ndarray
    band: tuple[float, float]
    value_kind: str = COMPLEX
    _grid: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        T, h = float(self.window_radius), float(self.sample_step)
        if not h > 0:
            raise ParameterError("sample_step must be positive")
        if not T > 0:
            raise WindowError("window_radius must be positive")
        lo, hi = (float(v) for v in self.band)
        if lo > hi:
            raise ParameterError("band must satisfy lo <= hi")
        edge = max(abs(lo), abs(hi))
        if edge > 0 and h > 1.0 / (2.0 * edge) * (1 + 1e-12):
            raise ParameterError(f"sample_step {h} exceeds the Nyquist step {1 / (2 * edge)}")
        if self.value_kind not in (COMPLEX, REAL):
            raise ParameterError(f"unknown value_kind {self.value_kind!r}")
        s = np.array(self.samples, dtype=complex)
        n = _grid_length(T, h)
        if s.shape != (n,):
            raise GridError(f"expected {n} samples on [-{T}, {T}] with step {h}, got {s.shape}")
        if self.value_kind == REAL and np.any(s.imag != 0):
            raise ParameterError("real signal has nonzero imaginary parts")
        s.flags.writeable = False
        object.__setattr__(self, "window_radius", T)
        object.__setattr__(self, "sample_step", h)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "band", (lo, hi))
        grid = -T + h * np.arange(n)
        grid.flags.writeable = False
        object.__setattr__(self, "_grid", grid)

    @classmethod
    def from_function(cls, fn, window_radius, sample_step, band, value_kind=COMPLEX):
        """Sample ``fn`` (vectorized) on the standard grid."""
        x = -window_radius + sample_step * np.arange(_grid_length(window_radius, sample_step))
        vals = np.asarray(fn(x), dtype=complex)
        if value_kind == REAL:
            vals = vals.real.astype(complex)
        return cls(window_radius, sample_step, vals, band, value_kind)

    @property
    def grid(self) -> np.ndarray:
        return self._grid

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.samples))) if self.samples.size else 0.0

    def with_samples(self, samples, band=None, value_kind=None) -> "BandLimitedSignal":
        return BandLimitedSignal(
            self.window_radius,
            self.sample_step,
            samples,
            self.band if band is None else band,
            self.value_kind if value_kind is None else value_kind,
        )

    def restrict(self, radius: float) -> "BandLimitedSignal":
        """Sub-window ``[-radius', radius']`` aligned with this grid (radius' <= radius)."""
        k = int(math.ceil((self.window_radius - radius) / self.sample_step - 1e-9))
        if k < 0 or 2 * k >= self.samples.size:
            raise WindowError(f"cannot restrict window {self.window_radius} to {radius}")
        n = self.samples.size - 2 * k
        return BandLimitedSignal(
            self.window_radius - k * self.sample_step,
            self.sample_step,
            self.samples[k:k + n],
            self.band,
            self.value_kind,
        )


def in_B(f: BandLimitedSignal, a: float, tol: float = 1e-9) -> bool:
    """Membership test for B(a): band [-a/2, a/2] and sup <= 1."""
    return np.allclose(f.band, (-a / 2, a / 2), rtol=0, atol=1e-12) and f.sup <= 1 + tol


def in_B1(f: BandLimitedSignal, a: float, b: float, tol: float = 1e-9) -> bool:
    """Membership test for B_1(V[a, b]): band [a, b] and sup <= 1."""
    return np.allclose(f.band, (a, b), rtol=0, atol=1e-12) and f.sup <= 1 + tol


def interpolation_stencil(step: float, half_band: float, tol: float) -> int:
    """Half-width of the regularized sinc stencil for the requested accuracy.

    ``half_band`` is the one-sided bandwidth after demodulation.  The error of
    Gaussian-regularized Shannon sampling decays like exp(-gap * n / 2) with
    gap = pi - 2 pi * step * half_band.
    """
    gap = math.pi - 2.0 * math.pi * step * half_band
    if gap <= 0.05:
        raise ParameterError("signal is not oversampled enough for accurate translation")
    return int(math.ceil(2.0 * math.log(1.0 / tol) / gap)) + 2


def translate(f: BandLimitedSignal, r: float, tol: float = 1e-10) -> BandLimitedSignal:
    """tau_r f, i.e. ``x -> f(x + r)``, on a grid-aligned shrunken window.

    The interpolant is the Gaussian-regularized sinc series applied after
    demodulating by the band centre.  The output window is
    ``T - k * step`` with ``k`` the smallest integer covering ``|r|`` plus the
    stencil, so output grid points coincide with input grid points.
    """
    r = float(r)
    T, h = f.window_radius, f.sample_step
    if abs(r) > T / 4:
        raise WindowError(f"|r| = {abs(r)} exceeds window_radius/4 = {T / 4}")
    if r == 0.0:
        return f
    lo, hi = f.band
    centre = 0.5 * (lo + hi)
    n = interpolation_stencil(h, 0.5 * (hi - lo), tol)
    shift_steps = r / h
    m = math.floor(shift_steps)
    frac = shift_steps - m
    size = f.samples.size
    k0 = int(math.ceil(abs(r) / h)) + n + 1
    out_n = size - 2 * k0
    if out_n < 1:
        raise WindowError("window too short for the interpolation stencil")
    x = f.grid
    demod = f.samples * np.exp(-2j * np.pi * centre * x) if centre else f.samples
    out_idx = np.arange(k0, k0 + out_n)
    acc = np.zeros(out_n, dtype=complex)
    if frac < 1e-14:
        acc = demod[out_idx + m].copy()
    elif frac > 1 - 1e-14:
        acc = demod[out_idx + m + 1].copy()
    else:
        gap = math.pi - 2.0 * math.pi * h * 0.5 * (hi - lo)
        width2 = 2.0 * (n - 1) / gap
        for j in range(-n + 1, n + 1):
            u = frac - j
            wgt = np.sinc(u) * math.exp(-u * u / width2)
            acc += wgt * demod[out_idx + m + j]
    if centre:
        acc *= np.exp(2j * np.pi * centre * (x[out_idx] + r))
    if f.value_kind == REAL:
        acc = acc.real.astype(complex)
    return BandLimitedSignal(T - k0 * h, h, acc, f.band, f.value_kind)


def _check_same_grid(f: BandLimitedSignal, g: BandLimitedSignal) -> None:
    if (
        f.samples.size != g.samples.size
        or not math.isclose(f.window_radius, g.window_radius, rel_tol=0, abs_tol=1e-12)
        or not math.isclose(f.sample_step, g.sample_step, rel_tol=0, abs_tol=1e-15)
    ):
        raise GridError("signals live on different sample grids")


def metric_d(f: BandLimitedSignal, g: BandLimitedSignal, depth: int = 20) -> tuple[float, float]:
    """Truncated metric ``sum_{n<=depth} sup_{[-n,n]} |f - g| / 2^n`` and its tail bound.

    The neglected terms sum to at most ``(sup|f| + sup|g|) * 2^-depth``.
    """
    _check_same_grid(f, g)
    if f.window_radius < depth - 1e-12:
        raise WindowError(f"window_radius {f.window_radius} < depth {depth}")
    diff = np.abs(f.samples - g.samples)
    ax = np.abs(f.grid)
    order = np.argsort(ax, kind="stable")
    running = np.maximum.accumulate(diff[order])
    # number of grid points with |x| <= n
    counts = np.searchsorted(ax[order], np.arange(1, depth + 1) + 1e-12, side="right")
    value = 0.0
    for n, c in enumerate(counts, start=1):
        if c:
            value += running[c - 1] / 2.0**n
    return float(value), float((f.sup + g.sup) * 2.0**-depth)


def fourier_leakage(f: BandLimitedSignal, band, pad: int = 8) -> float:
    """Fraction of tapered spectral energy outside ``band``.

    ``band`` is a pair ``(lo, hi)`` or a list of such pairs (their union).
    Each band is widened on both sides by the Blackman-Harris main-lobe
    half-width ``4 / (window length)``.
    """
    s = f.samples
    if not np.any(s):
        return 0.0
    n = s.size
    tapered = s * blackmanharris(n, sym=False)
    coeffs = np.fft.fft(tapered, n * pad)
    freq = np.fft.fftfreq(n * pad, d=f.sample_step)
    power = np.abs(coeffs) ** 2
    widen = 4.0 / (n * f.sample_step)
    bands = [band] if np.isscalar(band[0]) else list(band)
    inside = np.zeros(freq.shape, dtype=bool)
    for lo, hi in bands:
        inside |= (freq >= lo - widen) & (freq <= hi + widen)
    total = power.sum()
    return float(power[~inside].sum() / total)


def b1_to_real(f: BandLimitedSignal) -> BandLimitedSignal:
    """``(f + conj f) / 2``, mapping B_1(V[a, b]) into B(2b)."""
    a, b = f.band
    if not 0 < a < b:
        raise ParameterError(f"expected a band 0 < a < b, got {f.band}")
    return f.with_samples(f.samples.real.astype(complex), band=(-b, b), value_kind=REAL)


# -- serialization -----------------------------------------------------------


def header(f: BandLimitedSignal) -> dict:
    return {
        "window_radius": f.window_radius,
        "sample_step": f.sample_step,
        "band": list(f.band),
        "value_kind": f.value_kind,
    }


def save_signal(f: BandLimitedSignal, stem) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` (x, re, im) and ``<stem>.json`` (header)."""
    stem = Path(stem)
    csv_path, json_path = stem.with_suffix(".csv"), stem.with_suffix(".json")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "re", "im"])
        for x, v in zip(f.grid, f.samples):
            w.writerow([f"{x:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])
    json_path.write_text(json.dumps(header(f), sort_keys=True, indent=2) + "\n")
    return csv_path, json_path


def load_signal(stem) -> BandLimitedSignal:
    stem = Path(stem)
    meta = json.loads(stem.with_suffix(".json").read_text())
    data = np.loadtxt(stem.with_suffix(".csv"), delimiter=",", skiprows=1, ndmin=2)
    return BandLimitedSignal(
        meta["window_radius"],
        meta["sample_step"],
        data[:, 1] + 1j * data[:, 2],
        tuple(meta["band"]),
        meta["value_kind"],
    )
