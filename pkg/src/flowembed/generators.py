"""Seeded test-data generators: markers and band-limited signals."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError, WindowError
from .signals import REAL, BandLimitedSignal
from .tiling import MarkerSequence


def random_marker(seed: int, window: tuple[int, int], M: int = 10, M1: int = 25,
                  sub_probability: float = 0.5) -> MarkerSequence:
    """Valid random marker on ``window``.

    Value-1 indices are laid down with gaps uniform in ``[M, 2*M1 - 1]``.  In
    each gap wide enough for it, a sub-marker with value in (1/2, 1) is added
    with probability ``sub_probability``, at least M away from both ends.
    """
    lo, hi = int(window[0]), int(window[1])
    if 2 * M1 - 1 < M:
        raise ParameterError(f"infeasible marker constraints: 2*M1-1 = {2 * M1 - 1} < M = {M}")
    if hi - lo < 6 * M1:
        raise WindowError(f"window length {hi - lo} shorter than 6*M1 = {6 * M1}")
    rng = np.random.default_rng(seed)
    ones = [lo + int(rng.integers(0, 2 * M1))]
    while True:
        nxt = ones[-1] + int(rng.integers(M, 2 * M1))
        if nxt > hi:
            break
        ones.append(nxt)
    values = {n: 1.0 for n in ones}
    for p, q in zip(ones, ones[1:]):
        if q - p >= 2 * M and rng.random() < sub_probability:
            n = int(rng.integers(p + M, q - M + 1))
            # open interval (1/2, 1)
            v = 0.5 + 0.5 * float(rng.uniform(np.nextafter(0.0, 1.0), 1.0))
            values[n] = min(v, np.nextafter(1.0, 0.0))
    return MarkerSequence(lo, hi, values, M, M1)


def periodic_marker(period: int, window: tuple[int, int], M: int, M1: int,
                    phase: int = 0, value: float = 1.0) -> MarkerSequence:
    """Value ``value`` at ``phase + period * k``, zero elsewhere."""
    lo, hi = window
    start = lo + ((phase - lo) % period)
    return MarkerSequence(lo, hi, {n: value for n in range(start, hi + 1, period)}, M, M1)


def random_b_signal(seed: int, a: float, window_radius: float, sample_step: float,
                    terms: int = 8, fill: float = 0.9) -> BandLimitedSignal:
    """Real element of B(a): a cosine sum with frequencies below ``fill * a/2`` and sup <= 1."""
    rng = np.random.default_rng(seed)
    amp = rng.uniform(-1.0, 1.0, terms)
    amp *= rng.uniform(0.2, 1.0) / np.abs(amp).sum()
    freq = rng.uniform(0.0, fill * a / 2, terms)
    phase = rng.uniform(0.0, 2 * np.pi, terms)

    def fn(x):
        return np.cos(2 * np.pi * np.outer(x, freq) + phase) @ amp

    return BandLimitedSignal.from_function(fn, window_radius, sample_step, (-a / 2, a / 2), REAL)


def random_b1_signal(seed: int, a: float, b: float, window_radius: float, sample_step: float,
                     terms: int = 6) -> BandLimitedSignal:
    """Complex element of B_1(V[a, b]): exponentials with frequencies inside (a, b)."""
    rng = np.random.default_rng(seed)
    amp = rng.uniform(0.0, 1.0, terms) * np.exp(2j * np.pi * rng.uniform(0, 1, terms))
    amp *= rng.uniform(0.2, 1.0) / np.abs(amp).sum()
    span = b - a
    freq = rng.uniform(a + 0.05 * span, b - 0.05 * span, terms)

    def fn(x):
        return np.exp(2j * np.pi * np.outer(x, freq)) @ amp

    return BandLimitedSignal.from_function(fn, window_radius, sample_step, (a, b))
