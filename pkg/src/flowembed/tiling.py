"""Voronoi interval tilings of the line driven by marker sequences.

A marker sequence assigns to each integer ``n`` in a window a value
``phi_n`` in [0, 1].  Every positive value gives a site ``(n, 1/phi_n)`` in
the plane; the tiling is the trace of the planar Voronoi diagram of these
sites on the horizontal line ``y = -H`` with ``H = (M1 + 1)^2``.  On that line
the pairwise "closer to site n than to site p" condition is linear in the
abscissa, so each cell is an intersection of half-lines.

Cells are computed in exact rational arithmetic by default (every float is a
dyadic rational, so ``Fraction(phi)`` is exact).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

from .errors import DomainError, ValidationError, WindowError

INF = math.inf


class Interval(NamedTuple):
    """Closed interval; endpoints are Fractions or floats (possibly infinite)."""

    lo: object
    hi: object

    @property
    def length(self) -> float:
        return float(self.hi) - float(self.lo)

    def as_floats(self) -> tuple[float, float]:
        return float(self.lo), float(self.hi)


Cell = Optional[Interval]  # None means EMPTY


@dataclass(frozen=True, eq=False)
class MarkerSequence:
    """Marker values on the index window ``[lo, hi]``; unlisted indices are 0."""

    lo: int
    hi: int
    values: dict
    M: int
    M1: int
    _positive: tuple = field(init=False, repr=False)

    def __post_init__(self):
        vals = {int(n): float(v) for n, v in self.values.items() if float(v) != 0.0}
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_positive", tuple(sorted(vals)))

    def value(self, n: int) -> float:
        return self.values.get(n, 0.0)

    @property
    def positive_indices(self) -> tuple:
        return self._positive

    @property
    def H(self) -> int:
        return (self.M1 + 1) ** 2

    def violations(self) -> list[tuple[str, int]]:
        """All invariant violations as ``(kind, index)`` pairs."""
        bad: list[tuple[str, int]] = []
        if self.M1 <= self.M:
            bad.append(("M1<=M", self.M1))
        for n, v in self.values.items():
            if not self.lo <= n <= self.hi:
                bad.append(("outside-window", n))
            if not 0.0 <= v <= 1.0:
                bad.append(("value-range", n))
        pos = self._positive
        # two-sided separation: consecutive positive indices at least M apart
        for p, q in zip(pos, pos[1:]):
            if q - p < self.M:
                bad.append(("separation", q))
        ones = [n for n in pos if self.values[n] == 1.0]
        span = 2 * self.M1
        if self.hi - self.lo + 1 >= span:
            if not ones:
                bad.append(("coverage", self.lo))
            else:
                if ones[0] > self.lo + span - 1:
                    bad.append(("coverage", self.lo))
                for p, q in zip(ones, ones[1:]):
                    if q - p > span:
                        bad.append(("coverage", p + 1))
                if ones[-1] < self.hi - span + 1:
                    bad.append(("coverage", self.hi - span + 1))
        return bad

    def validate(self) -> None:
        bad = self.violations()
        if bad:
            kinds = sorted({k for k, _ in bad})
            raise ValidationError(
                f"marker invariants violated ({', '.join(kinds)})", [n for _, n in bad]
            )

    def shifted(self, k: int) -> "MarkerSequence":
        """Marker of ``T^k x``: ``values'[n] = values[n + k]``."""
        return MarkerSequence(
            self.lo - k, self.hi - k, {n - k: v for n, v in self.values.items()}, self.M, self.M1
        )

    def to_json(self) -> dict:
        idx = list(self._positive)
        return {
            "lo": self.lo,
            "hi": self.hi,
            "M": self.M,
            "M1": self.M1,
            "indices": idx,
            "values": [self.values[n] for n in idx],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MarkerSequence":
        return cls(
            int(data["lo"]),
            int(data["hi"]),
            dict(zip((int(i) for i in data["indices"]), (float(v) for v in data["values"]))),
            int(data["M"]),
            int(data["M1"]),
        )


@dataclass(frozen=True)
class VoronoiSite:
    n: int
    height: object  # Fraction when exact, float otherwise

    def __post_init__(self):
        if not (1 <= self.height < INF):
            raise ValueError("site height must be finite and >= 1")


def sites(marker: MarkerSequence, exact: bool = True) -> list[VoronoiSite]:
    """One site ``(n, 1/phi_n)`` per positive index, ascending."""
    marker.validate()
    out = []
    for n in marker.positive_indices:
        v = marker.values[n]
        out.append(VoronoiSite(n, 1 / Fraction(v) if exact else 1.0 / v))
    return out


def _bisector(n, hn, p, hp, H):
    # (u-n)^2 + (H+hn)^2 = (u-p)^2 + (H+hp)^2 solved for u
    return (p * p - n * n + (H + hp) ** 2 - (H + hn) ** 2) / (2 * (p - n))


def _cell_at(site_list: list[VoronoiSite], i: int, H) -> Cell:
    s = site_list[i]
    n, hn = s.n, s.height
    own = (H + hn) ** 2
    floor_sq = (H + 1) ** 2
    upper = INF
    for t in site_list[i + 1:]:
        d = t.n - n
        # every later bisector is at least this far right; stop once past the bound
        if upper != INF and Fraction(t.n + n, 2) + (floor_sq - own) / (2 * d) >= upper:
            break
        b = _bisector(n, hn, t.n, t.height, H)
        if b < upper:
            upper = b
    lower = -INF
    for t in reversed(site_list[:i]):
        d = n - t.n
        if lower != -INF and Fraction(t.n + n, 2) - (floor_sq - own) / (2 * d) <= lower:
            break
        b = _bisector(n, hn, t.n, t.height, H)
        if b > lower:
            lower = b
    if lower > upper:
        return None
    return Interval(lower, upper)


def voronoi_interval(site_list: list[VoronoiSite], n: int, H) -> Cell:
    """Trace on ``y = -H`` of the Voronoi cell of site ``n``; ``None`` if EMPTY."""
    if not site_list:
        raise DomainError("no sites")
    if not H > 0:
        raise DomainError("H must be positive")
    ordered = sorted(site_list, key=lambda s: s.n)
    for i, s in enumerate(ordered):
        if s.n == n:
            exact = isinstance(s.height, Fraction)
            return _cell_at(ordered, i, Fraction(H) if exact else float(H))
    return None


@dataclass(frozen=True, eq=False)
class IntervalTiling:
    """Cells of the projected Voronoi tiling.

    ``cells`` maps each site index to its interval or ``None``; every other
    index has an EMPTY cell.  Only cells whose index lies in ``valid_range``
    are free of window-truncation effects.
    """

    H: object
    cells: dict
    valid_range: tuple[int, int]

    def cell(self, n: int) -> Cell:
        return self.cells.get(n)

    def valid_cells(self) -> list[tuple[int, Interval]]:
        lo, hi = self.valid_range
        return [(n, c) for n, c in sorted(self.cells.items()) if lo <= n <= hi and c is not None]

    def covered_segment(self) -> tuple[float, float]:
        vc = self.valid_cells()
        if not vc:
            return (0.0, 0.0)
        return float(vc[0][1].lo), float(vc[-1][1].hi)

    def owner(self, u: float) -> Optional[int]:
        """Index of the valid cell containing ``u`` (left-most on ties)."""
        for n, c in self.valid_cells():
            if float(c.lo) <= u <= float(c.hi):
                return n
        return None

    def to_json(self) -> dict:
        cells = []
        for n, c in sorted(self.cells.items()):
            if c is None:
                cells.append({"n": n, "cell": None})
            else:
                cells.append(
                    {
                        "n": n,
                        "cell": [float(c.lo), float(c.hi)],
                        "exact": [str(c.lo), str(c.hi)],
                    }
                )
        return {"H": str(self.H), "valid_range": list(self.valid_range), "cells": cells}


def build_tiling(marker: MarkerSequence, exact: bool = True) -> IntervalTiling:
    """Cells for every site of the marker window."""
    if marker.hi - marker.lo < 6 * marker.M1:
        raise WindowError(
            f"window length {marker.hi - marker.lo} shorter than 6*M1 = {6 * marker.M1}"
        )
    site_list = sites(marker, exact=exact)
    H = Fraction(marker.H) if exact else float(marker.H)
    cells = {s.n: _cell_at(site_list, i, H) for i, s in enumerate(site_list)}
    margin = 2 * (marker.M1 + 1)
    return IntervalTiling(H, cells, (marker.lo + margin, marker.hi - margin))


def tiling_mismatch(tiling: IntervalTiling) -> float:
    """Largest gap or overlap between consecutive nonempty valid cells."""
    vc = tiling.valid_cells()
    worst = 0.0
    for (_, a), (_, b) in zip(vc, vc[1:]):
        worst = max(worst, abs(float(b.lo - a.hi)))
    return worst


def _hausdorff(a: Cell, b: Cell) -> float:
    if a is None and b is None:
        return 0.0
    if a is None or b is None:
        return INF
    return float(max(abs(a.lo - b.lo), abs(a.hi - b.hi)))


def shift_equivariance_defect(marker: MarkerSequence, k: int, exact: bool = True) -> float:
    """max over common valid m of dist(W(T^k x, m), -k + W(x, m + k))."""
    base = build_tiling(marker, exact=exact)
    moved = build_tiling(marker.shifted(k), exact=exact)
    lo = max(moved.valid_range[0], base.valid_range[0] - k)
    hi = min(moved.valid_range[1], base.valid_range[1] - k)
    if lo > hi:
        raise WindowError("no common valid range")
    worst = 0.0
    for m in range(lo, hi + 1):
        ref = base.cell(m + k)
        if ref is not None:
            ref = Interval(ref.lo - k, ref.hi - k)
        worst = max(worst, _hausdorff(moved.cell(m), ref))
    return worst


def m2_radius(M: int, M1: int, c: float) -> float:
    """Guaranteed inner radius ``(c - 1) H M / (H + 2)`` with ``H = (M1 + 1)^2``."""
    H = (M1 + 1) ** 2
    return (c - 1.0) * H * M / (H + 2)


def check_geometry(tiling: IntervalTiling, marker: MarkerSequence, c: float = 1.02) -> dict:
    """Per-cell checks on the valid range: value > 1/2, locality, minimum length."""
    if not c > 1:
        raise ValueError("c must exceed 1")
    M2 = m2_radius(marker.M, marker.M1, c)
    reach = marker.M1 + 1
    lo, hi = tiling.valid_range
    rows = []
    for n, cell in sorted(tiling.cells.items()):
        if not lo <= n <= hi or cell is None:
            continue
        l, r = cell.as_floats()
        rows.append(
            {
                "n": n,
                "value": marker.value(n),
                "cell": [l, r],
                "value_gt_half": marker.value(n) > 0.5,
                "within_ball": n - reach <= l and r <= n + reach,
                "length_ok": r - l >= 2 * M2,
            }
        )
    agg = {k: all(row[k] for row in rows) for k in ("value_gt_half", "within_ball", "length_ok")}
    return {
        "M2": M2,
        "c": c,
        "cells": rows,
        "min_length": min((row["cell"][1] - row["cell"][0] for row in rows), default=None),
        "checks": agg,
        "passed": all(agg.values()),
    }


def int_e(cell: Cell, E: float) -> Cell:
    """Erosion ``[l + E, r - E]`` or EMPTY when the cell is shorter than 2E."""
    if cell is None:
        return None
    if E < 0:
        raise ValueError("E must be non-negative")
    if cell.hi - cell.lo < 2 * E:
        return None
    return Interval(cell.lo + E, cell.hi - E)


def load_marker(path) -> MarkerSequence:
    with open(path) as fh:
        return MarkerSequence.from_json(json.load(fh))
