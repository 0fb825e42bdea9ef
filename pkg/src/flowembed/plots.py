"""Advisory figures.  matplotlib is optional and imported lazily."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParameterError


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise ParameterError("plotting needs matplotlib (pip install 'artifact[plot]')") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path) -> Path:
    path = Path(path)
    # fixed metadata keeps repeated runs byte-stable
    meta = {"Software": None} if path.suffix == ".png" else {"Date": None}
    fig.savefig(path, metadata=meta)
    fig.clf()
    return path


def plot_tiling(tiling, path, window: tuple[float, float] | None = None) -> Path:
    """Cells as alternating bars, sites as ticks."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(10, 2.2))
    cells = tiling.valid_cells()
    if window is not None:
        cells = [(n, c) for n, c in cells if float(c.hi) >= window[0] and float(c.lo) <= window[1]]
    for i, (n, c) in enumerate(cells):
        lo, hi = c.as_floats()
        ax.barh(0, hi - lo, left=lo, height=0.6, color=("C0", "C1")[i % 2], edgecolor="k", linewidth=0.4)
        ax.plot([n, n], [-0.45, 0.45], color="k", linewidth=0.8)
    ax.set_yticks([])
    ax.set_xlabel("u")
    ax.set_title("Voronoi interval tiling")
    fig.tight_layout()
    return _save(fig, path)


def plot_phi_modulus(phi, path, re_range: tuple[float, float], nx: int = 400, ny: int = 81) -> Path:
    """log10 |Phi| over ``re_range x [-1, 1]``."""
    from .phi import phi_eval

    plt = _pyplot()
    xs = np.linspace(*re_range, nx)
    ys = np.linspace(-1.0, 1.0, ny)
    X, Y = np.meshgrid(xs, ys)
    vals = np.abs(phi_eval(phi, (X + 1j * Y).ravel())).reshape(X.shape)
    fig, ax = plt.subplots(figsize=(10, 3))
    im = ax.pcolormesh(X, Y, np.log10(np.maximum(vals, 1e-16)), shading="auto", cmap="viridis")
    fig.colorbar(im, ax=ax, label="log10 |Phi|")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    fig.tight_layout()
    return _save(fig, path)


def plot_spectrum(signal, path, band: tuple[float, float] | None = None) -> Path:
    """Tapered power spectrum in dB with ``band`` shaded."""
    from scipy.signal.windows import blackmanharris

    plt = _pyplot()
    n = signal.samples.size
    coeffs = np.fft.fftshift(np.fft.fft(signal.samples * blackmanharris(n, sym=False), 8 * n))
    freq = np.fft.fftshift(np.fft.fftfreq(8 * n, d=signal.sample_step))
    power = np.abs(coeffs) ** 2
    fig, ax = plt.subplots(figsize=(8, 3))
    db = 10 * np.log10(np.maximum(power / power.max(), 1e-30))
    ax.plot(freq, db, linewidth=0.7)
    if band is not None:
        ax.axvspan(*band, color="C2", alpha=0.2)
    ax.set_xlabel("frequency")
    ax.set_ylabel("dB")
    ax.set_ylim(max(float(db.min()), -300.0) - 5, 5)
    fig.tight_layout()
    return _save(fig, path)


def plot_rigidity(rs, sups, path, forbidden: float | None = None) -> Path:
    """``sup_t |Phi_y(t + r) - Phi_x(t)|`` against ``r``."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(8, 3))
    rs = np.asarray(rs)
    neg = rs < 0
    ax.plot(rs[neg], np.asarray(sups)[neg], "C0", linewidth=0.8)
    ax.plot(rs[~neg], np.asarray(sups)[~neg], "C0", linewidth=0.8)
    if forbidden is not None:
        ax.axvspan(-forbidden, forbidden, color="0.85")
    ax.set_xlabel("r")
    ax.set_ylabel("sup distance")
    ax.set_ylim(bottom=0)
    fig.tight_layout()
    return _save(fig, path)
