"""Figures for the CLI reports (matplotlib, Agg backend, PNG output)."""

from __future__ import annotations

from contextlib import contextmanager
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 100,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "legend.frameon": False,
    "savefig.bbox": "tight",
}


@contextmanager
def _figure(path: Path, xlabel: str, ylabel: str, title: str | None = None, log: str = ""):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        try:
            yield ax
            ax.set_xlabel(xlabel)
            ax.set_ylabel(ylabel)
            if "x" in log:
                ax.set_xscale("log")
            if "y" in log:
                ax.set_yscale("log")
            if title:
                ax.set_title(title)
            if ax.get_legend_handles_labels()[0]:
                ax.legend()
            # no timestamps or version strings, so reruns give identical bytes
            fig.savefig(path, format="png", metadata={"Software": None})
        finally:
            plt.close(fig)


def profile_plot(path: Path, heights: np.ndarray, title: str | None = None) -> Path:
    with _figure(path, "column i", "height h_i", title) as ax:
        ax.step(np.arange(1, len(heights) + 1), heights, where="mid", color="k")
    return Path(path)


def trajectory_plot(path: Path, t: np.ndarray, hmax: np.ndarray, width2: np.ndarray) -> Path:
    with _figure(path, "events T", "value") as ax:
        ax.plot(t, hmax, label="h_max")
        ax.plot(t, np.sqrt(width2), label="spatial width")
    return Path(path)


def collapse_plot(path: Path, curves: dict, grid=None, slope: float | None = 1 / 3) -> Path:
    with _figure(path, "u = tau / N^{3/2}", "w / N^{1/2}", log="xy") as ax:
        for n, (u, g) in sorted(curves.items()):
            ax.plot(u, g, "o-", ms=3, label=f"N={n}")
        if slope is not None and curves:
            u0, g0 = next(iter(curves.values()))
            ref = g0[0] * (u0 / u0[0]) ** slope
            ax.plot(u0, ref, "k--", lw=0.8, label=f"slope {slope:.3g}")
    return Path(path)


def gamma_plot(path: Path, checkpoints, mean, stderr, gamma0: float) -> Path:
    x = 1.0 / np.asarray(checkpoints, float)
    with _figure(path, "1/T", "h_max / mu_max") as ax:
        ax.errorbar(x, mean, yerr=stderr, fmt="o", ms=3, label="ensemble mean")
        xs = np.linspace(0, x.max(), 50)
        slope = np.polyfit(x, mean, 1)[0]
        ax.plot(xs, gamma0 + slope * xs, "k--", lw=0.8, label=f"extrapolated {gamma0:.4f}")
        ax.set_xlim(left=0)
    return Path(path)


def measure_plot(path: Path, centers, density) -> Path:
    with _figure(path, "folded angle", "density") as ax:
        ax.plot(centers, density, color="k")
    return Path(path)


def energy_plot(path: Path, times, rel_drift) -> Path:
    with _figure(path, "time", "|H(t) - H(0)| / |H(0)|", log="y") as ax:
        ax.plot(times, np.maximum(np.abs(rel_drift), 1e-18), color="k")
    return Path(path)


def spectrum_plot(path: Path, initial, final) -> Path:
    with _figure(path, "index", "eigenvalue") as ax:
        ax.plot(np.real(initial), "o", label="t = 0", mfc="none")
        ax.plot(np.real(final), "x", label="final")
    return Path(path)


def residual_plot(path: Path, residuals) -> Path:
    with _figure(path, "potential index", "max boundary residual", log="y") as ax:
        ax.plot(np.maximum(residuals, 1e-40), "o", ms=3, color="k")
    return Path(path)
