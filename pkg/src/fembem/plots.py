"""Sweep figure rendering: one SVG per error field, log-scale error vs
wavenumber, one curve per coupling.

Figures are sized 800 x 500 SVG user units (matplotlib emits the viewBox in
points, 72 per inch) so downstream embedding can rely on the geometry.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .experiments import ERROR_FIELDS, SweepRow

_FIGSIZE = (800.0 / 72.0, 500.0 / 72.0)

_LABELS = {
    "rel_err_qB": "relative error of the exterior impedance trace",
    "rel_err_qF": "relative error of the volume-side impedance trace",
    "rel_err_dirichlet": "relative error of the reconstructed Dirichlet trace",
    "rel_err_neumann": "relative error of the reconstructed Neumann trace",
    "rel_err_volume": "relative error of the reconstructed volume field",
}

_STYLE = {"JN": dict(color="tab:blue", marker="o"),
          "Costabel": dict(color="tab:red", marker="s")}


def render_sweep_figures(rows: list[SweepRow], prefix: str, couplings) -> list[str]:
    """Write one log-scale error-vs-kappa SVG per error field; returns paths."""
    paths = []
    for field in ERROR_FIELDS:
        fig, ax = plt.subplots(figsize=_FIGSIZE)
        for name in couplings:
            pts = [(r.kappa, getattr(r, field)) for r in rows
                   if r.coupling == name and not r.failed
                   and math.isfinite(getattr(r, field)) and getattr(r, field) > 0]
            if not pts:
                continue
            xs, ys = zip(*sorted(pts))
            style = _STYLE.get(name, {})
            ax.plot(xs, ys, label=name, markersize=3, linewidth=1.2, **style)
        ax.set_yscale("log")
        ax.set_xlabel("wavenumber")
        ax.set_ylabel(_LABELS.get(field, field))
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(loc="best")
        fig.tight_layout()
        out = _output_path(prefix, f"err_{field.removeprefix('rel_err_')}.svg")
        fig.savefig(out, format="svg")
        plt.close(fig)
        paths.append(out)
    return paths


def _output_path(prefix: str, name: str) -> str:
    p = Path(prefix)
    if prefix.endswith(("/", "\\")) or p.is_dir():
        p.mkdir(parents=True, exist_ok=True)
        return str(p / name)
    p.parent.mkdir(parents=True, exist_ok=True)
    return f"{prefix}{name}"
