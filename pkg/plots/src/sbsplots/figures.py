"""The four figure kinds: decay curves, plateau, overlap decay, slack histogram."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import read_columns

REQUIRED_COLUMNS = {
    "decay": ("t", "gamma_finiteL", "gamma_thermo"),
    "plateau": ("f", "I_bits", "H_S"),
    "overlap": ("t", "B_macro_finiteL", "B_macro_thermo"),
    "slack": ("seed", "slack"),
}

FIGURE_KINDS = tuple(REQUIRED_COLUMNS)

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "sbs-plots",
}


@dataclass(frozen=True)
class PlotJob:
    """One figure: input CSV(s), kind, output path base, label options."""

    inputs: tuple[str, ...]
    kind: str
    output: str
    title: str | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in REQUIRED_COLUMNS:
            raise ValueError(
                f"unknown figure kind {self.kind!r}; expected one of {FIGURE_KINDS}"
            )
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))


def render(job: PlotJob) -> list[Path]:
    """Render the job and return the written image paths (PNG and SVG)."""
    datasets = [read_columns(p, REQUIRED_COLUMNS[job.kind]) for p in job.inputs]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        _DRAWERS[job.kind](ax, job, datasets)
        if job.title:
            ax.set_title(job.title)
        fig.tight_layout()
        base = _strip_image_suffix(Path(job.output))
        base.parent.mkdir(parents=True, exist_ok=True)
        written = []
        for suffix in (".png", ".svg"):
            target = base.with_suffix(suffix)
            fig.savefig(target, metadata=_no_date_metadata(suffix))
            written.append(target)
        plt.close(fig)
    return written


def _strip_image_suffix(path: Path) -> Path:
    return path.with_suffix("") if path.suffix.lower() in (".png", ".svg") else path


def _no_date_metadata(suffix: str) -> dict:
    # keep output byte-stable across runs
    if suffix == ".svg":
        return {"Date": None}
    return {"Software": "sbs-plots"}


def _label(job: PlotJob, i: int) -> str:
    name = Path(job.inputs[i]).stem
    return name if len(job.inputs) > 1 else ""


def _draw_decay(ax, job, datasets):
    for i, data in enumerate(datasets):
        prefix = _label(job, i)
        sep = ": " if prefix else ""
        ax.plot(data["t"], data["gamma_finiteL"], label=f"{prefix}{sep}finite box")
        ax.plot(data["t"], data["gamma_thermo"], "--", label=f"{prefix}{sep}thermodynamic")
    ax.set_xlabel("t")
    ax.set_ylabel("decoherence factor")
    ax.set_ylim(-0.02, 1.05)
    ax.legend()


def _draw_plateau(ax, job, datasets):
    h_s = None
    for i, data in enumerate(datasets):
        ax.plot(data["f"], data["I_bits"], "o-", label=_label(job, i) or "I(f)")
        h_s = float(data["H_S"][0])
    if h_s is not None:
        ax.axhline(h_s, color="k", linestyle=":", label="plateau reference H_S")
    ax.set_xlabel("observed fraction f")
    ax.set_ylabel("mutual information (bits)")
    ax.legend()


def _draw_overlap(ax, job, datasets):
    for i, data in enumerate(datasets):
        prefix = _label(job, i)
        sep = ": " if prefix else ""
        ax.plot(data["t"], data["B_macro_finiteL"], label=f"{prefix}{sep}finite box")
        ax.plot(data["t"], data["B_macro_thermo"], "--", label=f"{prefix}{sep}thermodynamic")
    ax.set_xlabel("t")
    ax.set_ylabel("macrofraction record overlap")
    ax.set_ylim(-0.02, 1.05)
    ax.legend()


def _draw_slack(ax, job, datasets):
    slack = np.concatenate([data["slack"] for data in datasets])
    bins = int(job.options.get("bins", 20))
    ax.hist(slack, bins=bins, edgecolor="black")
    ax.axvline(0.0, color="red", linestyle="--", label="violation boundary")
    ax.set_xlabel("bound slack (bits)")
    ax.set_ylabel("count")
    ax.legend()


_DRAWERS = {
    "decay": _draw_decay,
    "plateau": _draw_plateau,
    "overlap": _draw_overlap,
    "slack": _draw_slack,
}
