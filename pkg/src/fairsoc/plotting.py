"""Consumption histogram emission as self-contained SVG."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")  # headless; must be set before pyplot loads

import matplotlib.pyplot as plt
import numpy as np

from .errors import ParameterError
from .metrics import maybe_skewness


def sturges_bins(n: int) -> int:
    """ceil(log2 n) + 1, and at least 1 so a singleton sample still bins."""
    if n < 1:
        raise ParameterError(f"need at least one observation, got {n}")
    return max(1, math.ceil(math.log2(n)) + 1)


def emit_histogram(
    samples: Mapping[str, Sequence[float] | np.ndarray],
    out_path: str | Path,
    meta: Mapping[str, object] | None = None,
) -> Path:
    """Overlay one histogram per labeled sample and write an SVG.

    All samples share bin edges (Sturges' rule on the pooled count) so the
    overlay is comparable. Each legend entry carries the sample's skewness.
    An optional metadata mapping is embedded as an XML comment.
    """
    if not samples:
        raise ParameterError("no samples to plot")
    arrays = {label: np.asarray(values, dtype=float) for label, values in samples.items()}
    for label, arr in arrays.items():
        if arr.size == 0:
            raise ParameterError(f"sample {label!r} is empty")
    pooled = np.concatenate(list(arrays.values()))
    bins = sturges_bins(pooled.size)
    lo = float(np.min(pooled))
    hi = float(np.max(pooled))
    if lo == hi:
        # degenerate range: one centered bin of unit width
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for label, arr in arrays.items():
        skew = maybe_skewness(arr)
        ax.hist(
            arr,
            bins=edges,
            density=True,
            alpha=0.55,
            label=f"Strategy {label} (skewness {skew:.3f})",
        )
    ax.set_xlabel("consumption")
    ax.set_ylabel("density")
    ax.set_title("Final-generation consumption")
    ax.legend()
    fig.tight_layout()

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, format="svg")
    plt.close(fig)

    if meta:
        fields = " ".join(f"{key}={value}" for key, value in meta.items())
        text = out_path.read_text(encoding="utf-8")
        head, sep, tail = text.partition("\n")
        out_path.write_text(
            head + sep + f"<!-- {fields} -->\n" + tail, encoding="utf-8", newline=""
        )
    return out_path
