"""Render benchmark figures to image files alongside the results CSV."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")  # file output only; never needs a display

import matplotlib.pyplot as plt

from .bench import STATUS_OK, BenchRecord

_SHAPE_STYLE = {"linear": "o-", "bushy": "s--"}


def render_figures(records: Iterable[BenchRecord], out_dir: str | Path) -> list[Path]:
    """Write one timing figure per sweep axis and return the file paths.

    time_vs_tuples.png plots median evaluation time against the tuple count,
    time_vs_relations.png against the relation count, one line per
    (shape, algorithm) series. Cells that blew the output cap carry no
    timing and are skipped.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ok = [r for r in records if r.status == STATUS_OK]
    written: list[Path] = []
    for axis, filename in (("tuples", "time_vs_tuples.png"),
                           ("relations", "time_vs_relations.png")):
        path = out_dir / filename
        _render_axis(ok, axis, path)
        written.append(path)
    return written


def _render_axis(records: Sequence[BenchRecord], axis: str, path: Path) -> None:
    series: dict[tuple[str, str], list[tuple[int, float]]] = defaultdict(list)
    for r in records:
        x = r.tuples if axis == "tuples" else r.relations
        series[(r.shape, r.algorithm)].append((x, r.median_ms))
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for (shape, algorithm), points in sorted(series.items()):
        points.sort()
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        ax.plot(xs, ys, _SHAPE_STYLE.get(shape, "^-"), label=f"{shape} / {algorithm}")
    ax.set_xlabel(f"number of {axis}")
    ax.set_ylabel("median evaluation time (ms)")
    ax.grid(True, alpha=0.3)
    if series:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
