"""Deterministic figures from experiment CSVs.

Three plot kinds over three fixed schemas:

* decay:      log-log estimates vs scale with the fitted slope line and the
              closed-form target slope in the annotation
* martingale: E[M_t] vs t with error bars and the M_0 reference line
* ztable:     a table of comparison z-scores, highlighting |z| > 3

Rendering is a pure function of the CSV bytes and the plot spec: fixed figure
geometry, no clocks, no environment lookups.  Every figure embeds the
config_hash of its data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SCHEMAS = {
    "decay": [
        "experiment", "scale", "estimate", "stderr", "n",
        "slope", "slope_stderr", "target_slope", "seed", "config_hash",
    ],
    "martingale": [
        "experiment", "t", "estimate", "stderr", "n", "m0", "seed", "config_hash",
    ],
    "ztable": [
        "experiment", "label", "lhs", "lhs_stderr", "rhs", "rhs_stderr",
        "z", "n", "seed", "config_hash",
    ],
}

Z_HIGHLIGHT = 3.0
FIGSIZE = (6.4, 4.8)
DPI = 120
PNG_METADATA = {"Software": "reportplots"}


class SchemaError(ValueError):
    """The CSV header or contents do not match the documented schema."""


@dataclass
class PlotSpec:
    csv_paths: list
    kind: str
    out_path: str
    caption: str = ""

    def __post_init__(self):
        if self.kind not in SCHEMAS:
            raise SchemaError(f"unknown plot kind {self.kind!r}; known: {sorted(SCHEMAS)}")
        if isinstance(self.csv_paths, str):
            self.csv_paths = [self.csv_paths]
        if not self.csv_paths:
            raise SchemaError("at least one input CSV is required")


@dataclass
class RenderResult:
    out_path: str
    annotation: str
    config_hashes: list
    rows: int = 0
    extras: dict = field(default_factory=dict)


def read_rows(path: str, kind: str) -> list:
    expected = SCHEMAS[kind]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if header != expected:
            raise SchemaError(
                f"{path}: header does not match the {kind} schema\n"
                f"  found:    {','.join(header)}\n"
                f"  expected: {','.join(expected)}"
            )
        rows = [dict(zip(expected, row)) for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _hashes(rows) -> list:
    seen = []
    for row in rows:
        h = row["config_hash"]
        if h not in seen:
            seen.append(h)
    return seen


def _new_figure():
    return plt.figure(figsize=FIGSIZE, dpi=DPI)


def _finish(fig, spec: PlotSpec, annotation: str, hashes, rows) -> RenderResult:
    caption = spec.caption.format(config_hash="+".join(hashes)) if spec.caption else ""
    if caption:
        fig.text(0.5, 0.01, caption, ha="center", fontsize=8)
    fig.text(0.99, 0.01, "config " + "+".join(hashes), ha="right", fontsize=6, color="0.45")
    fig.savefig(spec.out_path, metadata=PNG_METADATA)
    plt.close(fig)
    return RenderResult(
        out_path=spec.out_path, annotation=annotation, config_hashes=hashes, rows=rows
    )


def render_decay(spec: PlotSpec) -> RenderResult:
    rows = []
    for path in spec.csv_paths:
        rows.extend(read_rows(path, "decay"))
    scale = np.array([float(r["scale"]) for r in rows])
    estimate = np.array([float(r["estimate"]) for r in rows])
    stderr = np.array([float(r["stderr"]) for r in rows])
    slope = float(rows[0]["slope"])
    slope_err = float(rows[0]["slope_stderr"])
    target = float(rows[0]["target_slope"])

    fig = _new_figure()
    ax = fig.add_subplot(111)
    ax.errorbar(scale, estimate, yerr=stderr, fmt="o", ms=4, capsize=3, label="estimates")
    # fitted line through the log-log centroid with the reported slope
    lx, ly = np.log(scale), np.log(estimate)
    anchor = (lx.mean(), ly.mean())
    xs = np.linspace(lx.min(), lx.max(), 50)
    ax.plot(np.exp(xs), np.exp(anchor[1] + slope * (xs - anchor[0])), "-",
            label=f"fit slope {slope:.4g}")
    ax.plot(np.exp(xs), np.exp(anchor[1] + target * (xs - anchor[0])), "--",
            label=f"target slope {target:.4g}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("scale")
    ax.set_ylabel("estimate")
    annotation = f"slope = {slope:.4g} ± {slope_err:.2g} (target {target:.4g})"
    ax.set_title(f"{rows[0]['experiment']}: {annotation}", fontsize=10)
    ax.legend(fontsize=8)
    return _finish(fig, spec, annotation, _hashes(rows), len(rows))


def render_martingale(spec: PlotSpec) -> RenderResult:
    rows = []
    for path in spec.csv_paths:
        rows.extend(read_rows(path, "martingale"))
    t = np.array([float(r["t"]) for r in rows])
    estimate = np.array([float(r["estimate"]) for r in rows])
    stderr = np.array([float(r["stderr"]) for r in rows])
    m0 = float(rows[0]["m0"])

    fig = _new_figure()
    ax = fig.add_subplot(111)
    ax.errorbar(t, estimate, yerr=stderr, fmt="o-", ms=4, capsize=3, label="E[M_t]")
    ax.axhline(m0, linestyle="--", color="0.3", label=f"M_0 = {m0:.5g}")
    ax.set_xlabel("t")
    ax.set_ylabel("E[M_t]")
    pad = max(4.0 * float(np.max(stderr)), 0.05 * abs(m0))
    ax.set_ylim(m0 - 3.0 * pad, m0 + 3.0 * pad)
    annotation = f"M_0 = {m0:.5g}"
    ax.set_title(f"{rows[0]['experiment']}: stationarity vs {annotation}", fontsize=10)
    ax.legend(fontsize=8)
    return _finish(fig, spec, annotation, _hashes(rows), len(rows))


def render_ztable(spec: PlotSpec) -> RenderResult:
    rows = []
    for path in spec.csv_paths:
        rows.extend(read_rows(path, "ztable"))
    fig = _new_figure()
    ax = fig.add_subplot(111)
    ax.axis("off")
    cells = []
    colors = []
    flagged = 0
    for r in rows:
        z = float(r["z"])
        bad = abs(z) > Z_HIGHLIGHT
        flagged += int(bad)
        cells.append([
            r["label"],
            f"{float(r['lhs']):.5g} ± {float(r['lhs_stderr']):.2g}",
            f"{float(r['rhs']):.5g} ± {float(r['rhs_stderr']):.2g}",
            f"{z:.2f}",
        ])
        colors.append(["#ffffff", "#ffffff", "#ffffff", "#f4cccc" if bad else "#d9ead3"])
    table = ax.table(
        cellText=cells,
        cellColours=colors,
        colLabels=["comparison", "lhs", "rhs", "z"],
        loc="center",
    )
    table.auto_set_font_size(False)
    table.set_fontsize(8)
    table.scale(1.0, 1.3)
    annotation = f"{len(rows)} comparisons, {flagged} with |z| > {Z_HIGHLIGHT:g}"
    ax.set_title(f"{rows[0]['experiment']}: {annotation}", fontsize=10)
    result = _finish(fig, spec, annotation, _hashes(rows), len(rows))
    result.extras["flagged"] = flagged
    return result


RENDERERS = {
    "decay": render_decay,
    "martingale": render_martingale,
    "ztable": render_ztable,
}


def render(spec: PlotSpec) -> RenderResult:
    """Render one figure; returns the output path and annotation details."""
    return RENDERERS[spec.kind](spec)
