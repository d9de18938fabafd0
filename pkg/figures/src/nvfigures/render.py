"""Load nvspin sweep CSVs and render figure analogues."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from . import style  # noqa: E402
from .errors import EmptySeries, FigureError, MissingColumn  # noqa: E402

#: the fixed column contract of ``nvspin sweep`` output
REQUIRED_COLUMNS = (
    "sweep_name", "sweep_value", "engine",
    "gamma_phi", "gamma_plus", "gamma_minus",
    "T1_us", "T2_us", "omega_bar",
    "gamma_phi_0", "gamma_phi_1", "gamma_pm_0", "gamma_pm_1",
    "flags",
)

#: figure id -> (panel grid shape, panels); each panel is a list of
#: quantities, the first being the panel's required primary quantity
FIGURES = {
    "fig2": ((2, 2), [["inv_T2"], ["inv_T1"],
                      ["gamma_phi", "gamma_phi_0", "gamma_phi_1"],
                      ["gamma_relax", "gamma_pm_0", "gamma_pm_1"]]),
    "fig3": ((1, 2), [["gamma_phi"], ["gamma_relax"]]),
    "fig4": ((1, 2), [["gamma_phi"], ["gamma_relax"]]),
    "fig5": ((1, 2), [["inv_T2"], ["inv_T1"]]),
}


@dataclass(frozen=True)
class FigureSpec:
    """What to render: input CSV, figure id, and output image path."""

    csv: str
    figure: str
    out: str

    def __post_init__(self):
        if self.figure not in FIGURES:
            raise FigureError(
                f"unknown figure id {self.figure!r}; "
                f"expected one of {sorted(FIGURES)}")


def load_csv(path):
    """Read a sweep CSV into a list of per-row dicts.

    Comment lines (``#``) are skipped; numeric cells are parsed to float and
    empty cells become None.  Raises MissingColumn if the header does not
    carry the full contract.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(ln for ln in fh if not ln.startswith("#"))
        header = reader.fieldnames or []
        for col in REQUIRED_COLUMNS:
            if col not in header:
                raise MissingColumn(col)
        rows = []
        for rec in reader:
            row = {}
            for col in REQUIRED_COLUMNS:
                val = rec[col]
                if col in ("sweep_name", "engine", "flags"):
                    row[col] = val
                else:
                    row[col] = float(val) if val not in ("", None) else None
            rows.append(row)
    return rows


def _quantity(row, name):
    """Evaluate a derived plot quantity on one row (None if unavailable)."""
    if name == "inv_T1":
        return 1.0 / row["T1_us"] if row["T1_us"] else None
    if name == "inv_T2":
        return 1.0 / row["T2_us"] if row["T2_us"] else None
    if name == "gamma_relax":
        if row["gamma_plus"] is not None and row["gamma_minus"] is not None:
            return row["gamma_plus"] + row["gamma_minus"]
        # engines that resolve only the relaxation sum report it as 1/T1
        return 1.0 / row["T1_us"] if row["T1_us"] else None
    return row[name]


def _series(rows, engine, name):
    """(x, y) pairs of one quantity for one engine, sorted by sweep value."""
    pts = []
    for row in rows:
        if row["engine"] != engine:
            continue
        y = _quantity(row, name)
        if y is not None and row["sweep_value"] is not None:
            pts.append((row["sweep_value"], y))
    pts.sort()
    return [p[0] for p in pts], [p[1] for p in pts]


def _scales(sweep_name):
    """Axis scales: log-log for rate sweeps, semilog for field sweeps."""
    if sweep_name.startswith("B"):
        return "linear", "log"
    return "log", "log"


def _draw_panel(ax, rows, engines, quantities, sweep_name):
    drew_any = False
    for name in quantities:
        color = style.QUANTITY_COLORS[name]
        for engine in engines:
            x, y = _series(rows, engine, name)
            if not x:
                continue
            st = style.ENGINE_STYLES[engine]
            label = (f"{style.QUANTITY_LABELS[name]}, "
                     f"{style.ENGINE_LABELS[engine]}")
            if st["linestyle"]:
                ax.plot(x, y, st["linestyle"], color=color, label=label,
                        linewidth=style.LINEWIDTH)
            else:
                ax.errorbar(x, y, yerr=None, fmt=st["marker"], color=color,
                            label=label, markersize=style.MARKERSIZE,
                            capsize=style.ERRORBAR_CAPSIZE)
            drew_any = drew_any or name == quantities[0]
    if not drew_any:
        raise EmptySeries(
            f"no data for {quantities[0]!r} from any engine in "
            f"{sorted(engines)}")
    xscale, yscale = _scales(sweep_name)
    ax.set_xscale(xscale)
    ax.set_yscale(yscale)
    ax.set_xlabel(style.AXIS_LABELS.get(sweep_name, sweep_name))
    ax.set_ylabel(style.QUANTITY_LABELS[quantities[0]])
    ax.grid(True, which="both", **style.GRID_KWARGS)
    ax.legend(fontsize=style.LEGEND_FONTSIZE)


def render(spec):
    """Render the figure described by ``spec`` and write the image file."""
    rows = load_csv(spec.csv)
    if not rows:
        raise EmptySeries(f"CSV {spec.csv!r} contains no data rows")
    sweep_name = rows[0]["sweep_name"]
    engines = sorted({row["engine"] for row in rows})
    (nrows, ncols), panels = FIGURES[spec.figure]

    w, h = style.FIGSIZE_PER_PANEL
    fig, axes = plt.subplots(nrows, ncols, figsize=(w * ncols, h * nrows),
                             squeeze=False)
    try:
        for ax, quantities in zip(axes.ravel(), panels):
            _draw_panel(ax, rows, engines, quantities, sweep_name)
        fig.tight_layout()
        if spec.out.endswith(".svg"):
            plt.rcParams["svg.hashsalt"] = "nvfigures"
            metadata = {"Date": None}
        else:
            metadata = dict(style.DETERMINISTIC_METADATA)
        fig.savefig(spec.out, dpi=style.DPI, metadata=metadata)
    finally:
        plt.close(fig)
    return spec.out
