"""Render a ``*.plot.json`` written by ``beeid simulate --out`` to a PNG.

Needs matplotlib, which the package itself does not depend on.

    python3 demos/render_plot.py demos/out/example2_bec.plot.json
"""

import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def column(rows, name):
    return [float(r[name]) if r[name] else float("nan") for r in rows]


def render(spec_path):
    spec_path = Path(spec_path)
    spec = json.loads(spec_path.read_text())
    rows = load_rows(spec_path.parent / spec["data"])
    x = column(rows, spec["x"])
    fig, ax = plt.subplots(figsize=(6, 4))
    lo, hi = (column(rows, c) for c in spec["error_band"])
    ax.fill_between(x, lo, hi, alpha=0.25, label="95% Wilson")
    log_y = spec["scale"]["y"] == "log"
    for name, style in zip(spec["series"], ("o-", "--", ":")):
        y = column(rows, name)
        if log_y:
            # zero counts have no place on a log axis
            y = [v if v > 0 else float("nan") for v in y]
        ax.plot(x, y, style, label=name)
    ax.set_xscale(spec["scale"]["x"])
    ax.set_yscale(spec["scale"]["y"])
    ax.set_xlabel(spec["x"])
    ax.set_ylabel("failure probability")
    ax.set_title(spec["title"])
    ax.legend()
    fig.tight_layout()
    png = spec_path.with_name(spec_path.name.replace(".plot.json", ".png"))
    fig.savefig(png, dpi=120)
    return png


if __name__ == "__main__":
    for arg in sys.argv[1:]:
        print("wrote", render(arg))
