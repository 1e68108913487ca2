"""Curve tables (CSV) and success/precision plots (SVG, one polyline per tracker)."""
import csv
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from .metrics import PRECISION_THRESHOLDS, SUCCESS_THRESHOLDS

PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")


def write_curves_csv(path, curves, thresholds, column="threshold"):
    """One row per threshold, one column per tracker."""
    names = list(curves)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([column] + names)
        for i, t in enumerate(thresholds):
            w.writerow([f"{t:g}"] + [f"{curves[n][i]:.6f}" for n in names])


def write_summary_csv(path, summary):
    """``summary`` maps tracker name to ``(auc, precision_at_20)``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tracker", "auc", "precision@20"])
        for name, (auc, p20) in summary.items():
            w.writerow([name, f"{auc:.6f}", f"{p20:.6f}"])


def svg_plot(curves, thresholds, title, xlabel, ylabel, scores=None,
             width=480, height=360, margin=50):
    """Line plot as an SVG element tree; y range is fixed to [0, 1]."""
    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg",
                     width=str(width), height=str(height),
                     viewBox=f"0 0 {width} {height}")
    pw, ph = width - 2 * margin, height - 2 * margin
    x_lo, x_hi = float(thresholds[0]), float(thresholds[-1])
    span = (x_hi - x_lo) or 1.0

    def px(x, y):
        return margin + (x - x_lo) / span * pw, margin + (1.0 - y) * ph

    ET.SubElement(svg, "rect", x=str(margin), y=str(margin), width=str(pw), height=str(ph),
                  fill="none", stroke="black")
    ET.SubElement(svg, "text", x=str(width / 2), y=str(margin / 2),
                  **{"text-anchor": "middle"}).text = title
    ET.SubElement(svg, "text", x=str(width / 2), y=str(height - 10),
                  **{"text-anchor": "middle"}).text = xlabel
    ET.SubElement(svg, "text", x="12", y=str(height / 2),
                  transform=f"rotate(-90 12 {height / 2})",
                  **{"text-anchor": "middle"}).text = ylabel
    for k, name in enumerate(curves):
        pts = " ".join("%.2f,%.2f" % px(x, y) for x, y in zip(thresholds, curves[name]))
        color = PALETTE[k % len(PALETTE)]
        label = name if scores is None else f"{name} [{scores[name]:.3f}]"
        line = ET.SubElement(svg, "polyline", points=pts, fill="none", stroke=color,
                             **{"stroke-width": "2", "data-label": name})
        ET.SubElement(line, "title").text = label
        ET.SubElement(svg, "text", x=str(margin + pw - 5), y=str(margin + 18 + 16 * k),
                      fill=color, **{"text-anchor": "end"}).text = label
    return svg


def write_svg(path, svg):
    ET.ElementTree(svg).write(path, encoding="unicode", xml_declaration=False)


def write_report(out_dir, results):
    """Write curves, summary table and both plots for ``{tracker: [EvalResult, ...]}``.

    Curves are averaged over sequences; scores are the averaged AUC and
    precision at 20 pixels.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    success = {n: np.mean([r.success for r in rs], axis=0) for n, rs in results.items()}
    precision = {n: np.mean([r.precision for r in rs], axis=0) for n, rs in results.items()}
    auc = {n: float(np.mean(c)) for n, c in success.items()}
    p20 = {n: float(c[20]) for n, c in precision.items()}
    write_curves_csv(out / "success.csv", success, SUCCESS_THRESHOLDS, "overlap")
    write_curves_csv(out / "precision.csv", precision, PRECISION_THRESHOLDS, "center_error")
    write_summary_csv(out / "summary.csv", {n: (auc[n], p20[n]) for n in results})
    write_svg(out / "success.svg",
              svg_plot(success, SUCCESS_THRESHOLDS, "Success plot", "Overlap threshold",
                       "Success rate", auc))
    write_svg(out / "precision.svg",
              svg_plot(precision, PRECISION_THRESHOLDS, "Precision plot",
                       "Location error threshold (px)", "Precision", p20))
    return {n: {"auc": auc[n], "precision@20": p20[n]} for n in results}
