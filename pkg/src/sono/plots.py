"""Static SVG scatter of score against depth (well-formed SVG 1.1, one root)."""
from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np

SVG_NS = "http://www.w3.org/2000/svg"

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 20, 55


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = np.linspace(lo, hi, count)
    return [float(f"{t:.4g}") for t in raw]


def score_depth_scatter_svg(depths, scores, path: str) -> int:
    """Write depth (x) vs score (y) for rows with score > 0; returns points drawn."""
    depths = np.asarray(depths, dtype=float)
    scores = np.asarray(scores, dtype=float)
    keep = scores > 0
    xs, ys = depths[keep], scores[keep]
    x_lo, x_hi = (float(xs.min()), float(xs.max())) if xs.size else (0.0, 1.0)
    y_lo, y_hi = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad_x = 0.04 * (x_hi - x_lo)
    pad_y = 0.04 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - pad_x, x_hi + pad_x
    y_lo, y_hi = y_lo - pad_y, y_hi + pad_y

    def sx(v):
        return _ML + (v - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def sy(v):
        return _H - _MB - (v - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    ET.register_namespace("", SVG_NS)
    root = ET.Element(f"{{{SVG_NS}}}svg", {
        "width": str(_W), "height": str(_H),
        "viewBox": f"0 0 {_W} {_H}", "version": "1.1",
    })
    ET.SubElement(root, f"{{{SVG_NS}}}rect", {
        "x": "0", "y": "0", "width": str(_W), "height": str(_H), "fill": "white"})
    axis_style = {"stroke": "black", "stroke-width": "1"}
    ET.SubElement(root, f"{{{SVG_NS}}}line", {
        "x1": str(_ML), "y1": str(_H - _MB), "x2": str(_W - _MR),
        "y2": str(_H - _MB), **axis_style})
    ET.SubElement(root, f"{{{SVG_NS}}}line", {
        "x1": str(_ML), "y1": str(_MT), "x2": str(_ML),
        "y2": str(_H - _MB), **axis_style})
    for t in _ticks(x_lo + pad_x, x_hi - pad_x):
        x = sx(t)
        ET.SubElement(root, f"{{{SVG_NS}}}line", {
            "x1": f"{x:.2f}", "y1": str(_H - _MB), "x2": f"{x:.2f}",
            "y2": str(_H - _MB + 5), **axis_style})
        lbl = ET.SubElement(root, f"{{{SVG_NS}}}text", {
            "x": f"{x:.2f}", "y": str(_H - _MB + 20), "font-size": "12",
            "text-anchor": "middle", "font-family": "sans-serif"})
        lbl.text = f"{t:g}"
    for t in _ticks(y_lo + pad_y, y_hi - pad_y):
        y = sy(t)
        ET.SubElement(root, f"{{{SVG_NS}}}line", {
            "x1": str(_ML - 5), "y1": f"{y:.2f}", "x2": str(_ML),
            "y2": f"{y:.2f}", **axis_style})
        lbl = ET.SubElement(root, f"{{{SVG_NS}}}text", {
            "x": str(_ML - 9), "y": f"{y + 4:.2f}", "font-size": "12",
            "text-anchor": "end", "font-family": "sans-serif"})
        lbl.text = f"{t:g}"
    xl = ET.SubElement(root, f"{{{SVG_NS}}}text", {
        "x": str((_ML + _W - _MR) / 2), "y": str(_H - 12), "font-size": "15",
        "text-anchor": "middle", "font-family": "sans-serif"})
    xl.text = "Depth"
    yl = ET.SubElement(root, f"{{{SVG_NS}}}text", {
        "x": "18", "y": str((_MT + _H - _MB) / 2), "font-size": "15",
        "text-anchor": "middle", "font-family": "sans-serif",
        "transform": f"rotate(-90 18 {(_MT + _H - _MB) / 2})"})
    yl.text = "Score"
    for x, y in zip(xs, ys):
        ET.SubElement(root, f"{{{SVG_NS}}}circle", {
            "cx": f"{sx(x):.2f}", "cy": f"{sy(y):.2f}", "r": "3.2",
            "fill": "#4477aa", "fill-opacity": "0.65"})
    ET.ElementTree(root).write(path, xml_declaration=True, encoding="unicode")
    return int(xs.size)
