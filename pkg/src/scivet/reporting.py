"""Run outputs: per-article radar plots and the reproducible report bundle."""
from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
import xml.etree.ElementTree as ET
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from .detection import DOV_DIMENSIONS, DovScores, Verdict, verdict_to_dict
from .evaluation import MetricsTable, table_to_csv, table_to_json
from .prompts import template_hashes

RADAR_SIZE = 400
RADAR_RADIUS = 150.0

AXIS_TITLES = (
    "Alignment",
    "Causation Confusion",
    "Accuracy",
    "Generalization",
    "Contextual Fidelity",
)


def _axis_angle(index: int) -> float:
    """Axis direction in radians: first axis points up, then clockwise."""
    return math.radians(-90.0 + 72.0 * index)


def radar_points(scores: DovScores, radius: float = RADAR_RADIUS,
                 cx: float = RADAR_SIZE / 2, cy: float = RADAR_SIZE / 2) -> list[tuple[float, float]]:
    """Vertex per axis; a score v sits at radial distance (v+1)/2 * radius."""
    points = []
    for i, value in enumerate(scores.as_tuple()):
        r = (value + 1.0) / 2.0 * radius
        angle = _axis_angle(i)
        points.append((cx + r * math.cos(angle), cy + r * math.sin(angle)))
    return points


def _ring_points(fraction: float, cx: float, cy: float, radius: float) -> str:
    coords = []
    for i in range(len(DOV_DIMENSIONS)):
        angle = _axis_angle(i)
        coords.append(f"{cx + fraction * radius * math.cos(angle):.2f},"
                      f"{cy + fraction * radius * math.sin(angle):.2f}")
    return " ".join(coords)


def radar_svg(scores: DovScores, title: str) -> str:
    """Well-formed standalone SVG radar chart of the five validity scores.

    The outer pentagon marks +1, the inner ring marks 0, and the filled
    polygon shows the article's profile; identical scores always produce
    identical bytes.
    """
    cx = cy = RADAR_SIZE / 2
    svg = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "width": str(RADAR_SIZE),
        "height": str(RADAR_SIZE),
        "viewBox": f"0 0 {RADAR_SIZE} {RADAR_SIZE}",
    })
    ET.SubElement(svg, "title").text = title
    ET.SubElement(svg, "rect", {
        "x": "0", "y": "0", "width": str(RADAR_SIZE), "height": str(RADAR_SIZE),
        "fill": "white",
    })
    ET.SubElement(svg, "polygon", {
        "class": "ring-outer",
        "points": _ring_points(1.0, cx, cy, RADAR_RADIUS),
        "fill": "none", "stroke": "#999999", "stroke-width": "1",
    })
    ET.SubElement(svg, "polygon", {
        "class": "ring-zero",
        "points": _ring_points(0.5, cx, cy, RADAR_RADIUS),
        "fill": "none", "stroke": "#bbbbbb", "stroke-width": "1",
        "stroke-dasharray": "4 3",
    })
    for i, axis_title in enumerate(AXIS_TITLES):
        angle = _axis_angle(i)
        x = cx + RADAR_RADIUS * math.cos(angle)
        y = cy + RADAR_RADIUS * math.sin(angle)
        ET.SubElement(svg, "line", {
            "class": "axis",
            "x1": f"{cx:.2f}", "y1": f"{cy:.2f}",
            "x2": f"{x:.2f}", "y2": f"{y:.2f}",
            "stroke": "#cccccc", "stroke-width": "1",
        })
        lx = cx + (RADAR_RADIUS + 16.0) * math.cos(angle)
        ly = cy + (RADAR_RADIUS + 16.0) * math.sin(angle)
        ET.SubElement(svg, "text", {
            "class": "axis-label",
            "x": f"{lx:.2f}", "y": f"{ly:.2f}",
            "font-size": "11", "text-anchor": "middle",
            "dominant-baseline": "middle",
        }).text = axis_title
    points = radar_points(scores)
    ET.SubElement(svg, "polygon", {
        "class": "values",
        "points": " ".join(f"{x:.2f},{y:.2f}" for x, y in points),
        "fill": "#4477aa", "fill-opacity": "0.35",
        "stroke": "#4477aa", "stroke-width": "2",
    })
    for x, y in points:
        ET.SubElement(svg, "circle", {
            "class": "value-vertex",
            "cx": f"{x:.2f}", "cy": f"{y:.2f}", "r": "3", "fill": "#4477aa",
        })
    ET.SubElement(svg, "text", {
        "class": "chart-title",
        "x": f"{cx:.2f}", "y": "18",
        "font-size": "13", "text-anchor": "middle", "font-weight": "bold",
    }).text = title
    return ('<?xml version="1.0" encoding="UTF-8"?>\n'
            + ET.tostring(svg, encoding="unicode") + "\n")


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass(frozen=True)
class ReportBundle:
    out_dir: Path
    verdicts_path: Path
    metrics_csv_path: Path
    metrics_json_path: Path
    manifest_path: Path
    radar_paths: tuple[Path, ...]


def emit_report(
    verdicts: Sequence[Verdict],
    table: MetricsTable,
    out_dir: str | Path,
    run_config: dict | None = None,
    templates_dir: str | Path | None = None,
    cassette_path: str | Path | None = None,
    unscored: Sequence[dict] | None = None,
) -> ReportBundle:
    """Write verdicts, metrics, radar SVGs, and a manifest under ``out_dir``.

    The manifest pins the config snapshot, template hashes, and cassette
    hash, so a reader can establish exactly what produced the numbers.
    Radar files appear only for verdicts that carry scores.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    verdicts_path = out_dir / "verdicts.jsonl"
    with verdicts_path.open("w", encoding="utf-8") as handle:
        for verdict in verdicts:
            handle.write(json.dumps(verdict_to_dict(verdict), ensure_ascii=False) + "\n")

    metrics_csv_path = out_dir / "metrics.csv"
    metrics_csv_path.write_text(table_to_csv(table), encoding="utf-8")
    metrics_json_path = out_dir / "metrics.json"
    metrics_json_path.write_text(table_to_json(table), encoding="utf-8")

    radar_paths = []
    scored = [v for v in verdicts if v.scores is not None]
    if scored:
        radar_dir = out_dir / "radar"
        radar_dir.mkdir(exist_ok=True)
        for verdict in scored:
            path = radar_dir / f"{verdict.article_id}.svg"
            path.write_text(
                radar_svg(verdict.scores, f"{verdict.article_id} ({verdict.prediction.value})"),
                encoding="utf-8")
            radar_paths.append(path)

    manifest = {
        "created_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "config": run_config,
        "template_hashes": template_hashes(templates_dir),
        "cassette_sha256": _sha256_file(Path(cassette_path)) if cassette_path else None,
        "verdict_count": len(verdicts),
        "radar_count": len(radar_paths),
        "unscored": list(unscored or []),
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
    return ReportBundle(
        out_dir=out_dir,
        verdicts_path=verdicts_path,
        metrics_csv_path=metrics_csv_path,
        metrics_json_path=metrics_json_path,
        manifest_path=manifest_path,
        radar_paths=tuple(radar_paths),
    )
