"""Artifact emission: canonical JSON, CSV views, and SVG figures.

JSON is the canonical format and is byte-identical across reruns of the same
command and seed; the run manifest embedded in it therefore carries only the
reproducible fields.  Wall-clock time lives in the sidecar .manifest.json
written next to every report.  CSV is a lossy convenience view, and figures
are static matplotlib SVG renderings saved alongside the delimited output.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

__version__ = "0.1.0"


@dataclass
class RunManifest:
    command: str
    params: dict
    master_seed: int | None = None
    version: str = __version__
    wall_clock_s: float | None = None
    discards: int | None = None

    def embedded(self) -> dict:
        """The reproducible manifest fields (no wall clock)."""
        return {
            "command": self.command,
            "params": self.params,
            "master_seed": self.master_seed,
            "version": self.version,
            "discards": self.discards,
        }

    def sidecar(self) -> dict:
        d = self.embedded()
        d["wall_clock_s"] = self.wall_clock_s
        return d


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_report(
    report: dict,
    manifest: RunManifest,
    base,
    *,
    formats: tuple[str, ...] = ("json",),
    svg: bool = False,
) -> list[Path]:
    """Write base.json / base.csv / base.svg plus the manifest sidecar."""
    base = Path(base)
    base.parent.mkdir(parents=True, exist_ok=True)
    paths = []
    payload = dict(report)
    payload["manifest"] = manifest.embedded()
    if "json" in formats:
        p = base.with_suffix(".json")
        p.write_text(canonical_json(payload))
        paths.append(p)
    if "csv" in formats:
        p = base.with_suffix(".csv")
        write_csv(report, p)
        paths.append(p)
    if svg:
        p = base.with_suffix(".svg")
        write_figure(report, p)
        paths.append(p)
    side = base.with_suffix(".manifest.json")
    side.write_text(canonical_json(manifest.sidecar()))
    paths.append(side)
    return paths


# ---------------------------------------------------------------------------
# CSV views
# ---------------------------------------------------------------------------


def _rows_distribution(report):
    header = ["code", "count", "frequency", "analytic"]
    rows = [
        [e["code"], e["count"], repr(e["frequency"]),
         "" if e.get("analytic") is None else repr(e["analytic"])]
        for e in report["entries"]
    ]
    return header, rows


def _rows_analytic(report):
    header = ["code", "probability", "standard_error", "method"]
    rows = [
        [e["code"], repr(e["probability"]), repr(e["standard_error"]), e["method"]]
        for e in report["entries"]
    ]
    return header, rows


def _rows_triangle(report):
    header = ["i", "j", "k", "count", "frequency", "uniform"]
    rows = [
        [*e["triangle"], e["count"], repr(e["frequency"]), repr(e["uniform"])]
        for e in report["entries"]
    ]
    return header, rows


def _rows_walk(report):
    header = ["length", "count"]
    rows = [[k, v] for k, v in report["histogram"].items()]
    rows.append(["overflow", report["overflow"]])
    rows.append(["boundary", report["boundary"]])
    return header, rows


def _rows_census(report):
    header = ["instance", "cc_hat"]
    return header, [[i, c] for i, c in enumerate(report["cc_values"])]


def _rows_corner(report):
    header = ["n", "quadrature", "monte_carlo", "uniform"]
    rows = [
        [
            r["n"],
            "" if r["quadrature"] is None else repr(r["quadrature"]),
            "" if r.get("monte_carlo") is None else repr(r["monte_carlo"]),
            repr(r["uniform"]),
        ]
        for r in report["rows"]
    ]
    return header, rows


def _rows_corner_single(report):
    header = ["n", "value", "error_estimate"]
    return header, [[report["n"], repr(report["value"]), repr(report["error_estimate"])]]


def _rows_points(report):
    header = ["label", "x", "y"]
    return header, [[p["label"], repr(p["x"]), repr(p["y"])] for p in report["points"]]


_CSV_DISPATCH = {
    "distribution": _rows_distribution,
    "analytic-distribution": _rows_analytic,
    "triangle-frequency": _rows_triangle,
    "walk": _rows_walk,
    "census": _rows_census,
    "corner-table": _rows_corner,
    "corner": _rows_corner_single,
    "points": _rows_points,
}


def write_csv(report: dict, path) -> None:
    kind = report.get("type")
    if kind not in _CSV_DISPATCH:
        raise ValueError(f"no CSV view for report type {kind!r}")
    header, rows = _CSV_DISPATCH[kind](report)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def write_figure(report: dict, path, top_k: int = 24) -> None:
    """Render the report's natural chart (bar chart or histogram) to a file."""
    plt = _plt()
    kind = report.get("type")
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    if kind in ("distribution", "analytic-distribution"):
        entries = report["entries"][:top_k]
        labels = [e["code"] for e in entries]
        key = "frequency" if kind == "distribution" else "probability"
        ax.bar(range(len(entries)), [e[key] for e in entries], color="#4878cf")
        if kind == "distribution" and any(e.get("analytic") is not None for e in entries):
            ax.plot(
                range(len(entries)),
                [e.get("analytic") for e in entries],
                "k_",
                markersize=14,
                label="analytic",
            )
            ax.legend()
        ax.set_xticks(range(len(entries)))
        ax.set_xticklabels(labels, rotation=90, fontsize=6)
        ax.set_ylabel(key)
    elif kind == "triangle-frequency":
        entries = sorted(report["entries"], key=lambda e: -e["frequency"])[:top_k]
        labels = ["-".join(map(str, e["triangle"])) for e in entries]
        x = range(len(entries))
        ax.bar(x, [e["frequency"] for e in entries], color="#4878cf", label="observed")
        ax.plot(x, [e["uniform"] for e in entries], "k_", markersize=14, label="uniform")
        ax.set_xticks(x)
        ax.set_xticklabels(labels, rotation=90, fontsize=6)
        ax.set_ylabel("frequency")
        ax.legend()
    elif kind == "walk":
        lengths = [int(k) for k in report["histogram"]]
        counts = list(report["histogram"].values())
        ax.bar(lengths, counts, color="#4878cf")
        ax.set_xlabel("cycle length")
        ax.set_ylabel("walks")
        ax.set_title(f"{report['model']}  overflow={report['overflow']}")
    elif kind == "census":
        ax.hist(report["cc_values"], bins=24, color="#4878cf")
        ax.set_xlabel("components of the diagonal subgraph")
        ax.set_ylabel("instances")
        ax.set_title(report["model"])
    elif kind == "corner-table":
        rows = report["rows"]
        ns = [r["n"] for r in rows]
        ax.plot(ns, [r["uniform"] for r in rows], "o-", label="uniform baseline")
        qs = [(r["n"], r["quadrature"]) for r in rows if r["quadrature"] is not None]
        if qs:
            ax.plot(*zip(*qs), "s-", label="quadrature")
        ms = [(r["n"], r["monte_carlo"]) for r in rows if r.get("monte_carlo") is not None]
        if ms:
            ax.plot(*zip(*ms), "^--", label="monte carlo")
        ax.set_xlabel("n")
        ax.set_ylabel("corner-triangle probability")
        ax.legend()
    elif kind == "corner":
        levels = report["levels"]
        ax.plot(range(len(levels)), levels, "o-")
        ax.set_xlabel("doubling level")
        ax.set_ylabel("estimate")
        ax.set_title(f"n={report['n']}: {report['value']:.6f} +- {report['error_estimate']:.1e}")
    elif kind == "points":
        xs = [p["x"] for p in report["points"]]
        ys = [p["y"] for p in report["points"]]
        ax.plot(xs, ys, "o", markersize=3)
        ax.set_aspect("equal")
        ax.set_title(f"{report.get('kind', '')} point set")
    else:
        raise ValueError(f"no figure for report type {kind!r}")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
