"""Publication-style figures over the analysis CSV contract.

Each figure kind consumes one documented CSV schema and nothing else; the
renderer draws what the table says and never recomputes a statistic. Output
is SVG with text kept as text (``svg.fonttype: none``) so axis labels, legend
entries, and the correlation annotation stay inspectable in the file.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # decided before pyplot loads a display backend

import matplotlib.pyplot as plt

matplotlib.rcParams["svg.fonttype"] = "none"
matplotlib.rcParams["svg.hashsalt"] = "crossthink-figures"

KINDS = ("scaling", "pareto", "mixing", "token_scatter", "domain_breakdown")

MIXING_CATEGORIES = (
    "matrix_only",
    "quote_and_think",
    "intersentential",
    "intrasentential",
)

SCHEMAS: dict[str, tuple[str, ...]] = {
    "scaling": ("series", "max_thinking_tokens", "accuracy"),
    "pareto": ("series", "flops", "accuracy", "on_frontier"),
    "mixing": ("language", *MIXING_CATEGORIES),
    "token_scatter": ("language", "avg_thinking_tokens", "accuracy", "pearson_r"),
    "domain_breakdown": ("group", "accuracy", "count"),
}


class FigureError(ValueError):
    """Raised for an unknown kind, a schema mismatch, or an empty table."""


@dataclass
class FigureSpec:
    kind: str
    input_csv: Path | str
    output_path: Path | str
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None


def load_rows(path: Path | str, kind: str) -> list[dict[str, str]]:
    """Read one CSV and check it against the schema for ``kind``."""
    if kind not in SCHEMAS:
        raise FigureError(
            f"unknown figure kind {kind!r}; expected one of: {', '.join(KINDS)}"
        )
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        missing = sorted(set(SCHEMAS[kind]) - set(header))
        if missing:
            raise FigureError(
                f"{path}: missing columns: {', '.join(missing)} "
                f"(schema for {kind}: {', '.join(SCHEMAS[kind])})"
            )
        rows = list(reader)
    if not rows:
        raise FigureError(f"{path}: no data rows")
    return rows


def _series_order(rows: list[dict[str, str]], key: str) -> list[str]:
    # first-seen order: the emitting layer already sorts, and overridden
    # series sets keep whatever order their table uses
    seen: list[str] = []
    for row in rows:
        if row[key] not in seen:
            seen.append(row[key])
    return seen


def _render_scaling(ax, rows) -> tuple[str, str]:
    for name in _series_order(rows, "series"):
        pts = sorted(
            (float(r["max_thinking_tokens"]), float(r["accuracy"]))
            for r in rows
            if r["series"] == name
        )
        ax.plot([x for x, _ in pts], [y for _, y in pts], marker="o", label=name)
    ax.set_xscale("log", base=2)
    ax.legend()
    return "maximum thinking tokens", "accuracy (%)"


def _render_pareto(ax, rows) -> tuple[str, str]:
    for name in _series_order(rows, "series"):
        pts = [
            (float(r["flops"]), float(r["accuracy"]), r["on_frontier"] == "1")
            for r in rows
            if r["series"] == name
        ]
        color = ax._get_lines.get_next_color()
        ax.scatter(
            [x for x, _, _ in pts],
            [y for _, y, _ in pts],
            color=color,
            alpha=0.45,
            label=name,
        )
        frontier = sorted((x, y) for x, y, on in pts if on)
        if frontier:
            ax.plot(
                [x for x, _ in frontier],
                [y for _, y in frontier],
                color=color,
                marker="o",
            )
    ax.set_xscale("log")
    ax.legend()
    return "inference FLOPs", "accuracy (%)"


def _render_mixing(ax, rows) -> tuple[str, str]:
    languages = [r["language"] for r in rows]
    bottom = [0.0] * len(rows)
    for category in MIXING_CATEGORIES:
        values = [float(r[category]) for r in rows]
        ax.bar(languages, values, bottom=bottom, label=category)
        bottom = [b + v for b, v in zip(bottom, values)]
    ax.set_ylim(0.0, 1.0)
    ax.legend(fontsize="small")
    return "language", "proportion of sentences"


def _render_token_scatter(ax, rows) -> tuple[str, str]:
    xs = [float(r["avg_thinking_tokens"]) for r in rows]
    ys = [float(r["accuracy"]) for r in rows]
    ax.scatter(xs, ys)
    for row, x, y in zip(rows, xs, ys):
        ax.annotate(
            row["language"], (x, y), textcoords="offset points", xytext=(4, 4)
        )
    # the table carries the correlation; every row repeats the same value
    r = float(rows[0]["pearson_r"])
    ax.annotate(
        f"r = {r:.3f}",
        xy=(0.97, 0.95),
        xycoords="axes fraction",
        ha="right",
        va="top",
    )
    return "average thinking tokens", "accuracy (%)"


def _render_domain_breakdown(ax, rows) -> tuple[str, str]:
    groups = [r["group"] for r in rows]
    bars = ax.bar(groups, [float(r["accuracy"]) for r in rows])
    for rect, row in zip(bars, rows):
        ax.annotate(
            f"n={row['count']}",
            (rect.get_x() + rect.get_width() / 2, rect.get_height()),
            textcoords="offset points",
            xytext=(0, 3),
            ha="center",
            fontsize="small",
        )
    return "group", "accuracy (%)"


_RENDERERS = {
    "scaling": _render_scaling,
    "pareto": _render_pareto,
    "mixing": _render_mixing,
    "token_scatter": _render_token_scatter,
    "domain_breakdown": _render_domain_breakdown,
}


def render(spec: FigureSpec) -> Path:
    """Render one figure to a non-empty SVG file and return its path."""
    rows = load_rows(spec.input_csv, spec.kind)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    try:
        xlabel, ylabel = _RENDERERS[spec.kind](ax, rows)
        ax.set_xlabel(spec.xlabel or xlabel)
        ax.set_ylabel(spec.ylabel or ylabel)
        if spec.title:
            ax.set_title(spec.title)
        out = Path(spec.output_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        # drop the creation date so identical inputs give identical files
        fig.savefig(out, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="crossthink-figures",
        description="Render one analysis CSV to a publication-style SVG.",
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--input", required=True, help="analysis CSV to draw")
    parser.add_argument("--output", required=True, help="SVG path to write")
    parser.add_argument("--title", default=None)
    parser.add_argument("--xlabel", default=None)
    parser.add_argument("--ylabel", default=None)
    args = parser.parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        input_csv=args.input,
        output_path=args.output,
        title=args.title,
        xlabel=args.xlabel,
        ylabel=args.ylabel,
    )
    try:
        out = render(spec)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
