"""Aggregate math over score tables.

Everything here is a pure function over in-memory rows: FLOPs accounting
(2·N·D), Pareto frontiers with cost minimized and accuracy maximized,
high/low-resource group means, relative accuracy differences, per-row
ranges, tag breakdowns, and the token-count/accuracy correlation. Internal
math stays in full precision; only the CSV report layer rounds, to one
decimal, to keep exact-match comparisons meaningful.
"""

from __future__ import annotations

import csv
import statistics
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .assets import HIGH_RESOURCE, LOW_RESOURCE
from .errors import AnalysisError, ConfigurationError

BREAKDOWN_KEYS = ("domain_tag", "culture_tag", "language")
UNTAGGED = "untagged"


@dataclass(frozen=True)
class ScalingPoint:
    model_params: float
    avg_tokens: float
    accuracy: float
    label: str = ""

    def validate(self) -> None:
        if self.model_params <= 0:
            raise ValueError("model_params must be positive")
        if self.avg_tokens < 0:
            raise ValueError("avg_tokens must be nonnegative")
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError("accuracy must lie in [0, 1]")

    @property
    def flops(self) -> float:
        return flops(self.model_params, self.avg_tokens)


@dataclass(frozen=True)
class LanguageGroupSpec:
    hrl: frozenset[str] = field(default_factory=lambda: frozenset(HIGH_RESOURCE))
    lrl: frozenset[str] = field(default_factory=lambda: frozenset(LOW_RESOURCE))

    def __post_init__(self) -> None:
        if self.hrl & self.lrl:
            raise ConfigurationError(
                f"groups overlap on {sorted(self.hrl & self.lrl)}"
            )

    @property
    def all(self) -> frozenset[str]:
        return self.hrl | self.lrl


DEFAULT_GROUPS = LanguageGroupSpec()


def flops(n_params: float, avg_tokens: float) -> float:
    """Inference compute for one item: two FLOPs per parameter per token."""
    if n_params <= 0:
        raise ValueError("n_params must be positive")
    if avg_tokens < 0:
        raise ValueError("avg_tokens must be nonnegative")
    return 2.0 * n_params * avg_tokens


def pareto_frontier(
    points: Sequence[tuple[float, float]],
) -> list[tuple[float, float]]:
    """Points not strictly dominated (cost down, accuracy up).

    A point loses to another with cost ≤ and accuracy ≥ where at least one
    is strict; exact ties on both coordinates all survive. Output keeps
    input order and multiplicity.
    """
    pts = list(points)
    if not pts:
        raise ValueError("no points")
    order = sorted(range(len(pts)), key=lambda i: (pts[i][0], -pts[i][1]))
    keep = [False] * len(pts)
    best = float("-inf")
    i = 0
    while i < len(order):
        j = i
        cost = pts[order[i]][0]
        while j < len(order) and pts[order[j]][0] == cost:
            j += 1
        group = order[i:j]
        group_best = max(pts[k][1] for k in group)
        if group_best > best:
            for k in group:
                if pts[k][1] == group_best:
                    keep[k] = True
            best = group_best
        i = j
    return [pts[k] for k in range(len(pts)) if keep[k]]


def group_average(
    accuracies: Mapping[str, float], spec: LanguageGroupSpec = DEFAULT_GROUPS
) -> dict[str, float]:
    """Unweighted per-group means; ALL spans both groups. Full precision."""
    for language in sorted(spec.all):
        if language not in accuracies:
            raise AnalysisError(f"no accuracy for language {language!r}")
    return {
        "ALL": statistics.fmean(accuracies[lang] for lang in spec.all),
        "HRL": statistics.fmean(accuracies[lang] for lang in spec.hrl),
        "LRL": statistics.fmean(accuracies[lang] for lang in spec.lrl),
    }


def relative_diff(new_acc: float, base_acc: float) -> float:
    if base_acc == 0:
        raise AnalysisError("relative difference undefined for zero baseline")
    return 100.0 * (new_acc - base_acc) / base_acc


def row_range(values: Sequence[float]) -> float:
    if not values:
        raise ValueError("no values")
    return max(values) - min(values)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise ValueError("need at least two pairs")
    try:
        return statistics.correlation(xs, ys)
    except statistics.StatisticsError as exc:
        raise AnalysisError(f"correlation undefined: {exc}") from exc
    except ZeroDivisionError as exc:
        # variance underflow: numerically constant input
        raise AnalysisError("correlation undefined: zero variance") from exc


def reasoning_language_averages(
    matrix: Mapping[str, Mapping[str, float]],
) -> dict[str, float]:
    """Column means of a query-language × reasoning-language table."""
    if not matrix:
        raise AnalysisError("empty matrix")
    rows = list(matrix.values())
    columns = tuple(sorted(rows[0]))
    for query_language, row in matrix.items():
        if tuple(sorted(row)) != columns:
            raise AnalysisError(f"ragged matrix row {query_language!r}")
    return {
        reasoning: statistics.fmean(row[reasoning] for row in rows)
        for reasoning in columns
    }


def token_accuracy_correlation(
    token_matrix: Mapping[str, Mapping[str, float]],
    accuracy_matrix: Mapping[str, Mapping[str, float]],
    *,
    all_cells: bool = False,
) -> float:
    """Correlation between thinking length and accuracy across reasoning
    languages.

    Default pairs the per-reasoning-language averages (one point per
    column); all_cells pairs every query × reasoning cell instead.
    """
    if all_cells:
        keys = [
            (q, r)
            for q in sorted(token_matrix)
            for r in sorted(token_matrix[q])
        ]
        try:
            xs = [token_matrix[q][r] for q, r in keys]
            ys = [accuracy_matrix[q][r] for q, r in keys]
        except KeyError as exc:
            raise AnalysisError(f"matrices disagree on cell {exc}") from exc
        return pearson(xs, ys)
    token_avg = reasoning_language_averages(token_matrix)
    acc_avg = reasoning_language_averages(accuracy_matrix)
    if sorted(token_avg) != sorted(acc_avg):
        raise AnalysisError("matrices cover different reasoning languages")
    langs = sorted(token_avg)
    return pearson([token_avg[l] for l in langs], [acc_avg[l] for l in langs])


def breakdown(
    rows: Iterable[Mapping], by: str
) -> dict[str, dict[str, float | int]]:
    """Mean accuracy and count per tag value; missing tags pool under
    "untagged"."""
    if by not in BREAKDOWN_KEYS:
        raise ConfigurationError(f"cannot break down by {by!r}; have {BREAKDOWN_KEYS}")
    totals: dict[str, list[int]] = {}
    for row in rows:
        cell = totals.setdefault(str(row.get(by) or UNTAGGED), [0, 0])
        cell[0] += 1 if row["correct"] else 0
        cell[1] += 1
    if not totals:
        raise AnalysisError("no rows to break down")
    return {
        bucket: {"accuracy": correct / count, "count": count}
        for bucket, (correct, count) in sorted(totals.items())
    }


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_scaling_csv(
    path: str | Path, rows: Iterable[tuple[str, int, float]]
) -> None:
    ordered = sorted(rows, key=lambda r: (r[0], r[1]))
    write_csv(path, ("series", "max_thinking_tokens", "accuracy"), ordered)


def write_pareto_csv(
    path: str | Path, rows: Iterable[tuple[str, float, float]]
) -> None:
    by_series: dict[str, list[tuple[float, float]]] = {}
    for series, cost, accuracy in rows:
        by_series.setdefault(series, []).append((cost, accuracy))
    out = []
    for series in sorted(by_series):
        points = by_series[series]
        frontier = set(pareto_frontier(points))
        for cost, accuracy in sorted(points):
            out.append((series, cost, accuracy, 1 if (cost, accuracy) in frontier else 0))
    write_csv(path, ("series", "flops", "accuracy", "on_frontier"), out)


def write_mixing_csv(
    path: str | Path, proportions: Mapping[str, Mapping[str, float]]
) -> None:
    categories = ("matrix_only", "quote_and_think", "intersentential", "intrasentential")
    rows = [
        (language, *(proportions[language].get(c, 0.0) for c in categories))
        for language in sorted(proportions)
    ]
    write_csv(path, ("language", *categories), rows)


def write_token_scatter_csv(
    path: str | Path,
    per_language: Mapping[str, tuple[float, float]],
    pearson_r: float,
) -> None:
    rows = [
        (language, *per_language[language], pearson_r)
        for language in sorted(per_language)
    ]
    write_csv(
        path,
        ("language", "avg_thinking_tokens", "accuracy", "pearson_r"),
        rows,
    )


def write_group_csv(
    path: str | Path, rows: Mapping[str, Mapping[str, float]]
) -> None:
    # report precision: one decimal, matching the summary tables
    out = [
        (series, *(format(rows[series][g], ".1f") for g in ("ALL", "HRL", "LRL")))
        for series in sorted(rows)
    ]
    write_csv(path, ("series", "ALL", "HRL", "LRL"), out)


def write_matrix_csv(
    path: str | Path, matrix: Mapping[str, Mapping[str, float]]
) -> None:
    reasoning = sorted(next(iter(matrix.values()), {}))
    rows = [
        (query, *(matrix[query][r] for r in reasoning))
        for query in sorted(matrix)
    ]
    write_csv(path, ("query_language", *reasoning), rows)


def write_breakdown_csv(
    path: str | Path, grouped: Mapping[str, Mapping[str, float | int]]
) -> None:
    rows = [
        (bucket, grouped[bucket]["accuracy"], grouped[bucket]["count"])
        for bucket in sorted(grouped)
    ]
    write_csv(path, ("group", "accuracy", "count"), rows)
