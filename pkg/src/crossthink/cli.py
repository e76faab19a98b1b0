"""Command-line entry point.

One executable, eight subcommands: grid runs, the full query × reasoning
forcing matrix, mixing and compliance analyses over saved records,
contamination screening, Pareto tagging, report bundling, and asset
validation.

Exit codes are stable across subcommands: 0 success, 1 incomplete or
unusable input, 2 configuration error, 3 backend failure. A YAML config
file (sections ``run:`` and ``backend:``) is the source of truth; flags
are targeted overrides, and the resolved config always lands in the run
directory. Every file this module writes is byte-deterministic for
identical inputs; human-readable summaries carry no timestamps.
"""

from __future__ import annotations

import csv
import functools
import json
import time
from pathlib import Path
from statistics import fmean

import click
import yaml

from .analysis import (
    DEFAULT_GROUPS,
    group_average,
    pearson,
    write_csv,
    write_group_csv,
    write_mixing_csv,
    write_pareto_csv,
    write_token_scatter_csv,
)
from .assets import get_profile, load_language_assets, validate_assets
from .backend import Backend, EndpointConfig, HttpBackend
from .contamination import DEFAULT_N, ngram_overlap_check
from .control import MODES, STRATEGIES, GenerationRecord
from .datasets import FORMATS, load_dataset
from .errors import (
    AnalysisError,
    BackendError,
    ConfigurationError,
    DatasetError,
    UndefinedComplianceError,
    UndeterminedLanguageError,
)
from .mixing import analyze_corpus
from .mixing import compliance as record_compliance
from .mock_backend import mock_backend
from .runner import RunConfig, read_jsonl, run_eval

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONFIG = 2
EXIT_BACKEND = 3

HOLE = "NA"


def _abort(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    raise SystemExit(code)


def _mapped_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigurationError as exc:
            _abort(EXIT_CONFIG, str(exc))
        except BackendError as exc:
            _abort(EXIT_BACKEND, str(exc))
        except (
            DatasetError,
            AnalysisError,
            UndeterminedLanguageError,
            UndefinedComplianceError,
            OSError,
        ) as exc:
            _abort(EXIT_INPUT, str(exc))

    return wrapper


@click.group()
def main() -> None:
    """Reasoning-budget and language-forcing evaluation toolkit."""


# --- config plumbing ---------------------------------------------------------


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config file {path} is not valid YAML: {exc}")
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config file {path} must hold a mapping")
    return raw


def _parse_budgets(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(b.strip()) for b in text.split(",") if b.strip())
    except ValueError:
        raise ConfigurationError(f"bad budget list {text!r}")


def _parse_languages(text: str) -> tuple[str, ...]:
    return tuple(l.strip() for l in text.split(",") if l.strip())


def _parse_pairs(text: str) -> tuple[tuple[str, str], ...]:
    pairs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise ConfigurationError(
                f"bad pair {chunk!r}; expected query:reasoning"
            )
        query, reasoning = chunk.split(":", 1)
        pairs.append((query.strip(), reasoning.strip()))
    return tuple(pairs)


def _resolve_run_config(config_path: str | None, overrides: dict) -> tuple[RunConfig, dict]:
    raw = _load_config_file(config_path)
    run_raw = dict(raw.get("run", {}))
    for key, value in overrides.items():
        if value is not None:
            run_raw[key] = value
    if not run_raw.get("output_dir"):
        run_raw["output_dir"] = time.strftime("runs/run-%Y%m%d-%H%M%S")
    if not run_raw.get("dataset_path"):
        raise ConfigurationError("no dataset: set run.dataset_path or pass --dataset")
    return RunConfig.from_dict(run_raw), raw


def _build_backend(raw: dict, delimiter: str) -> Backend:
    kind = raw.get("kind", "mock")
    if kind == "mock":
        script = raw.get("script")
        if not script:
            raise ConfigurationError("mock backend needs a script path")
        return mock_backend(script, delimiter)
    if kind == "http":
        base_url = raw.get("base_url")
        if not base_url:
            raise ConfigurationError("http backend needs base_url")
        endpoint = EndpointConfig(
            base_url=base_url,
            model_id=str(raw.get("model_id", "")),
            api_key_env=str(raw.get("api_key_env", "CROSSTHINK_API_KEY")),
            chat_path=str(raw.get("chat_path", "/chat/completions")),
            timeout_s=float(raw.get("timeout_s", 120.0)),
            max_retries=int(raw.get("max_retries", 3)),
        )
        return HttpBackend(endpoint)
    raise ConfigurationError(f"unknown backend kind {kind!r}")


_RUN_OPTIONS = [
    click.option("--config", "config_path", type=click.Path(exists=False), default=None,
                 help="YAML config with run: and backend: sections."),
    click.option("--dataset", "dataset_path", default=None),
    click.option("--format", "dataset_format", type=click.Choice(FORMATS), default=None),
    click.option("--out", "output_dir", default=None,
                 help="Run directory (default: timestamped under runs/)."),
    click.option("--budgets", default=None, help="Comma-separated thinking-token caps."),
    click.option("--languages", default=None, help="Comma-separated query languages."),
    click.option("--pairs", default=None,
                 help="query:reasoning pairs, e.g. en:ja,en:sw."),
    click.option("--strategy", type=click.Choice(tuple(STRATEGIES)), default=None),
    click.option("--mode", type=click.Choice(tuple(MODES)), default=None),
    click.option("--workers", type=int, default=None),
    click.option("--script", default=None, help="Mock backend script (overrides config)."),
]


def _with_run_options(fn):
    for option in reversed(_RUN_OPTIONS):
        fn = option(fn)
    return fn


def _gather_overrides(dataset_path, dataset_format, output_dir, budgets,
                      languages, pairs, strategy, mode, workers) -> dict:
    overrides: dict = {}
    if dataset_path is not None:
        overrides["dataset_path"] = dataset_path
    if dataset_format is not None:
        overrides["dataset_format"] = dataset_format
    if output_dir is not None:
        overrides["output_dir"] = output_dir
    if budgets is not None:
        overrides["budgets"] = _parse_budgets(budgets)
    if languages is not None:
        overrides["languages"] = _parse_languages(languages)
    if pairs is not None:
        overrides["forcing_pairs"] = _parse_pairs(pairs)
    if strategy is not None:
        overrides["strategy"] = strategy
    if mode is not None:
        overrides["mode"] = mode
    if workers is not None:
        overrides["workers"] = workers
    return overrides


def _print_cell_table(summary: dict) -> None:
    cells = summary["accuracy"]["cells"]
    if not cells:
        click.echo("no scored cells")
        return
    click.echo(
        f"{'budget':>8}  {'query':>6}  {'reasoning':>9}  {'strategy':>15}"
        f"  {'accuracy':>8}  {'count':>5}"
    )
    for cell in cells:
        click.echo(
            f"{cell['budget']:>8}  {cell['query_language']:>6}"
            f"  {cell['reasoning_language']:>9}  {cell['strategy']:>15}"
            f"  {cell['accuracy']:>8.3f}  {cell['count']:>5}"
        )


def _finish_run(result) -> None:
    _print_cell_table(result.summary)
    if result.executed == 0:
        click.echo("0 cells executed (run already complete)")
    else:
        click.echo(f"{result.executed} cells executed, {result.skipped} skipped")
    click.echo(f"run directory: {result.run_dir}")
    backend_failures = result.summary["failures"]["backend_error"]
    if backend_failures:
        _abort(
            EXIT_BACKEND,
            f"{backend_failures} cell(s) failed on the backend; "
            "progress is checkpointed, rerun to retry them",
        )


@main.command("run")
@_with_run_options
@_mapped_errors
def cmd_run(config_path, script, **flag_values):
    """Run the budget/forcing grid over a dataset."""
    config, raw = _resolve_run_config(config_path, _gather_overrides(**flag_values))
    profile = get_profile(config.model_profile, config.model_profiles_path or None)
    backend_raw = dict(raw.get("backend", {}))
    if script is not None:
        backend_raw.update(kind="mock", script=script)
    backend = _build_backend(backend_raw, profile.end_of_thinking_delimiter)
    result = run_eval(config, backend)
    _finish_run(result)


def _fmt_cell(value: float | None) -> str:
    return HOLE if value is None else format(value, ".1f")


def _matrix_rows(
    matrix: dict[str, dict[str, float | None]],
    languages: tuple[str, ...],
    with_range: bool,
) -> list[list[str]]:
    rows = []
    for query in languages:
        values = [matrix.get(query, {}).get(r) for r in languages]
        row = [query, *(_fmt_cell(v) for v in values)]
        if with_range:
            present = [v for v in values if v is not None]
            row.append(_fmt_cell(max(present) - min(present) if present else None))
        rows.append(row)
    # column means over present cells, mirroring the published AVG row
    avg_values = []
    for reasoning in languages:
        present = [
            matrix[q][reasoning]
            for q in languages
            if matrix.get(q, {}).get(reasoning) is not None
        ]
        avg_values.append(fmean(present) if present else None)
    avg_row = ["AVG", *(_fmt_cell(v) for v in avg_values)]
    if with_range:
        present = [v for v in avg_values if v is not None]
        avg_row.append(_fmt_cell(max(present) - min(present) if present else None))
    rows.append(avg_row)
    return rows


@main.command("force-matrix")
@_with_run_options
@_mapped_errors
def cmd_force_matrix(config_path, script, **flag_values):
    """Run the full query × reasoning language matrix and emit its tables."""
    overrides = _gather_overrides(**flag_values)
    raw = _load_config_file(config_path)
    run_raw = dict(raw.get("run", {}))
    run_raw.update({k: v for k, v in overrides.items() if v is not None})
    languages = tuple(run_raw.get("languages") or ())
    if not languages:
        raise ConfigurationError("force-matrix needs --languages to span the grid")
    run_raw.setdefault("strategy", "combined")
    run_raw["forcing_pairs"] = tuple(
        (q, r) for q in languages for r in languages
    )
    if not run_raw.get("output_dir"):
        run_raw["output_dir"] = time.strftime("runs/matrix-%Y%m%d-%H%M%S")
    if not run_raw.get("dataset_path"):
        raise ConfigurationError("no dataset: set run.dataset_path or pass --dataset")
    config = RunConfig.from_dict(run_raw)
    if len(config.budgets) != 1:
        raise ConfigurationError("force-matrix needs exactly one budget")
    profile = get_profile(config.model_profile, config.model_profiles_path or None)
    backend_raw = dict(raw.get("backend", {}))
    if script is not None:
        backend_raw.update(kind="mock", script=script)
    backend = _build_backend(backend_raw, profile.end_of_thinking_delimiter)
    result = run_eval(config, backend)

    accuracy: dict[str, dict[str, float | None]] = {}
    tokens: dict[str, dict[str, float | None]] = {}
    for cell in result.summary["accuracy"]["cells"]:
        if cell["strategy"] != config.strategy:
            continue
        query, reasoning = cell["query_language"], cell["reasoning_language"]
        accuracy.setdefault(query, {})[reasoning] = 100.0 * cell["accuracy"]
        tokens.setdefault(query, {})[reasoning] = cell["avg_thinking_tokens"]

    run_dir = result.run_dir
    write_csv(
        run_dir / "matrix_accuracy.csv",
        ("query_language", *languages, "range"),
        _matrix_rows(accuracy, languages, with_range=True),
    )
    write_csv(
        run_dir / "matrix_tokens.csv",
        ("query_language", *languages),
        _matrix_rows(tokens, languages, with_range=False),
    )

    holes = [
        (q, r)
        for q in languages
        for r in languages
        if accuracy.get(q, {}).get(r) is None
    ]
    correlation: dict = {"mode": "per_reasoning_language_averages"}
    if holes:
        correlation["pearson_r"] = None
        correlation["note"] = "matrix incomplete"
    else:
        token_avgs = [
            fmean(tokens[q][r] for q in languages) for r in languages
        ]
        acc_avgs = [
            fmean(accuracy[q][r] for q in languages) for r in languages
        ]
        try:
            correlation["pearson_r"] = pearson(token_avgs, acc_avgs)
        except (AnalysisError, ValueError) as exc:
            correlation["pearson_r"] = None
            correlation["note"] = str(exc)
    correlation["languages"] = list(languages)
    (run_dir / "correlation.json").write_text(
        json.dumps(correlation, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    _print_cell_table(result.summary)
    click.echo(f"matrix tables written to {run_dir}")
    if result.summary["failures"]["backend_error"]:
        _abort(EXIT_BACKEND, "backend failures during matrix run; rerun to retry")
    if holes:
        _abort(
            EXIT_INPUT,
            "matrix has holes (no items for some pairs): "
            + ", ".join(f"{q}:{r}" for q, r in holes[:10]),
        )


def _load_records(path: Path) -> list[GenerationRecord]:
    if path.is_dir():
        path = path / "records.jsonl"
    rows = read_jsonl(path)
    if not rows:
        raise DatasetError(f"no records found at {path}")
    latest: dict[str, dict] = {}
    for i, row in enumerate(rows):
        latest[str(row.get("cell", i))] = row
    return [GenerationRecord.from_dict(row) for row in latest.values()]


@main.command("analyze-mixing")
@click.argument("records_path", type=click.Path())
@click.option("--out", "out_dir", default=None,
              help="Output directory (default: alongside the records).")
@click.option("--latin-override", is_flag=True,
              help="Permit Latin-script analysis for Latin-script targets.")
@_mapped_errors
def cmd_analyze_mixing(records_path, out_dir, latin_override):
    """Classify code-switching in saved generation records."""
    path = Path(records_path)
    records = [r for r in _load_records(path) if not r.failed]
    if not records:
        raise DatasetError("all records are failed generations")
    out = Path(out_dir) if out_dir else (path if path.is_dir() else path.parent)
    out.mkdir(parents=True, exist_ok=True)
    groups: dict[str, list[GenerationRecord]] = {}
    for record in records:
        groups.setdefault(record.reasoning_language, []).append(record)
    proportions: dict[str, dict[str, float]] = {}
    details: dict[str, dict] = {}
    notes: list[str] = []
    for language in sorted(groups):
        try:
            report = analyze_corpus(groups[language], latin_override=latin_override)
        except AnalysisError as exc:
            notes.append(f"{language}: {exc}")
            continue
        proportions[language] = report.proportions
        details[language] = report.to_dict()
    if not proportions:
        raise AnalysisError(
            "no language group could be analyzed: " + "; ".join(notes)
        )
    write_mixing_csv(out / "mixing_breakdown.csv", proportions)
    (out / "mixing_report.json").write_text(
        json.dumps(details, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    for note in notes:
        click.echo(f"skipped {note}")
    click.echo(
        f"analyzed {sum(len(g) for g in groups.values())} records across "
        f"{len(proportions)} language(s); tables in {out}"
    )


@main.command("compliance")
@click.argument("records_path", type=click.Path())
@click.option("--out", "out_path", default=None, help="CSV path (default: alongside).")
@click.option("--scope", type=click.Choice(("thinking", "full")), default="thinking")
@_mapped_errors
def cmd_compliance(records_path, out_path, scope):
    """Score per-record language compliance against the forced language."""
    path = Path(records_path)
    records = _load_records(path)
    out = Path(out_path) if out_path else (
        (path if path.is_dir() else path.parent) / "compliance.csv"
    )
    rows = []
    undefined = 0
    for record in sorted(records, key=lambda r: (r.question_id, r.request_id)):
        try:
            value = record_compliance(
                record, record.reasoning_language, allow_latin=True, scope=scope
            )
            formatted = format(value, ".3f")
        except UndefinedComplianceError:
            undefined += 1
            formatted = ""
        rows.append(
            (
                record.question_id,
                record.query_language,
                record.reasoning_language,
                record.strategy,
                formatted,
            )
        )
    write_csv(
        out,
        ("question_id", "query_language", "reasoning_language", "strategy",
         "compliance"),
        rows,
    )
    defined = [float(r[4]) for r in rows if r[4] != ""]
    if defined:
        click.echo(
            f"{len(defined)} records scored, {undefined} undefined; "
            f"mean compliance {fmean(defined):.3f}"
        )
    else:
        click.echo(f"0 records scored, {undefined} undefined")
    click.echo(f"compliance table: {out}")


def _load_train_texts(path: Path) -> dict[str, str]:
    texts: dict[str, str] = {}
    lines = path.read_text(encoding="utf-8").splitlines()
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError:
            row = None
        if isinstance(row, dict) and "text" in row:
            texts[str(row.get("id", f"train-{i}"))] = str(row["text"])
        else:
            texts[f"train-{i}"] = line
    if not texts:
        raise DatasetError(f"no training texts in {path}")
    return texts


@main.command("contamination")
@click.option("--train", "train_path", required=True, type=click.Path())
@click.option("--eval", "eval_path", required=True, type=click.Path())
@click.option("--format", "dataset_format", type=click.Choice(FORMATS), default="mgsm")
@click.option("-n", "--ngram", "n", type=int, default=DEFAULT_N, show_default=True)
@click.option("--out", "out_path", default=None, help="CSV of overlapping pairs.")
@_mapped_errors
def cmd_contamination(train_path, eval_path, dataset_format, n, out_path):
    """Screen eval questions against training texts for shared n-grams."""
    train = _load_train_texts(Path(train_path))
    items = load_dataset(eval_path, dataset_format)
    evals = {item.item_id: item.prompt_text for item in items}
    hits = ngram_overlap_check(train, evals, n=n)
    if out_path:
        write_csv(out_path, ("train_id", "eval_id", "shared_ngram"), hits)
    click.echo(
        f"{len(hits)} overlapping pair(s) across {len(train)} train and "
        f"{len(evals)} eval texts (n={n})"
    )
    for train_id, eval_id, gram in hits[:5]:
        click.echo(f"  {train_id} ~ {eval_id}: {gram}")


@main.command("pareto")
@click.option("--points", "points_path", required=True, type=click.Path(),
              help="CSV with series,flops,accuracy columns.")
@click.option("--out", "out_path", required=True)
@_mapped_errors
def cmd_pareto(points_path, out_path):
    """Tag cost/accuracy points with Pareto-frontier membership."""
    with open(points_path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        missing = {"series", "flops", "accuracy"} - set(reader.fieldnames or ())
        if missing:
            raise DatasetError(
                f"{points_path} lacks columns: {', '.join(sorted(missing))}"
            )
        try:
            rows = [
                (row["series"], float(row["flops"]), float(row["accuracy"]))
                for row in reader
            ]
        except (ValueError, TypeError) as exc:
            raise DatasetError(f"bad point row in {points_path}: {exc}")
    if not rows:
        raise DatasetError(f"{points_path} holds no points")
    write_pareto_csv(out_path, rows)
    click.echo(f"{len(rows)} points tagged; table: {out_path}")


@main.command("assets-check")
@click.option("--assets", "assets_path", default=None,
              help="Language asset YAML (default: packaged).")
@_mapped_errors
def cmd_assets_check(assets_path):
    """Validate language asset coverage and report the content hash."""
    assets = load_language_assets(assets_path)
    validate_assets(assets)
    click.echo(
        f"{len(assets.languages)} languages complete; "
        f"content hash {assets.source_hash[:16]}"
    )


REPORT_FILES = (
    "scores_summary.csv",
    "group_averages.csv",
    "compliance.csv",
    "mixing_breakdown.csv",
    "token_accuracy.csv",
)


@main.command("report")
@click.argument("run_dir", type=click.Path())
@click.option("--out", "out_dir", default=None,
              help="Bundle directory (default: <run_dir>/report).")
@_mapped_errors
def cmd_report(run_dir, out_dir):
    """Bundle scores, compliance, mixing, and compute tables for a run."""
    run = Path(run_dir)
    required = ("config.json", "summary.json", "scores.jsonl", "records.jsonl",
                "manifest.jsonl")
    missing = [name for name in required if not (run / name).exists()]
    if missing:
        _abort(
            EXIT_INPUT,
            f"run directory {run} incomplete; missing: {', '.join(missing)}",
        )
    out = Path(out_dir) if out_dir else run / "report"
    out.mkdir(parents=True, exist_ok=True)
    summary = json.loads((run / "summary.json").read_text(encoding="utf-8"))
    cells = summary["accuracy"]["cells"]
    notes: list[str] = []

    # 1. per-cell score summary
    write_csv(
        out / "scores_summary.csv",
        ("budget", "query_language", "reasoning_language", "strategy",
         "accuracy", "count", "avg_thinking_tokens", "avg_compliance"),
        [
            (
                c["budget"], c["query_language"], c["reasoning_language"],
                c["strategy"], format(100.0 * c["accuracy"], ".1f"), c["count"],
                format(c["avg_thinking_tokens"], ".1f"),
                "" if c["avg_compliance"] is None
                else format(c["avg_compliance"], ".3f"),
            )
            for c in cells
        ],
    )

    # 2. HRL/LRL group means for every slice that spans the full language set
    slices: dict[str, dict[str, float]] = {}
    by_slice: dict[tuple, dict[str, float]] = {}
    for c in cells:
        key = (c["budget"], c["reasoning_language"], c["strategy"])
        by_slice.setdefault(key, {})[c["query_language"]] = 100.0 * c["accuracy"]
    for (budget, reasoning, strategy), per_query in sorted(by_slice.items()):
        if DEFAULT_GROUPS.all <= set(per_query):
            label = f"budget={budget}/reasoning={reasoning}/strategy={strategy}"
            slices[label] = group_average(per_query)
    if not slices:
        notes.append(
            "group_averages.csv is empty: no slice covers every grouped language"
        )
    write_group_csv(out / "group_averages.csv", slices)

    # 3. compliance by reasoning language and strategy
    score_rows = read_jsonl(run / "scores.jsonl")
    latest = {row["cell"]: row for row in score_rows}
    comp_groups: dict[tuple[str, str], list[float]] = {}
    for row in latest.values():
        if row.get("compliance") is not None:
            comp_groups.setdefault(
                (row["reasoning_language"], row["strategy"]), []
            ).append(row["compliance"])
    write_csv(
        out / "compliance.csv",
        ("reasoning_language", "strategy", "avg_compliance", "records"),
        [
            (language, strategy, format(fmean(values), ".3f"), len(values))
            for (language, strategy), values in sorted(comp_groups.items())
        ],
    )

    # 4. code-switching breakdown per reasoning language
    records = [r for r in _load_records(run / "records.jsonl") if not r.failed]
    mixing: dict[str, dict[str, float]] = {}
    groups: dict[str, list[GenerationRecord]] = {}
    for record in records:
        groups.setdefault(record.reasoning_language, []).append(record)
    for language in sorted(groups):
        try:
            mixing[language] = analyze_corpus(groups[language]).proportions
        except AnalysisError as exc:
            notes.append(f"mixing skipped for {language}: {exc}")
    write_mixing_csv(out / "mixing_breakdown.csv", mixing)

    # 5. thinking length vs accuracy by reasoning language
    by_reasoning = summary["accuracy"]["by_reasoning_language"]
    scatter = {
        language: (
            stats["avg_thinking_tokens"],
            100.0 * stats["accuracy"],
        )
        for language, stats in sorted(by_reasoning.items())
    }
    if len(scatter) >= 2:
        try:
            r = pearson(
                [v[0] for v in scatter.values()],
                [v[1] for v in scatter.values()],
            )
            write_token_scatter_csv(out / "token_accuracy.csv", scatter, r)
        except AnalysisError as exc:
            notes.append(f"token/accuracy correlation undefined: {exc}")
            r = None
    else:
        notes.append("token/accuracy correlation needs at least two languages")
        r = None
    if r is None:
        write_csv(
            out / "token_accuracy.csv",
            ("language", "avg_thinking_tokens", "accuracy", "pearson_r"),
            [(lang, *values, "") for lang, values in scatter.items()],
        )

    lines = [
        "run report",
        "==========",
        f"scored cells: {summary['counts']['scored']}",
        f"overall accuracy: "
        f"{100.0 * summary['accuracy']['overall']:.1f}%"
        if summary["accuracy"]["overall"] is not None
        else "overall accuracy: undefined",
        "failures: "
        + ", ".join(f"{k}={v}" for k, v in sorted(summary["failures"].items())),
        "",
        "tables:",
        *(f"  {name}" for name in REPORT_FILES),
    ]
    if r is not None:
        lines.insert(5, f"token/accuracy pearson r: {r:.3f}")
    if notes:
        lines += ["", "notes:", *(f"  {note}" for note in notes)]
    (out / "REPORT.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    click.echo(f"report bundle written to {out}")


if __name__ == "__main__":
    main()
