"""Grid evaluation runner.

Expands a dataset into (item × budget × query/reasoning pair) cells, runs
the budget-forcing loop over each, extracts and scores answers, and
persists everything in a run directory:

* ``records.jsonl`` — full generation records, one per executed cell
* ``scores.jsonl`` — one score row per executed cell
* ``manifest.jsonl`` — completed-cell ledger keyed by cell hash
* ``summary.json`` — deterministic aggregate over the latest row per cell
* ``config.json`` — the resolved configuration

Cells run on a bounded worker pool; a single writer thread appends lines
as futures settle, so an interrupted run leaves whole lines behind and a
rerun picks up the missing cells. Cells that died on backend errors are
recorded but flagged for retry: the manifest remembers their status and a
rerun executes them again, with the newest score row superseding the old
one at summary time.
"""

from __future__ import annotations

import hashlib
import json
from collections.abc import Iterable, Mapping
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, fields
from pathlib import Path
from statistics import fmean

from .assets import DEFAULT_PROFILE, get_profile, load_language_assets
from .backend import Backend
from .control import (
    MODES,
    STRATEGIES,
    BudgetPolicy,
    ForcingPlan,
    GenerationRecord,
    assemble_prompt,
    run_with_budget,
)
from .datasets import FORMATS, BenchmarkItem, format_choice_prompt, load_dataset
from .errors import ConfigurationError, ExtractionFailure, UndefinedComplianceError
from .extraction import (
    EXTRACTORS,
    extract_choice_answer,
    extract_numeric_answer,
    scoring_text,
)
from .mixing import compliance as language_compliance

NUMERIC_TOLERANCE = 1e-6


@dataclass(frozen=True)
class RunConfig:
    dataset_path: str
    output_dir: str
    budgets: tuple[int, ...]
    dataset_format: str = "mgsm"
    languages: tuple[str, ...] = ()
    forcing_pairs: tuple[tuple[str, str], ...] = ()
    strategy: str = "none"
    mode: str = "truncate"
    wait_count: int = 1
    model_profile: str = DEFAULT_PROFILE
    model_id: str = "local"
    workers: int = 4
    extractor: str = "rule_based"
    base_system: str = ""
    language_assets_path: str = ""
    model_profiles_path: str = ""

    def validate(self) -> None:
        if not self.budgets:
            raise ConfigurationError("budget sweep is empty")
        if any(b <= 0 for b in self.budgets):
            raise ConfigurationError("budgets must be positive")
        if self.dataset_format not in FORMATS:
            raise ConfigurationError(f"unknown dataset format {self.dataset_format!r}")
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(f"unknown strategy {self.strategy!r}")
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if self.extractor not in EXTRACTORS:
            raise ConfigurationError(f"unknown extractor {self.extractor!r}")
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")
        if self.wait_count < 1:
            raise ConfigurationError("wait_count must be at least 1")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = [list(v) if isinstance(v, tuple) else v for v in value]
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, raw: Mapping) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(raw)
        if "budgets" in kwargs:
            kwargs["budgets"] = tuple(int(b) for b in kwargs["budgets"])
        if "languages" in kwargs:
            kwargs["languages"] = tuple(kwargs["languages"])
        if "forcing_pairs" in kwargs:
            kwargs["forcing_pairs"] = tuple(
                (str(q), str(r)) for q, r in kwargs["forcing_pairs"]
            )
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigurationError(f"bad run config: {exc}") from exc


@dataclass(frozen=True)
class ScoreRow:
    cell: str
    item_id: str
    budget: int
    query_language: str
    reasoning_language: str
    strategy: str
    correct: bool
    extracted: float | str | None
    thinking_token_count: int
    compliance: float | None = None
    failed: bool = False
    failure: str = ""
    flags: tuple[str, ...] = ()
    domain_tag: str = ""
    culture_tag: str = ""

    def validate(self) -> None:
        if self.correct and self.extracted is None:
            raise ConfigurationError("correct row lacks an extracted answer")

    def to_dict(self) -> dict:
        return {
            "cell": self.cell,
            "item_id": self.item_id,
            "budget": self.budget,
            "query_language": self.query_language,
            "reasoning_language": self.reasoning_language,
            "strategy": self.strategy,
            "correct": self.correct,
            "extracted": self.extracted,
            "thinking_token_count": self.thinking_token_count,
            "compliance": self.compliance,
            "failed": self.failed,
            "failure": self.failure,
            "flags": list(self.flags),
            "domain_tag": self.domain_tag,
            "culture_tag": self.culture_tag,
        }


@dataclass(frozen=True)
class Cell:
    item: BenchmarkItem
    budget: int
    query_language: str
    reasoning_language: str
    strategy: str

    @property
    def key(self) -> str:
        payload = json.dumps(
            [
                self.item.item_id,
                self.budget,
                self.query_language,
                self.reasoning_language,
                self.strategy,
            ],
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class RunResult:
    run_dir: Path
    summary: dict
    executed: int
    skipped: int

    @property
    def accuracy(self) -> float:
        return self.summary["accuracy"]["overall"]


def numeric_match(extracted: float, gold: float) -> bool:
    if float(gold).is_integer():
        return extracted == gold
    return abs(extracted - gold) <= NUMERIC_TOLERANCE


def read_jsonl(path: Path) -> list[dict]:
    """Run-dir readback. A torn final line from an interrupted writer is
    dropped, not fatal."""
    if not path.exists():
        return []
    rows = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError:
            continue
    return rows


def build_summary(score_rows: Iterable[Mapping]) -> dict:
    latest: dict[str, Mapping] = {}
    for row in score_rows:
        latest[row["cell"]] = row
    rows = sorted(
        latest.values(),
        key=lambda r: (
            r["budget"],
            r["query_language"],
            r["reasoning_language"],
            r["strategy"],
            r["item_id"],
        ),
    )
    if not rows:
        return {
            "accuracy": {"overall": None, "cells": [], "by_query_language": {},
                         "by_reasoning_language": {}},
            "counts": {"scored": 0},
            "failures": {"backend_error": 0, "extraction_failure": 0,
                         "empty_answer": 0},
        }

    def aggregate(group: list[Mapping]) -> dict:
        out = {
            "accuracy": fmean(1.0 if r["correct"] else 0.0 for r in group),
            "count": len(group),
            "avg_thinking_tokens": fmean(
                r["thinking_token_count"] for r in group
            ),
        }
        compliances = [r["compliance"] for r in group if r["compliance"] is not None]
        out["avg_compliance"] = fmean(compliances) if compliances else None
        return out

    groups: dict[tuple, list[Mapping]] = {}
    for row in rows:
        key = (
            row["budget"],
            row["query_language"],
            row["reasoning_language"],
            row["strategy"],
        )
        groups.setdefault(key, []).append(row)
    cells = []
    for (budget, query, reasoning, strategy), group in sorted(groups.items()):
        entry = {
            "budget": budget,
            "query_language": query,
            "reasoning_language": reasoning,
            "strategy": strategy,
        }
        entry.update(aggregate(group))
        cells.append(entry)

    def by_key(key: str) -> dict:
        buckets: dict[str, list[Mapping]] = {}
        for row in rows:
            buckets.setdefault(row[key], []).append(row)
        return {value: aggregate(group) for value, group in sorted(buckets.items())}

    return {
        "accuracy": {
            "overall": fmean(1.0 if r["correct"] else 0.0 for r in rows),
            "cells": cells,
            "by_query_language": by_key("query_language"),
            "by_reasoning_language": by_key("reasoning_language"),
        },
        "counts": {"scored": len(rows)},
        "failures": {
            "backend_error": sum(
                1 for r in rows if str(r.get("failure", "")).startswith("backend_error")
            ),
            "extraction_failure": sum(
                1 for r in rows if "extraction_failure" in r.get("flags", ())
            ),
            "empty_answer": sum(
                1 for r in rows if r.get("failure") == "empty_answer"
            ),
        },
    }


def score_record(
    cell: Cell,
    record: GenerationRecord,
    *,
    extractor: str,
    extractor_backend: Backend | None,
    reasoning_language: str,
    allow_latin: bool = True,
) -> ScoreRow:
    item = cell.item
    flags: list[str] = []
    extracted: float | str | None = None
    correct = False
    if not record.failed or record.full_thinking.strip():
        text = scoring_text(record)
        try:
            if item.gold_number is not None:
                extracted = extract_numeric_answer(text, item.language)
                correct = numeric_match(extracted, item.gold_number)
            else:
                result = extract_choice_answer(
                    text,
                    item.options_dict,
                    extractor,
                    question=item.prompt_text,
                    backend=extractor_backend,
                )
                extracted = result.letter
                flags.extend(result.flags)
                correct = extracted == item.gold_choice
        except ExtractionFailure:
            flags.append("extraction_failure")
    comp: float | None = None
    try:
        comp = language_compliance(
            record, reasoning_language, allow_latin=allow_latin
        )
    except UndefinedComplianceError:
        flags.append("compliance_undefined")
    row = ScoreRow(
        cell=cell.key,
        item_id=item.item_id,
        budget=cell.budget,
        query_language=cell.query_language,
        reasoning_language=cell.reasoning_language,
        strategy=cell.strategy,
        correct=correct,
        extracted=extracted,
        thinking_token_count=record.thinking_token_count,
        compliance=comp,
        failed=record.failed,
        failure=record.failure_reason,
        flags=tuple(flags),
        domain_tag=item.domain_tag,
        culture_tag=item.culture_tag,
    )
    row.validate()
    return row


def plan_cells(config: RunConfig, items: list[BenchmarkItem]) -> list[Cell]:
    languages = set(config.languages) if config.languages else {
        item.language for item in items
    }
    pairs = list(config.forcing_pairs) or [(lang, lang) for lang in sorted(languages)]
    cells = []
    for item in items:
        if item.language not in languages:
            continue
        for budget in config.budgets:
            for query, reasoning in pairs:
                if query != item.language:
                    continue
                cells.append(
                    Cell(item, budget, query, reasoning, config.strategy)
                )
    return cells


def run_eval(
    config: RunConfig,
    backend: Backend,
    extractor_backend: Backend | None = None,
) -> RunResult:
    config.validate()
    assets = load_language_assets(config.language_assets_path or None)
    profile = get_profile(
        config.model_profile, config.model_profiles_path or None
    )
    for _, reasoning in config.forcing_pairs:
        if reasoning not in assets.languages:
            raise ConfigurationError(
                f"reasoning language {reasoning!r} has no language assets"
            )
    if config.extractor == "external_llm" and extractor_backend is None:
        extractor_backend = backend

    items = load_dataset(config.dataset_path, config.dataset_format)
    cells = plan_cells(config, items)
    if not cells:
        raise ConfigurationError("grid is empty: no item matches the config")

    run_dir = Path(config.output_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(
        json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )

    manifest_path = run_dir / "manifest.jsonl"
    records_path = run_dir / "records.jsonl"
    scores_path = run_dir / "scores.jsonl"
    completed = {
        row["cell"]: row.get("status", "ok")
        for row in read_jsonl(manifest_path)
    }
    todo = [
        cell
        for cell in cells
        if completed.get(cell.key) != "ok"
    ]
    skipped = len(cells) - len(todo)

    def execute(cell: Cell) -> tuple[Cell, GenerationRecord, ScoreRow]:
        policy = BudgetPolicy(
            mode=config.mode,
            max_thinking_tokens=cell.budget,
            end_of_thinking_delimiter=profile.end_of_thinking_delimiter,
            answer_trigger=profile.answer_trigger,
            wait_count=config.wait_count,
        )
        plan = ForcingPlan(cell.strategy, cell.reasoning_language, assets)
        question = (
            format_choice_prompt(cell.item)
            if cell.item.gold_choice is not None
            else cell.item.prompt_text
        )
        request = assemble_prompt(
            question,
            plan,
            base_system=config.base_system or None,
            model_id=config.model_id,
            request_id=cell.key,
        )
        record = run_with_budget(
            request,
            policy,
            backend,
            plan,
            question_id=cell.item.item_id,
            query_language=cell.query_language,
            question_text=question,
        )
        row = score_record(
            cell,
            record,
            extractor=config.extractor,
            extractor_backend=extractor_backend,
            reasoning_language=cell.reasoning_language,
        )
        return cell, record, row

    executed = 0
    with (
        open(records_path, "a", encoding="utf-8") as records_f,
        open(scores_path, "a", encoding="utf-8") as scores_f,
        open(manifest_path, "a", encoding="utf-8") as manifest_f,
    ):
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            futures = {pool.submit(execute, cell): cell for cell in todo}
            for future in as_completed(futures):
                cell, record, row = future.result()
                record_line = record.to_dict()
                record_line["cell"] = cell.key
                records_f.write(
                    json.dumps(record_line, ensure_ascii=False, sort_keys=True) + "\n"
                )
                scores_f.write(
                    json.dumps(row.to_dict(), ensure_ascii=False, sort_keys=True)
                    + "\n"
                )
                status = (
                    "backend_error"
                    if row.failure.startswith("backend_error")
                    else "ok"
                )
                manifest_f.write(
                    json.dumps({"cell": cell.key, "status": status}) + "\n"
                )
                for f in (records_f, scores_f, manifest_f):
                    f.flush()
                executed += 1

    summary = build_summary(read_jsonl(scores_path))
    (run_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return RunResult(run_dir=run_dir, summary=summary, executed=executed, skipped=skipped)
