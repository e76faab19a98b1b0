"""Benchmark item loading from user-supplied JSONL files.

Three accepted schemas (one JSON object per line):

* ``mgsm`` — ``{"question", "answer_number", "language", ["item_id"]}``
* ``mmlu_choice`` — ``{"question", "options": {"A"..."D"}, "answer",
  "language", ["domain_tag"], ["culture_tag"], ["item_id"]}``
* ``generic_jsonl`` — ``{"prompt", "language", exactly one of
  "gold_number" / "gold_choice", ["options"], ["domain_tag"],
  ["culture_tag"], ["item_id"]}``

Items get stable fallback ids ``{language}-{line:04d}`` when the file does
not provide one. No dataset ships with the package; fixtures under tests/
are hand-written stand-ins, not redistributions.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import DatasetError

FORMATS = ("mgsm", "mmlu_choice", "generic_jsonl")
CHOICES = ("A", "B", "C", "D")
DOMAIN_TAGS = ("STEM", "business", "humanities", "medical", "social sciences", "other")
CULTURE_TAGS = ("agnostic", "specific")

_ISO_639_1 = re.compile(r"^[a-z]{2}$")


@dataclass(frozen=True)
class BenchmarkItem:
    item_id: str
    language: str
    prompt_text: str
    gold_number: float | None = None
    gold_choice: str | None = None
    options: tuple[tuple[str, str], ...] = ()
    domain_tag: str = ""
    culture_tag: str = ""

    def validate(self) -> None:
        if not self.item_id:
            raise DatasetError("item without id")
        if not _ISO_639_1.match(self.language):
            raise DatasetError(
                f"{self.item_id}: language {self.language!r} is not ISO-639-1"
            )
        if not self.prompt_text.strip():
            raise DatasetError(f"{self.item_id}: empty prompt")
        has_number = self.gold_number is not None
        has_choice = self.gold_choice is not None
        if has_number == has_choice:
            raise DatasetError(
                f"{self.item_id}: needs exactly one of numeric or choice gold"
            )
        if has_choice:
            if self.gold_choice not in CHOICES:
                raise DatasetError(
                    f"{self.item_id}: gold choice {self.gold_choice!r} not in A-D"
                )
            if tuple(k for k, _ in self.options) != CHOICES:
                raise DatasetError(f"{self.item_id}: choice item needs options A-D")
        if self.domain_tag and self.domain_tag not in DOMAIN_TAGS:
            raise DatasetError(
                f"{self.item_id}: unknown domain tag {self.domain_tag!r}"
            )
        if self.culture_tag and self.culture_tag not in CULTURE_TAGS:
            raise DatasetError(
                f"{self.item_id}: unknown culture tag {self.culture_tag!r}"
            )

    @property
    def options_dict(self) -> dict[str, str]:
        return dict(self.options)


def _normalize_options(raw, where: str) -> tuple[tuple[str, str], ...]:
    if isinstance(raw, dict):
        pairs = tuple((k, str(v)) for k, v in raw.items())
    elif isinstance(raw, list) and len(raw) == 4:
        pairs = tuple(zip(CHOICES, (str(v) for v in raw)))
    else:
        raise DatasetError(f"{where}: options must be an A-D mapping or 4-item list")
    if tuple(k for k, _ in pairs) != CHOICES:
        raise DatasetError(f"{where}: options must cover exactly A, B, C, D in order")
    return pairs


def _row_to_item(row: dict, fmt: str, where: str, line_no: int) -> BenchmarkItem:
    language = str(row.get("language", "")).lower()
    item_id = str(row.get("item_id") or f"{language or 'xx'}-{line_no:04d}")
    if fmt == "mgsm":
        if "question" not in row or "answer_number" not in row:
            raise DatasetError(f"{where}: mgsm rows need question and answer_number")
        return BenchmarkItem(
            item_id=item_id,
            language=language,
            prompt_text=str(row["question"]),
            gold_number=float(row["answer_number"]),
        )
    if fmt == "mmlu_choice":
        for key in ("question", "options", "answer"):
            if key not in row:
                raise DatasetError(f"{where}: mmlu_choice rows need {key!r}")
        return BenchmarkItem(
            item_id=item_id,
            language=language,
            prompt_text=str(row["question"]),
            gold_choice=str(row["answer"]).strip().upper(),
            options=_normalize_options(row["options"], where),
            domain_tag=str(row.get("domain_tag", "")),
            culture_tag=str(row.get("culture_tag", "")),
        )
    # generic_jsonl
    prompt = row.get("prompt", row.get("question"))
    if prompt is None:
        raise DatasetError(f"{where}: generic rows need prompt")
    gold_number = row.get("gold_number")
    gold_choice = row.get("gold_choice")
    return BenchmarkItem(
        item_id=item_id,
        language=language,
        prompt_text=str(prompt),
        gold_number=None if gold_number is None else float(gold_number),
        gold_choice=None if gold_choice is None else str(gold_choice).strip().upper(),
        options=_normalize_options(row["options"], where) if "options" in row else (),
        domain_tag=str(row.get("domain_tag", "")),
        culture_tag=str(row.get("culture_tag", "")),
    )


DEFAULT_CHOICE_INSTRUCTION = "Answer with a single letter: A, B, C, or D."


def render_options(options: dict[str, str]) -> str:
    return "\n".join(f"{letter}. {options[letter]}" for letter in CHOICES)


def format_choice_prompt(
    item: BenchmarkItem, instruction: str = DEFAULT_CHOICE_INSTRUCTION
) -> str:
    """Question text for a choice item: options as lettered lines, then the
    answer-format instruction."""
    if item.gold_choice is None:
        raise DatasetError(f"{item.item_id}: not a choice item")
    return f"{item.prompt_text}\n{render_options(item.options_dict)}\n{instruction}"


def load_dataset(path: str | Path, fmt: str) -> list[BenchmarkItem]:
    if fmt not in FORMATS:
        raise DatasetError(f"unknown dataset format {fmt!r}; have {FORMATS}")
    file = Path(path)
    try:
        lines = file.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DatasetError(f"cannot read {file}: {exc}") from exc
    items: list[BenchmarkItem] = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        where = f"{file.name}:{line_no}"
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{where}: invalid JSON ({exc.msg})") from exc
        if not isinstance(row, dict):
            raise DatasetError(f"{where}: row is not an object")
        try:
            item = _row_to_item(row, fmt, where, line_no)
        except (TypeError, ValueError) as exc:
            raise DatasetError(f"{where}: {exc}") from exc
        try:
            item.validate()
        except DatasetError as exc:
            raise DatasetError(f"{where}: {exc}") from exc
        items.append(item)
    if not items:
        raise DatasetError(f"{file}: no items found")
    return items
