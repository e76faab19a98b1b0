"""Sentence segmentation, code-switch classification, and compliance.

The decision procedure per sentence, against the response's matrix language:

a. sentence-level language differs from the matrix -> intersentential;
b. mixed word labels with every foreign run inside balanced quotation
   marks -> quote_and_think;
c. mixed word labels without that quoting -> intrasentential, subdivided
   into extract_and_explain (the run appears verbatim in the source
   question), insertional (a short run of at most two tokens), or
   clause_level (anything longer);
d. otherwise matrix_only.

Word-level mixing analysis trusts script boundaries. Latin-script target
languages share too much surface vocabulary for reliable per-word calls, so
they are rejected unless explicitly overridden.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .control import GenerationRecord
from .errors import (
    AnalysisError,
    ConfigurationError,
    UndefinedComplianceError,
    UndeterminedLanguageError,
)
from .langid import (
    LATIN_LANGUAGES,
    NEUTRAL,
    UNKNOWN,
    Detector,
    LanguageSpan,
    detect_dominant_language,
    label_words,
)

CATEGORIES = ("matrix_only", "quote_and_think", "intersentential", "intrasentential")
INTRA_SUBCATEGORIES = ("extract_and_explain", "insertional", "clause_level")

# Open/close quote pairs recognized when deciding quote_and_think. ASCII
# double and single quotes pair up sequentially; unbalanced quotes are
# treated as absent.
_QUOTE_PAIRS = {
    "“": "”",  # curly double
    "「": "」",  # corner
    "『": "』",  # white corner
    "«": "»",  # guillemets
}
_SYMMETRIC_QUOTES = ('"', "'")


@dataclass(frozen=True)
class SentenceAnnotation:
    sentence_text: str
    sentence_language: str
    word_labels: tuple[LanguageSpan, ...]
    category: str
    intra_subcategory: str | None = None

    def to_dict(self) -> dict:
        return {
            "sentence_text": self.sentence_text,
            "sentence_language": self.sentence_language,
            "category": self.category,
            "intra_subcategory": self.intra_subcategory,
            "word_labels": [
                {
                    "start": s.start,
                    "end": s.end,
                    "language": s.detected_language,
                    "confidence": s.confidence,
                }
                for s in self.word_labels
            ],
        }


@dataclass
class MixingReport:
    dominant_language: str
    proportions: dict[str, float]
    sample_count: int
    sentence_count: int
    dominant_distribution: dict[str, float]
    excluded: list[tuple[str, str]] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "dominant_language": self.dominant_language,
            "proportions": dict(self.proportions),
            "sample_count": self.sample_count,
            "sentence_count": self.sentence_count,
            "dominant_distribution": dict(self.dominant_distribution),
            "excluded": [list(pair) for pair in self.excluded],
            "flags": list(self.flags),
            "token_unit": "whitespace/script-boundary words",
        }


# --- Sentence segmentation ---------------------------------------------------

# Latin-rule terminators include the CJK set: an embedded Japanese or
# Chinese sentence inside a mostly-Latin response still ends at its 。
_LATIN_TERMINATORS = ".!?…।。！？"
_CJK_TERMINATORS = "。！？….!?"
_CLOSERS = "\"'”」』»)】）"

_THAI_PARTICLES = (
    "ครับ",  # khrap
    "ค่ะ",        # kha
    "คะ",              # kha (high)
    "นะ",              # na
    "ล่ะ",        # la
    "แล้ว",  # laeo
    "เลย",        # loei
    "ด้วย",  # duai
    "ก่อน",  # kon
)
_THAI_LENGTH_CAP = 120


def segmentation_rule(language: str) -> tuple[str, bool]:
    """(rule name, is heuristic or fallback) for a language code."""
    if language in ("ja", "zh"):
        return "cjk_terminal_punctuation", False
    if language == "th":
        return "thai_particle_heuristic", True
    if language in ("bn", "de", "en", "es", "fr", "ru", "sw", "te"):
        return "terminal_punctuation", False
    return "generic_terminal_punctuation", True


def _split_terminal(text: str, terminators: str, require_space: bool) -> list[str]:
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            if text[start:i].strip():
                sentences.append(text[start:i])
            start = i + 1
            i += 1
            continue
        if ch in terminators:
            j = i + 1
            while j < n and text[j] in terminators:
                j += 1
            while j < n and text[j] in _CLOSERS:
                j += 1
            if not require_space or j >= n or text[j].isspace():
                if text[start:j].strip():
                    sentences.append(text[start:j])
                start = j
                i = j
                continue
            i = j
            continue
        i += 1
    if text[start:].strip():
        sentences.append(text[start:])
    return [s.strip() for s in sentences]


def _split_thai(text: str) -> list[str]:
    sentences: list[str] = []
    current: list[str] = []
    length = 0
    for chunk in text.split():
        current.append(chunk)
        length += len(chunk) + 1
        if any(chunk.endswith(p) for p in _THAI_PARTICLES) or length >= _THAI_LENGTH_CAP:
            sentences.append(" ".join(current))
            current = []
            length = 0
    if current:
        sentences.append(" ".join(current))
    return sentences


def segment_sentences(text: str, language: str) -> list[str]:
    rule, _ = segmentation_rule(language)
    if rule == "cjk_terminal_punctuation":
        return _split_terminal(text, _CJK_TERMINATORS, require_space=False)
    if rule == "thai_particle_heuristic":
        return _split_thai(text)
    return _split_terminal(text, _LATIN_TERMINATORS, require_space=True)


# --- Quote spans -------------------------------------------------------------

def _letter_adjacent(text: str, idx: int) -> bool:
    before = idx > 0 and text[idx - 1].isalpha()
    after = idx + 1 < len(text) and text[idx + 1].isalpha()
    return before and after


def quote_intervals(text: str) -> list[tuple[int, int]]:
    """Character ranges lying inside balanced quote pairs."""
    intervals: list[tuple[int, int]] = []
    open_stack: dict[str, int] = {}
    for i, ch in enumerate(text):
        if ch in _QUOTE_PAIRS:
            open_stack[_QUOTE_PAIRS[ch]] = i
        elif ch in open_stack:
            intervals.append((open_stack.pop(ch), i))
        elif ch in _SYMMETRIC_QUOTES:
            if ch == "'" and _letter_adjacent(text, i):
                continue  # word-internal apostrophe
            if ch in open_stack:
                intervals.append((open_stack.pop(ch), i))
            else:
                open_stack[ch] = i
    return intervals


# --- Sentence classification -------------------------------------------------

def _foreign_runs(
    labels: list[LanguageSpan], matrix: str
) -> list[list[LanguageSpan]]:
    """Maximal runs of consecutive non-matrix word spans (neutral/unknown
    tokens neither break nor join a run)."""
    runs: list[list[LanguageSpan]] = []
    current: list[LanguageSpan] = []
    for span in labels:
        lang = span.detected_language
        if lang in (NEUTRAL, UNKNOWN):
            continue
        if lang != matrix:
            current.append(span)
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)
    return runs


def classify_sentence(
    sentence: str,
    matrix_language: str,
    source_question: str | None = None,
    *,
    latin_override: bool = False,
    han_hint: str | None = None,
) -> SentenceAnnotation:
    latin_default = matrix_language if matrix_language in LATIN_LANGUAGES else "en"
    labels = label_words(
        sentence,
        latin_default=latin_default,
        han_hint=han_hint,
        per_word_latin=latin_override,
    )
    classifiable = [
        s for s in labels if s.detected_language not in (NEUTRAL, UNKNOWN)
    ]
    if not classifiable:
        return SentenceAnnotation(
            sentence, matrix_language, tuple(labels), "matrix_only"
        )
    intervals = quote_intervals(sentence)
    # The frame decides the sentence language: quoted material is excluded
    # from the vote, so a short matrix frame around a long quote stays home.
    frame = [
        s
        for s in classifiable
        if not any(lo < s.start and s.end <= hi for lo, hi in intervals)
    ]
    counts = Counter(s.detected_language for s in (frame or classifiable))
    # Majority label; the matrix wins ties so borderline sentences stay home.
    sentence_language = max(
        counts, key=lambda l: (counts[l], l == matrix_language, l)
    )
    if sentence_language != matrix_language:
        return SentenceAnnotation(
            sentence, sentence_language, tuple(labels), "intersentential"
        )
    runs = _foreign_runs(labels, matrix_language)
    if not runs:
        return SentenceAnnotation(
            sentence, sentence_language, tuple(labels), "matrix_only"
        )
    if intervals and all(
        any(lo < run[0].start and run[-1].end <= hi for lo, hi in intervals)
        for run in runs
    ):
        return SentenceAnnotation(
            sentence, sentence_language, tuple(labels), "quote_and_think"
        )
    if source_question and all(
        sentence[run[0].start : run[-1].end] in source_question for run in runs
    ):
        sub = "extract_and_explain"
    elif all(len(run) <= 2 for run in runs):
        sub = "insertional"
    else:
        sub = "clause_level"
    return SentenceAnnotation(
        sentence, sentence_language, tuple(labels), "intrasentential", sub
    )


# --- Compliance --------------------------------------------------------------

def compliance(
    record: GenerationRecord | str,
    target_language: str,
    *,
    allow_latin: bool = False,
    scope: str = "thinking",
) -> float:
    """Fraction of classifiable word tokens in the target language.

    Computed over the thinking segment by default (``scope="full"`` adds the
    answer). Neutral tokens never count on either side of the fraction.
    """
    if target_language in LATIN_LANGUAGES and not allow_latin:
        raise ConfigurationError(
            f"target {target_language!r} is Latin-script; per-word calls are "
            "unreliable there, pass allow_latin=True to override"
        )
    if isinstance(record, str):
        text = record
    else:
        text = record.full_thinking
        if scope == "full":
            text = text + "\n" + record.answer_text
    if not text.strip():
        raise UndefinedComplianceError("empty thinking segment")
    labels = label_words(
        text,
        per_word_latin=target_language in LATIN_LANGUAGES,
        han_hint=target_language if target_language in ("ja", "zh") else None,
    )
    classifiable = [
        s for s in labels if s.detected_language not in (NEUTRAL, UNKNOWN)
    ]
    if not classifiable:
        raise UndefinedComplianceError("no classifiable word tokens")
    hits = sum(1 for s in classifiable if s.detected_language == target_language)
    return hits / len(classifiable)


# --- Corpus aggregation ------------------------------------------------------

def analyze_record(
    record: GenerationRecord,
    detector: Detector | None = None,
    *,
    latin_override: bool = False,
) -> tuple[str, list[SentenceAnnotation], list[str]]:
    """(dominant language, sentence annotations, flags) for one record."""
    text = record.full_thinking
    dominant, _ = detect_dominant_language(text, detector)
    rule, heuristic = segmentation_rule(dominant)
    flags = [f"segmentation:{rule}"] if heuristic else []
    han_hint = dominant if dominant in ("ja", "zh") else None
    annotations = [
        classify_sentence(
            sentence,
            dominant,
            source_question=record.question_text or None,
            latin_override=latin_override,
            han_hint=han_hint,
        )
        for sentence in segment_sentences(text, dominant)
    ]
    return dominant, annotations, flags


def analyze_corpus(
    records: list[GenerationRecord],
    detector: Detector | None = None,
    *,
    latin_override: bool = False,
) -> MixingReport:
    if not records:
        raise AnalysisError("cannot analyze an empty corpus")
    category_counts: Counter = Counter()
    dominant_counts: Counter = Counter()
    excluded: list[tuple[str, str]] = []
    flags: set[str] = set()
    sentence_total = 0
    analyzed = 0
    for record in records:
        rid = record.request_id or record.question_id
        try:
            dominant, annotations, record_flags = analyze_record(
                record, detector, latin_override=latin_override
            )
        except (UndeterminedLanguageError, AnalysisError) as exc:
            excluded.append((rid, str(exc)))
            continue
        analyzed += 1
        dominant_counts[dominant] += 1
        flags.update(record_flags)
        for ann in annotations:
            category_counts[ann.category] += 1
            sentence_total += 1
    if analyzed == 0:
        raise AnalysisError("every record was excluded from analysis")
    proportions = {
        cat: (category_counts[cat] / sentence_total if sentence_total else 0.0)
        for cat in CATEGORIES
    }
    dominant_distribution = {
        lang: count / analyzed for lang, count in sorted(dominant_counts.items())
    }
    dominant_language = max(
        dominant_counts, key=lambda l: (dominant_counts[l], l)
    )
    return MixingReport(
        dominant_language=dominant_language,
        proportions=proportions,
        sample_count=analyzed,
        sentence_count=sentence_total,
        dominant_distribution=dominant_distribution,
        excluded=excluded,
        flags=sorted(flags),
    )
