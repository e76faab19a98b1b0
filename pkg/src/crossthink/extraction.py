"""Answer extraction from generated text.

Numeric extraction normalizes Bengali, Telugu, and Thai digits to ASCII,
drops comma thousands separators, and takes the last number in the text.
Choice extraction is either rule based (explicit letter patterns, then a
unique option-text match) or delegated to an external model with a fixed
two-field prompt; a transport failure there falls back to the rules and
flags the row.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .backend import Backend, InferenceRequest, Message
from .datasets import CHOICES, render_options
from .errors import (
    ConfigurationError,
    ExtractionFailure,
    GenerationTimeout,
    TransportError,
)

_DIGIT_SCRIPTS = {
    "bn": "০১২৩৪৫৬৭৮৯",
    "te": "౦౧౨౩౪౫౬౭౮౯",
    "th": "๐๑๒๓๔๕๖๗๘๙",
}

_TO_ASCII = str.maketrans(
    {ch: str(i) for digits in _DIGIT_SCRIPTS.values() for i, ch in enumerate(digits)}
)

# Minus signs only open a number; a digit right before the hyphen means a
# range or hyphenation, not a negative.
_NUMBER = re.compile(r"(?<!\d)-?\d+(?:\.\d+)?")
_THOUSANDS = re.compile(r"(?<=\d),(?=\d)")

FALLBACK_WINDOW = 200


def normalize_digits(text: str) -> str:
    """Map Bengali, Telugu, and Thai digits onto ASCII 0-9."""
    return text.translate(_TO_ASCII)


def denormalize_digits(text: str, language: str) -> str:
    digits = _DIGIT_SCRIPTS.get(language)
    if digits is None:
        return text
    return text.translate(str.maketrans({str(i): ch for i, ch in enumerate(digits)}))


def extract_numeric_answer(answer_text: str, language: str = "en") -> float:
    normalized = _THOUSANDS.sub("", normalize_digits(answer_text))
    matches = _NUMBER.findall(normalized)
    if not matches:
        raise ExtractionFailure(f"no number in answer ({language})")
    return float(matches[-1])


def scoring_text(record) -> str:
    """Answer segment of a record, or the thinking tail when it is empty."""
    answer = record.answer_text.strip()
    if answer:
        return answer
    return record.full_thinking[-FALLBACK_WINDOW:]


EXTRACTORS = ("rule_based", "external_llm")

_EXTRACTOR_SYSTEM = (
    "Your task is to extract the answer choice from the Response field. "
    "Do not attempt to answer the question in the Question field yourself."
)
_EXTRACTOR_TASK = (
    "Your task is to extract the answer (A, B, C, or D) from the generated "
    "response based on the question and the option choices.\n\n"
    "Question: {question}\n"
    "Answer choices:\n{answer_options}\n\n"
    "Response: {response}"
)

# Ordered from most to least explicit; the last match of the first pattern
# that fires anywhere wins.
_ANSWER_CONTEXT = re.compile(
    r"answer\s*(?:is|:|=)?\s*\(?([ABCD])\)?(?![A-Za-z])", re.IGNORECASE
)
_MARKED_LETTER = re.compile(r"(?<![A-Za-z0-9])([ABCD])[.)](?![A-Za-z0-9])")


@dataclass(frozen=True)
class ChoiceExtraction:
    letter: str
    method: str
    flags: tuple[str, ...] = ()


def _rule_based(answer_text: str, options: dict[str, str]) -> str:
    context_hits = _ANSWER_CONTEXT.findall(answer_text)
    if context_hits:
        return context_hits[-1].upper()
    marked = _MARKED_LETTER.findall(answer_text)
    if marked:
        return marked[-1]
    bare = answer_text.strip().rstrip(".").upper()
    if bare in CHOICES:
        return bare
    lowered = answer_text.lower()
    text_hits = [
        letter
        for letter in CHOICES
        if options[letter].strip() and options[letter].strip().lower() in lowered
    ]
    if len(text_hits) == 1:
        return text_hits[0]
    raise ExtractionFailure("no unambiguous choice letter in answer")


def _llm_based(
    answer_text: str,
    options: dict[str, str],
    question: str,
    backend: Backend,
    model_id: str,
) -> str:
    request = InferenceRequest(
        model_id=model_id,
        messages=(
            Message("system", _EXTRACTOR_SYSTEM),
            Message(
                "user",
                _EXTRACTOR_TASK.format(
                    question=question,
                    answer_options=render_options(options),
                    response=answer_text,
                ),
            ),
        ),
        max_new_tokens=2,
    )
    reply = "".join(event.token_text for event in backend.generate_stream(request))
    letter = reply.strip().rstrip(".").upper()
    if letter not in CHOICES:
        raise ExtractionFailure(f"extractor model returned {reply.strip()!r}")
    return letter


def extract_choice_answer(
    answer_text: str,
    options: dict[str, str],
    extractor: str = "rule_based",
    *,
    question: str = "",
    backend: Backend | None = None,
    model_id: str = "",
) -> ChoiceExtraction:
    if tuple(options.keys()) != CHOICES:
        raise ConfigurationError("choice extraction needs exactly options A-D")
    if extractor not in EXTRACTORS:
        raise ConfigurationError(
            f"unknown extractor {extractor!r}; have {EXTRACTORS}"
        )
    if extractor == "rule_based":
        return ChoiceExtraction(_rule_based(answer_text, options), "rule_based")
    if backend is None:
        raise ConfigurationError("external_llm extractor needs a backend")
    try:
        letter = _llm_based(answer_text, options, question, backend, model_id)
    except (TransportError, GenerationTimeout):
        letter = _rule_based(answer_text, options)
        return ChoiceExtraction(letter, "rule_based", flags=("extractor_fallback",))
    return ChoiceExtraction(letter, "external_llm")
