"""Numeric and choice answer extraction."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crossthink.backend import Backend, StreamEvent
from crossthink.control import GenerationRecord
from crossthink.errors import ConfigurationError, ExtractionFailure
from crossthink.extraction import (
    ChoiceExtraction,
    denormalize_digits,
    extract_choice_answer,
    extract_numeric_answer,
    normalize_digits,
    scoring_text,
)
from crossthink.mock_backend import MockBackend, ScriptEntry

OPTIONS = {"A": "Paris", "B": "London", "C": "Madrid", "D": "Rome"}


@pytest.mark.parametrize(
    ("text", "value"),
    [
        ("The answer is 42.", 42.0),
        ("So the total comes to 3.5 rolls.", 3.5),
        ("First I got 5, but the correct result is 7", 7.0),
        ("That is 1,234,567 grains.", 1234567.0),
        ("উত্তর: ৪২", 42.0),
        ("సమాధానం ౧౨", 12.0),
        ("คำตอบคือ ๙๕", 95.0),
        ("The temperature drops to -4 degrees.", -4.0),
        ("Pick a number in 2-3, say the larger.", 3.0),
        ("Roughly 50% of them.", 50.0),
    ],
)
def test_numeric_extraction(text, value):
    assert extract_numeric_answer(text) == value


def test_numeric_extraction_last_number_wins_across_scripts():
    assert extract_numeric_answer("৩টি আপেল এবং ৪টি কমলা, মোট ৭") == 7.0


def test_no_number_raises():
    with pytest.raises(ExtractionFailure):
        extract_numeric_answer("I cannot work this out.")


@pytest.mark.parametrize("language", ["bn", "te", "th"])
@given(digits=st.text(alphabet="0123456789", min_size=1, max_size=20))
def test_digit_normalization_is_a_bijection(language, digits):
    native = denormalize_digits(digits, language)
    assert native != digits
    assert normalize_digits(native) == digits


def test_denormalize_leaves_other_languages_alone():
    assert denormalize_digits("42", "ja") == "42"


def make_record(thinking: str, answer: str) -> GenerationRecord:
    return GenerationRecord(
        request_id="r",
        question_id="q",
        query_language="en",
        question_text="?",
        strategy="none",
        reasoning_language="en",
        mode="truncate",
        max_thinking_tokens=100,
        wait_token="Wait",
        wait_count=1,
        thinking_text=thinking,
        answer_text=answer,
    )


def test_scoring_text_prefers_answer_segment():
    record = make_record("thinking about 5", "the answer is 6")
    assert scoring_text(record) == "the answer is 6"


def test_scoring_text_falls_back_to_thinking_tail():
    record = make_record("x" * 300 + " final guess 9", "   ")
    tail = scoring_text(record)
    assert len(tail) == 200
    assert tail.endswith("final guess 9")


@pytest.mark.parametrize(
    ("text", "letter"),
    [
        ("I believe the answer is B", "B"),
        ("Answer: (C)", "C"),
        ("The answer is A. No wait, the answer is D.", "D"),
        ("(B) fits all the constraints.", "B"),
        ("c.", "C"),
        ("It has to be Madrid, nothing else fits.", "C"),
    ],
)
def test_rule_based_choice(text, letter):
    result = extract_choice_answer(text, OPTIONS)
    assert result == ChoiceExtraction(letter, "rule_based")


def test_rule_based_rejects_glued_letters():
    with pytest.raises(ExtractionFailure):
        extract_choice_answer("BC", OPTIONS)


def test_rule_based_rejects_ambiguous_option_text():
    with pytest.raises(ExtractionFailure):
        extract_choice_answer("Either Paris or London.", OPTIONS)


def test_rule_based_rejects_plain_prose():
    with pytest.raises(ExtractionFailure):
        extract_choice_answer("A capital city is required here.", OPTIONS)


def test_choice_requires_four_options():
    with pytest.raises(ConfigurationError):
        extract_choice_answer("B", {"A": "x", "B": "y"})


def test_unknown_extractor_rejected():
    with pytest.raises(ConfigurationError, match="unknown extractor"):
        extract_choice_answer("B", OPTIONS, "regex")


def test_external_extractor_requires_backend():
    with pytest.raises(ConfigurationError, match="backend"):
        extract_choice_answer("B", OPTIONS, "external_llm")


class RecordingBackend(Backend):
    """Returns a canned letter and keeps the request for inspection."""

    def __init__(self, reply: str):
        self.reply = reply
        self.requests = []

    def generate_stream(self, request):
        self.requests.append(request)
        return iter([StreamEvent(self.reply, 0, finish="stop")])


def test_external_extractor_prompt_shape():
    backend = RecordingBackend("B")
    result = extract_choice_answer(
        "After much thought: London.",
        OPTIONS,
        "external_llm",
        question="Which city hosts the festival?",
        backend=backend,
        model_id="extractor",
    )
    assert result == ChoiceExtraction("B", "external_llm")
    (request,) = backend.requests
    assert request.max_new_tokens == 2
    system, user = request.messages
    assert system.role == "system"
    assert "extract the answer choice from the Response field" in system.content
    assert "Do not attempt to answer the question" in system.content
    assert user.content.startswith(
        "Your task is to extract the answer (A, B, C, or D)"
    )
    assert "Question: Which city hosts the festival?" in user.content
    assert "Answer choices:\nA. Paris\nB. London\nC. Madrid\nD. Rome" in user.content
    assert user.content.endswith("Response: After much thought: London.")


def test_external_extractor_accepts_trailing_period():
    backend = RecordingBackend(" d.")
    result = extract_choice_answer(
        "x", OPTIONS, "external_llm", backend=backend
    )
    assert result.letter == "D"


def test_external_extractor_rejects_multi_letter_reply():
    backend = RecordingBackend("BC")
    with pytest.raises(ExtractionFailure, match="BC"):
        extract_choice_answer("x", OPTIONS, "external_llm", backend=backend)


def test_external_extractor_falls_back_on_transport_failure():
    backend = MockBackend(
        [ScriptEntry(tokens=("A",), disconnect_after=0)],
        delimiter="<|im_start|>answer",
    )
    result = extract_choice_answer(
        "The answer is D",
        OPTIONS,
        "external_llm",
        backend=backend,
        question="q",
    )
    assert result.letter == "D"
    assert result.method == "rule_based"
    assert result.flags == ("extractor_fallback",)
