"""Train/eval n-gram overlap screening."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from crossthink.contamination import (
    ngram_overlap_check,
    ngrams,
    overlap_tokens,
)

FIXTURES = Path(__file__).parent / "data"


def test_tokenizer_splits_on_punctuation_and_lowercases():
    assert overlap_tokens("Maya has 18 apples, right?!") == [
        "maya",
        "has",
        "18",
        "apples",
        "right",
    ]


def test_tokenizer_splits_underscores():
    assert overlap_tokens("snake_case_word") == ["snake", "case", "word"]


def test_ngrams_window():
    assert ngrams(["a", "b", "c", "d"], 3) == [("a", "b", "c"), ("b", "c", "d")]
    assert ngrams(["a", "b"], 3) == []
    with pytest.raises(ValueError):
        ngrams(["a"], 0)


def test_collision_reports_shared_gram():
    train = {"t1": "one two three four five six seven eight nine"}
    evals = {"e1": "zero one two three four five six seven eight"}
    hits = ngram_overlap_check(train, evals, n=8)
    assert hits == [("t1", "e1", "one two three four five six seven eight")]


def test_seven_shared_tokens_is_not_a_hit():
    train = {"t1": "one two three four five six seven END"}
    evals = {"e1": "one two three four five six seven STOP"}
    assert ngram_overlap_check(train, evals, n=8) == []


def test_punctuation_does_not_mask_overlap():
    train = {"t1": "He said: one, two, three; four! five? six... seven -- eight."}
    evals = {"e1": "ONE TWO three four FIVE six seven eight"}
    assert len(ngram_overlap_check(train, evals, n=8)) == 1


def test_one_row_per_pair():
    train = {"t1": "a b c d e f g h i j k l"}
    evals = {"e1": "a b c d e f g h i j k l"}
    hits = ngram_overlap_check(train, evals, n=8)
    assert len(hits) == 1
    assert hits[0][:2] == ("t1", "e1")


def test_sequence_inputs_get_positional_ids():
    hits = ngram_overlap_check(
        ["one two three four five six seven eight"],
        ["one two three four five six seven eight"],
        n=8,
    )
    assert hits[0][:2] == ("train-0", "eval-0")


def brute_force_pairs(train, evals, n):
    out = set()
    for train_id, train_text in train.items():
        train_grams = set(ngrams(overlap_tokens(train_text), n))
        for eval_id, eval_text in evals.items():
            if train_grams & set(ngrams(overlap_tokens(eval_text), n)):
                out.add((train_id, eval_id))
    return out


def test_agrees_with_all_pairs_oracle():
    rng = random.Random(7)
    vocab = [f"w{i}" for i in range(12)]

    def doc():
        return " ".join(rng.choice(vocab) for _ in range(rng.randint(6, 40)))

    train = {f"t{i}": doc() for i in range(40)}
    evals = {f"e{i}": doc() for i in range(40)}
    for n in (3, 5, 8):
        hits = ngram_overlap_check(train, evals, n=n)
        assert {(t, e) for t, e, _ in hits} == brute_force_pairs(train, evals, n)
        for train_id, eval_id, gram_text in hits:
            gram = tuple(gram_text.split())
            assert gram in set(ngrams(overlap_tokens(train[train_id]), n))
            assert gram in set(ngrams(overlap_tokens(evals[eval_id]), n))


def test_shipped_fixtures_do_not_overlap():
    train = {}
    for line in (FIXTURES / "pretrain_sample.jsonl").read_text().splitlines():
        row = json.loads(line)
        train[row["id"]] = row["text"]
    evals = {}
    for line in (FIXTURES / "mgsm_en_250.jsonl").read_text().splitlines():
        row = json.loads(line)
        evals[row["item_id"]] = row["question"]
    assert len(train) == 8
    assert len(evals) == 250
    assert ngram_overlap_check(train, evals) == []
