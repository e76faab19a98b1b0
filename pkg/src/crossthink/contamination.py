"""Train/eval overlap screening via shared word n-grams.

Tokenization is deliberately crude and documented: text is lowercased and
split on everything that is not a letter or digit, so punctuation and
whitespace both separate tokens and never appear inside them. Two texts
collide when they share any n consecutive tokens (n=8 by default). The
index keeps one representative n-gram per colliding pair.
"""

from __future__ import annotations

import re
from collections.abc import Mapping, Sequence

_WORD = re.compile(r"[^\W_]+", re.UNICODE)

DEFAULT_N = 8


def overlap_tokens(text: str) -> list[str]:
    return _WORD.findall(text.lower())


def ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    if n <= 0:
        raise ValueError("n must be positive")
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def _as_mapping(texts, prefix: str) -> dict[str, str]:
    if isinstance(texts, Mapping):
        return {str(k): str(v) for k, v in texts.items()}
    return {f"{prefix}-{i}": str(t) for i, t in enumerate(texts)}


def ngram_overlap_check(
    train_texts: Mapping[str, str] | Sequence[str],
    eval_texts: Mapping[str, str] | Sequence[str],
    n: int = DEFAULT_N,
) -> list[tuple[str, str, str]]:
    """Report (train_id, eval_id, shared n-gram) for every colliding pair.

    One row per pair, carrying the first shared n-gram in eval order. Rows
    come out sorted by (train_id, eval_id) so reruns are comparable.
    """
    train = _as_mapping(train_texts, "train")
    evals = _as_mapping(eval_texts, "eval")
    index: dict[tuple[str, ...], list[str]] = {}
    for train_id, text in train.items():
        for gram in ngrams(overlap_tokens(text), n):
            index.setdefault(gram, []).append(train_id)
    hits: dict[tuple[str, str], str] = {}
    for eval_id, text in evals.items():
        for gram in ngrams(overlap_tokens(text), n):
            for train_id in index.get(gram, ()):
                hits.setdefault((train_id, eval_id), " ".join(gram))
    return [
        (train_id, eval_id, gram)
        for (train_id, eval_id), gram in sorted(hits.items())
    ]
