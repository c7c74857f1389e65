"""Text normalization, word n-gram sets, and directional containment.

All text entering the precision gate goes through one pipeline: literal
marker stripping, case folding, whitespace collapse. Tokens are space-split
words with leading/trailing ASCII punctuation removed; n-grams are tuples of
consecutive tokens. Containment is directional: the share of the eval side's
n-grams found in the training side.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence

# Literal substrings removed before case folding. Conversation role tags and
# image placeholders carry no contamination signal and would otherwise inflate
# n-gram overlap between unrelated chat-formatted documents.
DEFAULT_STRIP_LIST: tuple[str, ...] = (
    "<image>",
    "<img>",
    "<IMAGE>",
    "<IMG>",
    "USER:",
    "ASSISTANT:",
    "SYSTEM:",
    "HUMAN:",
    "User:",
    "Assistant:",
    "System:",
    "Human:",
    "user:",
    "assistant:",
    "system:",
    "human:",
)

DEFAULT_N = 4
SHORT_TEXT_N = 3
DEFAULT_SHORT_THRESHOLD = 10

_TOKEN_PUNCT = string.punctuation
# Strip/fold/collapse is iterated to a fixed point so the result is idempotent
# even when configured markers nest or only surface after case folding.
_MAX_PASSES = 16


@dataclass(frozen=True)
class NormalizedText:
    """Canonical text form plus its token stream."""

    text: str
    tokens: tuple[str, ...]

    @property
    def word_count(self) -> int:
        return len(self.tokens)


def _tokenize(collapsed: str) -> tuple[str, ...]:
    return tuple(t for t in (w.strip(_TOKEN_PUNCT) for w in collapsed.split()) if t)


def normalize(raw: str, strip_list: Sequence[str] = DEFAULT_STRIP_LIST) -> NormalizedText:
    """Strip markers, case-fold, collapse whitespace; returns the fixed point."""
    text = raw
    for _ in range(_MAX_PASSES):
        before = text
        for marker in strip_list:
            if marker:
                text = text.replace(marker, " ")
        text = text.lower()
        text = " ".join(text.split())
        if text == before:
            break
    return NormalizedText(text=text, tokens=_tokenize(text))


def qa_concat(question: NormalizedText, answer: NormalizedText) -> NormalizedText:
    """Join question and answer with one space so n-grams span the boundary.

    Empty sides are omitted; word_count is exactly the sum of the parts.
    """
    if not question.text:
        return answer
    if not answer.text:
        return question
    return NormalizedText(
        text=f"{question.text} {answer.text}",
        tokens=question.tokens + answer.tokens,
    )


@dataclass(frozen=True)
class NgramSet:
    """Set of word n-grams drawn from one normalized text."""

    n: int
    grams: frozenset[tuple[str, ...]]
    source_word_count: int

    @property
    def empty(self) -> bool:
        return not self.grams


def pick_n(word_count: int, n_default: int = DEFAULT_N, short_threshold: int = DEFAULT_SHORT_THRESHOLD) -> int:
    """Gram size for a text: drops to 3 below the short-text word threshold."""
    if n_default < SHORT_TEXT_N:
        raise ValueError(f"n_default must be >= {SHORT_TEXT_N}, got {n_default}")
    if short_threshold < n_default:
        raise ValueError(
            f"short_threshold ({short_threshold}) must be >= n_default ({n_default})"
        )
    return SHORT_TEXT_N if word_count < short_threshold else n_default


def ngram_set(
    text: NormalizedText,
    n_default: int = DEFAULT_N,
    short_threshold: int = DEFAULT_SHORT_THRESHOLD,
) -> NgramSet:
    """Build the n-gram set for a text, sizing n by its own word count."""
    n = pick_n(text.word_count, n_default, short_threshold)
    return ngram_set_fixed(text, n)


def ngram_set_fixed(text: NormalizedText, n: int) -> NgramSet:
    """Build an n-gram set at an explicitly chosen n (training side of a pair)."""
    toks = text.tokens
    grams = frozenset(toks[i : i + n] for i in range(len(toks) - n + 1))
    return NgramSet(n=n, grams=grams, source_word_count=len(toks))


def excerpt(
    question: str,
    answer: str,
    strip_list: Sequence[str] = DEFAULT_STRIP_LIST,
    limit: int = 200,
) -> str:
    """Short normalized Q+A rendering for logs and review payloads."""
    text = qa_concat(normalize(question, strip_list), normalize(answer, strip_list)).text
    return text if len(text) <= limit else text[: limit - 3] + "..."


def containment(eval_grams: NgramSet, train_grams: NgramSet) -> float:
    """Directional containment: fraction of eval n-grams present in training.

    Both sides must share n; mismatched sizes are an internal bug, not an
    input condition. An eval side with no grams is ungateable and scores 0.
    """
    if eval_grams.n != train_grams.n:
        raise ValueError(
            f"n-gram size mismatch: eval n={eval_grams.n}, train n={train_grams.n}"
        )
    if not eval_grams.grams:
        return 0.0
    return len(eval_grams.grams & train_grams.grams) / len(eval_grams.grams)
