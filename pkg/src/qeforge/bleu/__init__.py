"""Sentence-level BLEU used as the inter-engine agreement measure.

Semantics are pinned by BleuConfig: modified n-gram precisions for orders
1..max_order over the chosen tokenizer, epsilon smoothing on zero match
counts, brevity penalty exp(1 - ref_len/hyp_len) for short hypotheses, and
the geometric mean taken over the orders the hypothesis is long enough for.

The n-gram counting kernel is compiled (qeforge.bleu._fast) when the
extension built; a pure-Python counter is selected at import otherwise.
Set QEFORGE_PURE_BLEU=1 to force the fallback.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass

from ..errors import EmptyText
from . import _pure

try:  # pragma: no cover - depends on whether the extension was built
    from . import _fast
except ImportError:  # pragma: no cover
    _fast = None

_FORCE_PURE = os.environ.get("QEFORGE_PURE_BLEU", "") == "1"
_backend = _pure if (_fast is None or _FORCE_PURE) else _fast

# The compiled kernel packs four 16-bit token ids per n-gram.
_FAST_MAX_ORDER = 4
_FAST_MAX_VOCAB = 0xFFFF

__all__ = [
    "Tokenizer",
    "BleuConfig",
    "tokenize",
    "sentence_bleu",
    "symmetric_agreement",
    "active_backend",
    "available_backends",
]

PUNCTUATION_MARKS = frozenset({".", ",", ";", ":", "!", "?", '"', "'"})


class Tokenizer(enum.Enum):
    WHITESPACE = "whitespace"
    WHITESPACE_PLUS_PUNCT_SPLIT = "whitespace_plus_punct_split"


@dataclass(frozen=True, slots=True)
class BleuConfig:
    """Pins the metric semantics: n-gram order, smoothing, tokenizer."""

    max_order: int = 4
    smoothing_epsilon: float = 0.1
    tokenizer: Tokenizer = Tokenizer.WHITESPACE_PLUS_PUNCT_SPLIT

    def __post_init__(self) -> None:
        if not 1 <= self.max_order <= 9:
            raise ValueError(f"max_order {self.max_order} outside 1..9")
        if self.smoothing_epsilon <= 0:
            raise ValueError("smoothing_epsilon must be > 0")


DEFAULT_CONFIG = BleuConfig()


def active_backend() -> str:
    return _backend.BACKEND_NAME


def available_backends() -> dict[str, object]:
    backends: dict[str, object] = {"pure": _pure}
    if _fast is not None:
        backends["cython"] = _fast
    return backends


def _split_punct(word: str) -> list[str]:
    """Detach leading/trailing punctuation marks as separate tokens."""
    leading: list[str] = []
    trailing: list[str] = []
    start, end = 0, len(word)
    while start < end and word[start] in PUNCTUATION_MARKS:
        leading.append(word[start])
        start += 1
    while end > start and word[end - 1] in PUNCTUATION_MARKS:
        trailing.append(word[end - 1])
        end -= 1
    core = word[start:end]
    out = leading
    if core:
        out.append(core)
    out.extend(reversed(trailing))
    return out


def tokenize(text: str, cfg: BleuConfig = DEFAULT_CONFIG) -> list[str]:
    """Deterministic tokenization; whitespace-only text yields an empty list.

    Only leading/trailing marks split off, so intra-word characters (Hebrew
    maqaf, hyphens, inner apostrophes) never break a token.
    """
    words = text.split()
    if cfg.tokenizer is Tokenizer.WHITESPACE:
        return words
    tokens: list[str] = []
    for word in words:
        tokens.extend(_split_punct(word))
    return tokens


def _to_ids(hyp: list[str], ref: list[str]) -> tuple[list[int], list[int], int]:
    table: dict[str, int] = {}
    hyp_ids = [table.setdefault(tok, len(table)) for tok in hyp]
    ref_ids = [table.setdefault(tok, len(table)) for tok in ref]
    return hyp_ids, ref_ids, len(table)


def _precision_stats(
    hyp_tokens: list[str], ref_tokens: list[str], max_order: int
) -> list[tuple[int, int]]:
    hyp_ids, ref_ids, vocab = _to_ids(hyp_tokens, ref_tokens)
    if _backend is not _pure and (max_order > _FAST_MAX_ORDER or vocab > _FAST_MAX_VOCAB):
        return _pure.precision_stats(hyp_ids, ref_ids, max_order)
    return _backend.precision_stats(hyp_ids, ref_ids, max_order)


def bleu_from_tokens(
    hyp_tokens: list[str], ref_tokens: list[str], cfg: BleuConfig = DEFAULT_CONFIG
) -> float:
    if not hyp_tokens or not ref_tokens:
        raise EmptyText("both texts must tokenize to at least one token")
    stats = _precision_stats(hyp_tokens, ref_tokens, cfg.max_order)
    log_sum = 0.0
    for matched, total in stats:
        numerator = matched if matched > 0 else cfg.smoothing_epsilon
        log_sum += math.log(numerator / total)
    geo_mean = math.exp(log_sum / len(stats))
    hyp_len, ref_len = len(hyp_tokens), len(ref_tokens)
    brevity = math.exp(1.0 - ref_len / hyp_len) if hyp_len < ref_len else 1.0
    return brevity * geo_mean


def sentence_bleu(hypothesis: str, reference: str, cfg: BleuConfig = DEFAULT_CONFIG) -> float:
    """BLEU of a hypothesis against one reference, in [0, 1]."""
    return bleu_from_tokens(tokenize(hypothesis, cfg), tokenize(reference, cfg), cfg)


def symmetric_agreement(a: str, b: str, cfg: BleuConfig = DEFAULT_CONFIG) -> float:
    """Mean of the two BLEU directions; symmetric by construction."""
    a_tokens = tokenize(a, cfg)
    b_tokens = tokenize(b, cfg)
    return 0.5 * (
        bleu_from_tokens(a_tokens, b_tokens, cfg) + bleu_from_tokens(b_tokens, a_tokens, cfg)
    )
