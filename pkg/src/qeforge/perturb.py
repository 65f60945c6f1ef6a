"""Word-order perturbation batches and mismatched-pair negatives.

Three operators with fixed score penalties: adjacent swap (-1), shift a
token two positions forward (-2), random shuffle (-3). Each segment yields
a batch of up to 20 pairwise-distinct variants: all swaps, then all shifts,
then shuffles to top up. Mismatched negatives pair a source with an
unrelated target and always score 0.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

from .errors import PoolTooSmall, TooShort
from .records import Origin, ScoredSegment, clamp_score, derived_id

__all__ = [
    "DEFAULT_BATCH_SIZE",
    "PENALTY_SWAP",
    "PENALTY_SHIFT2",
    "PENALTY_SHUFFLE",
    "PerturbationBatch",
    "adjacent_swap_variants",
    "shift_two_variants",
    "perturb_batch",
    "generate_mismatches",
]

DEFAULT_BATCH_SIZE = 20

PENALTY_SWAP = 1
PENALTY_SHIFT2 = 2
PENALTY_SHUFFLE = 3

# Above this many distinct permutations, shuffle fill switches from full
# enumeration to rejection sampling (collisions are then negligible).
_ENUMERATION_CAP = 20_000


def adjacent_swap_variants(tokens: Sequence[str]) -> list[tuple[list[str], int]]:
    """One variant per position i: tokens i and i+1 exchanged.

    Swaps of equal adjacent tokens reproduce the original and are dropped.
    """
    if len(tokens) < 2:
        raise TooShort(f"need >= 2 tokens for adjacent swaps, got {len(tokens)}")
    out = []
    for i in range(len(tokens) - 1):
        if tokens[i] == tokens[i + 1]:
            continue
        variant = list(tokens)
        variant[i], variant[i + 1] = variant[i + 1], variant[i]
        out.append((variant, i))
    return out


def shift_two_variants(tokens: Sequence[str]) -> list[tuple[list[str], int]]:
    """One variant per position i: token i removed and reinserted at i+2."""
    if len(tokens) < 3:
        raise TooShort(f"need >= 3 tokens for shift-two, got {len(tokens)}")
    out = []
    original = list(tokens)
    for i in range(len(tokens) - 2):
        variant = list(tokens)
        moved = variant.pop(i)
        variant.insert(i + 2, moved)
        if variant != original:
            out.append((variant, i))
    return out


def _distinct_permutation_count(tokens: Sequence[str]) -> int:
    total = math.factorial(len(tokens))
    for count in Counter(tokens).values():
        total //= math.factorial(count)
    return total


def _distinct_permutations(tokens: Sequence[str]) -> Iterator[tuple[str, ...]]:
    """All distinct orderings of a token multiset, lexicographic order."""
    pool = sorted(tokens)
    n = len(pool)
    current: list[str] = []

    def walk(remaining: list[str]) -> Iterator[tuple[str, ...]]:
        if len(current) == n:
            yield tuple(current)
            return
        previous = None
        for idx, token in enumerate(remaining):
            if token == previous:
                continue
            previous = token
            current.append(token)
            yield from walk(remaining[:idx] + remaining[idx + 1 :])
            current.pop()

    return walk(pool)


@dataclass(slots=True)
class PerturbationBatch:
    """Batch result; ``exhausted`` warns that the permutation space ran out
    before ``batch_size`` distinct variants existed."""

    variants: list[ScoredSegment]
    exhausted: bool = False


def _variant_record(
    seg: ScoredSegment, tokens: Sequence[str], origin: Origin, penalty: int, ordinal: int
) -> ScoredSegment:
    op = {
        Origin.ORDER_SWAP: "swap",
        Origin.ORDER_SHIFT2: "shift2",
        Origin.ORDER_SHUFFLE: "shuffle",
    }[origin]
    assert seg.score is not None
    return ScoredSegment(
        id=derived_id(seg.id, op, ordinal),
        source=seg.source,
        target=" ".join(tokens),
        score=clamp_score(seg.score - penalty),
        origin=origin,
        parent=seg.id,
    )


def perturb_batch(
    seg: ScoredSegment,
    batch_size: int = DEFAULT_BATCH_SIZE,
    rng: random.Random | None = None,
) -> PerturbationBatch:
    """Up to ``batch_size`` pairwise-distinct word-order variants.

    Fill order is swaps, then shifts, then distinct uniform random shuffles,
    truncated at ``batch_size``. Every variant permutes the parent's token
    multiset; none equals the parent. When the whole permutation space is
    smaller than the batch, the maximal distinct set comes back with the
    exhausted flag set.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if seg.score is None:
        raise ValueError(f"{seg.id}: cannot perturb an unscored segment")
    rng = rng or random.Random(0)
    tokens = seg.target.split()
    if len(tokens) < 2:
        raise TooShort(f"{seg.id}: need >= 2 tokens to perturb, got {len(tokens)}")

    original = tuple(tokens)
    seen: set[tuple[str, ...]] = {original}
    variants: list[ScoredSegment] = []

    def push(candidate: Sequence[str], origin: Origin, penalty: int, ordinal: int) -> bool:
        key = tuple(candidate)
        if key in seen:
            return False
        seen.add(key)
        variants.append(_variant_record(seg, candidate, origin, penalty, ordinal))
        return True

    for variant, position in adjacent_swap_variants(tokens):
        if len(variants) >= batch_size:
            break
        push(variant, Origin.ORDER_SWAP, PENALTY_SWAP, position)
    if len(tokens) >= 3:
        for variant, position in shift_two_variants(tokens):
            if len(variants) >= batch_size:
                break
            push(variant, Origin.ORDER_SHIFT2, PENALTY_SHIFT2, position)

    exhausted = False
    needed = batch_size - len(variants)
    if needed > 0:
        space = _distinct_permutation_count(tokens)
        ordinal = 0
        if space <= _ENUMERATION_CAP:
            unused = [p for p in _distinct_permutations(tokens) if p not in seen]
            if len(unused) <= needed:
                chosen = unused
                exhausted = len(unused) < needed
            else:
                chosen = rng.sample(unused, needed)
            for perm in chosen:
                push(perm, Origin.ORDER_SHUFFLE, PENALTY_SHUFFLE, ordinal)
                ordinal += 1
        else:
            attempts = 0
            while needed > 0 and attempts < 1000 * batch_size:
                attempts += 1
                candidate = list(tokens)
                rng.shuffle(candidate)
                if push(candidate, Origin.ORDER_SHUFFLE, PENALTY_SHUFFLE, ordinal):
                    ordinal += 1
                    needed -= 1
            exhausted = needed > 0
    return PerturbationBatch(variants=variants, exhausted=exhausted)


def generate_mismatches(
    segs: Sequence[ScoredSegment], count: int, rng: random.Random
) -> list[ScoredSegment]:
    """Adversarial negatives: sources paired with unrelated targets, score 0.

    Each draw picks a source segment uniformly, then a target from a
    segment whose source text differs (re-drawn until it does), so no
    negative reuses its own true translation.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if len(segs) < 2 or len({seg.source for seg in segs}) < 2:
        raise PoolTooSmall("need >= 2 segments with distinct sources")
    out = []
    n = len(segs)
    for k in range(count):
        src_seg = segs[rng.randrange(n)]
        while True:
            tgt_seg = segs[rng.randrange(n)]
            if tgt_seg.source != src_seg.source:
                break
        out.append(
            ScoredSegment(
                id=derived_id(src_seg.id, "mismatch", k),
                source=src_seg.source,
                target=tgt_seg.target,
                score=0,
                origin=Origin.MISMATCH,
            )
        )
    return out
