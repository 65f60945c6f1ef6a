"""Pure-Python n-gram precision counting (fallback backend)."""

from __future__ import annotations

from collections import Counter

BACKEND_NAME = "pure"


def precision_stats(
    hyp_ids: list[int], ref_ids: list[int], max_order: int
) -> list[tuple[int, int]]:
    """Clipped-match and total n-gram counts per order.

    Returns one (matched, total) pair for each order 1..min(max_order,
    len(hyp_ids)); orders the hypothesis is too short for are omitted.
    Matches are clipped to the reference count per distinct n-gram.
    """
    stats: list[tuple[int, int]] = []
    hyp_len = len(hyp_ids)
    ref_len = len(ref_ids)
    for order in range(1, max_order + 1):
        total = hyp_len - order + 1
        if total < 1:
            break
        hyp_grams = Counter(
            tuple(hyp_ids[i : i + order]) for i in range(total)
        )
        if ref_len - order + 1 < 1:
            stats.append((0, total))
            continue
        ref_grams = Counter(
            tuple(ref_ids[i : i + order]) for i in range(ref_len - order + 1)
        )
        matched = sum(min(count, ref_grams[gram]) for gram, count in hyp_grams.items())
        stats.append((matched, total))
    return stats
