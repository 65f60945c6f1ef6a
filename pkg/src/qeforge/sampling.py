"""Distribution-controlled dataset assembly.

Three regimes: a binomial(5, 1/2) "normal" shape, a uniform shape over the
six score classes, and plain random sampling that inherits the pool's
proportions. Quotas use largest-remainder rounding so they sum exactly to
the requested size. The zero-class cap downsamples mismatch negatives
until they are at most the configured fraction of the dataset.
"""

from __future__ import annotations

import math
import random
from collections.abc import Sequence
from dataclasses import dataclass

from .errors import CapInfeasible, ClassExhausted, PoolTooSmall
from .records import SCORE_MAX, SCORE_MIN, ScoredSegment

__all__ = [
    "DEFAULT_ZERO_CAP",
    "DistributionSpec",
    "uniform_spec",
    "normal_spec",
    "skew_spec",
    "quotas_for",
    "sample_by_spec",
    "random_sample",
    "enforce_zero_cap",
]

N_CLASSES = SCORE_MAX - SCORE_MIN + 1

DEFAULT_ZERO_CAP = 1.0 / 3.0


@dataclass(frozen=True, slots=True)
class DistributionSpec:
    """Target proportions over the six score classes 0..5."""

    proportions: dict[int, float]

    def __post_init__(self) -> None:
        for score, p in self.proportions.items():
            if not SCORE_MIN <= score <= SCORE_MAX:
                raise ValueError(f"score class {score} outside 0..5")
            if p < 0:
                raise ValueError(f"negative proportion for class {score}")
        total = math.fsum(self.proportions.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"proportions sum to {total!r}, not 1")

    def proportion(self, score: int) -> float:
        return self.proportions.get(score, 0.0)


def uniform_spec() -> DistributionSpec:
    """Each of the six classes gets exactly 1/6."""
    return DistributionSpec({s: 1.0 / N_CLASSES for s in range(SCORE_MIN, SCORE_MAX + 1)})


def normal_spec() -> DistributionSpec:
    """Binomial(5, 1/2) weights: the discrete normal analogue on six classes.

    Symmetric and mid-heavy: {1, 5, 10, 10, 5, 1} / 32.
    """
    return DistributionSpec(
        {s: math.comb(SCORE_MAX, s) / 2.0**SCORE_MAX for s in range(SCORE_MIN, SCORE_MAX + 1)}
    )


def skew_spec(majority_class: int = 3, majority_share: float = 0.9) -> DistributionSpec:
    """One dominant class; the remainder spread evenly over the others."""
    if not SCORE_MIN <= majority_class <= SCORE_MAX:
        raise ValueError("majority_class outside 0..5")
    if not 0.0 < majority_share < 1.0:
        raise ValueError("majority_share outside (0, 1)")
    rest = (1.0 - majority_share) / (N_CLASSES - 1)
    return DistributionSpec(
        {
            s: majority_share if s == majority_class else rest
            for s in range(SCORE_MIN, SCORE_MAX + 1)
        }
    )


def quotas_for(spec: DistributionSpec, size: int) -> dict[int, int]:
    """Largest-remainder rounding of spec proportions to integer quotas.

    Floors first, then hands the leftover units to the classes with the
    largest fractional remainders (ties to the lower score), so quotas sum
    to ``size`` exactly.
    """
    if size < 0:
        raise ValueError("size must be >= 0")
    exact = {s: spec.proportion(s) * size for s in range(SCORE_MIN, SCORE_MAX + 1)}
    quotas = {s: int(math.floor(v)) for s, v in exact.items()}
    leftover = size - sum(quotas.values())
    by_remainder = sorted(
        range(SCORE_MIN, SCORE_MAX + 1), key=lambda s: (-(exact[s] - quotas[s]), s)
    )
    for s in by_remainder[:leftover]:
        quotas[s] += 1
    return quotas


def _by_class(pool: Sequence[ScoredSegment]) -> dict[int, list[ScoredSegment]]:
    classes: dict[int, list[ScoredSegment]] = {s: [] for s in range(SCORE_MIN, SCORE_MAX + 1)}
    for seg in pool:
        if seg.score is None:
            raise ValueError(f"{seg.id}: unscored segment in sampling pool")
        classes[seg.score].append(seg)
    return classes


def sample_by_spec(
    pool: Sequence[ScoredSegment],
    spec: DistributionSpec,
    size: int,
    rng: random.Random,
) -> list[ScoredSegment]:
    """Exact per-class quotas, uniform without replacement within each class.

    Output is ordered by (score, id); candidates are id-sorted before
    drawing, so the result depends only on (pool contents, spec, size, seed).
    """
    quotas = quotas_for(spec, size)
    classes = _by_class(pool)
    for score, need in quotas.items():
        if need > len(classes[score]):
            raise ClassExhausted(score, need, len(classes[score]))
    out: list[ScoredSegment] = []
    for score in range(SCORE_MIN, SCORE_MAX + 1):
        members = sorted(classes[score], key=lambda seg: seg.id)
        chosen = rng.sample(members, quotas[score])
        out.extend(sorted(chosen, key=lambda seg: seg.id))
    return out


def random_sample(
    pool: Sequence[ScoredSegment], size: int, rng: random.Random
) -> list[ScoredSegment]:
    """Uniform without replacement over the whole pool, no target shape."""
    if size > len(pool):
        raise PoolTooSmall(f"requested {size} from a pool of {len(pool)}")
    return rng.sample(list(pool), size)


def enforce_zero_cap(
    dataset: Sequence[ScoredSegment],
    cap: float = DEFAULT_ZERO_CAP,
    rng: random.Random | None = None,
) -> list[ScoredSegment]:
    """Downsample the zero class until its fraction is at most ``cap``.

    Non-zero records are never touched and input order is preserved, which
    makes the operation idempotent. All-zero datasets cannot be fixed by
    removing zeros alone and raise CapInfeasible.
    """
    if not 0.0 < cap < 1.0:
        raise ValueError(f"cap {cap} outside (0, 1)")
    zero_idx = [i for i, seg in enumerate(dataset) if seg.score == 0]
    nonzero_count = len(dataset) - len(zero_idx)
    if not zero_idx:
        return list(dataset)
    if nonzero_count == 0:
        raise CapInfeasible("dataset contains only zero-class records")
    if len(zero_idx) / len(dataset) <= cap:
        return list(dataset)
    # Largest zero count z with z / (z + nonzero) <= cap; the float estimate
    # is nudged so boundary cases (cap exactly 1/3) land on the exact count.
    allowed = int(math.floor(cap * nonzero_count / (1.0 - cap)))
    while (allowed + 1) / (allowed + 1 + nonzero_count) <= cap:
        allowed += 1
    while allowed > 0 and allowed / (allowed + nonzero_count) > cap:
        allowed -= 1
    rng = rng or random.Random(0)
    keep = set(rng.sample(zero_idx, allowed))
    return [
        seg for i, seg in enumerate(dataset) if seg.score != 0 or i in keep
    ]
