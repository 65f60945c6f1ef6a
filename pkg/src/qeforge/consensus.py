"""Exclusion-and-selection over multi-engine candidate sets.

A candidate set survives when its best pairwise agreement reaches the
threshold (default 0.85); the winning pair's higher-priority member becomes
the canonical target. Everything is deterministic: exact-tie argmax breaks
by lowest combined priority, then lexicographic engine names.
"""

from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

from .bleu import BleuConfig, DEFAULT_CONFIG, symmetric_agreement
from .ingest import CandidateSet, TranslatorId
from .records import Origin, ScoredSegment

__all__ = [
    "DEFAULT_THRESHOLD",
    "SelectedPair",
    "ConsensusResult",
    "pairwise_agreements",
    "apply_consensus",
    "filter_candidates",
    "write_candidate_sets",
    "read_candidate_sets",
]

DEFAULT_THRESHOLD = 0.85


@dataclass(frozen=True, slots=True)
class SelectedPair:
    engines: tuple[TranslatorId, TranslatorId]
    target: str
    agreement: float


@dataclass(frozen=True, slots=True)
class ConsensusResult:
    selected: SelectedPair | None
    all_pairwise: dict[tuple[str, str], float]

    @property
    def excluded(self) -> bool:
        return self.selected is None


def _pair_key(a: TranslatorId, b: TranslatorId) -> tuple[str, str]:
    first, second = sorted((a, b))
    return (first.name, second.name)


def pairwise_agreements(
    c: CandidateSet, cfg: BleuConfig = DEFAULT_CONFIG
) -> dict[tuple[str, str], float]:
    """Symmetric BLEU agreement for each unordered engine pair: C(n,2) entries."""
    out: dict[tuple[str, str], float] = {}
    items = list(c.translations)
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            (tid_a, text_a), (tid_b, text_b) = items[i], items[j]
            out[_pair_key(tid_a, tid_b)] = symmetric_agreement(text_a, text_b, cfg)
    return out


def apply_consensus(
    c: CandidateSet, threshold: float = DEFAULT_THRESHOLD, cfg: BleuConfig = DEFAULT_CONFIG
) -> ConsensusResult:
    """Exclude below-threshold sets; otherwise select the most-agreeing pair.

    Selection ignores the order translations were listed in: ties on exactly
    equal agreement resolve by lowest priority sum, then lexicographic names.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside (0, 1]")
    agreements = pairwise_agreements(c, cfg)

    by_name = {tid.name: (tid, text) for tid, text in c.translations}
    best_key = None
    best_rank: tuple[float, int, tuple[str, str]] | None = None
    for key, value in agreements.items():
        tid_a = by_name[key[0]][0]
        tid_b = by_name[key[1]][0]
        rank = (-value, tid_a.priority + tid_b.priority, key)
        if best_rank is None or rank < best_rank:
            best_rank = rank
            best_key = key

    assert best_key is not None
    best_value = agreements[best_key]
    if best_value < threshold:
        return ConsensusResult(selected=None, all_pairwise=agreements)

    tid_a, text_a = by_name[best_key[0]]
    tid_b, text_b = by_name[best_key[1]]
    canonical = min(((tid_a, text_a), (tid_b, text_b)), key=lambda it: it[0])[1]
    return ConsensusResult(
        selected=SelectedPair(
            engines=tuple(sorted((tid_a, tid_b))),  # type: ignore[arg-type]
            target=canonical,
            agreement=best_value,
        ),
        all_pairwise=agreements,
    )


@dataclass(slots=True)
class FilterReport:
    total: int = 0
    selected: int = 0
    excluded: int = 0

    @property
    def exclusion_rate(self) -> float:
        return self.excluded / self.total if self.total else 0.0


def filter_candidates(
    sets: Iterable[CandidateSet],
    threshold: float = DEFAULT_THRESHOLD,
    cfg: BleuConfig = DEFAULT_CONFIG,
) -> tuple[list[ScoredSegment], list[CandidateSet], FilterReport]:
    """Run consensus over many sets; returns (kept, rejected, report).

    Kept records carry origin consensus_filtered with no score assigned yet
    (scores come from annotation), the canonical engine name, and the
    winning agreement. Output order follows segment id.
    """
    report = FilterReport()
    kept: list[ScoredSegment] = []
    rejected: list[CandidateSet] = []
    for cand in sorted(sets, key=lambda c: c.id):
        report.total += 1
        result = apply_consensus(cand, threshold, cfg)
        if result.selected is None:
            report.excluded += 1
            rejected.append(cand)
            continue
        report.selected += 1
        kept.append(
            ScoredSegment(
                id=cand.id,
                source=cand.source,
                target=result.selected.target,
                score=None,
                origin=Origin.CONSENSUS_FILTERED,
                engine=result.selected.engines[0].name,
                agreement=result.selected.agreement,
            )
        )
    return kept, rejected, report


def write_candidate_sets(path: str | Path, sets: Iterable[CandidateSet]) -> int:
    """JSON-lines candidate file, deterministic key order."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for cand in sets:
            doc = {
                "id": cand.id,
                "source": cand.source,
                "translations": [
                    {"engine": tid.name, "priority": tid.priority, "text": text}
                    for tid, text in cand.translations
                ],
            }
            fh.write(json.dumps(doc, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
            count += 1
    return count


def read_candidate_sets(path: str | Path) -> list[CandidateSet]:
    out = []
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        for line in fh:
            if not line.strip():
                continue
            doc = json.loads(line)
            out.append(
                CandidateSet(
                    id=doc["id"],
                    source=doc["source"],
                    translations=tuple(
                        (TranslatorId(priority=t["priority"], name=t["engine"]), t["text"])
                        for t in doc["translations"]
                    ),
                )
            )
    return out
