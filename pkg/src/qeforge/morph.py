"""Controlled gender/number agreement-error injection.

A morphological lexicon maps surface forms to their feature variants; an
injected error replaces one token with a variant differing in exactly one
feature (gender XOR number). Each error costs one score point, clamped at
floor 1 so the zero class stays reserved for mismatched pairs.

Lexicon file format: TSV with 4+ columns
    surface  gender  number  gender.number=form  [gender.number=form ...]
"""

from __future__ import annotations

import enum
import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from .errors import InsufficientSites, MalformedRecord, PlanInfeasible, ScoreTooLow
from .records import Origin, ScoredSegment, clamp_score, derived_id
from .seeds import rng_for

__all__ = [
    "Gender",
    "Number",
    "MorphEntry",
    "MorphLexicon",
    "find_injection_sites",
    "inject_errors",
    "augment_corpus",
    "read_lexicon",
    "write_lexicon",
]


class Gender(enum.Enum):
    MASCULINE = "masculine"
    FEMININE = "feminine"
    NONE = "none"


class Number(enum.Enum):
    SINGULAR = "singular"
    PLURAL = "plural"
    NONE = "none"


Features = tuple[Gender, Number]

_GENDER_FLIP = {Gender.MASCULINE: Gender.FEMININE, Gender.FEMININE: Gender.MASCULINE}
_NUMBER_FLIP = {Number.SINGULAR: Number.PLURAL, Number.PLURAL: Number.SINGULAR}


@dataclass(frozen=True, slots=True)
class MorphEntry:
    """A surface form, its features, and the forms of its feature variants."""

    surface: str
    gender: Gender
    number: Number
    variants: dict[Features, str]

    def __post_init__(self) -> None:
        own = (self.gender, self.number)
        if self.variants.get(own) != self.surface:
            raise ValueError(
                f"{self.surface}: entry must list itself as the {own} variant"
            )
        if all(form == self.surface for form in self.variants.values()):
            raise ValueError(f"{self.surface}: every variant identical to the surface")

    def single_feature_flips(self) -> list[tuple[Features, str]]:
        """Variants reachable by flipping gender XOR number, textually distinct."""
        own_gender, own_number = self.gender, self.number
        candidates: list[Features] = []
        if own_gender in _GENDER_FLIP:
            candidates.append((_GENDER_FLIP[own_gender], own_number))
        if own_number in _NUMBER_FLIP:
            candidates.append((own_gender, _NUMBER_FLIP[own_number]))
        out = []
        for feats in candidates:
            form = self.variants.get(feats)
            if form is not None and form != self.surface:
                out.append((feats, form))
        return out


class MorphLexicon:
    """Surface-form lookup table driving agreement-error injection."""

    def __init__(self, entries: Iterable[MorphEntry]):
        self.entries: dict[str, MorphEntry] = {}
        for entry in entries:
            if entry.surface in self.entries:
                raise ValueError(f"duplicate lexicon surface {entry.surface!r}")
            self.entries[entry.surface] = entry

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, surface: str) -> bool:
        return surface in self.entries

    def get(self, surface: str) -> MorphEntry | None:
        return self.entries.get(surface)


def find_injection_sites(
    target_tokens: Sequence[str], lex: MorphLexicon
) -> list[tuple[int, MorphEntry]]:
    """Positions whose token has at least one usable single-feature flip.

    Entries whose flips are all textually identical to the token are
    excluded: replacing them would be a no-op, not an error.
    """
    sites = []
    for pos, token in enumerate(target_tokens):
        entry = lex.get(token)
        if entry is not None and entry.single_feature_flips():
            sites.append((pos, entry))
    return sites


def inject_errors(
    seg: ScoredSegment, n: int, lex: MorphLexicon, rng: random.Random, ordinal: int = 0
) -> ScoredSegment:
    """Replace ``n`` tokens with agreement-violating variants.

    Sites are chosen uniformly without replacement; at each, the flipped
    feature and variant are drawn uniformly. The score drops one point per
    error (clamped at 1) and lineage fields record the parent.
    """
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    if seg.score is None or seg.score < 2:
        raise ScoreTooLow(f"{seg.id}: score {seg.score} too low for error injection")
    tokens = seg.target.split()
    sites = find_injection_sites(tokens, lex)
    if len(sites) < n:
        raise InsufficientSites(n, len(sites))
    chosen = rng.sample(sites, n)
    out = list(tokens)
    for pos, entry in sorted(chosen):
        flips = entry.single_feature_flips()
        _, form = rng.choice(flips)
        out[pos] = form
    return ScoredSegment(
        id=derived_id(seg.id, "morph", ordinal),
        source=seg.source,
        target=" ".join(out),
        score=clamp_score(seg.score - n),
        origin=Origin.MORPH_ERROR,
        parent=seg.id,
        error_count=n,
    )


def augment_corpus(
    segs: Sequence[ScoredSegment],
    lex: MorphLexicon,
    plan: dict[int, int],
    seed: int,
) -> list[ScoredSegment]:
    """Originals plus the planned number of 1- and 2-error variants.

    Each segment contributes at most one variant per error count; which
    eligible segments contribute is drawn uniformly, with per-segment
    generators derived from (seed, segment id) so output is independent of
    iteration order. Raises PlanInfeasible with the per-count shortfall
    when the plan exceeds the eligible population.
    """
    for n in plan:
        if n not in (1, 2):
            raise ValueError(f"plan keys must be 1 or 2, got {n}")

    eligible: dict[int, list[ScoredSegment]] = {}
    for n, count in sorted(plan.items()):
        if count < 0:
            raise ValueError("plan counts must be >= 0")
        pool = [
            seg
            for seg in segs
            if seg.score is not None
            and seg.score >= 2
            and len(find_injection_sites(seg.target.split(), lex)) >= n
        ]
        eligible[n] = pool

    shortfall = {
        n: count - len(eligible[n])
        for n, count in plan.items()
        if count > len(eligible[n])
    }
    if shortfall:
        raise PlanInfeasible(shortfall)

    out = list(segs)
    ordinals: dict[str, int] = {}
    for n, count in sorted(plan.items()):
        pool = sorted(eligible[n], key=lambda s: s.id)
        chosen = rng_for(seed, "morph-plan", n).sample(pool, count)
        for seg in sorted(chosen, key=lambda s: s.id):
            ordinal = ordinals.get(seg.id, 0)
            ordinals[seg.id] = ordinal + 1
            rng = rng_for(seed, "morph", seg.id, ordinal)
            out.append(inject_errors(seg, n, lex, rng, ordinal=ordinal))
    return out


def _parse_features(text: str, where: str) -> Features:
    gender_raw, _, number_raw = text.partition(".")
    try:
        return (Gender(gender_raw), Number(number_raw))
    except ValueError as exc:
        raise MalformedRecord(f"{where}: bad feature pair {text!r}") from exc


def read_lexicon(path: str | Path) -> MorphLexicon:
    """Parse the TSV lexicon format; the surface's own variant is implicit."""
    entries = []
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            cells = line.split("\t")
            if len(cells) < 4:
                raise MalformedRecord(f"{path}:{lineno}: expected >= 4 columns")
            surface, gender_raw, number_raw = cells[0], cells[1], cells[2]
            where = f"{path}:{lineno}"
            try:
                gender, number = Gender(gender_raw), Number(number_raw)
            except ValueError as exc:
                raise MalformedRecord(f"{where}: bad features") from exc
            variants: dict[Features, str] = {(gender, number): surface}
            for cell in cells[3:]:
                key_raw, sep, form = cell.partition("=")
                if not sep or not form:
                    raise MalformedRecord(f"{where}: bad variant cell {cell!r}")
                variants[_parse_features(key_raw, where)] = form
            entries.append(
                MorphEntry(surface=surface, gender=gender, number=number, variants=variants)
            )
    return MorphLexicon(entries)


def write_lexicon(path: str | Path, lex: MorphLexicon) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for surface in sorted(lex.entries):
            entry = lex.entries[surface]
            own = (entry.gender, entry.number)
            cells = [surface, entry.gender.value, entry.number.value]
            for feats in sorted(entry.variants, key=lambda f: (f[0].value, f[1].value)):
                if feats == own:
                    continue
                cells.append(f"{feats[0].value}.{feats[1].value}={entry.variants[feats]}")
            fh.write("\t".join(cells) + "\n")
