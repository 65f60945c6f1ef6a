"""Brings external material into the pipeline.

Four inlets: dictionary usage examples (3-column TSV), generated sentences
(one per line), multi-engine translations through a pluggable translator
interface, and professionally translated corpora that enter with score 5.
Real MT engines stay behind the Translator protocol; only a deterministic
mock ships in-tree.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .errors import EmptyField, EngineFailure, MalformedRecord
from .records import Origin, ScoredSegment
from .seeds import derive_seed

__all__ = [
    "UsageExample",
    "TranslatorId",
    "CandidateSet",
    "Translator",
    "MockTranslator",
    "build_generation_prompt",
    "translate_all",
    "ingest_professional_corpus",
    "identity_transform",
    "seeded_word_substitution",
    "dropping_transform",
    "read_usage_examples",
    "read_parallel_pairs",
    "read_sentences",
]


@dataclass(frozen=True, slots=True)
class UsageExample:
    """One dictionary entry: headword, part of speech, example sentence."""

    headword: str
    part_of_speech: str
    example_sentence: str

    def __post_init__(self) -> None:
        for name in ("headword", "part_of_speech", "example_sentence"):
            if not getattr(self, name):
                raise ValueError(f"usage example field {name} is empty")


@dataclass(frozen=True, slots=True, order=True)
class TranslatorId:
    """Engine identity; lower priority number wins tie-breaks."""

    priority: int
    name: str

    def __post_init__(self) -> None:
        if self.priority < 0:
            raise ValueError("priority must be >= 0")
        if not self.name:
            raise ValueError("engine name is empty")


@dataclass(frozen=True, slots=True)
class CandidateSet:
    """One source sentence with its per-engine translations, priority order."""

    id: str
    source: str
    translations: tuple[tuple[TranslatorId, str], ...]

    def __post_init__(self) -> None:
        if not self.source:
            raise ValueError(f"{self.id}: empty source")
        if len(self.translations) < 2:
            raise ValueError(f"{self.id}: need at least 2 translations")
        names = [tid.name for tid, _ in self.translations]
        if len(set(names)) != len(names):
            raise ValueError(f"{self.id}: duplicate engine names")
        priorities = [tid.priority for tid, _ in self.translations]
        if len(set(priorities)) != len(priorities):
            raise ValueError(f"{self.id}: duplicate engine priorities")


_PROMPT_TEMPLATE = (
    "Taken from high-school English learner's dictionary – the dictionary "
    'entry of the headword: "{headword}", part-of-speech: "{pos}", has the '
    'following example sentence: "{example}" – suggest an additional '
    "sentence that contains at least {count} {word_form} and that corresponds "
    "to the existing example sentence in terms of linguistic structure and "
    "academic level."
)


def build_generation_prompt(ex: UsageExample, min_words: int = 20) -> str:
    """Sentence-generation prompt with the entry's slots filled in.

    Pure template instantiation: the headword, part of speech, and example
    appear verbatim, and the word-count constraint pluralizes correctly.
    """
    if min_words < 1:
        raise ValueError("min_words must be >= 1")
    return _PROMPT_TEMPLATE.format(
        headword=ex.headword,
        pos=ex.part_of_speech,
        example=ex.example_sentence,
        count=min_words,
        word_form="word" if min_words == 1 else "words",
    )


class Translator(Protocol):
    """Stateless translation plugin: engine name + source text -> target text."""

    def translate(self, engine: str, source_text: str) -> str: ...


Transform = Callable[[list[str]], list[str]]


def identity_transform(tokens: list[str]) -> list[str]:
    return tokens


def dropping_transform(every: int = 3) -> Transform:
    """Drops every ``every``-th token; handy for forcing disagreement."""

    def transform(tokens: list[str]) -> list[str]:
        kept = [tok for i, tok in enumerate(tokens) if (i + 1) % every != 0]
        return kept if kept else tokens[:1]

    return transform


_PSEUDO_CONSONANTS = "bdgklmnprstvz"
_PSEUDO_VOWELS = "aeiou"


def _pseudoword(*parts: int | str) -> str:
    """Pronounceable deterministic pseudoword from the hashed parts."""
    value = derive_seed(*parts)
    syllables = 2 + value % 2
    out = []
    for _ in range(syllables):
        value //= 3
        out.append(_PSEUDO_CONSONANTS[value % len(_PSEUDO_CONSONANTS)])
        value //= len(_PSEUDO_CONSONANTS)
        out.append(_PSEUDO_VOWELS[value % len(_PSEUDO_VOWELS)])
        value //= len(_PSEUDO_VOWELS)
    return "".join(out)


def seeded_word_substitution(seed: int, engine: str = "", divergence: float = 0.0) -> Transform:
    """Deterministic word-for-word substitution into a pseudo target language.

    All engines sharing a seed agree on the base mapping; with probability
    ``divergence`` per word (hash-derived, so reproducible) an engine uses
    its own variant, which is what gives the agreement filter work to do.
    """

    def transform(tokens: list[str]) -> list[str]:
        out = []
        for token in tokens:
            if divergence > 0.0 and engine:
                roll = derive_seed(seed, "diverge", engine, token) / 2**64
                if roll < divergence:
                    out.append(_pseudoword(seed, "alt", engine, token))
                    continue
            out.append(_pseudoword(seed, "base", token))
        return out

    return transform


class MockTranslator:
    """Deterministic in-tree translator: per-engine token transforms.

    Unknown engines use ``default``; engines listed in ``failing`` raise
    EngineFailure, exercising the error path without a network.
    """

    def __init__(
        self,
        default: Transform = identity_transform,
        per_engine: dict[str, Transform] | None = None,
        failing: Iterable[str] = (),
    ) -> None:
        self._default = default
        self._per_engine = dict(per_engine or {})
        self._failing = set(failing)

    def translate(self, engine: str, source_text: str) -> str:
        if engine in self._failing:
            raise EngineFailure(engine, "configured to fail")
        transform = self._per_engine.get(engine, self._default)
        return " ".join(transform(source_text.split()))


def translate_all(
    source: str,
    engines: Sequence[TranslatorId],
    client: Translator,
    segment_id: str = "seg",
) -> CandidateSet:
    """One translation per engine, assembled in priority order.

    EngineFailure propagates and discards partial results; the caller
    decides whether to skip the segment or abort the run.
    """
    if len(engines) < 2:
        raise ValueError("need at least 2 engines")
    ordered = sorted(engines)
    translations = tuple(
        (tid, client.translate(tid.name, source)) for tid in ordered
    )
    return CandidateSet(id=segment_id, source=source, translations=translations)


def ingest_professional_corpus(
    pairs: Sequence[tuple[str, str]], id_prefix: str = "prof"
) -> list[ScoredSegment]:
    """Professionally translated pairs enter with quality score 5.

    Duplicate pairs stay distinct records (distinct ids); dedup is not this
    stage's contract.
    """
    if not pairs:
        raise ValueError("professional corpus is empty")
    out = []
    for row, (source, target) in enumerate(pairs):
        if not source:
            raise EmptyField(row, "source")
        if not target:
            raise EmptyField(row, "target")
        out.append(
            ScoredSegment(
                id=f"{id_prefix}{row:06d}",
                source=source,
                target=target,
                score=5,
                origin=Origin.PROFESSIONAL,
            )
        )
    return out


def _read_tsv(path: str | Path, columns: int) -> list[list[str]]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split("\t")
            if len(cells) != columns:
                raise MalformedRecord(
                    f"{path}:{lineno}: expected {columns} tab-separated columns, got {len(cells)}"
                )
            for col, cell in enumerate(cells):
                if not cell.strip():
                    raise EmptyField(lineno, f"column {col + 1}")
            rows.append(cells)
    return rows


def read_usage_examples(path: str | Path) -> list[UsageExample]:
    """3-column TSV: headword, part of speech, example sentence."""
    return [UsageExample(*row) for row in _read_tsv(path, 3)]


def read_parallel_pairs(path: str | Path) -> list[tuple[str, str]]:
    """2-column TSV: source, target."""
    return [(row[0], row[1]) for row in _read_tsv(path, 2)]


def read_sentences(path: str | Path) -> list[str]:
    """One sentence per line; blank lines skipped."""
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        return [line.strip() for line in fh if line.strip()]
