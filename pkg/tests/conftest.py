from __future__ import annotations

import random

import pytest

from qeforge.morph import Gender, MorphEntry, MorphLexicon, Number
from qeforge.records import Origin, ScoredSegment


def make_segment(
    seg_id: str = "seg0",
    source: str = "the teacher opened the window",
    target: str = "hamora patxa et haxalon",
    score: int | None = 5,
    origin: Origin = Origin.PROFESSIONAL,
    **kwargs,
) -> ScoredSegment:
    return ScoredSegment(
        id=seg_id, source=source, target=target, score=score, origin=origin, **kwargs
    )


@pytest.fixture
def rng() -> random.Random:
    return random.Random(12345)


@pytest.fixture
def toy_lexicon() -> MorphLexicon:
    """English-like toy lexicon: four inflected forms per stem."""

    def entry_group(stem: str) -> list[MorphEntry]:
        forms = {
            (Gender.MASCULINE, Number.SINGULAR): stem,
            (Gender.MASCULINE, Number.PLURAL): stem + "im",
            (Gender.FEMININE, Number.SINGULAR): stem + "a",
            (Gender.FEMININE, Number.PLURAL): stem + "ot",
        }
        return [
            MorphEntry(surface=form, gender=g, number=n, variants=forms)
            for (g, n), form in forms.items()
        ]

    entries = []
    for stem in ("yeled", "mora", "gadol", "katan", "sefer"):
        entries.extend(entry_group(stem))
    return MorphLexicon(entries)


@pytest.fixture
def hebrew_lexicon() -> MorphLexicon:
    """Hebrew-script toy entries exercising non-Latin surfaces."""
    forms = {
        (Gender.MASCULINE, Number.SINGULAR): "ילד",  # yeled
        (Gender.MASCULINE, Number.PLURAL): "ילדים",
        (Gender.FEMININE, Number.SINGULAR): "ילדה",
        (Gender.FEMININE, Number.PLURAL): "ילדות",
    }
    return MorphLexicon(
        MorphEntry(surface=form, gender=g, number=n, variants=forms)
        for (g, n), form in forms.items()
    )
