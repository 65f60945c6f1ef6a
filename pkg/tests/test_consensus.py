from __future__ import annotations

import random

import pytest

from qeforge.consensus import (
    apply_consensus,
    filter_candidates,
    pairwise_agreements,
    read_candidate_sets,
    write_candidate_sets,
)
from qeforge.ingest import CandidateSet, TranslatorId
from qeforge.records import Origin

from oracles import oracle_symmetric_agreement

A = TranslatorId(priority=0, name="engine_a")
B = TranslatorId(priority=1, name="engine_b")
C = TranslatorId(priority=2, name="engine_c")


def candidate(seg_id: str, source: str, *texts: str) -> CandidateSet:
    engines = (A, B, C)[: len(texts)]
    return CandidateSet(
        id=seg_id, source=source, translations=tuple(zip(engines, texts))
    )


def test_pairwise_identical_translations():
    c = candidate("s1", "hello there", "x y z", "x y z", "x y z")
    agreements = pairwise_agreements(c)
    assert len(agreements) == 3
    assert all(v == 1.0 for v in agreements.values())


def test_pairwise_two_translations_single_entry():
    c = candidate("s1", "src", "a b", "a c")
    agreements = pairwise_agreements(c)
    assert set(agreements) == {("engine_a", "engine_b")}


def test_pairwise_divergent_engine_oracle():
    c = candidate("s1", "src", "p q r s", "p q r s", "p q z s")
    agreements = pairwise_agreements(c)
    assert agreements[("engine_a", "engine_b")] == 1.0
    expected = oracle_symmetric_agreement("p q r s", "p q z s")
    assert agreements[("engine_a", "engine_c")] == pytest.approx(expected, abs=1e-9)
    assert agreements[("engine_b", "engine_c")] == pytest.approx(expected, abs=1e-9)
    assert expected < 1.0


def test_excluded_below_threshold():
    c = candidate("s1", "src", "a b c d", "w x y z")
    result = apply_consensus(c, threshold=0.85)
    assert result.excluded
    assert result.selected is None


def test_tie_break_lowest_priority_pair_and_canonical_member():
    c = candidate("s1", "src", "x y z", "x y z", "x y z")
    result = apply_consensus(c, threshold=0.85)
    assert not result.excluded
    assert result.selected is not None
    names = tuple(t.name for t in result.selected.engines)
    assert names == ("engine_a", "engine_b")
    assert result.selected.target == "x y z"
    assert result.selected.agreement == 1.0


def test_argmax_pair_selected():
    # engines a/b nearly agree; c diverges from both
    c = candidate("s1", "src", "m n o p q", "m n o p z", "zz yy xx ww vv")
    result = apply_consensus(c, threshold=0.5)
    agreements = result.all_pairwise
    best = max(agreements.values())
    assert result.selected is not None
    assert result.selected.agreement == best
    assert set(result.all_pairwise) == {
        ("engine_a", "engine_b"),
        ("engine_a", "engine_c"),
        ("engine_b", "engine_c"),
    }


def test_selection_invariant_under_listing_order():
    texts = {"engine_a": "m n o p q", "engine_b": "m n o p z", "engine_c": "m z o p q"}
    engines = [A, B, C]
    baseline = None
    rng = random.Random(3)
    for _ in range(6):
        rng.shuffle(engines)
        c = CandidateSet(
            id="s1",
            source="src",
            translations=tuple((e, texts[e.name]) for e in engines),
        )
        result = apply_consensus(c, threshold=0.1)
        key = (
            tuple(t.name for t in result.selected.engines),
            result.selected.target,
            result.selected.agreement,
        )
        if baseline is None:
            baseline = key
        assert key == baseline


def test_threshold_monotonicity():
    c = candidate("s1", "src", "m n o p q", "m n o p z", "m z o p q")
    best = max(pairwise_agreements(c).values())
    selected_high = not apply_consensus(c, threshold=min(best, 1.0)).excluded
    assert selected_high
    # lowering the threshold never turns a selected set into an excluded one
    for threshold in (best / 2, best / 4, 0.01):
        assert not apply_consensus(c, threshold=threshold).excluded


def test_invalid_threshold():
    c = candidate("s1", "src", "a b", "a b")
    with pytest.raises(ValueError):
        apply_consensus(c, threshold=0.0)
    with pytest.raises(ValueError):
        apply_consensus(c, threshold=1.01)


def test_filter_candidates_outputs_unscored_records():
    sets = [
        candidate("s2", "second source", "x y z", "x y z", "a b c"),
        candidate("s1", "first source", "p q r", "p q r", "p q r"),
        candidate("s3", "third source", "a b c d", "w x y z", "k l m n"),
    ]
    kept, rejected, report = filter_candidates(sets, threshold=0.85)
    assert report.total == 3
    assert report.selected == 2
    assert report.excluded == 1
    assert [seg.id for seg in kept] == ["s1", "s2"]  # ordered by id
    assert [c.id for c in rejected] == ["s3"]
    for seg in kept:
        assert seg.score is None
        assert seg.origin is Origin.CONSENSUS_FILTERED
        assert seg.engine == "engine_a"
        assert seg.agreement == 1.0


def test_candidate_set_round_trip(tmp_path):
    sets = [
        candidate("s1", "first source", "x y", "x z"),
        candidate("s2", "second source", "a b c", "a b c", "a q c"),
    ]
    path = tmp_path / "candidates.jsonl"
    assert write_candidate_sets(path, sets) == 2
    loaded = read_candidate_sets(path)
    assert loaded == sets


def test_candidate_set_validation():
    with pytest.raises(ValueError):
        CandidateSet(id="x", source="s", translations=((A, "t"),))
    with pytest.raises(ValueError):
        CandidateSet(id="x", source="s", translations=((A, "t"), (A, "u")))
    with pytest.raises(ValueError):
        CandidateSet(
            id="x",
            source="s",
            translations=((A, "t"), (TranslatorId(priority=0, name="other"), "u")),
        )


def test_brute_force_oracle_on_seeded_fixture():
    """Exclusion decisions and argmax selections match an independent
    brute-force pass over the precomputed agreement maps."""
    rng = random.Random(424242)
    vocab = [f"w{i}" for i in range(18)]
    sets = []
    for i in range(50):
        length = rng.randint(3, 12)
        base = [rng.choice(vocab) for _ in range(length)]
        texts = []
        for _ in range(3):
            variant = list(base)
            while rng.random() < 0.55:
                variant[rng.randrange(length)] = rng.choice(vocab)
            texts.append(" ".join(variant))
        sets.append(candidate(f"fix{i:03d}", f"source {i}", *texts))

    decisions = 0
    for cand in sets:
        agreements = {
            pair: oracle_symmetric_agreement(
                dict((t.name, text) for t, text in cand.translations)[pair[0]],
                dict((t.name, text) for t, text in cand.translations)[pair[1]],
            )
            for pair in [
                ("engine_a", "engine_b"),
                ("engine_a", "engine_c"),
                ("engine_b", "engine_c"),
            ]
        }
        result = apply_consensus(cand, threshold=0.85)
        best_value = max(agreements.values())
        if best_value < 0.85:
            assert result.excluded, cand.id
        else:
            assert not result.excluded, cand.id
            priorities = {"engine_a": 0, "engine_b": 1, "engine_c": 2}
            best_pair = min(
                agreements,
                key=lambda p: (
                    -agreements[p],
                    priorities[p[0]] + priorities[p[1]],
                    p,
                ),
            )
            assert tuple(t.name for t in result.selected.engines) == best_pair
            assert result.selected.agreement == pytest.approx(
                agreements[best_pair], abs=1e-9
            )
        decisions += 1
    assert decisions == 50
