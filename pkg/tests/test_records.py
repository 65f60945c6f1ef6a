from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qeforge.errors import InvariantViolation, MalformedRecord
from qeforge.records import (
    Origin,
    ScoredSegment,
    build_manifest,
    decode_record,
    encode_record,
    read_manifest,
    write_manifest,
)

from conftest import make_segment


def test_round_trip_minimal():
    seg = make_segment()
    line = encode_record(seg)
    assert "\t5\tprofessional\t" in line
    assert decode_record(line) == seg


def test_round_trip_embedded_newline_and_tab():
    seg = make_segment(target="line one\nline two\tand a \\ backslash")
    line = encode_record(seg)
    assert "\n" not in line
    assert decode_record(line) == seg
    assert encode_record(decode_record(line)) == line


def test_decode_score_out_of_range():
    line = encode_record(make_segment()).replace("\t5\t", "\t6\t")
    with pytest.raises(InvariantViolation):
        decode_record(line)


def test_decode_mismatch_requires_score_zero():
    line = "m1\tsrc\ttgt\t2\tmismatch\t\t\t\t0"
    with pytest.raises(InvariantViolation):
        decode_record(line)


def test_decode_professional_requires_score_five():
    line = "p1\tsrc\ttgt\t3\tprofessional\t\t\t\t0"
    with pytest.raises(InvariantViolation):
        decode_record(line)


def test_decode_wrong_field_count():
    with pytest.raises(MalformedRecord):
        decode_record("a\tb\tc")


def test_decode_bad_escape():
    with pytest.raises(MalformedRecord):
        decode_record("i\\x\tsrc\ttgt\t5\tprofessional\t\t\t\t0")


def test_score_zero_exclusive_to_mismatch():
    with pytest.raises(InvariantViolation):
        make_segment(score=0, origin=Origin.PROFESSIONAL)
    seg = make_segment(score=0, origin=Origin.MISMATCH)
    assert seg.score == 0


def test_unscored_only_before_annotation():
    seg = make_segment(score=None, origin=Origin.CONSENSUS_FILTERED)
    assert decode_record(encode_record(seg)) == seg
    with pytest.raises(InvariantViolation):
        make_segment(score=None, origin=Origin.PROFESSIONAL)


def test_morph_error_requires_error_count_and_parent():
    seg = make_segment(
        score=4, origin=Origin.MORPH_ERROR, parent="seg-parent", error_count=1
    )
    assert decode_record(encode_record(seg)) == seg
    with pytest.raises(InvariantViolation):
        make_segment(score=4, origin=Origin.MORPH_ERROR, parent="p", error_count=3)
    with pytest.raises(InvariantViolation):
        make_segment(score=4, origin=Origin.MORPH_ERROR, error_count=1)


_ORIGINS_WITH_SCORE = [
    (Origin.HUMAN_RANKED, (1, 5), False),
    (Origin.PROFESSIONAL, (5, 5), False),
    (Origin.MORPH_ERROR, (1, 5), True),
    (Origin.ORDER_SWAP, (1, 5), True),
    (Origin.ORDER_SHIFT2, (1, 5), True),
    (Origin.ORDER_SHUFFLE, (1, 5), True),
    (Origin.MISMATCH, (0, 0), False),
]

_text = st.text(
    alphabet=st.characters(codec="utf-8", exclude_characters="\x00"),
    min_size=1,
    max_size=40,
)


@st.composite
def segments(draw) -> ScoredSegment:
    origin, (lo, hi), needs_parent = draw(st.sampled_from(_ORIGINS_WITH_SCORE))
    error_count = draw(st.sampled_from([1, 2])) if origin is Origin.MORPH_ERROR else 0
    return ScoredSegment(
        id=draw(st.uuids()).hex,
        source=draw(_text),
        target=draw(_text),
        score=draw(st.integers(lo, hi)),
        origin=origin,
        parent=draw(_text) if needs_parent else draw(st.none() | _text) if origin is Origin.HUMAN_RANKED else None,
        engine=draw(st.none() | st.sampled_from(["engine_a", "engine_b"])),
        agreement=draw(st.none() | st.floats(0, 1, allow_nan=False)),
        error_count=error_count,
    )


@settings(max_examples=300, derandomize=True)
@given(segments())
def test_round_trip_property(seg: ScoredSegment):
    line = encode_record(seg)
    decoded = decode_record(line)
    assert decoded == seg
    assert encode_record(decoded) == line


def test_round_trip_1000_random_records():
    rng = random.Random(777)
    alphabet = "ab\tc\nd\\e אב"
    for i in range(1000):
        text = lambda: "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 30)))
        seg = ScoredSegment(
            id=f"r{i}",
            source=text(),
            target=text(),
            score=rng.randint(1, 5),
            origin=Origin.HUMAN_RANKED,
        )
        assert decode_record(encode_record(seg)) == seg


def test_manifest_counts_empty():
    manifest = build_manifest([])
    assert manifest.total == 0
    assert all(v == 0 for v in manifest.counts_per_score.values())


def test_manifest_counts_small():
    segs = [
        make_segment("a", score=5),
        make_segment("b", score=5),
        make_segment("c", score=3, origin=Origin.HUMAN_RANKED),
    ]
    manifest = build_manifest(segs)
    assert manifest.counts_per_score[5] == 2
    assert manifest.counts_per_score[3] == 1
    assert manifest.counts_per_origin["professional"] == 2
    assert manifest.total == 3


def test_agreement_out_of_range_rejected():
    with pytest.raises(InvariantViolation):
        make_segment(agreement=1.5)
    with pytest.raises(InvariantViolation):
        make_segment(agreement=-0.1)
    assert make_segment(agreement=0.0).agreement == 0.0
    assert make_segment(agreement=1.0).agreement == 1.0


def test_manifest_params_escape_round_trip(tmp_path):
    manifest = build_manifest([make_segment("a")])
    manifest.log_stage("tricky", path="dir\twith\ttabs", note="line\nbreak")
    path = tmp_path / "weird.manifest"
    write_manifest(path, manifest)
    loaded = read_manifest(path)
    assert loaded.stage_log == [
        ("tricky", {"note": "line\nbreak", "path": "dir\twith\ttabs"})
    ]


def test_manifest_round_trip(tmp_path):
    manifest = build_manifest([make_segment("a"), make_segment("b")])
    manifest.seed = 99
    manifest.log_stage("filter", threshold=0.85, kept=2)
    path = tmp_path / "ds.tsv.manifest"
    write_manifest(path, manifest)
    loaded = read_manifest(path)
    assert loaded.seed == 99
    assert loaded.counts_per_score == manifest.counts_per_score
    assert loaded.counts_per_origin == manifest.counts_per_origin
    assert loaded.stage_log == [("filter", {"threshold": "0.85", "kept": "2"})]
