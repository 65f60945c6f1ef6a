"""Record types and the on-disk dataset format.

A dataset is UTF-8 text, one record per LF-terminated line, nine
tab-separated fields in fixed order:

    id  source  target  score  origin  parent  engine  agreement  error_count

Tab, newline, and backslash inside text fields are backslash-escaped
(``\\t``, ``\\n``, ``\\\\``). Optional fields (score before annotation,
parent, engine, agreement) encode as empty strings. A manifest sidecar
``<dataset>.manifest`` carries exact per-score and per-origin counts, the
governing seed, and the stage log.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import InvariantViolation, MalformedRecord

__all__ = [
    "Origin",
    "ScoredSegment",
    "DatasetManifest",
    "ORDER_PENALTIES",
    "clamp_score",
    "derived_id",
    "encode_record",
    "decode_record",
    "build_manifest",
    "read_dataset",
    "write_dataset",
    "write_manifest",
    "read_manifest",
]

SCORE_MIN = 0
SCORE_MAX = 5
PERTURBED_SCORE_FLOOR = 1  # score 0 is reserved for mismatched pairs


class Origin(enum.Enum):
    """How a record entered the dataset. Exactly one kind per record."""

    HUMAN_RANKED = "human_ranked"
    PROFESSIONAL = "professional"
    CONSENSUS_FILTERED = "consensus_filtered"
    MORPH_ERROR = "morph_error"
    ORDER_SWAP = "order_swap"
    ORDER_SHIFT2 = "order_shift2"
    ORDER_SHUFFLE = "order_shuffle"
    MISMATCH = "mismatch"


# Word-order operators carry fixed score penalties.
ORDER_PENALTIES = {
    Origin.ORDER_SWAP: 1,
    Origin.ORDER_SHIFT2: 2,
    Origin.ORDER_SHUFFLE: 3,
}


def clamp_score(value: int) -> int:
    """Clamp a derived score to the perturbed-record range [1, 5]."""
    return max(PERTURBED_SCORE_FLOOR, min(SCORE_MAX, value))


def derived_id(parent_id: str, op: str, ordinal: int) -> str:
    """Id for a variant derived from ``parent_id``: ``<parent>#<op>#<n>``."""
    return f"{parent_id}#{op}#{ordinal}"


@dataclass(frozen=True, slots=True)
class ScoredSegment:
    """A source/target sentence pair with quality score and lineage.

    ``score`` is None only for consensus-filtered records that have not been
    annotated yet; every other origin requires an integer in [0, 5], with 0
    reserved exclusively for mismatched pairs.
    """

    id: str
    source: str
    target: str
    score: int | None
    origin: Origin
    parent: str | None = None
    engine: str | None = None
    agreement: float | None = None
    error_count: int = 0

    def __post_init__(self) -> None:
        if not self.id:
            raise InvariantViolation("empty segment id")
        if not self.source:
            raise InvariantViolation(f"{self.id}: empty source")
        if not self.target:
            raise InvariantViolation(f"{self.id}: empty target")
        if self.score is None:
            if self.origin is not Origin.CONSENSUS_FILTERED:
                raise InvariantViolation(
                    f"{self.id}: missing score allowed only before annotation "
                    f"(origin consensus_filtered), got {self.origin.value}"
                )
        else:
            if not SCORE_MIN <= self.score <= SCORE_MAX:
                raise InvariantViolation(f"{self.id}: score {self.score} outside 0..5")
            if (self.score == 0) != (self.origin is Origin.MISMATCH):
                raise InvariantViolation(
                    f"{self.id}: score 0 and origin mismatch imply each other "
                    f"(score={self.score}, origin={self.origin.value})"
                )
        if self.origin is Origin.PROFESSIONAL and self.score != 5:
            raise InvariantViolation(f"{self.id}: professional records enter with score 5")
        if self.origin is Origin.MORPH_ERROR:
            if self.error_count not in (1, 2):
                raise InvariantViolation(
                    f"{self.id}: morph_error requires error_count in {{1,2}}, "
                    f"got {self.error_count}"
                )
            if self.parent is None:
                raise InvariantViolation(f"{self.id}: morph_error requires a parent")
        elif self.error_count != 0:
            raise InvariantViolation(
                f"{self.id}: error_count {self.error_count} on non-morph origin"
            )
        if self.origin in ORDER_PENALTIES and self.parent is None:
            raise InvariantViolation(f"{self.id}: {self.origin.value} requires a parent")
        if self.agreement is not None and not 0.0 <= self.agreement <= 1.0:
            raise InvariantViolation(f"{self.id}: agreement {self.agreement} outside [0,1]")

    def with_score(self, score: int, origin: Origin) -> "ScoredSegment":
        return replace(self, score=score, origin=origin)


@dataclass(slots=True)
class DatasetManifest:
    """Exact counts plus the parameters that produced a dataset."""

    counts_per_score: dict[int, int]
    counts_per_origin: dict[str, int]
    seed: int = 0
    stage_log: list[tuple[str, dict[str, str]]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(self.counts_per_score.values())

    def log_stage(self, name: str, **params: object) -> None:
        self.stage_log.append((name, {k: str(v) for k, v in sorted(params.items())}))


_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n"}


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unescape(text: str) -> str:
    if "\\" not in text:
        return text
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\":
            if i + 1 >= n:
                raise MalformedRecord("dangling backslash")
            key = text[i + 1]
            if key not in _UNESCAPES:
                raise MalformedRecord(f"invalid escape \\{key}")
            out.append(_UNESCAPES[key])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def encode_record(seg: ScoredSegment) -> str:
    """One dataset line (no trailing newline) for a valid record."""
    fields = [
        _escape(seg.id),
        _escape(seg.source),
        _escape(seg.target),
        "" if seg.score is None else str(seg.score),
        seg.origin.value,
        _escape(seg.parent) if seg.parent is not None else "",
        _escape(seg.engine) if seg.engine is not None else "",
        repr(seg.agreement) if seg.agreement is not None else "",
        str(seg.error_count),
    ]
    return "\t".join(fields)


def decode_record(line: str) -> ScoredSegment:
    """Parse one dataset line back into a fully validated record.

    Raises MalformedRecord on syntax problems and InvariantViolation when
    the parsed values break a type invariant.
    """
    line = line.rstrip("\n")
    parts = line.split("\t")
    if len(parts) != 9:
        raise MalformedRecord(f"expected 9 fields, got {len(parts)}")
    raw_id, raw_src, raw_tgt, raw_score, raw_origin, raw_parent, raw_engine, raw_agree, raw_ec = parts

    if raw_score == "":
        score: int | None = None
    else:
        try:
            score = int(raw_score)
        except ValueError as exc:
            raise MalformedRecord(f"score {raw_score!r} is not an integer") from exc
    try:
        origin = Origin(raw_origin)
    except ValueError as exc:
        raise MalformedRecord(f"unknown origin {raw_origin!r}") from exc
    if raw_agree == "":
        agreement: float | None = None
    else:
        try:
            agreement = float(raw_agree)
        except ValueError as exc:
            raise MalformedRecord(f"agreement {raw_agree!r} is not a number") from exc
    try:
        error_count = int(raw_ec)
    except ValueError as exc:
        raise MalformedRecord(f"error_count {raw_ec!r} is not an integer") from exc
    if error_count < 0:
        raise InvariantViolation(f"error_count {error_count} negative")

    return ScoredSegment(
        id=_unescape(raw_id),
        source=_unescape(raw_src),
        target=_unescape(raw_tgt),
        score=score,
        origin=origin,
        parent=_unescape(raw_parent) if raw_parent != "" else None,
        engine=_unescape(raw_engine) if raw_engine != "" else None,
        agreement=agreement,
        error_count=error_count,
    )


def build_manifest(dataset: Sequence[ScoredSegment] | Iterable[ScoredSegment]) -> DatasetManifest:
    """Exact per-score and per-origin counts; empty dataset yields zeros."""
    per_score = {s: 0 for s in range(SCORE_MIN, SCORE_MAX + 1)}
    per_origin = {o.value: 0 for o in Origin}
    for seg in dataset:
        if seg.score is not None:
            per_score[seg.score] += 1
        per_origin[seg.origin.value] += 1
    return DatasetManifest(counts_per_score=per_score, counts_per_origin=per_origin)


def write_dataset(path: str | Path, dataset: Iterable[ScoredSegment]) -> int:
    """Write records one per line; returns the record count."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for seg in dataset:
            fh.write(encode_record(seg))
            fh.write("\n")
            count += 1
    return count


def read_dataset(path: str | Path) -> list[ScoredSegment]:
    return list(iter_dataset(path))


def iter_dataset(path: str | Path) -> Iterator[ScoredSegment]:
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield decode_record(line)
            except (MalformedRecord, InvariantViolation) as exc:
                raise type(exc)(f"{path}:{lineno}: {exc}") from exc


def manifest_path(dataset_path: str | Path) -> Path:
    return Path(str(dataset_path) + ".manifest")


def write_manifest(path: str | Path, manifest: DatasetManifest) -> None:
    """Deterministic text sidecar: fixed key order, sorted parameters."""
    lines = [f"total\t{manifest.total}", f"seed\t{manifest.seed}"]
    for score in range(SCORE_MIN, SCORE_MAX + 1):
        lines.append(f"score\t{score}\t{manifest.counts_per_score.get(score, 0)}")
    for origin in Origin:
        lines.append(f"origin\t{origin.value}\t{manifest.counts_per_origin.get(origin.value, 0)}")
    for stage, params in manifest.stage_log:
        cells = [f"{k}={_escape(v)}" for k, v in sorted(params.items())]
        lines.append("\t".join(["stage", stage, *cells]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_manifest(path: str | Path) -> DatasetManifest:
    manifest = DatasetManifest(counts_per_score={}, counts_per_origin={})
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            kind = parts[0]
            if kind == "seed":
                manifest.seed = int(parts[1])
            elif kind == "score":
                manifest.counts_per_score[int(parts[1])] = int(parts[2])
            elif kind == "origin":
                manifest.counts_per_origin[parts[1]] = int(parts[2])
            elif kind == "stage":
                params = {}
                for cell in parts[2:]:
                    key, _, value = cell.partition("=")
                    params[key] = _unescape(value)
                manifest.stage_log.append((parts[1], params))
    return manifest
