"""Human ranking workflow: rubric rules, durable store, HTTP service.

Judgments append to a line-delimited log (same escaping as the dataset
format) and are acknowledged only after a flushed, fsynced write, so
replaying the log after a crash reconstructs the exact pre-crash state.
Submissions for the same (segment, annotator) supersede each other at
export time; the raw score is preserved and the source-quality cap is
applied when exporting.
"""

from __future__ import annotations

import enum
import json
import os
import re
import threading
import unicodedata
from collections.abc import Sequence
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlparse

from .errors import MalformedRecord, UnknownSegment, ValidationError
from .records import Origin, ScoredSegment, encode_record

__all__ = [
    "Severity",
    "SourceFlag",
    "AnnotationRecord",
    "AnnotationStore",
    "lint_source",
    "effective_score",
    "read_scores_file",
    "apply_scores",
    "create_server",
    "SCALE_LABELS",
    "SEVERITY_DEFINITIONS",
    "SOURCE_ILLOGICAL_COMMENT",
]


class Severity(enum.Enum):
    NEUTRAL = "neutral"
    MINOR = "minor"
    MAJOR = "major"


class SourceFlag(enum.Enum):
    CLEAN = "clean"
    IRRELEVANT_CHARS = "irrelevant_chars"


# Ranking scale shown to annotators; score buttons carry these definitions.
SCALE_LABELS = {
    5: "excellent translation; no corrections needed",
    4: "good translation; minor improvement(s) need to be made",
    3: "medium translation; major improvement(s) need to be made",
    2: "poor translation; many improvements need to be made",
    1: "extremely poor translation",
}

SEVERITY_DEFINITIONS = {
    Severity.NEUTRAL: "fine: stylistic preference only, nothing crucial to fix",
    Severity.MINOR: "inaccurate: hurts precision without really changing the meaning",
    Severity.MAJOR: "problematic: critically changes accuracy or interpretation",
}

# Conventional comment marking an illogical source whose translation was not
# reviewed (such sources get score 1 regardless of the target side).
SOURCE_ILLOGICAL_COMMENT = "source illogical"

# Cap applied to segments whose source carries irrelevant characters.
IRRELEVANT_SOURCE_MAX_SCORE = 3

_MARKUP_CHARS = ("\\", "^", "{", "}")
_CURRENCY = re.compile(r"\$\d")


def lint_source(text: str) -> SourceFlag:
    """Flag sources containing mojibake, markup, or formula fragments.

    Rules, in order: any control character or U+FFFD; any of ``\\ ^ { }``;
    two or more dollar signs (inline-math spans); a lone dollar sign that
    is not a currency amount.
    """
    if not text:
        raise ValueError("empty source text")
    for ch in text:
        if ch == "\ufffd" or unicodedata.category(ch) == "Cc":
            return SourceFlag.IRRELEVANT_CHARS
    if any(ch in text for ch in _MARKUP_CHARS):
        return SourceFlag.IRRELEVANT_CHARS
    dollars = text.count("$")
    if dollars >= 2:
        return SourceFlag.IRRELEVANT_CHARS
    if dollars == 1 and not _CURRENCY.search(text):
        return SourceFlag.IRRELEVANT_CHARS
    return SourceFlag.CLEAN


def effective_score(raw: int, flag: SourceFlag) -> int:
    """Raw score capped at 3 when the source is flagged, unchanged otherwise."""
    if flag is SourceFlag.IRRELEVANT_CHARS:
        return min(raw, IRRELEVANT_SOURCE_MAX_SCORE)
    return raw


@dataclass(frozen=True, slots=True)
class AnnotationRecord:
    """One human judgment as persisted in the log."""

    segment_id: str
    annotator: str
    score: int
    severities: tuple[Severity, ...]
    source_flag: SourceFlag
    comment: str | None = None
    sequence_number: int = 0
    token: str | None = None

    @property
    def translation_unreviewed(self) -> bool:
        return self.score == 1 and self.comment == SOURCE_ILLOGICAL_COMMENT

    @property
    def effective_score(self) -> int:
        return effective_score(self.score, self.source_flag)


_LOG_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n"}
_LOG_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n"}


def _log_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _log_unescape(text: str) -> str:
    if "\\" not in text:
        return text
    out = []
    i = 0
    while i < len(text):
        if text[i] == "\\":
            if i + 1 >= len(text) or text[i + 1] not in _LOG_UNESCAPES:
                raise MalformedRecord(f"bad escape in log field {text!r}")
            out.append(_LOG_UNESCAPES[text[i + 1]])
            i += 2
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def _encode_annotation(rec: AnnotationRecord) -> str:
    return "\t".join(
        [
            str(rec.sequence_number),
            _log_escape(rec.segment_id),
            _log_escape(rec.annotator),
            str(rec.score),
            ",".join(s.value for s in rec.severities),
            rec.source_flag.value,
            _log_escape(rec.comment) if rec.comment is not None else "",
            _log_escape(rec.token) if rec.token is not None else "",
        ]
    )


def _decode_annotation(line: str) -> AnnotationRecord:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 8:
        raise MalformedRecord(f"expected 8 log fields, got {len(parts)}")
    seq, seg_id, annotator, score, severities, flag, comment, token = parts
    return AnnotationRecord(
        segment_id=_log_unescape(seg_id),
        annotator=_log_unescape(annotator),
        score=int(score),
        severities=tuple(Severity(s) for s in severities.split(",") if s),
        source_flag=SourceFlag(flag),
        comment=_log_unescape(comment) if comment != "" else None,
        sequence_number=int(seq),
        token=_log_unescape(token) if token != "" else None,
    )


class AnnotationStore:
    """Segment queue plus an append-only judgment log.

    All writes serialize through one lock; acknowledgment happens only
    after the log line is flushed and fsynced. Re-submissions with the same
    idempotency token return the original sequence number without writing.
    """

    def __init__(
        self,
        segments: Sequence[ScoredSegment],
        log_path: str | Path,
        primary_annotator: str | None = None,
    ) -> None:
        self._segments: dict[str, ScoredSegment] = {}
        for seg in segments:
            if seg.id in self._segments:
                raise ValueError(f"duplicate segment id {seg.id}")
            self._segments[seg.id] = seg
        self._order = sorted(self._segments)
        self._flags = {
            seg_id: lint_source(seg.source) for seg_id, seg in self._segments.items()
        }
        self._log_path = Path(log_path)
        self._primary = primary_annotator
        self._lock = threading.Lock()
        self._next_seq = 1
        # (segment, annotator) -> latest record; (segment, annotator, token) -> seq
        self._latest: dict[tuple[str, str], AnnotationRecord] = {}
        self._token_acks: dict[tuple[str, str, str], int] = {}
        self._replay()
        self._log_file = open(self._log_path, "a", encoding="utf-8", newline="\n")

    def close(self) -> None:
        self._log_file.close()

    def _replay(self) -> None:
        if not self._log_path.exists():
            return
        with open(self._log_path, "r", encoding="utf-8", newline="\n") as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = _decode_annotation(line)
                self._apply(rec)
                self._next_seq = max(self._next_seq, rec.sequence_number + 1)

    def _apply(self, rec: AnnotationRecord) -> None:
        key = (rec.segment_id, rec.annotator)
        current = self._latest.get(key)
        if current is None or rec.sequence_number > current.sequence_number:
            self._latest[key] = rec
        if rec.token is not None:
            self._token_acks[(rec.segment_id, rec.annotator, rec.token)] = (
                rec.sequence_number
            )

    @property
    def total_segments(self) -> int:
        return len(self._segments)

    def segment(self, segment_id: str) -> ScoredSegment:
        try:
            return self._segments[segment_id]
        except KeyError:
            raise UnknownSegment(segment_id) from None

    def submit(
        self,
        segment_id: str,
        annotator: str,
        score: int,
        severities: Sequence[Severity | str] = (),
        comment: str | None = None,
        token: str | None = None,
    ) -> int:
        """Validate, durably append, and return the sequence number."""
        if segment_id not in self._segments:
            raise UnknownSegment(segment_id)
        if not annotator or not annotator.strip():
            raise ValidationError("annotator", "must be non-empty")
        if not isinstance(score, int) or isinstance(score, bool) or not 1 <= score <= 5:
            raise ValidationError("score", f"must be an integer in 1..5, got {score!r}")
        parsed: list[Severity] = []
        for sev in severities:
            if isinstance(sev, Severity):
                parsed.append(sev)
            else:
                try:
                    parsed.append(Severity(sev))
                except ValueError:
                    raise ValidationError("severities", f"unknown severity {sev!r}") from None
        with self._lock:
            if token is not None:
                acked = self._token_acks.get((segment_id, annotator, token))
                if acked is not None:
                    return acked
            rec = AnnotationRecord(
                segment_id=segment_id,
                annotator=annotator,
                score=score,
                severities=tuple(parsed),
                source_flag=self._flags[segment_id],
                comment=comment,
                sequence_number=self._next_seq,
                token=token,
            )
            self._log_file.write(_encode_annotation(rec) + "\n")
            self._log_file.flush()
            os.fsync(self._log_file.fileno())
            self._next_seq += 1
            self._apply(rec)
            return rec.sequence_number

    def next_segment(self, annotator: str) -> ScoredSegment | None:
        """Lowest-id segment this annotator has not scored; None when done."""
        for seg_id in self._order:
            if (seg_id, annotator) not in self._latest:
                return self._segments[seg_id]
        return None

    def progress(self) -> dict:
        by_annotator: dict[str, int] = {}
        for _, annotator in self._latest:
            by_annotator[annotator] = by_annotator.get(annotator, 0) + 1
        return {
            "total": self.total_segments,
            "annotated_by_annotator": dict(sorted(by_annotator.items())),
        }

    def export_ranked(self) -> list[ScoredSegment]:
        """One human_ranked record per annotated segment, ordered by id.

        The configured primary annotator's latest judgment wins; without
        one (or when the primary skipped a segment) the newest judgment
        overall is used. Effective scores apply the source-quality cap.
        """
        by_segment: dict[str, list[AnnotationRecord]] = {}
        for (seg_id, _), rec in self._latest.items():
            by_segment.setdefault(seg_id, []).append(rec)
        out = []
        for seg_id in self._order:
            records = by_segment.get(seg_id)
            if not records:
                continue
            if self._primary is not None:
                primary = [r for r in records if r.annotator == self._primary]
                chosen = max(primary or records, key=lambda r: r.sequence_number)
            else:
                chosen = max(records, key=lambda r: r.sequence_number)
            seg = self._segments[seg_id]
            out.append(
                ScoredSegment(
                    id=seg.id,
                    source=seg.source,
                    target=seg.target,
                    score=chosen.effective_score,
                    origin=Origin.HUMAN_RANKED,
                    parent=seg.parent,
                    engine=seg.engine,
                    agreement=seg.agreement,
                )
            )
        return out


def read_scores_file(path: str | Path) -> dict[str, int]:
    """2-column TSV: segment id -> human score in 1..5."""
    scores: dict[str, int] = {}
    with open(path, "r", encoding="utf-8", newline="\n") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split("\t")
            if len(cells) != 2:
                raise MalformedRecord(f"{path}:{lineno}: expected 2 columns")
            score = int(cells[1])
            if not 1 <= score <= 5:
                raise MalformedRecord(f"{path}:{lineno}: score {score} outside 1..5")
            scores[cells[0]] = score
    return scores


def apply_scores(
    segments: Sequence[ScoredSegment], scores: dict[str, int]
) -> list[ScoredSegment]:
    """Turn unscored filtered segments into human_ranked records.

    Stand-in for a live annotation session: scores come from a file keyed by
    segment id. The source-quality cap applies exactly as it would at
    export. Segments without a score are dropped (still awaiting ranking).
    """
    out = []
    for seg in segments:
        raw = scores.get(seg.id)
        if raw is None:
            continue
        out.append(
            ScoredSegment(
                id=seg.id,
                source=seg.source,
                target=seg.target,
                score=effective_score(raw, lint_source(seg.source)),
                origin=Origin.HUMAN_RANKED,
                parent=seg.parent,
                engine=seg.engine,
                agreement=seg.agreement,
            )
        )
    return out


def _rubric_html() -> str:
    scale_rows = "\n".join(
        f"      <li><strong>{score}</strong> \u2013 {label}</li>"
        for score, label in sorted(SCALE_LABELS.items(), reverse=True)
    )
    severity_rows = "\n".join(
        f"      <li><strong>{sev.value}</strong> ({text})</li>"
        for sev, text in SEVERITY_DEFINITIONS.items()
    )
    return f"""<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>Ranking guidelines</title></head>
<body>
  <h1>Translation ranking guidelines</h1>
  <p>Score each translation on a 1 to 5 scale:</p>
  <ul>
{scale_rows}
  </ul>
  <h2>Error severity</h2>
  <ul>
{severity_rows}
  </ul>
  <h2>Source-text rules</h2>
  <ul>
    <li>A source sentence that is unnatural or irrational gets score 1 and its
        translation is not reviewed (comment "{SOURCE_ILLOGICAL_COMMENT}").</li>
    <li>A source containing strange or irrelevant characters caps the score at
        {IRRELEVANT_SOURCE_MAX_SCORE}, regardless of translation quality.</li>
  </ul>
  <h2>What to weigh</h2>
  <p>Accuracy and terminology, grammar and punctuation, style and tone,
     readability and natural flow, completeness, and whether the translation
     serves the source text's purpose. Literal-but-awkward phrasings and wrong
     word choices are major issues and land in the 2&ndash;3 range depending on
     severity; missing or spurious punctuation is minor and maps to 4.</p>
</body>
</html>
"""


_FALLBACK_INDEX = """<!doctype html>
<html lang="en"><head><meta charset="utf-8"><title>Annotation service</title></head>
<body>
  <h1>Annotation service</h1>
  <p>No UI assets configured (start with --assets DIR to serve the app).</p>
  <p>API: GET /api/segments/next?annotator=NAME &middot;
     POST /api/segments/{id}/annotation &middot;
     GET /api/progress &middot; GET /api/export &middot;
     <a href="/rubric">ranking guidelines</a></p>
</body></html>
"""

_ASSET_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json; charset=utf-8",
    ".ico": "image/x-icon",
}

_ANNOTATION_PATH = re.compile(r"^/api/segments/(.+)/annotation$")


class _AnnotationHandler(BaseHTTPRequestHandler):
    """Routes the four API endpoints, the rubric page, and UI assets."""

    store: AnnotationStore
    assets_dir: Path | None = None
    quiet = True

    protocol_version = "HTTP/1.1"

    def log_message(self, format: str, *args) -> None:  # noqa: A002
        if not self.quiet:
            super().log_message(format, *args)

    # The UI is normally served same-origin by this process; permissive CORS
    # keeps dev servers and scripted clients on other ports working too.
    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")

    def do_OPTIONS(self) -> None:  # noqa: N802
        self.send_response(204)
        self._cors()
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self._cors()
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_text(self, status: int, body: str, content_type: str) -> None:
        raw = body.encode("utf-8")
        self.send_response(status)
        self._cors()
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def do_GET(self) -> None:  # noqa: N802
        url = urlparse(self.path)
        if url.path == "/api/segments/next":
            annotator = parse_qs(url.query).get("annotator", [""])[0]
            if not annotator:
                self._send_json(422, {"error": "annotator query parameter required"})
                return
            seg = self.store.next_segment(annotator)
            if seg is None:
                self.send_response(204)
                self.send_header("Content-Length", "0")
                self.end_headers()
                return
            self._send_json(
                200, {"segment_id": seg.id, "source": seg.source, "target": seg.target}
            )
        elif url.path == "/api/progress":
            self._send_json(200, self.store.progress())
        elif url.path == "/api/export":
            lines = [encode_record(seg) for seg in self.store.export_ranked()]
            body = "\n".join(lines) + ("\n" if lines else "")
            self._send_text(200, body, "text/plain; charset=utf-8")
        elif url.path == "/rubric":
            self._send_text(200, _rubric_html(), "text/html; charset=utf-8")
        else:
            self._serve_asset(url.path)

    def _serve_asset(self, path: str) -> None:
        if path in ("", "/"):
            path = "/index.html"
        if self.assets_dir is None:
            if path == "/index.html":
                self._send_text(200, _FALLBACK_INDEX, "text/html; charset=utf-8")
            else:
                self._send_json(404, {"error": "not found"})
            return
        candidate = (self.assets_dir / path.lstrip("/")).resolve()
        if not str(candidate).startswith(str(self.assets_dir.resolve())) or not candidate.is_file():
            self._send_json(404, {"error": "not found"})
            return
        content_type = _ASSET_TYPES.get(candidate.suffix, "application/octet-stream")
        raw = candidate.read_bytes()
        self.send_response(200)
        self._cors()
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def do_POST(self) -> None:  # noqa: N802
        url = urlparse(self.path)
        match = _ANNOTATION_PATH.match(url.path)
        if not match:
            self._send_json(404, {"error": "not found"})
            return
        segment_id = unquote(match.group(1))
        length = int(self.headers.get("Content-Length", "0"))
        try:
            payload = json.loads(self.rfile.read(length).decode("utf-8")) if length else {}
        except json.JSONDecodeError:
            self._send_json(422, {"error": "body is not valid JSON"})
            return
        if not isinstance(payload, dict):
            self._send_json(422, {"error": "body must be a JSON object"})
            return
        try:
            seq = self.store.submit(
                segment_id=segment_id,
                annotator=payload.get("annotator", ""),
                score=payload.get("score"),
                severities=payload.get("severities", []),
                comment=payload.get("comment"),
                token=payload.get("token"),
            )
        except UnknownSegment:
            self._send_json(404, {"error": f"unknown segment {segment_id!r}"})
            return
        except ValidationError as exc:
            self._send_json(422, {"error": str(exc), "field": exc.field})
            return
        self._send_json(201, {"sequence_number": seq})


def create_server(
    store: AnnotationStore,
    host: str = "127.0.0.1",
    port: int = 0,
    assets_dir: str | Path | None = None,
    quiet: bool = True,
) -> ThreadingHTTPServer:
    """A ready-to-run threading HTTP server bound to (host, port).

    Port 0 binds an ephemeral port (inspect ``server_address``). Callers own
    the lifecycle: serve_forever() in a thread, shutdown() to stop.
    """

    handler = type(
        "BoundAnnotationHandler",
        (_AnnotationHandler,),
        {
            "store": store,
            "assets_dir": Path(assets_dir) if assets_dir is not None else None,
            "quiet": quiet,
        },
    )
    return ThreadingHTTPServer((host, port), handler)
