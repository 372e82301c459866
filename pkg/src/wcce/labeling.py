"""HTTP service for collecting per-class-pair reasonableness ratings.

A session covers every ordered pair of distinct classes once per rater, in a
per-rater seeded-shuffled order (so no rater sees a fixed pair sequence).
Two JSON routes drive a client:

* ``GET /session?rater_id=...`` - class names, scale labels, the rater's next
  pending pair, progress, and an optional per-class example-image manifest;
* ``POST /rating`` - one RatingRecord; the row is appended to the output CSV
  and fsynced before the request is acknowledged, so an acknowledged rating
  survives a crash and a restarted server resumes from the file.

Selected pairs may be designated as attention checks with an expected score;
a submission that misses the expectation flags the rater in a sidecar report
but the rating itself is kept.
"""

import csv
import hashlib
import io
import os
import random
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .errors import ValidationError
from .weights import RatingRecord

SCALE_LABELS = (
    "Highly Unreasonable (surprised)",
    "Unreasonable",
    "Neutral",
    "Reasonable",
    "Highly Reasonable (Explicable)",
)
RATINGS_HEADER = ["rater_id", "true_class", "predicted_class", "score"]
ATTENTION_HEADER = ["rater_id", "true_class", "predicted_class", "expected_score", "given_score"]
MAX_GRID_IMAGES = 36  # a 6x6 example grid per class panel
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".gif", ".webp")


@dataclass(frozen=True)
class AttentionCheck:
    true_class: int
    predicted_class: int
    expected_score: int


@dataclass
class LabelingSession:
    """Pair bookkeeping for one labeling run (no I/O; see RatingStore)."""

    session_id: str
    class_names: tuple[str, ...]
    seed: int = 0
    attention_checks: tuple[AttentionCheck, ...] = ()
    image_manifest: "dict | None" = None
    _orders: dict[str, list[tuple[int, int]]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        n = len(self.class_names)
        if n < 2:
            raise ValidationError("empty-input", "a session needs at least two classes")
        self.class_names = tuple(self.class_names)
        pairs = {(c.true_class, c.predicted_class) for c in self.attention_checks}
        for check in self.attention_checks:
            if not (0 <= check.true_class < n and 0 <= check.predicted_class < n):
                raise ValidationError("unknown-pair", f"attention check {check} out of range")
            if check.true_class == check.predicted_class:
                raise ValidationError("unknown-pair", f"attention check {check} is a self-pair")
            if not 0 <= check.expected_score <= 4:
                raise ValidationError("invalid-score", f"attention check {check} expects a 0..4 score")
        if len(pairs) != len(self.attention_checks):
            raise ValidationError("unknown-pair", "duplicate attention-check pairs")

    @property
    def all_pairs(self) -> list[tuple[int, int]]:
        n = len(self.class_names)
        return [(i, j) for i in range(n) for j in range(n) if i != j]

    def pair_order(self, rater_id: str) -> list[tuple[int, int]]:
        """Deterministic per-rater shuffle of the ordered pairs."""
        if rater_id not in self._orders:
            digest = hashlib.sha256(f"{self.seed}:{rater_id}".encode()).digest()
            rng = random.Random(int.from_bytes(digest[:8], "big"))
            order = self.all_pairs
            rng.shuffle(order)
            self._orders[rater_id] = order
        return self._orders[rater_id]

    def next_pair(self, rater_id: str, done: set[tuple[int, int]]):
        for pair in self.pair_order(rater_id):
            if pair not in done:
                return pair
        return None

    def attention_for(self, pair: tuple[int, int]) -> "AttentionCheck | None":
        for check in self.attention_checks:
            if (check.true_class, check.predicted_class) == pair:
                return check
        return None


class RatingStore:
    """Append-only CSV of ratings; every append is flushed and fsynced.

    On construction any existing rows are replayed so a restarted session
    continues where the file left off.
    """

    def __init__(self, path):
        self.path = Path(path)
        self.records: list[RatingRecord] = []
        self.seen: set[tuple[str, int, int]] = set()
        if self.path.exists() and self.path.stat().st_size > 0:
            from .weights import parse_rating_records_csv

            for record in parse_rating_records_csv(self.path.read_text()):
                self.records.append(record)
                self.seen.add((record.rater_id, record.true_class, record.predicted_class))
            self._fh = open(self.path, "a", newline="")
        else:
            self._fh = open(self.path, "w", newline="")
            csv.writer(self._fh, lineterminator="\n").writerow(RATINGS_HEADER)
            self._sync()

    def _sync(self):
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def has(self, rater_id: str, true_class: int, predicted_class: int) -> bool:
        return (rater_id, true_class, predicted_class) in self.seen

    def done_pairs(self, rater_id: str) -> set[tuple[int, int]]:
        return {(t, p) for (r, t, p) in self.seen if r == rater_id}

    def append(self, record: RatingRecord) -> int:
        """Durably write one record; returns the total count so far."""
        writer = csv.writer(self._fh, lineterminator="\n")
        writer.writerow(
            [record.rater_id, record.true_class, record.predicted_class, record.score]
        )
        self._sync()
        self.records.append(record)
        self.seen.add((record.rater_id, record.true_class, record.predicted_class))
        return len(self.records)

    def close(self):
        self._fh.close()


class AttentionReport:
    """Sidecar CSV flagging raters whose attention-check answers missed."""

    def __init__(self, path):
        self.path = Path(path)
        self.flagged: set[str] = set()
        if not self.path.exists() or self.path.stat().st_size == 0:
            with open(self.path, "w", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerow(ATTENTION_HEADER)
        else:
            with open(self.path, newline="") as fh:
                reader = csv.reader(fh)
                next(reader, None)
                for row in reader:
                    if row:
                        self.flagged.add(row[0])

    def flag(self, record: RatingRecord, expected: int):
        with open(self.path, "a", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                [record.rater_id, record.true_class, record.predicted_class, expected, record.score]
            )
            fh.flush()
            os.fsync(fh.fileno())
        self.flagged.add(record.rater_id)


def build_image_manifest(images_dir, class_names) -> dict:
    """Map each class to up to 36 image URLs served from /images.

    Expects one subdirectory per class name under ``images_dir``; classes
    without a directory simply get no grid.
    """
    root = Path(images_dir)
    if not root.is_dir():
        raise ValidationError("unknown-path", f"image directory {root} does not exist")
    manifest = {}
    for name in class_names:
        class_dir = root / name
        if not class_dir.is_dir():
            continue
        files = sorted(
            f.name for f in class_dir.iterdir()
            if f.is_file() and f.suffix.lower() in IMAGE_SUFFIXES
        )[:MAX_GRID_IMAGES]
        if files:
            manifest[name] = [f"/images/{name}/{f}" for f in files]
    return manifest


def parse_attention_csv(text: str) -> tuple[AttentionCheck, ...]:
    """Parse 'true_class,predicted_class,expected_score' rows."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ValidationError("empty-input", "attention checks file is empty") from None
    if header != ["true_class", "predicted_class", "expected_score"]:
        raise ValidationError(
            "malformed-line", "expected header 'true_class,predicted_class,expected_score'", line=1
        )
    checks = []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        try:
            checks.append(AttentionCheck(int(row[0]), int(row[1]), int(row[2])))
        except (ValueError, IndexError):
            raise ValidationError("malformed-line", f"bad row {row!r}", line=lineno) from None
    return tuple(checks)


def create_app(
    session: LabelingSession,
    store: RatingStore,
    attention_report=None,
    images_dir=None,
):
    """FastAPI app exposing the session-fetch and rating-submit routes."""
    app = FastAPI(title="wcce labeling", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["GET", "POST"], allow_headers=["*"]
    )

    n = len(session.class_names)
    total = n * (n - 1)

    def _reject(status: int, kind: str, detail: str):
        return JSONResponse(status_code=status, content={"error": kind, "detail": detail})

    @app.get("/session")
    def get_session(rater_id: str = Query(min_length=1)):
        done = store.done_pairs(rater_id)
        pair = session.next_pair(rater_id, done)
        body = {
            "session_id": session.session_id,
            "class_names": list(session.class_names),
            "scale_labels": list(SCALE_LABELS),
            "progress": {"rated": len(done), "total": total},
            "images": session.image_manifest,
            "done": pair is None,
            "pair": None,
        }
        if pair is not None:
            body["pair"] = {
                "true_class": pair[0],
                "predicted_class": pair[1],
                "true_name": session.class_names[pair[0]],
                "predicted_name": session.class_names[pair[1]],
            }
        return body

    @app.post("/rating")
    async def post_rating(request: Request):
        payload = await request.json()
        for key in ("rater_id", "true_class", "predicted_class", "score"):
            if key not in payload:
                return _reject(400, "invalid-score", f"missing field {key!r}")
        rater_id = str(payload["rater_id"])
        if not rater_id:
            return _reject(400, "invalid-score", "empty rater_id")
        try:
            true_class = int(payload["true_class"])
            predicted_class = int(payload["predicted_class"])
            score = int(payload["score"])
        except (TypeError, ValueError):
            return _reject(400, "invalid-score", "fields must be integers")
        if not 0 <= score <= 4:
            return _reject(400, "invalid-score", f"score {score} outside 0..4")
        if (
            not 0 <= true_class < n
            or not 0 <= predicted_class < n
            or true_class == predicted_class
        ):
            return _reject(
                400, "unknown-pair", f"({true_class}, {predicted_class}) is not a session pair"
            )
        if store.has(rater_id, true_class, predicted_class):
            return _reject(
                409, "duplicate-rating",
                f"rater {rater_id!r} already rated ({true_class}, {predicted_class})",
            )
        record = RatingRecord(rater_id, true_class, predicted_class, score)
        count = store.append(record)
        check = session.attention_for((true_class, predicted_class))
        if check is not None and attention_report is not None and score != check.expected_score:
            attention_report.flag(record, check.expected_score)
        done = store.done_pairs(rater_id)
        return {
            "ok": True,
            "count": count,
            "rater_rated": len(done),
            "total": total,
            "done": len(done) >= total,
        }

    if images_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/images", StaticFiles(directory=str(images_dir)), name="images")

    return app
