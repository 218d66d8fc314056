"""Tracker-output ingestion and the canonical on-disk interchange format.

Two readers are supported:

* OpenFace 2.x ``FeatureExtraction`` CSV (3D landmark columns ``X_i/Y_i/Z_i``,
  pose columns ``pose_Rx/Ry/Rz`` in radians, a ``confidence`` column).
* The JSON-Lines interchange format, version ``browkit/1``: one header object
  followed by one object per frame. This is the only format browkit writes,
  and the contract other emitters (e.g. a MediaPipe extractor) target.

Interchange grammar, one JSON object per line:

    header  {"version": "browkit/1", "tracker", "fps", "camera_distance",
             "condition", "eyebrows_raised", "subject", "schema",
             "units"?: str}
    frame   {"frame": int, "t": float, "conf": float|null, "present": bool,
             "pts": {"<index>": [x, y, z], ...}, "pose"?: [pitch, yaw, roll]}

Dropout frames (tracker returned no face) have ``present: false`` and empty
``pts``; they are always retained, never deleted, so frame counts match the
source video. Numbers are serialized as shortest-round-trip decimal text, so a
write/parse cycle reproduces every coordinate exactly.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ParseError, SchemaError, VersionError
from .schema import LandmarkSchema

INTERCHANGE_VERSION = "browkit/1"

CAMERA_DISTANCES = ("close", "middle", "far", "unknown")
CONDITIONS = ("statement", "polar_q", "content_q", "pitch_up", "pitch_down", "custom")

DEFAULT_CONFIDENCE_THRESHOLD = 0.75
FALLBACK_FPS = 30.0

_HEADER_FIELDS = (
    "version",
    "tracker",
    "fps",
    "camera_distance",
    "condition",
    "eyebrows_raised",
    "subject",
    "schema",
)
_FRAME_FIELDS = ("frame", "t", "conf", "present", "pts")


@dataclass(frozen=True)
class HeadPose:
    """Head rotation in radians. Positive pitch tips the head down (camera convention)."""

    pitch: float
    yaw: float
    roll: float

    def __post_init__(self):
        for name in ("pitch", "yaw", "roll"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} is not finite: {v}")
            if abs(v) >= math.pi:
                raise ValueError(f"|{name}| must be < pi, got {v}")

    def as_array(self) -> np.ndarray:
        return np.array([self.pitch, self.yaw, self.roll], dtype=float)


@dataclass
class LandmarkFrame:
    """One tracked frame: raw indexed points plus schema-resolved role points.

    ``present=False`` marks tracker dropout; such frames carry no points and
    no pose. ``raw`` holds tracker-native indexed coordinates (what the
    interchange file stores); ``points`` holds the role-resolved view used by
    all geometry.
    """

    frame_index: int
    time_s: float
    confidence: float | None
    present: bool
    raw: dict[int, np.ndarray] = field(default_factory=dict)
    points: dict[str, np.ndarray] = field(default_factory=dict)
    pose: HeadPose | None = None


@dataclass
class SequenceMeta:
    tracker: str
    camera_distance: str = "unknown"
    condition: str = "custom"
    eyebrows_raised: bool | None = None
    fps: float = FALLBACK_FPS
    subject: str = ""
    units: str = "unknown"

    def __post_init__(self):
        if self.camera_distance not in CAMERA_DISTANCES:
            raise ValueError(
                f"camera_distance {self.camera_distance!r} not in {CAMERA_DISTANCES}"
            )
        if self.condition not in CONDITIONS:
            raise ValueError(f"condition {self.condition!r} not in {CONDITIONS}")


@dataclass
class LandmarkSequence:
    frames: list[LandmarkFrame]
    meta: SequenceMeta
    schema: LandmarkSchema

    def validate(self) -> None:
        if not self.frames:
            raise ValueError("sequence has no frames")
        if not self.meta.fps > 0:
            raise ValueError(f"fps must be > 0, got {self.meta.fps}")
        last = None
        for f in self.frames:
            if last is not None and f.frame_index <= last:
                raise ValueError(
                    f"frame_index not strictly increasing at {f.frame_index}"
                )
            last = f.frame_index
            if not f.present and (f.raw or f.points):
                raise ValueError(f"dropout frame {f.frame_index} carries points")

    def present_frames(self) -> list[LandmarkFrame]:
        return [f for f in self.frames if f.present]


def _finite3(values, where: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (3,):
        raise ParseError(f"{where}: expected 3 coordinates, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{where}: non-finite coordinate {arr.tolist()}")
    return arr


# ---------------------------------------------------------------------------
# OpenFace CSV

def parse_openface_csv(
    path: str | Path,
    schema: LandmarkSchema,
    confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
    meta: SequenceMeta | None = None,
) -> LandmarkSequence:
    """Parse an OpenFace FeatureExtraction CSV into a LandmarkSequence.

    Only the columns the schema needs are read (plus pose, confidence, and the
    optional frame/timestamp/success bookkeeping columns); extra columns are
    ignored. Rows with confidence below the threshold, or with success=0 when
    a success column exists, become dropout frames with their landmark cells
    left unread.

    ``meta`` supplies recording metadata the CSV cannot carry (camera
    distance, condition, subject); its tracker/units/fps fields are
    overwritten from the file.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, skipinitialspace=True)
        if reader.fieldnames is None:
            raise ParseError(f"{path}: empty file")
        columns = {name.strip(): name for name in reader.fieldnames}

        needed = ["confidence", "pose_Rx", "pose_Ry", "pose_Rz"]
        for idx in schema.all_indices:
            needed += [f"X_{idx}", f"Y_{idx}", f"Z_{idx}"]
        missing = [c for c in needed if c not in columns]
        if missing:
            raise SchemaError(f"{path}: missing required column(s) {missing}")

        def cell(row, name, rownum) -> float:
            text = row.get(columns[name], "")
            try:
                value = float(text)
            except (TypeError, ValueError):
                raise ParseError(
                    f"{path}: row {rownum}, column {name!r}: unparseable value {text!r}"
                ) from None
            if not math.isfinite(value):
                raise ParseError(f"{path}: row {rownum}, column {name!r}: non-finite value")
            return value

        frames: list[LandmarkFrame] = []
        times: list[float] = []
        for rownum, row in enumerate(reader):
            frame_index = (
                int(cell(row, "frame", rownum)) - 1 if "frame" in columns else rownum
            )
            time_s = (
                cell(row, "timestamp", rownum)
                if "timestamp" in columns
                else rownum / FALLBACK_FPS
            )
            conf = cell(row, "confidence", rownum)
            ok = conf >= confidence_threshold
            if "success" in columns and cell(row, "success", rownum) == 0:
                ok = False
            if not ok:
                frames.append(
                    LandmarkFrame(frame_index, time_s, conf, present=False)
                )
                times.append(time_s)
                continue
            raw = {
                idx: np.array(
                    [cell(row, f"{ax}_{idx}", rownum) for ax in ("X", "Y", "Z")]
                )
                for idx in schema.all_indices
            }
            pose = HeadPose(
                cell(row, "pose_Rx", rownum),
                cell(row, "pose_Ry", rownum),
                cell(row, "pose_Rz", rownum),
            )
            frames.append(
                LandmarkFrame(
                    frame_index,
                    time_s,
                    conf,
                    present=True,
                    raw=raw,
                    points=schema.resolve(raw),
                    pose=pose,
                )
            )
            times.append(time_s)

    if not frames:
        raise ParseError(f"{path}: no data rows")

    span = times[-1] - times[0]
    fps = (len(times) - 1) / span if len(times) > 1 and span > 0 else FALLBACK_FPS
    if meta is None:
        meta = SequenceMeta(tracker="openface")
    meta = replace(meta, tracker="openface", fps=fps, units="mm")
    seq = LandmarkSequence(frames=frames, meta=meta, schema=schema)
    seq.validate()
    return seq


# ---------------------------------------------------------------------------
# Interchange JSON-Lines

def write_interchange(seq: LandmarkSequence, path: str | Path) -> None:
    """Write a sequence as browkit/1 JSON-Lines (atomically: temp file + rename)."""
    seq.validate()
    m = seq.meta
    header = {
        "version": INTERCHANGE_VERSION,
        "tracker": m.tracker,
        "fps": float(m.fps),
        "camera_distance": m.camera_distance,
        "condition": m.condition,
        "eyebrows_raised": None if m.eyebrows_raised is None else bool(m.eyebrows_raised),
        "subject": m.subject,
        "schema": seq.schema.to_dict(),
        "units": m.units,
    }
    lines = [json.dumps(header)]
    for f in seq.frames:
        obj = {
            "frame": int(f.frame_index),
            "t": float(f.time_s),
            "conf": None if f.confidence is None else float(f.confidence),
            "present": bool(f.present),
            "pts": {str(i): [float(v) for v in f.raw[i]] for i in sorted(f.raw)},
        }
        if f.pose is not None:
            obj["pose"] = [float(f.pose.pitch), float(f.pose.yaw), float(f.pose.roll)]
        lines.append(json.dumps(obj))
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def parse_interchange(path: str | Path) -> LandmarkSequence:
    """Read a browkit/1 JSON-Lines file; inverse of write_interchange."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(f"{path}: empty file")

    def load(lineno: int) -> dict:
        try:
            obj = json.loads(lines[lineno])
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {lineno + 1}: invalid JSON ({exc.msg})") from None
        if not isinstance(obj, dict):
            raise ParseError(f"{path}: line {lineno + 1}: expected an object")
        return obj

    header = load(0)
    for fld in _HEADER_FIELDS:
        if fld not in header:
            raise ParseError(f"{path}: header missing field {fld!r}")
    if header["version"] != INTERCHANGE_VERSION:
        raise VersionError(
            f"{path}: unsupported interchange version {header['version']!r}"
            f" (expected {INTERCHANGE_VERSION!r})"
        )
    schema = LandmarkSchema.from_dict(header["schema"])
    try:
        meta = SequenceMeta(
            tracker=header["tracker"],
            camera_distance=header["camera_distance"],
            condition=header["condition"],
            eyebrows_raised=header["eyebrows_raised"],
            fps=float(header["fps"]),
            subject=header["subject"],
            units=header.get("units", "unknown"),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: header: {exc}") from None

    frames: list[LandmarkFrame] = []
    for lineno in range(1, len(lines)):
        if not lines[lineno].strip():
            continue
        obj = load(lineno)
        for fld in _FRAME_FIELDS:
            if fld not in obj:
                raise ParseError(f"{path}: line {lineno + 1}: frame missing field {fld!r}")
        present = bool(obj["present"])
        pts = obj["pts"]
        if not present and pts:
            raise ParseError(f"{path}: line {lineno + 1}: dropout frame carries points")
        try:
            raw = {
                int(k): _finite3(v, f"{path}: line {lineno + 1}, index {k}")
                for k, v in pts.items()
            }
        except ValueError:
            raise ParseError(f"{path}: line {lineno + 1}: non-integer point index") from None
        pose = None
        if obj.get("pose") is not None:
            p = obj["pose"]
            if not (isinstance(p, list) and len(p) == 3):
                raise ParseError(f"{path}: line {lineno + 1}: pose must be [pitch, yaw, roll]")
            try:
                pose = HeadPose(*(float(v) for v in p))
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno + 1}: {exc}") from None
        frames.append(
            LandmarkFrame(
                frame_index=int(obj["frame"]),
                time_s=float(obj["t"]),
                confidence=None if obj["conf"] is None else float(obj["conf"]),
                present=present,
                raw=raw,
                points=schema.resolve(raw) if present else {},
                pose=pose,
            )
        )
    seq = LandmarkSequence(frames=frames, meta=meta, schema=schema)
    seq.validate()
    return seq
