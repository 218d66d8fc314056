"""Synthetic face-landmark sequences with known ground truth.

Real recordings cannot say what a tracker *should* have measured; these
scenarios can. A rigid face template is posed frame by frame (head pitch
about a neck pivot, optional eyebrow raise), producing a truth sequence, and
a distortion operator then produces the tracker-like observed sequence.

Coordinates: x to the screen right, y up, z toward the camera; template
units are arbitrary. Head rotation is applied about a pivot below the upper
nose point. Under the Rz*Ry*Rx convention a positive stored pitch tips the
head down, so the head-up angle used by the distortion laws is u = -pitch.

Distortion kinds:

* ``none``       observed == truth.
* ``mph_like``   perpendicular offsets from the eye line scale by
                 s = 1 - k*u (head up squishes the model, head down
                 stretches it); an optional raise interaction adds extra
                 squish for raised brows under upward pitch only.
* ``of_like``    s = 1 + k*u, the mirror-image pattern.
* ``custom``     brow points slide along their perpendicular-offset
                 direction by coeff_pitch*pitch + coeff_yaw*yaw +
                 coeff_roll*roll: an exactly linear, additive distance
                 distortion, the regime a linear correction model can remove
                 completely.

All kinds accept Gaussian jitter on the brow offsets and a dropout rule
(frames with head-up angle past a threshold go absent with a given
probability). Generation is bit-deterministic for a fixed seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ParseError
from .geometry import euler_to_matrix
from .landmark_io import HeadPose, LandmarkFrame, LandmarkSequence, SequenceMeta
from .metrics import BrowTrace
from .schema import REQUIRED_ROLES, LandmarkSchema

BROW_ROLES = ("inner_brow_L", "inner_brow_R", "outer_brow_L", "outer_brow_R")

DEFAULT_NECK_DROP = 12.0

_DEFAULT_POINTS = {
    "inner_eye_L": (-1.0, 0.0, 0.0),
    "inner_eye_R": (1.0, 0.0, 0.0),
    "upper_nose": (0.0, 0.35, 0.55),
    "inner_brow_L": (-0.85, 1.05, 0.35),
    "inner_brow_R": (0.85, 1.05, 0.35),
    "outer_brow_L": (-2.05, 0.85, 0.05),
    "outer_brow_R": (2.05, 0.85, 0.05),
    "eye_outer_L": (-2.0, 0.05, -0.1),
    "eye_outer_R": (2.0, 0.05, -0.1),
    "nose_tip": (0.0, -1.3, 0.95),
    "chin": (0.0, -3.2, 0.35),
}

_DEFAULT_RAISE = (0.0, 0.55, 0.0)


@dataclass(frozen=True)
class FaceTemplate:
    """Neutral landmark positions (roles plus filler points) and raise vectors."""

    points: dict[str, np.ndarray]
    brow_raise: dict[str, np.ndarray]
    neck_drop: float = DEFAULT_NECK_DROP

    def __post_init__(self):
        pts = {k: np.asarray(v, dtype=float) for k, v in self.points.items()}
        object.__setattr__(self, "points", pts)
        object.__setattr__(
            self, "brow_raise", {k: np.asarray(v, dtype=float) for k, v in self.brow_raise.items()}
        )
        for role in REQUIRED_ROLES:
            if role not in pts:
                raise ValueError(f"template missing role {role!r}")
        a, b = pts["inner_eye_L"], pts["inner_eye_R"]
        if np.linalg.norm(b - a) < 1e-9:
            raise ValueError("template eye corners coincide")
        for role in BROW_ROLES:
            if pts[role][1] <= max(a[1], b[1]):
                raise ValueError(f"template {role} is not above the eye line")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self.points))

    def schema(self) -> LandmarkSchema:
        index = {name: i for i, name in enumerate(self.names)}
        return LandmarkSchema(
            tracker="custom", roles={r: (index[r],) for r in REQUIRED_ROLES}
        )

    def scaled(self, factor: float) -> "FaceTemplate":
        return FaceTemplate(
            points={k: v * factor for k, v in self.points.items()},
            brow_raise={k: v * factor for k, v in self.brow_raise.items()},
            neck_drop=self.neck_drop * factor,
        )


def default_template() -> FaceTemplate:
    return FaceTemplate(
        points=dict(_DEFAULT_POINTS),
        brow_raise={r: _DEFAULT_RAISE for r in BROW_ROLES},
    )


def _ramp(i: float, start: float, peak: float, end: float, profile: str) -> float:
    """0 outside [start, end], 1 at the peak, eased rise and fall."""
    if i <= start or i >= end:
        return 0.0
    if i <= peak:
        u = 1.0 if peak == start else (i - start) / (peak - start)
    else:
        u = 1.0 if end == peak else (end - i) / (end - peak)
    if profile == "linear":
        return u
    if profile == "raised_cosine":
        return 0.5 * (1.0 - math.cos(math.pi * u))
    raise ValueError(f"unknown ramp profile {profile!r}")


@dataclass(frozen=True)
class BrowRamp:
    start: int
    peak: int
    end: int
    amount: float = 1.0
    profile: str = "raised_cosine"


@dataclass(frozen=True)
class MotionScript:
    """Frame count plus pitch and eyebrow profiles.

    ``peak_pitch`` is the stored (down-positive) angle; a head-up motion has
    a negative peak. Eyebrows: "neutral", "raised", or a BrowRamp giving the
    raise fraction over time.
    """

    frames: int
    fps: float = 30.0
    peak_pitch: float = 0.0
    pitch_start: int = 0
    pitch_peak: int = 0
    pitch_end: int = 0
    pitch_profile: str = "raised_cosine"
    eyebrows: str | BrowRamp = "neutral"

    def __post_init__(self):
        if self.frames <= 0:
            raise ValueError("script needs at least 1 frame")
        if abs(self.peak_pitch) >= math.pi / 2:
            raise ValueError(f"|peak pitch| must be < pi/2, got {self.peak_pitch}")
        if not 0 <= self.pitch_start <= self.pitch_peak <= self.pitch_end <= self.frames:
            raise ValueError("pitch ramp frames must satisfy 0 <= start <= peak <= end <= frames")
        if isinstance(self.eyebrows, str) and self.eyebrows not in ("neutral", "raised"):
            raise ValueError(f"unknown eyebrow profile {self.eyebrows!r}")

    def pitch_at(self, i: int) -> float:
        return self.peak_pitch * _ramp(
            i, self.pitch_start, self.pitch_peak, self.pitch_end, self.pitch_profile
        )

    def raise_fraction_at(self, i: int) -> float:
        if self.eyebrows == "neutral":
            return 0.0
        if self.eyebrows == "raised":
            return 1.0
        r = self.eyebrows
        return r.amount * _ramp(i, r.start, r.peak, r.end, r.profile)


@dataclass(frozen=True)
class DistortionSpec:
    kind: str = "none"
    k: float = 0.4
    raise_interaction: float = 0.0
    coeffs: dict[str, float] = field(default_factory=dict)
    noise_sigma: float = 0.0
    dropout_pitch_up: float | None = None
    dropout_prob: float = 1.0

    def __post_init__(self):
        if self.kind not in ("none", "mph_like", "of_like", "custom"):
            raise ValueError(f"unknown distortion kind {self.kind!r}")
        bad = set(self.coeffs) - {"pitch", "yaw", "roll"}
        if bad:
            raise ValueError(f"unknown custom coefficients {sorted(bad)}")

    def scale_at(self, pitch: float, raise_fraction: float) -> float:
        up = -pitch
        if self.kind == "mph_like":
            return 1.0 - self.k * up - self.raise_interaction * raise_fraction * max(up, 0.0)
        if self.kind == "of_like":
            return 1.0 + self.k * up
        return 1.0

    def offset_at(self, pose: HeadPose) -> float:
        if self.kind != "custom":
            return 0.0
        return (
            self.coeffs.get("pitch", 0.0) * pose.pitch
            + self.coeffs.get("yaw", 0.0) * pose.yaw
            + self.coeffs.get("roll", 0.0) * pose.roll
        )


def _perp_from_line(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    u = (b - a) / np.linalg.norm(b - a)
    w = p - a
    return w - np.dot(w, u) * u


def generate(
    template: FaceTemplate,
    script: MotionScript,
    distortion: DistortionSpec,
    seed: int = 0,
    meta: SequenceMeta | None = None,
) -> tuple[LandmarkSequence, LandmarkSequence]:
    """Pose the template per the script; return (truth, observed) sequences.

    Truth is the undistorted rigid motion. Observed applies the distortion in
    the head-local frame (so a derotated observed model still shows the
    squish) before rotating out to world coordinates, then applies the
    dropout rule. Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    schema = template.schema()
    names = template.names
    index = {name: i for i, name in enumerate(names)}
    if meta is None:
        meta = SequenceMeta(tracker="synthetic", units="template")
    meta = replace(meta, fps=script.fps)
    truth_meta = replace(meta, tracker="truth")

    eye_a = template.points["inner_eye_L"]
    eye_b = template.points["inner_eye_R"]
    pivot = template.points["upper_nose"] + np.array([0.0, -template.neck_drop, 0.0])

    truth_frames: list[LandmarkFrame] = []
    observed_frames: list[LandmarkFrame] = []
    for i in range(script.frames):
        pitch = script.pitch_at(i)
        raise_frac = script.raise_fraction_at(i)
        pose = HeadPose(pitch, 0.0, 0.0)
        rot = euler_to_matrix(pose)
        t = i / script.fps

        local = {
            name: template.points[name]
            + (raise_frac * template.brow_raise[name] if name in template.brow_raise else 0.0)
            for name in names
        }

        def world(pts: dict[str, np.ndarray]) -> dict[int, np.ndarray]:
            return {index[n]: pivot + rot @ (p - pivot) for n, p in pts.items()}

        truth_raw = world(local)
        truth_frames.append(
            LandmarkFrame(
                frame_index=i,
                time_s=t,
                confidence=None,
                present=True,
                raw=truth_raw,
                points=schema.resolve(truth_raw),
                pose=pose,
            )
        )

        # Distort in the local frame, then rotate out.
        s = distortion.scale_at(pitch, raise_frac)
        extra = distortion.offset_at(pose)
        distorted = {}
        for name, p in local.items():
            perp = _perp_from_line(p, eye_a, eye_b)
            q = p + (s - 1.0) * perp
            if name in BROW_ROLES:
                norm = np.linalg.norm(perp)
                direction = perp / norm if norm > 0 else np.array([0.0, 1.0, 0.0])
                jitter = rng.normal(0.0, distortion.noise_sigma) if distortion.noise_sigma > 0 else 0.0
                q = q + (extra + jitter) * direction
            distorted[name] = q

        dropped = False
        if distortion.dropout_pitch_up is not None and -pitch > distortion.dropout_pitch_up:
            dropped = rng.random() < distortion.dropout_prob
        if dropped:
            observed_frames.append(
                LandmarkFrame(frame_index=i, time_s=t, confidence=None, present=False)
            )
        else:
            observed_raw = world(distorted)
            observed_frames.append(
                LandmarkFrame(
                    frame_index=i,
                    time_s=t,
                    confidence=None,
                    present=True,
                    raw=observed_raw,
                    points=schema.resolve(observed_raw),
                    pose=pose,
                )
            )

    truth = LandmarkSequence(frames=truth_frames, meta=truth_meta, schema=schema)
    observed = LandmarkSequence(frames=observed_frames, meta=meta, schema=schema)
    truth.validate()
    observed.validate()
    return truth, observed


# ---------------------------------------------------------------------------
# Scoring

@dataclass(frozen=True)
class Scorecard:
    rmse_uncorrected: float
    rmse_corrected: float | None
    improvement_ratio: float | None
    n: int

    def to_dict(self) -> dict:
        return {
            "rmse_uncorrected": self.rmse_uncorrected,
            "rmse_corrected": self.rmse_corrected,
            "improvement_ratio": self.improvement_ratio,
            "n": self.n,
        }


def _rmse_between(a: BrowTrace, b: BrowTrace, brow_kind: str) -> tuple[float, int]:
    if len(a) != len(b):
        raise ValueError(f"trace lengths differ: {len(a)} vs {len(b)}")
    mask = a.present & b.present
    if not mask.any():
        raise ValueError("no frames present in both traces")
    diff = a.channel(brow_kind)[mask] - b.channel(brow_kind)[mask]
    return float(np.sqrt(np.mean(diff**2))), int(mask.sum())


def score_correction(
    truth: BrowTrace,
    observed: BrowTrace,
    corrected: BrowTrace | None = None,
    brow_kind: str = "inner",
) -> Scorecard:
    """RMSE of observed (and optionally corrected) distances against truth.

    improvement_ratio = rmse_corrected / rmse_uncorrected; when the observed
    trace is already exact, the ratio is 1 for an equally exact correction
    and infinite for one that makes things worse.
    """
    rmse_u, n = _rmse_between(observed, truth, brow_kind)
    if corrected is None:
        return Scorecard(rmse_u, None, None, n)
    rmse_c, _ = _rmse_between(corrected, truth, brow_kind)
    if rmse_u > 0:
        ratio = rmse_c / rmse_u
    else:
        ratio = 1.0 if rmse_c == 0 else math.inf
    return Scorecard(rmse_u, rmse_c, ratio, n)


# ---------------------------------------------------------------------------
# Scenario files

@dataclass(frozen=True)
class Scenario:
    name: str
    template: FaceTemplate
    script: MotionScript
    distortion: DistortionSpec
    meta: SequenceMeta


def load_scenario(path: str | Path) -> Scenario:
    """Read a scenario JSON: template, script, distortion, and recording meta.

    Layout:

        {"name": str,
         "template": "default" | {"scale": float} |
                     {"points": {...}, "brow_raise": {...}, "neck_drop"?: f},
         "script": {"frames": int, "fps"?: float,
                    "pitch"?: {"direction": "up"|"down", "magnitude": rad,
                               "start": f, "peak": f, "end": f,
                               "profile"?: "raised_cosine"|"linear"}
                              (or "peak_pitch": signed rad instead of
                               direction+magnitude),
                    "eyebrows"?: "neutral"|"raised"|
                                 {"start": f, "peak": f, "end": f,
                                  "amount"?: float, "profile"?: str}},
         "distortion"?: {"kind": ..., "k"?, "raise_interaction"?, "coeffs"?,
                         "noise_sigma"?, "dropout_pitch_up"?, "dropout_prob"?},
         "meta"?: {"tracker"?, "camera_distance"?, "condition"?, "subject"?,
                   "eyebrows_raised"?}}
    """
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg})") from None

    tmpl_spec = obj.get("template", "default")
    if tmpl_spec == "default":
        template = default_template()
    elif isinstance(tmpl_spec, dict) and "scale" in tmpl_spec and "points" not in tmpl_spec:
        template = default_template().scaled(float(tmpl_spec["scale"]))
    elif isinstance(tmpl_spec, dict):
        try:
            template = FaceTemplate(
                points=tmpl_spec["points"],
                brow_raise=tmpl_spec.get(
                    "brow_raise", {r: _DEFAULT_RAISE for r in BROW_ROLES}
                ),
                neck_drop=float(tmpl_spec.get("neck_drop", DEFAULT_NECK_DROP)),
            )
        except (KeyError, ValueError) as exc:
            raise ParseError(f"{path}: bad template: {exc}") from None
    else:
        raise ParseError(f"{path}: bad template spec {tmpl_spec!r}")

    s = obj.get("script")
    if not isinstance(s, dict) or "frames" not in s:
        raise ParseError(f"{path}: script with a frame count is required")
    pitch = s.get("pitch") or {}
    if "peak_pitch" in pitch:
        peak = float(pitch["peak_pitch"])
    elif "direction" in pitch:
        mag = abs(float(pitch.get("magnitude", 0.0)))
        if pitch["direction"] == "up":
            peak = -mag
        elif pitch["direction"] == "down":
            peak = mag
        else:
            raise ParseError(f"{path}: pitch direction must be 'up' or 'down'")
    else:
        peak = 0.0
    brows = s.get("eyebrows", "neutral")
    if isinstance(brows, dict):
        brows = BrowRamp(
            start=int(brows["start"]),
            peak=int(brows["peak"]),
            end=int(brows["end"]),
            amount=float(brows.get("amount", 1.0)),
            profile=brows.get("profile", "raised_cosine"),
        )
    try:
        script = MotionScript(
            frames=int(s["frames"]),
            fps=float(s.get("fps", 30.0)),
            peak_pitch=peak,
            pitch_start=int(pitch.get("start", 0)),
            pitch_peak=int(pitch.get("peak", 0)),
            pitch_end=int(pitch.get("end", 0)),
            pitch_profile=pitch.get("profile", "raised_cosine"),
            eyebrows=brows,
        )
    except ValueError as exc:
        raise ParseError(f"{path}: bad script: {exc}") from None

    d = obj.get("distortion") or {}
    try:
        distortion = DistortionSpec(
            kind=d.get("kind", "none"),
            k=float(d.get("k", 0.4)),
            raise_interaction=float(d.get("raise_interaction", 0.0)),
            coeffs={k_: float(v) for k_, v in (d.get("coeffs") or {}).items()},
            noise_sigma=float(d.get("noise_sigma", 0.0)),
            dropout_pitch_up=(
                None if d.get("dropout_pitch_up") is None else float(d["dropout_pitch_up"])
            ),
            dropout_prob=float(d.get("dropout_prob", 1.0)),
        )
    except ValueError as exc:
        raise ParseError(f"{path}: bad distortion: {exc}") from None

    m = obj.get("meta") or {}
    try:
        meta = SequenceMeta(
            tracker=m.get("tracker", "synthetic"),
            camera_distance=m.get("camera_distance", "unknown"),
            condition=m.get("condition", "custom"),
            eyebrows_raised=m.get("eyebrows_raised"),
            fps=script.fps,
            subject=m.get("subject", ""),
            units="template",
        )
    except ValueError as exc:
        raise ParseError(f"{path}: bad meta: {exc}") from None

    name = obj.get("name") or path.stem
    return Scenario(name=name, template=template, script=script, distortion=distortion, meta=meta)
