"""Head-rotation correction model: predict the pose-attributable part of the
measured brow distance from neutral-eyebrow recordings and subtract it.

The model is ordinary least squares over pose features (pitch, yaw, roll by
default; quadratic and interaction terms opt-in), solved by Householder QR,
never the normal equations. Applying a model subtracts only the slope terms,
d_i - beta . x_i, so the neutral-pose level (intercept) survives and corrected
traces stay on the same axis as uncorrected ones.

One model per tracker, per brow kind, and per camera-distance group: the
distortions differ across all three, so coefficients must not be shared.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FitError
from .metrics import BrowTrace, ScaleParams

LINEAR_FEATURES = ("pitch", "yaw", "roll")
QUADRATIC_FEATURES = LINEAR_FEATURES + (
    "pitch2",
    "yaw2",
    "roll2",
    "pitch_yaw",
    "pitch_roll",
    "yaw_roll",
)

_FEATURE_FUNCS = {
    "pitch": lambda p, y, r: p,
    "yaw": lambda p, y, r: y,
    "roll": lambda p, y, r: r,
    "pitch2": lambda p, y, r: p * p,
    "yaw2": lambda p, y, r: y * y,
    "roll2": lambda p, y, r: r * r,
    "pitch_yaw": lambda p, y, r: p * y,
    "pitch_roll": lambda p, y, r: p * r,
    "yaw_roll": lambda p, y, r: y * r,
}

RANK_TOL = 1e-10


def resolve_features(spec: str | tuple[str, ...]) -> tuple[str, ...]:
    """Turn "linear"/"quadratic"/a comma list/a tuple into feature names."""
    if isinstance(spec, str):
        if spec == "linear":
            return LINEAR_FEATURES
        if spec == "quadratic":
            return QUADRATIC_FEATURES
        spec = tuple(s.strip() for s in spec.split(",") if s.strip())
    unknown = [f for f in spec if f not in _FEATURE_FUNCS]
    if unknown:
        raise FitError(f"unknown feature(s) {unknown}; known: {sorted(_FEATURE_FUNCS)}")
    if not spec:
        raise FitError("empty feature spec")
    return tuple(spec)


def feature_matrix(pitch, yaw, roll, features: tuple[str, ...]) -> np.ndarray:
    p, y, r = (np.asarray(v, dtype=float) for v in (pitch, yaw, roll))
    return np.column_stack([_FEATURE_FUNCS[f](p, y, r) for f in features])


@dataclass(frozen=True)
class TrainingSet:
    """Pose-feature rows paired with unit-scaled brow distances, neutral brows only."""

    x: np.ndarray
    y: np.ndarray
    features: tuple[str, ...]
    brow_kind: str
    tracker: str = ""
    scaling: ScaleParams | None = None


def build_training_set(
    traces: list[BrowTrace],
    brow_kind: str,
    features: str | tuple[str, ...] = LINEAR_FEATURES,
) -> TrainingSet:
    """Collect (pose features, distance) rows from neutral-eyebrow traces.

    Every trace must be explicitly flagged eyebrows_raised=False; anything
    else (raised or unflagged) is rejected, since training on frames with
    real brow movement would teach the model to erase it.
    """
    features = resolve_features(features)
    if not traces:
        raise FitError("no training traces")
    xs, ys = [], []
    for tr in traces:
        if tr.meta.eyebrows_raised is not False:
            raise FitError(
                f"trace {tr.name!r} is not flagged neutral-eyebrows "
                f"(eyebrows_raised={tr.meta.eyebrows_raised!r})"
            )
        mask = tr.present
        xs.append(feature_matrix(tr.pitch[mask], tr.yaw[mask], tr.roll[mask], features))
        ys.append(tr.channel(brow_kind)[mask])
    x = np.vstack(xs)
    y = np.concatenate(ys)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FitError("training rows contain non-finite values")
    scalings = {tr.scaling.get(brow_kind) for tr in traces}
    scaling = next(iter(scalings)) if len(scalings) == 1 else None
    return TrainingSet(
        x=x,
        y=y,
        features=features,
        brow_kind=brow_kind,
        tracker=traces[0].meta.tracker,
        scaling=scaling,
    )


@dataclass(frozen=True)
class CorrectionModel:
    tracker: str
    brow_kind: str
    features: tuple[str, ...]
    beta0: float
    betas: tuple[float, ...]
    rmse: float
    n: int
    scaling: ScaleParams | None = None

    def predict(self, pitch, yaw, roll) -> np.ndarray:
        x = feature_matrix(pitch, yaw, roll, self.features)
        return self.beta0 + x @ np.asarray(self.betas)

    def to_dict(self) -> dict:
        return {
            "tracker": self.tracker,
            "brow_kind": self.brow_kind,
            "features": list(self.features),
            "beta0": self.beta0,
            "betas": list(self.betas),
            "rmse": self.rmse,
            "n": self.n,
            "scaling": None
            if self.scaling is None
            else {"min": self.scaling.lo, "max": self.scaling.hi},
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "CorrectionModel":
        sc = obj.get("scaling")
        return cls(
            tracker=obj["tracker"],
            brow_kind=obj["brow_kind"],
            features=resolve_features(tuple(obj["features"])),
            beta0=float(obj["beta0"]),
            betas=tuple(float(b) for b in obj["betas"]),
            rmse=float(obj["rmse"]),
            n=int(obj["n"]),
            scaling=None if sc is None else ScaleParams(float(sc["min"]), float(sc["max"])),
        )


def save_model(model: CorrectionModel, path: str | Path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(model.to_dict(), indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def load_model(path: str | Path) -> CorrectionModel:
    with open(path, encoding="utf-8") as fh:
        return CorrectionModel.from_dict(json.load(fh))


def _householder_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Least-squares solution of a x ~ b via Householder triangularization."""
    a = a.astype(float).copy()
    b = b.astype(float).copy()
    m, k = a.shape
    for j in range(k):
        x = a[j:, j]
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue
        v = x.copy()
        v[0] += norm_x if x[0] >= 0 else -norm_x
        v /= np.linalg.norm(v)
        a[j:, j:] -= 2.0 * np.outer(v, v @ a[j:, j:])
        b[j:] -= 2.0 * v * np.dot(v, b[j:])
    beta = np.zeros(k)
    for i in range(k - 1, -1, -1):
        beta[i] = (b[i] - a[i, i + 1:] @ beta[i + 1:]) / a[i, i]
    return beta


def fit(training: TrainingSet) -> CorrectionModel:
    """Ordinary least squares of distance on [1, pose features].

    Rejects under-determined (n < features + 2) and rank-deficient designs.
    The rank message names the feature whose column collapses in the QR
    factor, usually the one that is (nearly) a combination of the others.
    """
    k = len(training.features)
    n = training.x.shape[0]
    if n < k + 1:
        raise FitError(f"need at least {k + 1} rows to fit {k} features, got {n}")
    design = np.column_stack([np.ones(n), training.x])

    svals = np.linalg.svd(design, compute_uv=False)
    if svals[-1] <= RANK_TOL * svals[0]:
        # Name the culprit via the smallest diagonal of R.
        _, r = np.linalg.qr(design)
        diag = np.abs(np.diag(r))
        worst = int(np.argmin(diag / max(diag.max(), 1e-300)))
        name = "intercept" if worst == 0 else training.features[worst - 1]
        raise FitError(
            f"design matrix is rank deficient (cond ratio "
            f"{svals[-1] / svals[0]:.2e}); feature {name!r} is collinear"
        )

    beta = _householder_solve(design, training.y)
    residual = training.y - design @ beta
    return CorrectionModel(
        tracker=training.tracker,
        brow_kind=training.brow_kind,
        features=training.features,
        beta0=float(beta[0]),
        betas=tuple(float(v) for v in beta[1:]),
        rmse=float(math.sqrt(np.mean(residual**2))),
        n=n,
        scaling=training.scaling,
    )


def apply(model: CorrectionModel, trace: BrowTrace) -> BrowTrace:
    """Subtract the pose-attributable component from a trace's distance channel.

    corrected_i = d_i - betas . x_i, keeping the intercept (neutral-pose
    level). Dropout frames pass through absent. The trace must be scaled with
    the same group parameters the model was trained on; a recorded mismatch
    is an error.
    """
    trace_scale = trace.scaling.get(model.brow_kind)
    if model.scaling is not None and trace_scale is not None:
        if not (
            math.isclose(model.scaling.lo, trace_scale.lo, rel_tol=1e-9, abs_tol=1e-12)
            and math.isclose(model.scaling.hi, trace_scale.hi, rel_tol=1e-9, abs_tol=1e-12)
        ):
            raise FitError(
                f"trace {trace.name!r} was scaled with different group parameters "
                f"than the model"
            )
    x = feature_matrix(trace.pitch, trace.yaw, trace.roll, model.features)
    slope = x @ np.asarray(model.betas)
    corrected = trace.channel(model.brow_kind) - slope
    corrected[~trace.present] = np.nan
    return trace.with_channel(model.brow_kind, corrected)
