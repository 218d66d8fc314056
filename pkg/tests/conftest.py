import numpy as np
import pytest

from browkit import (
    HeadPose,
    LandmarkFrame,
    LandmarkSchema,
    LandmarkSequence,
    SequenceMeta,
)

# A plausible face in y-up coordinates, template units.
FACE_POINTS = {
    "inner_eye_L": (-1.0, 0.0, 0.0),
    "inner_eye_R": (1.0, 0.0, 0.0),
    "upper_nose": (0.0, 0.35, 0.55),
    "inner_brow_L": (-0.85, 1.05, 0.35),
    "inner_brow_R": (0.85, 1.05, 0.35),
    "outer_brow_L": (-2.05, 0.85, 0.05),
    "outer_brow_R": (2.05, 0.85, 0.05),
}

ROLE_INDEX = {name: i for i, name in enumerate(sorted(FACE_POINTS))}


def make_schema() -> LandmarkSchema:
    return LandmarkSchema(tracker="custom", roles={r: (ROLE_INDEX[r],) for r in FACE_POINTS})


def role_frame(points=None, index=0, t=0.0, pose=None, confidence=None) -> LandmarkFrame:
    """Present frame whose raw and role points coincide (one index per role)."""
    points = points if points is not None else FACE_POINTS
    pts = {name: np.asarray(p, dtype=float) for name, p in points.items()}
    return LandmarkFrame(
        frame_index=index,
        time_s=t,
        confidence=confidence,
        present=True,
        raw={ROLE_INDEX[name]: p.copy() for name, p in pts.items()},
        points=pts,
        pose=pose,
    )


def dropout_frame(index=0, t=0.0) -> LandmarkFrame:
    return LandmarkFrame(frame_index=index, time_s=t, confidence=0.0, present=False)


def make_sequence(frames, tracker="custom", **meta_kwargs) -> LandmarkSequence:
    meta = SequenceMeta(tracker=tracker, **meta_kwargs)
    return LandmarkSequence(frames=frames, meta=meta, schema=make_schema())


def constant_sequence(n=5, fps=30.0, pose=HeadPose(0.0, 0.0, 0.0), **meta_kwargs):
    frames = [role_frame(index=i, t=i / fps, pose=pose) for i in range(n)]
    return make_sequence(frames, fps=fps, **meta_kwargs)


@pytest.fixture
def schema():
    return make_schema()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
