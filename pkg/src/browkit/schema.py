"""Landmark-role schemas: which tracker indices stand in for each semantic face point.

A schema maps the seven roles the distance measure needs (four brow points, the
two inner eye corners, and the upper nose point) onto tracker landmark indices.
A role may map to several indices; resolution averages them component-wise,
which is how the coarse grid of a dense mesh tracker is reduced to one point.

Default schemas for OpenFace (68-landmark model) and MediaPipe face mesh ship
as editable JSON files under ``browkit/schemas/``; the MediaPipe index choices
are conventional, not canonical, so edit the file if your mesh differs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import SchemaError

REQUIRED_ROLES = (
    "inner_brow_L",
    "inner_brow_R",
    "outer_brow_L",
    "outer_brow_R",
    "inner_eye_L",
    "inner_eye_R",
    "upper_nose",
)

TRACKER_TAGS = ("openface", "mediapipe", "custom")

SCHEMA_DIR_ENV = "BROWKIT_SCHEMA_DIR"


@dataclass(frozen=True)
class LandmarkSchema:
    """Role -> landmark-index-group mapping for one tracker family."""

    tracker: str
    roles: dict[str, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if self.tracker not in TRACKER_TAGS:
            raise SchemaError(
                f"unknown tracker tag {self.tracker!r}; expected one of {TRACKER_TAGS}"
            )
        normalized = {}
        for role, idxs in self.roles.items():
            idxs = tuple(int(i) for i in idxs)
            if len(set(idxs)) != len(idxs):
                raise SchemaError(f"role {role!r} lists duplicate indices {idxs}")
            normalized[role] = idxs
        object.__setattr__(self, "roles", normalized)
        for role in REQUIRED_ROLES:
            if not self.roles.get(role):
                raise SchemaError(f"required role {role!r} is unmapped")

    @property
    def all_indices(self) -> tuple[int, ...]:
        seen: list[int] = []
        for idxs in self.roles.values():
            for i in idxs:
                if i not in seen:
                    seen.append(i)
        return tuple(seen)

    def resolve(self, raw: dict[int, np.ndarray]) -> dict[str, np.ndarray]:
        """Average each role's index group over the raw indexed points.

        Raises SchemaError if any index a role needs is missing from ``raw``.
        """
        points: dict[str, np.ndarray] = {}
        for role, idxs in self.roles.items():
            missing = [i for i in idxs if i not in raw]
            if missing:
                raise SchemaError(f"role {role!r} needs landmark indices {missing}, not present")
            points[role] = np.mean([raw[i] for i in idxs], axis=0)
        return points

    def to_dict(self) -> dict:
        return {"tracker": self.tracker, "roles": {r: list(v) for r, v in self.roles.items()}}

    @classmethod
    def from_dict(cls, obj: dict) -> "LandmarkSchema":
        try:
            return cls(tracker=obj["tracker"], roles={r: tuple(v) for r, v in obj["roles"].items()})
        except KeyError as exc:
            raise SchemaError(f"schema object missing field {exc.args[0]!r}") from None


def load_schema(path: str | Path) -> LandmarkSchema:
    with open(path, encoding="utf-8") as fh:
        return LandmarkSchema.from_dict(json.load(fh))


def save_schema(schema: LandmarkSchema, path: str | Path) -> None:
    Path(path).write_text(json.dumps(schema.to_dict(), indent=2) + "\n", encoding="utf-8")


def default_schema(name: str) -> LandmarkSchema:
    """Load a named schema: a file stem from BROWKIT_SCHEMA_DIR if set, else a bundled one.

    Bundled names: "openface68", "mediapipe_facemesh".
    """
    override_dir = os.environ.get(SCHEMA_DIR_ENV)
    if override_dir:
        candidate = Path(override_dir) / f"{name}.json"
        if candidate.exists():
            return load_schema(candidate)
    ref = resources.files("browkit") / "schemas" / f"{name}.json"
    try:
        text = ref.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise SchemaError(f"no bundled schema named {name!r}") from None
    return LandmarkSchema.from_dict(json.loads(text))


def schema_for_tracker(tracker: str) -> LandmarkSchema:
    if tracker == "openface":
        return default_schema("openface68")
    if tracker == "mediapipe":
        return default_schema("mediapipe_facemesh")
    raise SchemaError(f"no default schema for tracker {tracker!r}; pass one explicitly")
