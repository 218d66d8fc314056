"""browkit/1 interchange emission, written against the wire contract.

This package deliberately re-implements the format from its published
grammar instead of importing the analysis library: the file layout is the
interface between the two.

    header  {"version": "browkit/1", "tracker", "fps", "camera_distance",
             "condition", "eyebrows_raised", "subject", "schema", "units"}
    frame   {"frame": int, "t": float, "conf": float|null, "present": bool,
             "pts": {"<index>": [x, y, z], ...}}

Dropout frames carry present=false and empty pts. This emitter never writes
a pose field: MediaPipe reports no head-rotation angles, and the analysis
side estimates pose rigidly from the face points instead.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

INTERCHANGE_VERSION = "browkit/1"

# Face-mesh indices for the semantic roles the analysis needs. Brow roles
# average an upper and a lower contour point; labels follow the image-left
# convention (the "L" eye is the one on the image's left in an unmirrored
# frame).
FACEMESH_ROLES = {
    "inner_brow_L": [107, 55],
    "inner_brow_R": [336, 285],
    "outer_brow_L": [70, 46],
    "outer_brow_R": [300, 276],
    "inner_eye_L": [133],
    "inner_eye_R": [362],
    "upper_nose": [168],
}


def header_line(
    fps: float,
    camera_distance: str = "unknown",
    condition: str = "custom",
    eyebrows_raised: bool | None = None,
    subject: str = "",
) -> str:
    return json.dumps(
        {
            "version": INTERCHANGE_VERSION,
            "tracker": "mediapipe",
            "fps": fps,
            "camera_distance": camera_distance,
            "condition": condition,
            "eyebrows_raised": eyebrows_raised,
            "subject": subject,
            "schema": {"tracker": "mediapipe", "roles": FACEMESH_ROLES},
            "units": "normalized",
        }
    )


def frame_line(index: int, t: float, points: dict[int, tuple] | None) -> str:
    if points is None:
        return json.dumps(
            {"frame": index, "t": t, "conf": None, "present": False, "pts": {}}
        )
    return json.dumps(
        {
            "frame": index,
            "t": t,
            "conf": None,
            "present": True,
            "pts": {str(i): [float(c) for c in points[i]] for i in sorted(points)},
        }
    )


def write_lines(lines: list[str], path: str | Path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    os.replace(tmp, path)
