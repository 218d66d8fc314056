"""Video to interchange: decode every frame, run the landmark backend, emit
one line per frame (dropouts included, so the line count always matches the
decoded frame count)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import cv2

from .backends import ExtractorError, HolisticBackend
from .interchange import frame_line, header_line, write_lines

FALLBACK_FPS = 30.0


@dataclass
class ExtractionJob:
    video: str | Path
    output: str | Path
    model_complexity: int = 1
    fps_override: float | None = None
    camera_distance: str = "unknown"
    condition: str = "custom"
    eyebrows_raised: bool | None = None
    subject: str = ""


@dataclass
class ExtractionSummary:
    frames: int
    present: int
    fps: float


def extract_video(job: ExtractionJob, backend=None) -> ExtractionSummary:
    """Run the backend over every decoded frame and write the interchange file.

    ``backend`` defaults to MediaPipe Holistic (raising a clean error when
    mediapipe is unavailable); tests inject the stub backend here.
    """
    video = Path(job.video)
    capture = cv2.VideoCapture(str(video))
    if not capture.isOpened():
        raise ExtractorError(f"cannot open video {video}")
    try:
        fps = job.fps_override or capture.get(cv2.CAP_PROP_FPS) or 0.0
        if fps <= 0:
            fps = FALLBACK_FPS

        if backend is None:
            backend = HolisticBackend(model_complexity=job.model_complexity)

        lines = [
            header_line(
                fps=fps,
                camera_distance=job.camera_distance,
                condition=job.condition,
                eyebrows_raised=job.eyebrows_raised,
                subject=job.subject,
            )
        ]
        index = 0
        present = 0
        while True:
            ok, frame = capture.read()
            if not ok:
                break
            points = backend(frame, index)
            if points is not None:
                present += 1
            lines.append(frame_line(index, index / fps, points))
            index += 1
    finally:
        capture.release()
        if backend is not None and hasattr(backend, "close"):
            backend.close()

    if index == 0:
        raise ExtractorError(f"no decodable frames in {video}")
    write_lines(lines, job.output)
    return ExtractionSummary(frames=index, present=present, fps=fps)
