"""Landmark backends: a callable per decoded frame returning either a
{landmark index: (x, y, z)} dict or None when no face is found."""

from __future__ import annotations

import cv2
import numpy as np

from .interchange import FACEMESH_ROLES


class ExtractorError(Exception):
    pass


class HolisticBackend:
    """MediaPipe Holistic; emits all face-mesh landmarks in normalized coordinates."""

    def __init__(self, model_complexity: int = 1, refine_face: bool = False):
        try:
            import mediapipe as mp
        except ImportError:
            raise ExtractorError(
                "mediapipe is not installed; install mph-extractor[holistic]"
            ) from None
        try:
            self._holistic = mp.solutions.holistic.Holistic(
                static_image_mode=False,
                model_complexity=model_complexity,
                refine_face_landmarks=refine_face,
            )
        except Exception as exc:
            raise ExtractorError(f"tracker initialization failed: {exc}") from exc

    def __call__(self, frame_bgr: np.ndarray, index: int):
        rgb = cv2.cvtColor(frame_bgr, cv2.COLOR_BGR2RGB)
        results = self._holistic.process(rgb)
        if results.face_landmarks is None:
            return None
        return {
            i: (lm.x, lm.y, lm.z)
            for i, lm in enumerate(results.face_landmarks.landmark)
        }

    def close(self):
        self._holistic.close()


# Face-like landmark layout in normalized image coordinates (y down), used
# by the stub backend. Covers every role index plus a few extras so emitted
# files look like a (very sparse) mesh export.
_STUB_POINTS = {
    133: (0.435, 0.520, -0.010),
    362: (0.565, 0.520, -0.012),
    168: (0.500, 0.505, -0.030),
    107: (0.455, 0.450, -0.022),
    55: (0.462, 0.462, -0.020),
    336: (0.545, 0.450, -0.023),
    285: (0.538, 0.462, -0.021),
    70: (0.370, 0.465, -0.008),
    46: (0.378, 0.477, -0.007),
    300: (0.630, 0.465, -0.009),
    276: (0.622, 0.477, -0.008),
    1: (0.500, 0.620, -0.045),
    152: (0.500, 0.800, -0.015),
}


class StubBackend:
    """Deterministic pipeline-test backend: reports a fixed face whenever the
    frame has visible structure (grayscale contrast above a threshold), and
    no face on flat frames. Exists so the decode/emit path can be exercised
    without the real tracker; it performs no actual landmark detection.
    """

    def __init__(self, contrast_threshold: float = 5.0):
        self.contrast_threshold = contrast_threshold
        assert set(_STUB_POINTS) >= {
            i for idxs in FACEMESH_ROLES.values() for i in idxs
        }, "stub layout must cover every role index"

    def __call__(self, frame_bgr: np.ndarray, index: int):
        gray = cv2.cvtColor(frame_bgr, cv2.COLOR_BGR2GRAY)
        if float(gray.std()) <= self.contrast_threshold:
            return None
        return dict(_STUB_POINTS)

    def close(self):
        pass


BACKENDS = {"holistic": HolisticBackend, "stub": StubBackend}
