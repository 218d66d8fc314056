"""mph-extract: one video in, one browkit/1 interchange file out."""

from __future__ import annotations

import argparse
import sys

from .backends import BACKENDS, ExtractorError
from .extract import ExtractionJob, extract_video


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mph-extract",
        description="Run MediaPipe Holistic over a video file and write "
        "browkit/1 interchange JSON-Lines (face landmarks only).",
    )
    parser.add_argument("video", help="input video file")
    parser.add_argument("-o", "--output", required=True, help="output .jsonl path")
    parser.add_argument("--model-complexity", type=int, default=1, choices=(0, 1, 2))
    parser.add_argument("--fps-override", type=float, default=None,
                        help="use this frame rate instead of the container's")
    parser.add_argument("--camera-distance", default="unknown",
                        choices=("close", "middle", "far", "unknown"))
    parser.add_argument("--condition", default="custom",
                        choices=("statement", "polar_q", "content_q",
                                 "pitch_up", "pitch_down", "custom"))
    parser.add_argument("--subject", default="")
    parser.add_argument("--eyebrows", default="unknown",
                        choices=("raised", "neutral", "unknown"))
    parser.add_argument("--backend", default="holistic", choices=sorted(BACKENDS),
                        help="'holistic' is the real tracker; 'stub' is a "
                        "contrast-gated fixed-face backend for pipeline checks")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = ExtractionJob(
        video=args.video,
        output=args.output,
        model_complexity=args.model_complexity,
        fps_override=args.fps_override,
        camera_distance=args.camera_distance,
        condition=args.condition,
        eyebrows_raised={"raised": True, "neutral": False, "unknown": None}[args.eyebrows],
        subject=args.subject,
    )
    try:
        backend = BACKENDS[args.backend]() if args.backend != "holistic" else None
        summary = extract_video(job, backend=backend)
    except ExtractorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"{args.video}: {summary.frames} frames "
        f"({summary.present} with a face) at {summary.fps:g} fps -> {args.output}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
