#!/usr/bin/env python3
"""One-off generator for the committed fixture videos.

face_static.avi: 12 frames of a schematic printed face (high contrast).
blank_wall.avi:  8 frames of uniform gray (no structure at all).

MJPG-in-AVI because that codec is available everywhere OpenCV runs.
"""

import cv2
import numpy as np

SIZE = 96
FPS = 12.0


def face_frame():
    img = np.full((SIZE, SIZE, 3), 235, np.uint8)
    dark = (40, 40, 40)
    # eyes
    cv2.circle(img, (34, 52), 6, dark, -1)
    cv2.circle(img, (62, 52), 6, dark, -1)
    # brows
    cv2.ellipse(img, (34, 40), (10, 4), 0, 180, 360, dark, 2)
    cv2.ellipse(img, (62, 40), (10, 4), 0, 180, 360, dark, 2)
    # nose and mouth
    cv2.line(img, (48, 50), (48, 64), dark, 2)
    cv2.ellipse(img, (48, 74), (12, 6), 0, 0, 180, dark, 2)
    # face outline
    cv2.ellipse(img, (48, 54), (30, 38), 0, 0, 360, dark, 2)
    return img


def write(path, frame, count):
    writer = cv2.VideoWriter(path, cv2.VideoWriter_fourcc(*"MJPG"), FPS, (SIZE, SIZE))
    assert writer.isOpened(), path
    for _ in range(count):
        writer.write(frame)
    writer.release()


if __name__ == "__main__":
    write("face_static.avi", face_frame(), 12)
    write("blank_wall.avi", np.full((SIZE, SIZE, 3), 128, np.uint8), 8)
    print("wrote face_static.avi (12 frames) and blank_wall.avi (8 frames)")
