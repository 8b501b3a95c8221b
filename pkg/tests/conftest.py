"""Shared builders for synthetic datasets and scripted trajectories."""

from __future__ import annotations

import math

import numpy as np
import pytest

from etho.trackdata import Dataset, ObjectKind, ObjectSet, SceneObject

# rigid mouse template: offsets from the body center, facing +x
BODY_OFFSETS = {
    "nose": (12.0, 0.0),
    "neck": (6.0, 0.0),
    "left_ear": (8.0, 3.0),
    "right_ear": (8.0, -3.0),
    "mouse_center": (0.0, 0.0),
    "head_midpoint": (9.0, 0.0),
    "tail_base": (-10.0, 0.0),
}


def make_dataset(tracks, frame_size=(10_000, 10_000), dataset_id="test", fps=None, px_per_cm=None):
    """Build a Dataset from {animal: {bodypart: [point-or-None per frame]}}."""
    animal_ids = tuple(tracks)
    bodypart_names = tuple(dict.fromkeys(b for t in tracks.values() for b in t))
    n_frames = len(next(iter(next(iter(tracks.values())).values())))
    kp = np.full((len(animal_ids), n_frames, len(bodypart_names), 3), np.nan)
    for a, animal in enumerate(animal_ids):
        for b, part in enumerate(bodypart_names):
            series = tracks[animal].get(part)
            if series is None:
                continue
            for f, pt in enumerate(series):
                if pt is None:
                    continue
                kp[a, f, b] = (pt[0], pt[1], 1.0)
    return Dataset(
        id=dataset_id,
        n_frames=n_frames,
        frame_size=frame_size,
        animal_ids=animal_ids,
        bodypart_names=bodypart_names,
        keypoints=kp,
        fps=fps,
        px_per_cm=px_per_cm,
    )


def rigid_track(centers, heading_deg=0.0, offsets=BODY_OFFSETS):
    """Per-bodypart point lists for a rigid body moving through centers."""
    rad = math.radians(heading_deg)
    cos_h, sin_h = math.cos(rad), math.sin(rad)
    track = {}
    for part, (ox, oy) in offsets.items():
        rx = ox * cos_h - oy * sin_h
        ry = ox * sin_h + oy * cos_h
        track[part] = [(cx + rx, cy + ry) for cx, cy in centers]
    return track


def straight_centers(n_frames, start=(100.0, 100.0), step=(4.0, 0.0)):
    return [(start[0] + f * step[0], start[1] + f * step[1]) for f in range(n_frames)]


def square(x0, y0, side):
    return [(x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side)]


def object_set(polygons: dict) -> ObjectSet:
    objects = {
        name: SceneObject(name=name, kind=ObjectKind.ROI, polygon=np.asarray(poly, float))
        for name, poly in polygons.items()
    }
    return ObjectSet(objects)


@pytest.fixture
def simple_dataset():
    """Two animals walking right at 4 px/frame, 20 frames apart in x."""
    n = 50
    return make_dataset(
        {
            "animal0": rigid_track(straight_centers(n, (100.0, 200.0))),
            "animal1": rigid_track(straight_centers(n, (180.0, 200.0))),
        }
    )


@pytest.fixture
def roi_square() -> ObjectSet:
    return object_set({"ROI0": square(0.0, 0.0, 400.0)})
