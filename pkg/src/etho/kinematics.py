"""Per-frame kinematics derived from keypoints.

Differentiation uses a central difference on interior frames and one-sided
differences at the ends; units are px/frame (px/frame^2 for acceleration).
Any value whose contributing keypoints are missing is undefined (NaN).

Reductions over bodyparts accumulate sequentially, one part at a time, so a
frame-by-frame scalar recomputation reproduces results bit for bit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InsufficientFramesError, UnknownNameError
from .trackdata import Dataset

CENTER_BODYPART = "mouse_center"


class Quantity(str, enum.Enum):
    VELOCITY = "velocity"
    SPEED = "speed"
    ACCELERATION = "acceleration"
    ACCEL_MAGNITUDE = "accel_magnitude"


@dataclass(frozen=True)
class KinematicSeries:
    """Values indexed [animal][frame][bodypart] (last axis 2 for vectors)."""

    dataset_id: str
    quantity: Quantity
    values: np.ndarray

    def __post_init__(self):
        self.values.flags.writeable = False


def _difference(series: np.ndarray) -> np.ndarray:
    """Central difference over the frame axis (axis 1), one-sided at ends."""
    n = series.shape[1]
    if n < 2:
        raise InsufficientFramesError(f"need at least 2 frames, got {n}")
    out = np.empty_like(series)
    out[:, 1:-1] = (series[:, 2:] - series[:, :-2]) / 2.0
    out[:, 0] = series[:, 1] - series[:, 0]
    out[:, -1] = series[:, -1] - series[:, -2]
    return out


def compute_velocity(d: Dataset) -> KinematicSeries:
    return KinematicSeries(d.id, Quantity.VELOCITY, _difference(d.xy))


def compute_speed(d: Dataset) -> KinematicSeries:
    v = _difference(d.xy)
    return KinematicSeries(d.id, Quantity.SPEED, np.hypot(v[..., 0], v[..., 1]))


def compute_acceleration(d: Dataset) -> KinematicSeries:
    # the velocity stencil applied twice, so constant velocity gives exact 0
    return KinematicSeries(d.id, Quantity.ACCELERATION, _difference(_difference(d.xy)))


def compute_accel_magnitude(d: Dataset) -> KinematicSeries:
    a = _difference(_difference(d.xy))
    return KinematicSeries(d.id, Quantity.ACCEL_MAGNITUDE, np.hypot(a[..., 0], a[..., 1]))


def moving_median(series: KinematicSeries, window: int) -> KinematicSeries:
    """Optional odd-window moving median over frames; NaN where the window
    contains any undefined value. Off by default everywhere."""
    if window <= 1:
        return series
    if window % 2 == 0:
        raise ValueError(f"median window must be odd, got {window}")
    vals = series.values
    half = window // 2
    out = np.full_like(vals, np.nan)
    n = vals.shape[1]
    for f in range(n):
        lo, hi = max(0, f - half), min(n, f + half + 1)
        out[:, f] = np.median(vals[:, lo:hi], axis=1)
    return KinematicSeries(series.dataset_id, series.quantity, out)


def centers(d: Dataset) -> np.ndarray:
    """Per-frame animal centers, shape (animals, frames, 2), NaN when undefined.

    Uses the bodypart named ``mouse_center`` when the dataset has one
    (missing frames stay undefined); otherwise the mean of all non-missing
    bodyparts, undefined only when every bodypart is missing.
    """
    if CENTER_BODYPART in d.bodypart_names:
        b = d.bodypart_names.index(CENTER_BODYPART)
        return d.xy[:, :, b, :].copy()
    return mean_of_parts(d, range(len(d.bodypart_names)), skip_missing=True)


def mean_of_parts(d: Dataset, part_indices, *, skip_missing: bool) -> np.ndarray:
    """Mean position over the given bodyparts, shape (animals, frames, 2).

    skip_missing=True averages whatever parts are present (NaN only when all
    are missing); skip_missing=False is strict: any missing part makes the
    frame undefined. Accumulation is sequential over parts.
    """
    a_n, f_n = d.xy.shape[:2]
    sum_x = np.zeros((a_n, f_n))
    sum_y = np.zeros((a_n, f_n))
    count = np.zeros((a_n, f_n))
    any_missing = np.zeros((a_n, f_n), dtype=bool)
    for b in part_indices:
        x = d.xy[:, :, b, 0]
        y = d.xy[:, :, b, 1]
        present = ~(np.isnan(x) | np.isnan(y))
        any_missing |= ~present
        sum_x = sum_x + np.where(present, x, 0.0)
        sum_y = sum_y + np.where(present, y, 0.0)
        count = count + present
    with np.errstate(invalid="ignore", divide="ignore"):
        cx = sum_x / count
        cy = sum_y / count
    out = np.stack([cx, cy], axis=-1)
    if not skip_missing:
        out[any_missing] = np.nan
    return out


def animal_center(d: Dataset, animal: str, frame: int):
    """Center of one animal at one frame; None when undefined."""
    a = d.animal_index(animal)
    if not (0 <= frame < d.n_frames):
        raise UnknownNameError("frame", str(frame))
    c = centers(d)[a, frame]
    if math.isnan(c[0]) or math.isnan(c[1]):
        return None
    return (float(c[0]), float(c[1]))


def center_velocity(d: Dataset) -> np.ndarray:
    """Velocity of the animal center, shape (animals, frames, 2)."""
    return _difference(centers(d))


def center_speed(d: Dataset) -> np.ndarray:
    v = _difference(centers(d))
    return np.hypot(v[..., 0], v[..., 1])


def center_accel_magnitude(d: Dataset) -> np.ndarray:
    a = _difference(_difference(centers(d)))
    return np.hypot(a[..., 0], a[..., 1])


class TravelDistance(NamedTuple):
    px: float
    skipped_frames: int


def calculate_distance_travelled(d: Dataset, events) -> dict:
    """Path length of the animal center inside each subject's events.

    Sums center displacements between consecutive frames within each event;
    steps touching an undefined center add 0 and are tallied per subject in
    skipped_frames. Pair keys are attributed to the focal (first) animal.
    """
    cs = centers(d)
    out = {}
    for key, seq in events.entries.items():
        animal = key[0] if isinstance(key, tuple) else key
        a = d.animal_index(animal)
        total = 0.0
        skipped = 0
        for ev in seq.events:
            for f in range(ev.start, ev.end - 1):
                x0, y0 = cs[a, f]
                x1, y1 = cs[a, f + 1]
                if math.isnan(x0) or math.isnan(y0) or math.isnan(x1) or math.isnan(y1):
                    skipped += 1
                    continue
                total += math.hypot(x1 - x0, y1 - y0)
        out[key] = TravelDistance(total, skipped)
    return out
