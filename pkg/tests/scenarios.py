"""Scripted trajectories for the built-in task programs.

Each builder returns (dataset, expected) where expected maps subject keys to
the exact bout list the builtin must produce. Geometry uses the rigid mouse
template from conftest (nose +12, neck +6, ears (8, +-3), center 0,
head_midpoint +9, tail_base -10, all relative to the body center, facing +x),
so the closest bodypart pair between a follower and the animal ahead of it is
follower-nose to leader-tail_base at center gap minus 22.

Perturbation knobs push exactly one threshold past its bound; every scenario
must then produce no events at all.
"""

from __future__ import annotations

from conftest import BODY_OFFSETS, make_dataset, rigid_track

START = (500.0, 500.0)


def _two_mice(gaps, heading_b=0.0, step=4.0, speed_b=None, heading_a=0.0):
    """Mouse A walking +x at `step`; mouse B at per-frame center gap ahead."""
    n = len(gaps)
    a_centers = [(START[0] + step * f, START[1]) for f in range(n)]
    if speed_b is None:
        b_centers = [(ax + g, ay) for (ax, ay), g in zip(a_centers, gaps)]
    else:
        b_centers = [(START[0] + gaps[0] + speed_b * f, START[1]) for f in range(n)]
    return make_dataset(
        {
            "A": rigid_track(a_centers, heading_deg=heading_a),
            "B": rigid_track(b_centers, heading_deg=heading_b),
        }
    )


def _carved_gaps(n, bout, inside, outside):
    s, e = bout
    return [inside if s <= f < e else outside for f in range(n)]


def chase(closest=30.0, speed=4.0, duration=60):
    """A chases B: closest < 40, A front of... A facing B ahead, A speed > 3.4."""
    n = 300
    bout = (100, 100 + duration)
    gaps = _carved_gaps(n, bout, inside=closest + 22.0, outside=72.0)
    d = _two_mice(gaps, step=speed)
    expected = {("A", "B"): [bout] if (closest < 40 and speed > 3.4 and duration >= 30) else [],
                ("B", "A"): []}
    return d, expected


def close(closest=20.0, duration=10):
    n = 60
    bout = (20, 20 + duration)
    gaps = _carved_gaps(n, bout, inside=closest + 22.0, outside=52.0)
    d = _two_mice(gaps)
    bouts = [bout] if (closest < 24 and duration >= 5) else []
    return d, {("A", "B"): bouts, ("B", "A"): bouts}


def contact(closest=5.0, duration=8):
    n = 80
    bout = (30, 30 + duration)
    gaps = _carved_gaps(n, bout, inside=closest + 22.0, outside=42.0)
    d = _two_mice(gaps)
    bouts = [bout] if (closest < 12 and duration >= 5) else []
    return d, {("A", "B"): bouts, ("B", "A"): bouts}


def huddle(floor=30.0, hold=41, relative_speed=None):
    """Center distance ramps 80 -> floor -> 80 at 1 px/frame with a hold."""
    descent = [80.0 - t for t in range(0, int(80 - floor) + 1)]
    gaps = descent + [floor] * hold + [80.0 - t for t in range(int(80 - floor) - 1, -1, -1)] + [80.0] * 30
    n = len(gaps)
    if relative_speed is not None:
        # constant velocity offset: relative speed exceeds the bound everywhere
        d = _two_mice(gaps, speed_b=4.0 + relative_speed)
        return d, {("A", "B"): [], ("B", "A"): []}
    d = _two_mice(gaps)
    below = [f for f, g in enumerate(gaps) if g < 50.0]
    if below and (below[-1] - below[0] + 1) >= 75 and floor < 50.0:
        bouts = [(below[0], below[-1] + 1)]
    else:
        bouts = []
    return d, {("A", "B"): bouts, ("B", "A"): bouts}


def oral_ear(gap=8.0, duration=20):
    """A's nose at hypot(gap-4, 3) from each of B's ears."""
    n = 120
    bout = (40, 40 + duration)
    gaps = _carved_gaps(n, bout, inside=gap, outside=40.0)
    d = _two_mice(gaps)
    import math

    nose_ear = math.hypot(gap - 4.0, 3.0)
    bouts = [bout] if (nose_ear < 10 and duration >= 15) else []
    return d, {("A", "B"): bouts, ("B", "A"): []}


def watching(distance=150.0, heading_a=0.0, duration=120):
    """A looks down +x at B sitting `distance` ahead; B faces away."""
    n = 300
    bout = (50, 50 + duration)
    gaps = _carved_gaps(n, bout, inside=distance, outside=300.0)
    d = _two_mice(gaps, heading_a=heading_a)
    ok = (50.0 < distance < 260.0) and abs(heading_a) < 15.0 and duration >= 100
    return d, {("A", "B"): [bout] if ok else [], ("B", "A"): []}


SCENARIOS = {
    "mabe_chase": (chase, [{"closest": 45.0}, {"speed": 3.0}, {"duration": 25}]),
    "mabe_close": (close, [{"closest": 30.0}, {"duration": 3}]),
    "mabe_contact": (contact, [{"closest": 15.0}, {"duration": 3}]),
    "mabe_huddle": (huddle, [{"floor": 55.0}, {"relative_speed": 6.0}, {"hold": 21}]),
    "mabe_oral_ear_contact": (oral_ear, [{"gap": 19.0}, {"duration": 10}]),
    "mabe_watching": (
        watching,
        [{"distance": 280.0}, {"distance": 40.0}, {"heading_a": 30.0}, {"duration": 80}],
    ),
}


def epm_scene():
    """Open and closed arm ROIs, a track visiting both, plus a head dip."""
    from conftest import object_set, square

    open_arm = square(0.0, 200.0, 100.0)
    closed_arm = square(200.0, 200.0, 100.0)
    objects = object_set({"open arm": open_arm, "closed arm": closed_arm})

    centers = []
    for f in range(100):
        if f < 30:
            centers.append((50.0, 250.0))  # fully inside open arm
        elif f < 40:
            centers.append((150.0, 150.0))  # corridor, outside both arms
        elif f < 70:
            centers.append((250.0, 250.0))  # fully inside closed arm
        else:
            centers.append((150.0, 150.0))
    d = make_dataset({"m0": rigid_track(centers)})
    return d, objects


def head_dip_scene():
    """mouse_center and neck in ROI0, head_midpoint poking out, frames [10, 25)."""
    from conftest import object_set, square

    objects = object_set({"ROI0": square(0.0, 0.0, 400.0)})
    centers = [(392.0, 200.0) if 10 <= f < 25 else (200.0, 200.0) for f in range(60)]
    d = make_dataset({"m0": rigid_track(centers)})
    # at x=392: neck 398 in (boundary 400), head_midpoint 401 out, nose 404 out
    assert BODY_OFFSETS["neck"][0] == 6.0 and BODY_OFFSETS["head_midpoint"][0] == 9.0
    return d, objects, [(10, 25)]
