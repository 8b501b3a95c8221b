"""High-level behavior queries and the built-in task programs.

The facade functions turn relation tables into EventDicts: build per-frame
predicates, AND them, extract maximal runs, then post-process. Social
queries produce one entry per ordered (focal, target) pair; the focal
animal's state predicates (speed/acceleration) gate its pairs.

Built-ins cover the six MABe mouse-triplet tasks plus the elevated-plus-maze
programs; their default thresholds are pixel/frame/degree constants and any
of them can be overridden per call.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kinematics, relations
from .errors import EthoError, UnknownNameError
from .events import (
    EventDict,
    PostProcessSpec,
    add_sequential_events,
    add_simultaneous_events,
    events_from_mask,
    negate_events,
    postprocess,
)
from .relations import (
    ComparisonSpec,
    OrientationKind,
    RelationKind,
    parse_comparison,
    parse_orientation_comparison,
    relation_kind,
)
from .trackdata import Dataset, ObjectSet


def _as_comparison(comparison) -> ComparisonSpec:
    if isinstance(comparison, ComparisonSpec):
        return comparison
    return parse_comparison(str(comparison))


def _as_post(post) -> PostProcessSpec:
    if post is None:
        return PostProcessSpec()
    if isinstance(post, PostProcessSpec):
        return post
    return PostProcessSpec(*post)


def animals_object_events(
    d: Dataset,
    objects: ObjectSet,
    object_name: str,
    relation,
    comparison=None,
    bodyparts=("all",),
    negate: bool = False,
    post: PostProcessSpec | None = None,
    *,
    quantifier: str = "all",
) -> EventDict:
    """Events where each animal satisfies a relation to a scene object."""
    kind = relation_kind(relation)
    obj = objects.get(object_name)
    numeric = kind not in relations.BOOLEAN_KINDS
    if numeric and comparison is None:
        raise EthoError(f"numeric relation {kind.value!r} needs a comparison like '<50'")
    if not numeric and comparison is not None:
        raise EthoError(f"boolean relation {kind.value!r} takes no comparison")
    entries = {}
    for animal in d.animal_ids:
        table = relations.animal_object_relation(d, obj, animal, kind, bodyparts, quantifier=quantifier)
        if numeric:
            mask = _as_comparison(comparison).apply(table.values)
        else:
            mask = table.boolean_mask()
        entries[animal] = events_from_mask(mask)
    result = EventDict(d.n_frames, entries)
    if negate:
        result = negate_events(result)
    return postprocess(result, _as_post(post))


def animals_state_events(
    d: Dataset,
    state: str,
    comparison,
    post: PostProcessSpec | None = None,
) -> EventDict:
    """Events where each animal's center speed or acceleration passes a comparison."""
    if state == "speed":
        series = kinematics.center_speed(d)
    elif state == "acceleration":
        series = kinematics.center_accel_magnitude(d)
    else:
        raise UnknownNameError("state", state, ("speed", "acceleration"))
    spec = _as_comparison(comparison)
    entries = {}
    for a, animal in enumerate(d.animal_ids):
        entries[animal] = events_from_mask(spec.apply(series[a]))
    return postprocess(EventDict(d.n_frames, entries), _as_post(post))


def _relation_mask(
    d: Dataset,
    focal: str,
    target: str,
    kind: RelationKind,
    comparison,
    bodyparts,
    other_bodyparts,
    cone_half_angle: float,
) -> np.ndarray:
    table = relations.animal_animal_relation(
        d, focal, target, kind, bodyparts, other_bodyparts, cone_half_angle=cone_half_angle
    )
    if kind == RelationKind.ORIENTATION:
        op, side = parse_orientation_comparison(str(comparison))
        front = table.boolean_mask()
        defined = ~np.isnan(table.values)
        want_front = (side == OrientationKind.FRONT) == (op == "==")
        return (front if want_front else (defined & ~front))
    return _as_comparison(comparison).apply(table.values)


def animals_social_events(
    d: Dataset,
    relation_list,
    comparison_list,
    state_relation_list=None,
    state_comparison_list=None,
    bodyparts=("all",),
    other_bodyparts=("all",),
    post: PostProcessSpec | None = None,
    *,
    cone_half_angle: float = relations.DEFAULT_CONE_HALF_ANGLE,
) -> EventDict:
    """Events per ordered (focal, target) pair satisfying every predicate.

    All pairwise relation predicates plus the focal animal's own state
    predicates are ANDed frame-wise before run extraction.
    """
    relation_list = [relation_kind(r) for r in relation_list]
    state_relation_list = list(state_relation_list or [])
    state_comparison_list = list(state_comparison_list or [])
    if len(relation_list) != len(comparison_list):
        raise EthoError(
            f"{len(relation_list)} relations vs {len(comparison_list)} comparisons"
        )
    if len(state_relation_list) != len(state_comparison_list):
        raise EthoError(
            f"{len(state_relation_list)} state relations vs "
            f"{len(state_comparison_list)} state comparisons"
        )
    if len(d.animal_ids) < 2:
        raise EthoError("social events need at least 2 animals")

    state_masks = {}
    for state, cmp_s in zip(state_relation_list, state_comparison_list):
        if state == "speed":
            series = kinematics.center_speed(d)
        elif state == "acceleration":
            series = kinematics.center_accel_magnitude(d)
        else:
            raise UnknownNameError("state", state, ("speed", "acceleration"))
        spec = _as_comparison(cmp_s)
        for a, animal in enumerate(d.animal_ids):
            mask = spec.apply(series[a])
            state_masks[animal] = state_masks[animal] & mask if animal in state_masks else mask

    entries = {}
    for focal, target in itertools.permutations(d.animal_ids, 2):
        mask = np.ones(d.n_frames, dtype=bool)
        for kind, cmp_s in zip(relation_list, comparison_list):
            mask &= _relation_mask(
                d, focal, target, kind, cmp_s, bodyparts, other_bodyparts, cone_half_angle
            )
        if focal in state_masks:
            mask &= state_masks[focal]
        entries[(focal, target)] = events_from_mask(mask)
    return postprocess(EventDict(d.n_frames, entries), _as_post(post))


def enter_object(
    d: Dataset,
    objects: ObjectSet,
    object_name: str,
    bodyparts=("all",),
    post: PostProcessSpec | None = None,
) -> EventDict:
    """Transition events spanning an outside bout into the following inside bout."""
    inside = animals_object_events(d, objects, object_name, RelationKind.OVERLAP, bodyparts=bodyparts)
    outside = negate_events(inside)
    result = add_sequential_events(outside, inside, max_gap=0)
    return postprocess(result, _as_post(post))


@dataclass(frozen=True)
class EvalReport:
    task: str
    f1: float
    precision: float
    recall: float
    n_frames: int

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "f1": self.f1,
            "precision": self.precision,
            "recall": self.recall,
            "n_frames": self.n_frames,
        }


def evaluate_f1(pred: EventDict, gt, task: str = "") -> EvalReport:
    """Frame-level F1: a frame is predicted positive when any key covers it."""
    gt = np.asarray(gt, dtype=bool)
    if len(gt) != pred.n_frames:
        raise EthoError(f"ground truth has {len(gt)} frames, events have {pred.n_frames}")
    mask = np.zeros(pred.n_frames, dtype=bool)
    for seq in pred.entries.values():
        mask |= seq.to_mask(pred.n_frames)
    tp = int((mask & gt).sum())
    fp = int((mask & ~gt).sum())
    fn = int((~mask & gt).sum())
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 0.0 if precision + recall == 0.0 else 2.0 * precision * recall / (precision + recall)
    return EvalReport(task, f1, precision, recall, pred.n_frames)


# --- built-in task programs -------------------------------------------------

BUILTIN_DEFAULTS = {
    "mabe_chase": {
        "max_closest_distance": 40.0,
        "min_speed": 3.4,
        "cone_half_angle": relations.DEFAULT_CONE_HALF_ANGLE,
        "smooth_window": 25,
        "min_window": 30,
    },
    "mabe_close": {
        "max_closest_distance": 24.0,
        "smooth_window": 0,
        "min_window": 5,
    },
    "mabe_contact": {
        "max_closest_distance": 12.0,
        "smooth_window": 11,
        "min_window": 5,
    },
    "mabe_huddle": {
        "max_distance": 50.0,
        "max_relative_speed": 4.0,
        "smooth_window": 61,
        "min_window": 75,
    },
    "mabe_oral_ear_contact": {
        "max_closest_distance": 10.0,
        "nose": "nose",
        "ears": ("left_ear", "right_ear"),
        "smooth_window": 5,
        "min_window": 15,
    },
    "mabe_watching": {
        "min_distance": 50.0,
        "max_distance": 260.0,
        "max_angle": 15.0,
        "angle_axis": "head",
        "smooth_window": 15,
        "min_window": 100,
    },
    "epm_open_arm": {
        "roi": "open arm",
        "bodyparts": ("all",),
        "smooth_window": 0,
        "min_window": 0,
    },
    "epm_closed_arm": {
        "roi": "closed arm",
        "bodyparts": ("all",),
        "smooth_window": 0,
        "min_window": 0,
    },
    "epm_head_dips": {
        "roi": "ROI0",
        "inside_bodyparts": ("mouse_center", "neck"),
        "outside_bodypart": "head_midpoint",
        "smooth_window": 0,
        "min_window": 0,
    },
}

BUILTIN_NAMES = tuple(sorted(BUILTIN_DEFAULTS))


def _merge_params(name: str, overrides) -> dict:
    params = dict(BUILTIN_DEFAULTS[name])
    for key, value in (overrides or {}).items():
        if key not in params:
            raise UnknownNameError("parameter", key, tuple(sorted(params)))
        params[key] = value
    return params


def run_builtin(name: str, d: Dataset, objects: ObjectSet | None = None, overrides=None) -> EventDict:
    """Run one built-in behavior program with optional parameter overrides."""
    if name not in BUILTIN_DEFAULTS:
        raise UnknownNameError("builtin", name, BUILTIN_NAMES)
    p = _merge_params(name, overrides)
    objects = objects if objects is not None else ObjectSet({})
    post = PostProcessSpec(int(p["smooth_window"]), int(p["min_window"]))

    if name == "mabe_chase":
        return animals_social_events(
            d,
            [RelationKind.CLOSEST_DISTANCE, RelationKind.ORIENTATION],
            [f"<{p['max_closest_distance']}", "==front"],
            ["speed"],
            [f">{p['min_speed']}"],
            post=post,
            cone_half_angle=float(p["cone_half_angle"]),
        )
    if name in ("mabe_close", "mabe_contact"):
        return animals_social_events(
            d,
            [RelationKind.CLOSEST_DISTANCE],
            [f"<{p['max_closest_distance']}"],
            post=post,
        )
    if name == "mabe_huddle":
        return animals_social_events(
            d,
            [RelationKind.DISTANCE, RelationKind.RELATIVE_SPEED],
            [f"<{p['max_distance']}", f"<{p['max_relative_speed']}"],
            post=post,
        )
    if name == "mabe_oral_ear_contact":
        return animals_social_events(
            d,
            [RelationKind.CLOSEST_DISTANCE],
            [f"<{p['max_closest_distance']}"],
            bodyparts=[p["nose"]],
            other_bodyparts=list(p["ears"]),
            post=post,
        )
    if name == "mabe_watching":
        angle_kind = (
            RelationKind.VIEWING_ANGLE if p["angle_axis"] == "head" else RelationKind.ANGLE
        )
        return animals_social_events(
            d,
            [RelationKind.DISTANCE, RelationKind.DISTANCE, angle_kind],
            [f"<{p['max_distance']}", f">{p['min_distance']}", f"<{p['max_angle']}"],
            post=post,
        )
    if name in ("epm_open_arm", "epm_closed_arm"):
        return animals_object_events(
            d, objects, p["roi"], RelationKind.OVERLAP, bodyparts=list(p["bodyparts"]), post=post
        )
    # epm_head_dips: body anchors inside the ROI while the head pokes out
    anchored = animals_object_events(
        d, objects, p["roi"], RelationKind.OVERLAP, bodyparts=list(p["inside_bodyparts"])
    )
    head_in = animals_object_events(
        d, objects, p["roi"], RelationKind.OVERLAP, bodyparts=[p["outside_bodypart"]]
    )
    dips = add_simultaneous_events(anchored, negate_events(head_in))
    return postprocess(dips, post)
