"""Per-frame spatial relations: animal-object and animal-animal.

All relation tables are float64 arrays of length n_frames; NaN marks frames
where a required keypoint is missing (undefined). Boolean relations encode
true/false as 1.0/0.0, orientation encodes front/behind as 1.0/0.0, so one
representation handles undefinedness uniformly. Angles are in degrees.

Geometry conventions follow image coordinates (y grows downward): to_above
means every selected bodypart lies above the object's bounding box, i.e.
y < bbox min-y. Side relations use the axis-aligned bounding box; overlap
is boundary-inclusive point-in-polygon.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

import numpy as np

from . import geometry, kinematics
from .errors import ComparisonError, EthoError, UnknownNameError
from .trackdata import Dataset, SceneObject

DEFAULT_CONE_HALF_ANGLE = 90.0

NOSE = "nose"
NECK = "neck"
TAIL_BASE = "tail_base"


class RelationKind(str, enum.Enum):
    TO_LEFT = "to_left"
    TO_RIGHT = "to_right"
    TO_ABOVE = "to_above"
    TO_BELOW = "to_below"
    OVERLAP = "overlap"
    DISTANCE = "distance"
    CLOSEST_DISTANCE = "closest_distance"
    ANGLE = "angle"
    GAZING_ANGLE = "gazing_angle"
    ORIENTATION = "orientation"
    RELATIVE_SPEED = "relative_speed"
    # numeric angle between the focal head axis and the direction to the
    # target's center; orientation thresholds it, watching compares it
    VIEWING_ANGLE = "viewing_angle"


BOOLEAN_KINDS = frozenset(
    {
        RelationKind.TO_LEFT,
        RelationKind.TO_RIGHT,
        RelationKind.TO_ABOVE,
        RelationKind.TO_BELOW,
        RelationKind.OVERLAP,
        RelationKind.ORIENTATION,
    }
)

OBJECT_KINDS = frozenset(
    {
        RelationKind.TO_LEFT,
        RelationKind.TO_RIGHT,
        RelationKind.TO_ABOVE,
        RelationKind.TO_BELOW,
        RelationKind.OVERLAP,
        RelationKind.DISTANCE,
    }
)

SOCIAL_KINDS = frozenset(
    {
        RelationKind.DISTANCE,
        RelationKind.CLOSEST_DISTANCE,
        RelationKind.ANGLE,
        RelationKind.GAZING_ANGLE,
        RelationKind.ORIENTATION,
        RelationKind.RELATIVE_SPEED,
        RelationKind.VIEWING_ANGLE,
    }
)


class OrientationKind(str, enum.Enum):
    FRONT = "front"
    BEHIND = "behind"


def relation_kind(name) -> RelationKind:
    if isinstance(name, RelationKind):
        return name
    try:
        return RelationKind(str(name))
    except ValueError:
        raise UnknownNameError("relation", str(name), tuple(k.value for k in RelationKind)) from None


_CMP_RE = re.compile(r"^\s*(<=|>=|==|!=|<|>)\s*")


@dataclass(frozen=True)
class ComparisonSpec:
    """Parsed comparison like '<40'; applied to numeric relation tables."""

    op: str
    value: float

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Boolean mask; undefined (NaN) frames compare false."""
        with np.errstate(invalid="ignore"):
            if self.op == "<":
                return values < self.value
            if self.op == "<=":
                return values <= self.value
            if self.op == ">":
                return values > self.value
            if self.op == ">=":
                return values >= self.value
            if self.op == "==":
                return values == self.value
            return ~np.isnan(values) & (values != self.value)

    def __str__(self) -> str:
        return f"{self.op}{_format_number(self.value)}"


def _format_number(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(v)


def parse_comparison(s: str) -> ComparisonSpec:
    m = _CMP_RE.match(s)
    if not m:
        raise ComparisonError(
            f"expected a comparison operator (<, <=, >, >=, ==, !=) in {s!r}",
            position=len(s) - len(s.lstrip()),
        )
    rest = s[m.end() :]
    try:
        value = float(rest)
    except ValueError:
        raise ComparisonError(f"expected a number after {m.group(1)!r} in {s!r}", position=m.end()) from None
    if not np.isfinite(value):
        raise ComparisonError(f"comparison value must be finite, got {rest.strip()!r}", position=m.end())
    return ComparisonSpec(m.group(1), value)


def parse_orientation_comparison(s: str) -> tuple[str, OrientationKind]:
    """Parse orientation comparisons like '==front' or '!= behind'."""
    m = re.match(r"^\s*(==|!=)\s*(front|behind)\s*$", s, re.IGNORECASE)
    if not m:
        raise ComparisonError(
            f"orientation comparison must be ==/!= followed by front or behind, got {s!r}",
            position=0,
        )
    return m.group(1), OrientationKind(m.group(2).lower())


@dataclass(frozen=True)
class RelationTable:
    subject: str
    target: str
    kind: RelationKind
    values: np.ndarray

    def __post_init__(self):
        self.values.flags.writeable = False

    @property
    def n_frames(self) -> int:
        return len(self.values)

    def boolean_mask(self) -> np.ndarray:
        """True frames of a boolean relation; undefined is false."""
        with np.errstate(invalid="ignore"):
            return self.values == 1.0


def _resolve_parts(d: Dataset, bodyparts) -> list[int]:
    if bodyparts is None:
        return list(range(len(d.bodypart_names)))
    parts = list(bodyparts)
    if parts == ["all"] or parts == ("all",):
        return list(range(len(d.bodypart_names)))
    return [d.bodypart_index(p) for p in parts]


def _is_all(bodyparts) -> bool:
    return bodyparts is None or list(bodyparts) == ["all"]


def _subject_point(d: Dataset, a: int, bodyparts) -> np.ndarray:
    """Representative point series (frames, 2) for one animal.

    'all' uses the animal-center rule; an explicit list is strict (any
    missing selected part makes the frame undefined).
    """
    if _is_all(bodyparts):
        return kinematics.centers(d)[a]
    idx = _resolve_parts(d, bodyparts)
    return kinematics.mean_of_parts(d, idx, skip_missing=False)[a]


def animal_object_relation(
    d: Dataset,
    obj: SceneObject,
    animal: str,
    kind,
    bodyparts=("all",),
    *,
    quantifier: str = "all",
) -> RelationTable:
    """Relation between one animal and a scene object, one value per frame.

    overlap: 1.0 when the quantifier (all/any) of the selected bodyparts is
    inside the polygon or mask; undefined per the quantifier's requirement.
    Side relations hold when every selected bodypart clears the object's
    bounding box on that side. distance is animal center (or the selected
    parts' mean) to the polygon centroid.
    """
    kind = relation_kind(kind)
    if kind not in OBJECT_KINDS:
        raise EthoError(f"relation {kind.value!r} is not an animal-object relation")
    if quantifier not in ("all", "any"):
        raise EthoError(f"quantifier must be 'all' or 'any', got {quantifier!r}")
    a = d.animal_index(animal)

    if kind == RelationKind.DISTANCE:
        pt = _subject_point(d, a, bodyparts)
        cx, cy = _object_centroid(obj)
        values = np.hypot(pt[:, 0] - cx, pt[:, 1] - cy)
        return RelationTable(animal, obj.name, kind, values)

    idx = _resolve_parts(d, bodyparts)
    xs = d.xy[a, :, idx, 0]  # (parts, frames)
    ys = d.xy[a, :, idx, 1]
    part_missing = np.isnan(xs) | np.isnan(ys)

    if kind == RelationKind.OVERLAP:
        inside = np.zeros(xs.shape, dtype=bool)
        for i in range(len(idx)):
            inside[i] = _points_inside(obj, xs[i], ys[i])
        if quantifier == "all":
            truth = inside.all(axis=0)
            undefined = part_missing.any(axis=0)
        else:
            truth = inside.any(axis=0)
            undefined = part_missing.all(axis=0)
    else:
        min_x, min_y, max_x, max_y = _object_bbox(obj)
        with np.errstate(invalid="ignore"):
            if kind == RelationKind.TO_LEFT:
                side = xs < min_x
            elif kind == RelationKind.TO_RIGHT:
                side = xs > max_x
            elif kind == RelationKind.TO_ABOVE:
                side = ys < min_y
            else:
                side = ys > max_y
        truth = side.all(axis=0)
        undefined = part_missing.any(axis=0)

    values = np.where(truth, 1.0, 0.0)
    values[undefined] = np.nan
    return RelationTable(animal, obj.name, kind, values)


def _points_inside(obj: SceneObject, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    if obj.polygon is not None:
        return geometry.points_in_polygon(xs, ys, obj.polygon)
    h, w = obj.mask.shape
    out = np.zeros(xs.shape, dtype=bool)
    ok = ~(np.isnan(xs) | np.isnan(ys))
    xi = np.clip(np.round(xs[ok]).astype(int), 0, w - 1)
    yi = np.clip(np.round(ys[ok]).astype(int), 0, h - 1)
    out[ok] = obj.mask[yi, xi]
    return out


def _object_centroid(obj: SceneObject) -> tuple[float, float]:
    if obj.polygon is not None:
        return geometry.polygon_centroid(obj.polygon)
    ys, xs = np.nonzero(obj.mask)
    return float(xs.mean()), float(ys.mean())


def _object_bbox(obj: SceneObject):
    if obj.polygon is not None:
        return geometry.polygon_bbox(obj.polygon)
    ys, xs = np.nonzero(obj.mask)
    return float(xs.min()), float(ys.min()), float(xs.max()), float(ys.max())


def _axis(d: Dataset, a: int, from_part: str, to_part: str) -> np.ndarray:
    """Per-frame axis vector to_part - from_part, shape (frames, 2)."""
    for part in (from_part, to_part):
        if part not in d.bodypart_names:
            raise UnknownNameError("bodypart", part, d.bodypart_names)
    p0 = d.xy[a, :, d.bodypart_index(from_part), :]
    p1 = d.xy[a, :, d.bodypart_index(to_part), :]
    return p1 - p0


def _angle_between(ux, uy, vx, vy) -> np.ndarray:
    """Unsigned angle in degrees between vector series, NaN when degenerate."""
    nu = np.hypot(ux, uy)
    nv = np.hypot(vx, vy)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = (ux * vx + uy * vy) / (nu * nv)
        cos = np.clip(cos, -1.0, 1.0)
        ang = np.degrees(np.arccos(cos))
    ang = np.where((nu == 0.0) | (nv == 0.0), np.nan, ang)
    return ang


def viewing_angle(d: Dataset, focal: str, target: str) -> np.ndarray:
    """Angle between the focal head axis (neck->nose) and the direction from
    the focal center to the target center."""
    a = d.animal_index(focal)
    b = d.animal_index(target)
    head = _axis(d, a, NECK, NOSE)
    cs = kinematics.centers(d)
    to_target = cs[b] - cs[a]
    ang = _angle_between(head[:, 0], head[:, 1], to_target[:, 0], to_target[:, 1])
    same = (to_target[:, 0] == 0.0) & (to_target[:, 1] == 0.0)
    return np.where(same, np.nan, ang)


def animal_animal_relation(
    d: Dataset,
    a: str,
    b: str,
    kind,
    bodyparts_a=("all",),
    bodyparts_b=("all",),
    *,
    cone_half_angle: float = DEFAULT_CONE_HALF_ANGLE,
) -> RelationTable:
    """Relation between two animals (focal a, target b), one value per frame."""
    kind = relation_kind(kind)
    if a == b:
        raise EthoError(f"animal-animal relation needs two distinct animals, got {a!r} twice")
    if kind not in SOCIAL_KINDS:
        raise EthoError(f"relation {kind.value!r} is not an animal-animal relation")
    ai = d.animal_index(a)
    bi = d.animal_index(b)

    if kind == RelationKind.DISTANCE:
        pa = _subject_point(d, ai, bodyparts_a)
        pb = _subject_point(d, bi, bodyparts_b)
        values = np.hypot(pa[:, 0] - pb[:, 0], pa[:, 1] - pb[:, 1])
    elif kind == RelationKind.CLOSEST_DISTANCE:
        ia = _resolve_parts(d, bodyparts_a)
        ib = _resolve_parts(d, bodyparts_b)
        values = np.full(d.n_frames, np.inf)
        defined = np.zeros(d.n_frames, dtype=bool)
        for pa in ia:
            xa = d.xy[ai, :, pa, 0]
            ya = d.xy[ai, :, pa, 1]
            for pb in ib:
                dist = np.hypot(xa - d.xy[bi, :, pb, 0], ya - d.xy[bi, :, pb, 1])
                ok = ~np.isnan(dist)
                defined |= ok
                values = np.where(ok & (dist < values), dist, values)
        values[~defined] = np.nan
    elif kind == RelationKind.ANGLE:
        ax = _axis(d, ai, NECK, TAIL_BASE)
        bx = _axis(d, bi, NECK, TAIL_BASE)
        values = _angle_between(ax[:, 0], ax[:, 1], bx[:, 0], bx[:, 1])
    elif kind == RelationKind.GAZING_ANGLE:
        ax = _axis(d, ai, NECK, NOSE)
        bx = _axis(d, bi, NECK, NOSE)
        values = _angle_between(ax[:, 0], ax[:, 1], bx[:, 0], bx[:, 1])
    elif kind == RelationKind.VIEWING_ANGLE:
        values = viewing_angle(d, a, b)
    elif kind == RelationKind.ORIENTATION:
        ang = viewing_angle(d, a, b)
        with np.errstate(invalid="ignore"):
            values = np.where(ang <= cone_half_angle, 1.0, 0.0)
        values[np.isnan(ang)] = np.nan
    else:  # RELATIVE_SPEED
        v = kinematics.center_velocity(d)
        dv = v[ai] - v[bi]
        values = np.hypot(dv[:, 0], dv[:, 1])

    return RelationTable(a, b, kind, np.asarray(values, dtype=np.float64))
