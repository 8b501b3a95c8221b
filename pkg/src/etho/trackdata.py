"""Keypoint dataset and scene-object ingestion, validation, persistence.

Canonical on-disk formats:
  - keypoint CSV: header ``animal,frame,bodypart,x,y,confidence``; one row
    per (animal, frame, bodypart); empty x/y cells mean a missing keypoint;
    frames are 0-indexed and dense per animal;
  - dataset JSON: the CSV mirror plus explicit ``n_frames``, ``frame_size``,
    optional ``fps`` and ``px_per_cm``;
  - objects JSON: ``{"objects": [{"name", "kind", "polygon"}, ...]}``.

Missing keypoints are stored as NaN and propagate as undefined through all
downstream computations; they are never silently replaced by coordinates.
Datasets and object sets are immutable after construction.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import geometry
from .errors import (
    BoundsError,
    DimensionError,
    DuplicateNameError,
    GeometryError,
    SchemaError,
    UnknownNameError,
)

CSV_HEADER = ["animal", "frame", "bodypart", "x", "y", "confidence"]


@dataclass(frozen=True)
class Dataset:
    """Immutable keypoint tensor with identity and calibration metadata.

    keypoints has shape (animals, frames, bodyparts, 3) holding x, y and
    confidence as float64; a missing keypoint is NaN in all three slots.
    """

    id: str
    n_frames: int
    frame_size: tuple[int, int]
    animal_ids: tuple[str, ...]
    bodypart_names: tuple[str, ...]
    keypoints: np.ndarray
    fps: float | None = None
    px_per_cm: float | None = None

    def __post_init__(self):
        _check_unique("animal", self.animal_ids)
        _check_unique("bodypart", self.bodypart_names)
        if self.n_frames < 1:
            raise DimensionError(f"n_frames must be positive, got {self.n_frames}")
        expected = (len(self.animal_ids), self.n_frames, len(self.bodypart_names), 3)
        if self.keypoints.shape != expected:
            raise DimensionError(
                f"keypoints shape {self.keypoints.shape} != expected {expected} "
                "(animals, frames, bodyparts, 3)"
            )
        self._validate_bounds()
        self.keypoints.flags.writeable = False

    def _validate_bounds(self):
        w, h = self.frame_size
        xs = self.keypoints[..., 0]
        ys = self.keypoints[..., 1]
        with np.errstate(invalid="ignore"):
            bad = (xs < 0) | (xs > w) | (ys < 0) | (ys > h)
        if bad.any():
            a, f, b = [int(v) for v in np.argwhere(bad)[0]]
            raise BoundsError(
                f"keypoint out of frame bounds {w}x{h}: animal {self.animal_ids[a]!r}, "
                f"frame {f}, bodypart {self.bodypart_names[b]!r} at "
                f"({xs[a, f, b]}, {ys[a, f, b]}); {int(bad.sum())} offending keypoint(s)"
            )

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.id == other.id
            and self.n_frames == other.n_frames
            and self.frame_size == other.frame_size
            and self.animal_ids == other.animal_ids
            and self.bodypart_names == other.bodypart_names
            and self.fps == other.fps
            and self.px_per_cm == other.px_per_cm
            and np.array_equal(self.keypoints, other.keypoints, equal_nan=True)
        )

    def animal_index(self, animal: str) -> int:
        try:
            return self.animal_ids.index(animal)
        except ValueError:
            raise UnknownNameError("animal", animal, self.animal_ids) from None

    def bodypart_index(self, bodypart: str) -> int:
        try:
            return self.bodypart_names.index(bodypart)
        except ValueError:
            raise UnknownNameError("bodypart", bodypart, self.bodypart_names) from None

    @property
    def xy(self) -> np.ndarray:
        return self.keypoints[..., :2]

    @property
    def missing(self) -> np.ndarray:
        """(animals, frames, bodyparts) bool mask of missing keypoints."""
        return np.isnan(self.keypoints[..., 0]) | np.isnan(self.keypoints[..., 1])


class ObjectKind(str, enum.Enum):
    STATIC_OBJECT = "static_object"
    ROI = "roi"
    ANIMAL_PROXY = "animal_proxy"


@dataclass(frozen=True)
class SceneObject:
    """Named scene geometry: a simple CCW polygon or a boolean pixel mask."""

    name: str
    kind: ObjectKind
    polygon: np.ndarray | None = None
    mask: np.ndarray | None = None

    def __post_init__(self):
        if (self.polygon is None) == (self.mask is None):
            raise GeometryError(f"object {self.name!r} needs exactly one of polygon or mask")
        if self.polygon is not None:
            object.__setattr__(self, "polygon", geometry.validate_polygon(self.polygon))
        else:
            m = np.asarray(self.mask, dtype=bool)
            if m.ndim != 2:
                raise GeometryError(f"mask for {self.name!r} must be 2-D (height, width)")
            m.flags.writeable = False
            object.__setattr__(self, "mask", m)

    def __eq__(self, other):
        if not isinstance(other, SceneObject):
            return NotImplemented
        if self.name != other.name or self.kind != other.kind:
            return False
        if (self.polygon is None) != (other.polygon is None):
            return False
        if self.polygon is not None:
            return np.array_equal(self.polygon, other.polygon)
        return np.array_equal(self.mask, other.mask)


@dataclass(frozen=True)
class ObjectSet:
    """Immutable name -> SceneObject map; mutation returns a new set."""

    objects: dict = field(default_factory=dict)

    def __post_init__(self):
        for key, obj in self.objects.items():
            if key != obj.name:
                raise SchemaError(f"object map key {key!r} != object name {obj.name!r}")

    def get(self, name: str) -> SceneObject:
        try:
            return self.objects[name]
        except KeyError:
            raise UnknownNameError("object", name, tuple(sorted(self.objects))) from None

    def __contains__(self, name: str) -> bool:
        return name in self.objects

    def __len__(self) -> int:
        return len(self.objects)

    def __eq__(self, other):
        if not isinstance(other, ObjectSet):
            return NotImplemented
        return sorted(self.objects) == sorted(other.objects) and all(
            self.objects[k] == other.objects[k] for k in self.objects
        )


def get_object_names(objects: ObjectSet) -> list[str]:
    """All object names in deterministic (lexicographic) order."""
    return sorted(objects.objects)


def add_roi(objects: ObjectSet, name: str, polygon) -> ObjectSet:
    """Return a new ObjectSet with a user-drawn ROI added."""
    if name in objects:
        raise DuplicateNameError("object", name)
    roi = SceneObject(name=name, kind=ObjectKind.ROI, polygon=np.asarray(polygon, dtype=np.float64))
    merged = dict(objects.objects)
    merged[name] = roi
    return ObjectSet(merged)


def _check_unique(kind: str, names) -> None:
    seen = set()
    for n in names:
        if n in seen:
            raise DuplicateNameError(kind, n)
        seen.add(n)


def _parse_cell(value: str, row_num: int, column: str) -> float:
    if value is None or value.strip() == "":
        return math.nan
    try:
        return float(value)
    except ValueError:
        raise SchemaError(f"not a number: {value!r}", row=row_num, column=column) from None


def load_dataset(
    path,
    format: str | None = None,
    *,
    frame_size: tuple[int, int] | None = None,
    fps: float | None = None,
    px_per_cm: float | None = None,
    dataset_id: str | None = None,
    min_confidence: float = 0.0,
) -> Dataset:
    """Load and validate a dataset from the canonical CSV or JSON format.

    For CSV, frame_size may be supplied; when absent it is inferred as the
    ceiling of the coordinate maxima. Keypoints whose confidence is below
    min_confidence are demoted to missing (0.0 disables the filter).
    """
    path = Path(path)
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "csv"
    if format == "csv":
        ds = _load_csv(path, frame_size=frame_size, fps=fps, px_per_cm=px_per_cm, dataset_id=dataset_id)
    elif format == "json":
        ds = _load_json(path)
    else:
        raise SchemaError(f"unsupported dataset format: {format!r}")
    if min_confidence > 0.0:
        ds = apply_confidence_filter(ds, min_confidence)
    return ds


def apply_confidence_filter(d: Dataset, min_confidence: float) -> Dataset:
    """Demote keypoints with confidence below the threshold to missing."""
    kp = d.keypoints.copy()
    with np.errstate(invalid="ignore"):
        low = kp[..., 2] < min_confidence
    kp[low] = np.nan
    return Dataset(
        id=d.id,
        n_frames=d.n_frames,
        frame_size=d.frame_size,
        animal_ids=d.animal_ids,
        bodypart_names=d.bodypart_names,
        keypoints=kp,
        fps=d.fps,
        px_per_cm=d.px_per_cm,
    )


def _load_csv(path: Path, *, frame_size, fps, px_per_cm, dataset_id) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty keypoint CSV") from None
        header = [h.strip() for h in header]
        has_conf = header == CSV_HEADER
        if not has_conf and header != CSV_HEADER[:5]:
            raise SchemaError(
                f"bad CSV header {header!r}; expected {','.join(CSV_HEADER)} "
                "(confidence column optional)",
                row=1,
            )
        rows = []
        for row_num, row in enumerate(reader, start=2):
            if not row or all(c.strip() == "" for c in row):
                continue
            if len(row) != len(header):
                raise SchemaError(f"expected {len(header)} cells, got {len(row)}", row=row_num)
            animal, frame_s, bodypart = row[0], row[1], row[2]
            try:
                frame = int(frame_s)
            except ValueError:
                raise SchemaError(f"frame must be an integer, got {frame_s!r}", row=row_num, column="frame") from None
            if frame < 0:
                raise SchemaError(f"negative frame index {frame}", row=row_num, column="frame")
            x = _parse_cell(row[3], row_num, "x")
            y = _parse_cell(row[4], row_num, "y")
            conf = _parse_cell(row[5], row_num, "confidence") if has_conf else math.nan
            if not math.isnan(conf) and not (0.0 <= conf <= 1.0):
                raise SchemaError(f"confidence {conf} outside [0, 1]", row=row_num, column="confidence")
            rows.append((animal, frame, bodypart, x, y, conf, row_num))

    if not rows:
        raise SchemaError("keypoint CSV has no data rows")

    animal_ids: list[str] = []
    bodypart_names: list[str] = []
    for animal, _, bodypart, *_ in rows:
        if animal not in animal_ids:
            animal_ids.append(animal)
        if bodypart not in bodypart_names:
            bodypart_names.append(bodypart)

    n_frames = max(r[1] for r in rows) + 1
    kp = np.full((len(animal_ids), n_frames, len(bodypart_names), 3), np.nan)
    filled = np.zeros(kp.shape[:3], dtype=bool)
    a_idx = {a: i for i, a in enumerate(animal_ids)}
    b_idx = {b: i for i, b in enumerate(bodypart_names)}
    for animal, frame, bodypart, x, y, conf, row_num in rows:
        a, b = a_idx[animal], b_idx[bodypart]
        if filled[a, frame, b]:
            raise SchemaError(
                f"duplicate row for animal {animal!r}, frame {frame}, bodypart {bodypart!r}",
                row=row_num,
            )
        filled[a, frame, b] = True
        if math.isnan(x) or math.isnan(y):
            continue  # missing keypoint stays NaN, never 0
        kp[a, frame, b] = (x, y, conf)
    if not filled.all():
        a, f, b = [int(v) for v in np.argwhere(~filled)[0]]
        raise SchemaError(
            f"frames not dense: no row for animal {animal_ids[a]!r}, frame {f}, "
            f"bodypart {bodypart_names[b]!r}"
        )

    if frame_size is None:
        with np.errstate(invalid="ignore"):
            max_x = np.nanmax(kp[..., 0]) if not np.isnan(kp[..., 0]).all() else 1.0
            max_y = np.nanmax(kp[..., 1]) if not np.isnan(kp[..., 1]).all() else 1.0
        frame_size = (int(math.ceil(max_x)), int(math.ceil(max_y)))
    return Dataset(
        id=dataset_id or path.stem,
        n_frames=n_frames,
        frame_size=(int(frame_size[0]), int(frame_size[1])),
        animal_ids=tuple(animal_ids),
        bodypart_names=tuple(bodypart_names),
        keypoints=kp,
        fps=fps,
        px_per_cm=px_per_cm,
    )


def _load_json(path: Path) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON: {e}") from None
    return dataset_from_json(doc)


def dataset_from_json(doc: dict) -> Dataset:
    for key in ("id", "n_frames", "frame_size", "animal_ids", "bodypart_names", "keypoints"):
        if key not in doc:
            raise SchemaError(f"dataset JSON missing key {key!r}", column=key)
    animal_ids = tuple(doc["animal_ids"])
    bodypart_names = tuple(doc["bodypart_names"])
    n_frames = int(doc["n_frames"])
    kp = np.full((len(animal_ids), n_frames, len(bodypart_names), 3), np.nan)
    table = doc["keypoints"]
    for a, animal in enumerate(animal_ids):
        if animal not in table:
            raise SchemaError(f"keypoints missing animal {animal!r}", column=animal)
        frames = table[animal]
        if len(frames) != n_frames:
            raise DimensionError(
                f"animal {animal!r} has {len(frames)} frames, declared n_frames={n_frames}"
            )
        for f, parts in enumerate(frames):
            if len(parts) != len(bodypart_names):
                raise DimensionError(
                    f"animal {animal!r} frame {f} has {len(parts)} bodyparts, "
                    f"declared {len(bodypart_names)}"
                )
            for b, cell in enumerate(parts):
                if cell is None:
                    continue
                x, y = cell[0], cell[1]
                if x is None or y is None:
                    continue
                conf = cell[2] if len(cell) > 2 and cell[2] is not None else math.nan
                if not math.isnan(conf) and not (0.0 <= conf <= 1.0):
                    raise SchemaError(f"confidence {conf} outside [0, 1]", column="confidence")
                kp[a, f, b] = (float(x), float(y), conf)
    return Dataset(
        id=str(doc["id"]),
        n_frames=n_frames,
        frame_size=(int(doc["frame_size"][0]), int(doc["frame_size"][1])),
        animal_ids=animal_ids,
        bodypart_names=bodypart_names,
        keypoints=kp,
        fps=doc.get("fps"),
        px_per_cm=doc.get("px_per_cm"),
    )


def dataset_to_json(d: Dataset) -> dict:
    table = {}
    for a, animal in enumerate(d.animal_ids):
        frames = []
        for f in range(d.n_frames):
            parts = []
            for b in range(len(d.bodypart_names)):
                x, y, conf = d.keypoints[a, f, b]
                if math.isnan(x) or math.isnan(y):
                    parts.append(None)
                else:
                    parts.append([x, y, None if math.isnan(conf) else conf])
            frames.append(parts)
        table[animal] = frames
    return {
        "id": d.id,
        "n_frames": d.n_frames,
        "frame_size": [d.frame_size[0], d.frame_size[1]],
        "fps": d.fps,
        "px_per_cm": d.px_per_cm,
        "animal_ids": list(d.animal_ids),
        "bodypart_names": list(d.bodypart_names),
        "keypoints": table,
    }


def save_dataset(d: Dataset, path, format: str | None = None) -> Path:
    """Write a dataset in the canonical format; JSON round-trips all fields."""
    path = Path(path)
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "csv"
    if format == "json":
        path.write_text(json.dumps(dataset_to_json(d), indent=2) + "\n", encoding="utf-8")
    elif format == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for a, animal in enumerate(d.animal_ids):
                for f in range(d.n_frames):
                    for b, bodypart in enumerate(d.bodypart_names):
                        x, y, conf = d.keypoints[a, f, b]
                        if math.isnan(x) or math.isnan(y):
                            writer.writerow([animal, f, bodypart, "", "", ""])
                        else:
                            writer.writerow(
                                [
                                    animal,
                                    f,
                                    bodypart,
                                    repr(float(x)),
                                    repr(float(y)),
                                    "" if math.isnan(conf) else repr(float(conf)),
                                ]
                            )
    else:
        raise SchemaError(f"unsupported dataset format: {format!r}")
    return path


def objects_from_json(doc: dict) -> ObjectSet:
    if "objects" not in doc or not isinstance(doc["objects"], list):
        raise SchemaError("objects JSON must have a list under key 'objects'")
    out = {}
    for entry in doc["objects"]:
        name = entry.get("name")
        if not name:
            raise SchemaError("object entry missing 'name'")
        if name in out:
            raise DuplicateNameError("object", name)
        kind_s = entry.get("kind", "static_object")
        try:
            kind = ObjectKind(kind_s)
        except ValueError:
            raise SchemaError(f"unknown object kind {kind_s!r}", column="kind") from None
        if "polygon" not in entry:
            raise SchemaError(f"object {name!r} missing 'polygon'")
        out[name] = SceneObject(name=name, kind=kind, polygon=np.asarray(entry["polygon"], dtype=np.float64))
    return ObjectSet(out)


def objects_to_json(objects: ObjectSet) -> dict:
    entries = []
    for name in get_object_names(objects):
        obj = objects.objects[name]
        if obj.polygon is None:
            continue  # masks are in-memory only; the wire format carries polygons
        entries.append(
            {
                "name": name,
                "kind": obj.kind.value,
                "polygon": [[float(x), float(y)] for x, y in obj.polygon],
            }
        )
    return {"objects": entries}


def load_objects(path) -> ObjectSet:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON: {e}") from None
    return objects_from_json(doc)


def save_objects(objects: ObjectSet, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(objects_to_json(objects), indent=2) + "\n", encoding="utf-8")
    return path
