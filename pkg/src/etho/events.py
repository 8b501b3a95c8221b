"""Interval-event algebra over half-open frame intervals.

An Event is [start, end) with 0 <= start < end <= n_frames. Event sequences
are kept normalized: sorted, pairwise disjoint, adjacent runs merged, so a
frame set has exactly one representation. Subject keys are either an animal
id or an ordered (focal, target) pair, serialized as "focal->target".

Post-processing is two fixed stages: first merge neighboring bouts whose
gap is strictly less than smooth_window, then drop bouts strictly shorter
than min_window.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Union

import numpy as np

from .errors import FrameMismatchError, SchemaError

SubjectKey = Union[str, tuple]

PAIR_SEP = "->"


class Event(NamedTuple):
    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class EventSeq:
    """Normalized tuple of events."""

    events: tuple = ()

    @staticmethod
    def of(raw: Iterable) -> "EventSeq":
        """Normalize arbitrary (start, end) pairs: sort, merge overlaps and
        adjacencies, drop empties."""
        pairs = sorted((int(s), int(e)) for s, e in raw if int(e) > int(s))
        merged: list[list[int]] = []
        for s, e in pairs:
            if merged and s <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], e)
            else:
                merged.append([s, e])
        return EventSeq(tuple(Event(s, e) for s, e in merged))

    def to_mask(self, n_frames: int) -> np.ndarray:
        mask = np.zeros(n_frames, dtype=bool)
        for ev in self.events:
            mask[ev.start : ev.end] = True
        return mask

    @property
    def count(self) -> int:
        return len(self.events)

    @property
    def total_frames(self) -> int:
        return sum(ev.length for ev in self.events)


@dataclass(frozen=True)
class EventDict:
    """Map subject key -> EventSeq, all over the same frame count."""

    n_frames: int
    entries: dict = field(default_factory=dict)

    def seq(self, key: SubjectKey) -> EventSeq:
        return self.entries.get(key, EventSeq())

    def keys(self):
        return self.entries.keys()


@dataclass(frozen=True)
class PostProcessSpec:
    smooth_window: int = 0
    min_window: int = 0

    def __post_init__(self):
        if self.smooth_window < 0 or self.min_window < 0:
            raise SchemaError("post-process windows must be non-negative")

    @property
    def is_noop(self) -> bool:
        return self.smooth_window == 0 and self.min_window == 0


def events_from_mask(mask) -> EventSeq:
    """Maximal runs of true frames become events; NaN/undefined is false."""
    arr = np.asarray(mask)
    if arr.dtype != bool:
        with np.errstate(invalid="ignore"):
            arr = np.nan_to_num(arr.astype(np.float64), nan=0.0) != 0.0
    out = []
    start = None
    for f, v in enumerate(arr.tolist()):
        if v and start is None:
            start = f
        elif not v and start is not None:
            out.append(Event(start, f))
            start = None
    if start is not None:
        out.append(Event(start, len(arr)))
    return EventSeq(tuple(out))


def _check_same_frames(dicts) -> int:
    counts = {d.n_frames for d in dicts}
    if len(counts) != 1:
        raise FrameMismatchError(f"operands built over different frame counts: {sorted(counts)}")
    return counts.pop()


def _intersect_two(a: tuple, b: tuple) -> list:
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        s = max(a[i].start, b[j].start)
        e = min(a[i].end, b[j].end)
        if s < e:
            out.append(Event(s, e))
        if a[i].end <= b[j].end:
            i += 1
        else:
            j += 1
    return out


def add_simultaneous_events(*dicts: EventDict) -> EventDict:
    """Per-frame AND: interval intersection over shared subject keys."""
    if len(dicts) < 2:
        raise FrameMismatchError("simultaneous composition needs at least 2 operands")
    n = _check_same_frames(dicts)
    shared = set(dicts[0].entries)
    for d in dicts[1:]:
        shared &= set(d.entries)
    entries = {}
    for key in shared:
        acc = list(dicts[0].entries[key].events)
        for d in dicts[1:]:
            acc = _intersect_two(tuple(acc), d.entries[key].events)
            if not acc:
                break
        entries[key] = EventSeq(tuple(acc))
    return EventDict(n, entries)


def add_sequential_events(a: EventDict, b: EventDict, max_gap: int = 0) -> EventDict:
    """Chain bouts of a into following bouts of b.

    For each event ea, the earliest event eb of b starting within
    [ea.end, ea.end + max_gap] yields a merged event [ea.start, eb.end).
    The result is normalized, so overlapping merged spans fuse.
    """
    n = _check_same_frames((a, b))
    entries = {}
    for key in set(a.entries) & set(b.entries):
        merged = []
        bs = b.entries[key].events
        for ea in a.entries[key].events:
            for eb in bs:
                if eb.start < ea.end:
                    continue
                if eb.start - ea.end <= max_gap:
                    merged.append((ea.start, eb.end))
                break  # earliest qualifying eb only
        entries[key] = EventSeq.of(merged)
    return EventDict(n, entries)


def negate_events(a: EventDict, n_frames: int | None = None) -> EventDict:
    """Complement of each key's frame set within [0, n_frames)."""
    n = a.n_frames if n_frames is None else n_frames
    entries = {}
    for key, seq in a.entries.items():
        out = []
        cursor = 0
        for ev in seq.events:
            if cursor < ev.start:
                out.append(Event(cursor, ev.start))
            cursor = ev.end
        if cursor < n:
            out.append(Event(cursor, n))
        entries[key] = EventSeq(tuple(out))
    return EventDict(n, entries)


def smooth_seq(seq: EventSeq, window: int) -> EventSeq:
    """Merge neighboring bouts whose gap is strictly less than window."""
    if window <= 0 or not seq.events:
        return seq
    merged = [list(seq.events[0])]
    for ev in seq.events[1:]:
        if ev.start - merged[-1][1] < window:
            merged[-1][1] = ev.end
        else:
            merged.append(list(ev))
    return EventSeq(tuple(Event(s, e) for s, e in merged))


def filter_seq(seq: EventSeq, min_window: int) -> EventSeq:
    """Drop bouts strictly shorter than min_window."""
    if min_window <= 0:
        return seq
    return EventSeq(tuple(ev for ev in seq.events if ev.length >= min_window))


def postprocess(a: EventDict, spec: PostProcessSpec) -> EventDict:
    """Smooth, then filter; both stages disabled at 0."""
    if spec.is_noop:
        return a
    entries = {
        key: filter_seq(smooth_seq(seq, spec.smooth_window), spec.min_window)
        for key, seq in a.entries.items()
    }
    return EventDict(a.n_frames, entries)


class EventStats(NamedTuple):
    count: int
    total_frames: int


def event_stats(a: EventDict) -> dict:
    return {key: EventStats(seq.count, seq.total_frames) for key, seq in a.entries.items()}


def key_to_str(key: SubjectKey) -> str:
    if isinstance(key, tuple):
        return f"{key[0]}{PAIR_SEP}{key[1]}"
    return key


def key_from_str(s: str) -> SubjectKey:
    if PAIR_SEP in s:
        focal, target = s.split(PAIR_SEP, 1)
        return (focal, target)
    return s


def events_to_json(a: EventDict) -> dict:
    return {
        "n_frames": a.n_frames,
        "events": {
            key_to_str(key): [[ev.start, ev.end] for ev in seq.events]
            for key, seq in a.entries.items()
        },
    }


def events_from_json(doc: dict) -> EventDict:
    if "n_frames" not in doc or "events" not in doc:
        raise SchemaError("events JSON needs 'n_frames' and 'events'")
    n = int(doc["n_frames"])
    entries = {}
    for key_s, pairs in doc["events"].items():
        seq = EventSeq.of(pairs)
        if seq.events and (seq.events[0].start < 0 or seq.events[-1].end > n):
            raise SchemaError(f"event outside [0, {n}) under key {key_s!r}")
        entries[key_from_str(key_s)] = seq
    return EventDict(n, entries)


def load_events(path) -> EventDict:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON: {e}") from None
    return events_from_json(doc)
