"""Interval-event algebra: construction, composition, laws."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from etho.errors import FrameMismatchError
from etho.events import (
    Event,
    EventDict,
    EventSeq,
    PostProcessSpec,
    add_sequential_events,
    add_simultaneous_events,
    event_stats,
    events_from_json,
    events_from_mask,
    events_to_json,
    negate_events,
    postprocess,
)


def ed(n, *pairs, key="a0"):
    return EventDict(n, {key: EventSeq.of(pairs)})


def intervals(evdict, key="a0"):
    return [(e.start, e.end) for e in evdict.entries[key].events]


def test_events_from_mask_runs():
    assert events_from_mask([False, True, True, False, True]).events == (Event(1, 3), Event(4, 5))
    assert events_from_mask([False] * 4).events == ()
    assert events_from_mask([True] * 5).events == (Event(0, 5),)


def test_events_from_mask_nan_is_false():
    assert events_from_mask(np.array([np.nan, 1.0, np.nan])).events == (Event(1, 2),)


def test_normalization_merges_adjacent():
    assert EventSeq.of([(0, 2), (2, 4)]).events == (Event(0, 4),)
    assert EventSeq.of([(3, 5), (0, 2)]).events == (Event(0, 2), Event(3, 5))
    assert EventSeq.of([(0, 5), (2, 3)]).events == (Event(0, 5),)


def test_simultaneous_intersection():
    assert intervals(add_simultaneous_events(ed(20, (0, 10)), ed(20, (5, 15)))) == [(5, 10)]
    assert intervals(add_simultaneous_events(ed(20, (0, 3)), ed(20, (5, 8)))) == []
    three = add_simultaneous_events(ed(20, (0, 10)), ed(20, (2, 8)), ed(20, (4, 12)))
    assert intervals(three) == [(4, 8)]


def test_simultaneous_drops_unshared_keys():
    a = EventDict(10, {"x": EventSeq.of([(0, 5)]), "y": EventSeq.of([(0, 5)])})
    b = EventDict(10, {"x": EventSeq.of([(1, 6)])})
    out = add_simultaneous_events(a, b)
    assert set(out.entries) == {"x"}


def test_simultaneous_frame_mismatch():
    with pytest.raises(FrameMismatchError):
        add_simultaneous_events(ed(10, (0, 5)), ed(12, (0, 5)))


def test_sequential_contiguous():
    assert intervals(add_sequential_events(ed(10, (0, 5)), ed(10, (5, 9)))) == [(0, 9)]


def test_sequential_gap_exceeded():
    assert intervals(add_sequential_events(ed(10, (0, 5)), ed(10, (7, 9)))) == []


def test_sequential_within_gap():
    assert intervals(add_sequential_events(ed(10, (0, 5)), ed(10, (6, 9)), max_gap=1)) == [(0, 9)]


def test_sequential_earliest_only():
    # oracle: enumerate pairs; ea=(0,3) pairs with eb=(3,4), not (6,8)
    out = add_sequential_events(ed(10, (0, 3)), ed(10, (3, 4), (6, 8)))
    assert intervals(out) == [(0, 4)]


def test_sequential_multiple_chains_merge():
    a = ed(20, (0, 3), (8, 10))
    b = ed(20, (3, 6), (10, 14))
    assert intervals(add_sequential_events(a, b)) == [(0, 6), (8, 14)]


def test_negate():
    assert intervals(negate_events(ed(8, (2, 5)))) == [(0, 2), (5, 8)]
    assert intervals(negate_events(ed(8)))== [(0, 8)]
    assert intervals(negate_events(negate_events(ed(8, (2, 5))))) == [(2, 5)]


def test_postprocess_smooth_strict():
    assert intervals(postprocess(ed(10, (0, 2), (4, 6)), PostProcessSpec(3, 0))) == [(0, 6)]
    assert intervals(postprocess(ed(10, (0, 2), (4, 6)), PostProcessSpec(2, 0))) == [(0, 2), (4, 6)]


def test_postprocess_smooth_then_filter():
    # oracle by stages: smooth 0 keeps both; min 5 drops [0,4) and [10,12)
    assert intervals(postprocess(ed(20, (0, 4), (10, 12)), PostProcessSpec(0, 5))) == []
    # smoothing first can rescue short bouts: [0,2)+[3,5) merge to [0,5), survives min 5
    assert intervals(postprocess(ed(20, (0, 2), (3, 5)), PostProcessSpec(2, 5))) == [(0, 5)]


def test_event_stats():
    stats = event_stats(ed(10, (0, 2), (4, 6)))
    assert stats["a0"] == (2, 4)
    assert event_stats(ed(10))["a0"] == (0, 0)
    assert event_stats(ed(8, (0, 8)))["a0"] == (1, 8)


def test_json_roundtrip_pair_keys():
    evdict = EventDict(30, {("a", "b"): EventSeq.of([(1, 5)]), "a": EventSeq.of([(2, 6)])})
    doc = events_to_json(evdict)
    assert doc["events"]["a->b"] == [[1, 5]]
    back = events_from_json(doc)
    assert back.entries[("a", "b")].events == (Event(1, 5),)
    assert back.entries["a"].events == (Event(2, 6),)


# --- law properties ----------------------------------------------------------

seq_strategy = st.lists(
    st.tuples(st.integers(0, 60), st.integers(0, 60)).map(lambda t: (min(t), max(t))),
    max_size=8,
)


def build(pairs, n=60):
    return EventDict(n, {"k": EventSeq.of([(s, e) for s, e in pairs if s < e])})


@given(seq_strategy, seq_strategy)
@settings(max_examples=200)
def test_simultaneous_commutative(p1, p2):
    a, b = build(p1), build(p2)
    assert add_simultaneous_events(a, b).entries == add_simultaneous_events(b, a).entries


@given(seq_strategy, seq_strategy, seq_strategy)
@settings(max_examples=200)
def test_simultaneous_associative_and_matches_mask_and(p1, p2, p3):
    a, b, c = build(p1), build(p2), build(p3)
    left = add_simultaneous_events(add_simultaneous_events(a, b), c)
    right = add_simultaneous_events(a, add_simultaneous_events(b, c))
    flat = add_simultaneous_events(a, b, c)
    assert left.entries == right.entries == flat.entries
    mask = a.entries["k"].to_mask(60) & b.entries["k"].to_mask(60) & c.entries["k"].to_mask(60)
    assert events_from_mask(mask) == flat.entries["k"]


@given(seq_strategy)
@settings(max_examples=200)
def test_simultaneous_idempotent(p):
    a = build(p)
    assert add_simultaneous_events(a, a).entries == a.entries


@given(seq_strategy)
@settings(max_examples=200)
def test_negate_involution(p):
    a = build(p)
    assert negate_events(negate_events(a)).entries == a.entries


@given(seq_strategy)
@settings(max_examples=200)
def test_mask_event_bijection(p):
    a = build(p)
    mask = a.entries["k"].to_mask(60)
    assert events_from_mask(mask) == a.entries["k"]


@given(seq_strategy, st.integers(0, 10), st.integers(0, 10))
@settings(max_examples=200)
def test_postprocess_idempotent(p, smooth, min_w):
    a = build(p)
    spec = PostProcessSpec(smooth, min_w)
    once = postprocess(a, spec)
    twice = postprocess(once, spec)
    assert once.entries == twice.entries


@given(seq_strategy, st.integers(0, 10))
@settings(max_examples=200)
def test_smoothing_monotone(p, w):
    a = build(p)
    small = postprocess(a, PostProcessSpec(w, 0))
    large = postprocess(a, PostProcessSpec(w + 3, 0))
    assert large.entries["k"].count <= small.entries["k"].count


@given(seq_strategy, st.integers(0, 10))
@settings(max_examples=200)
def test_min_filter_antitone(p, w):
    a = build(p)
    small = postprocess(a, PostProcessSpec(0, w))
    large = postprocess(a, PostProcessSpec(0, w + 3))
    assert large.entries["k"].total_frames <= small.entries["k"].total_frames
