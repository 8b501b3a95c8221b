"""Deterministic SVG exports: ethograms and trajectories.

Output is plain text assembled with fixed number formatting and no ids,
timestamps or randomness, so identical inputs give identical bytes and
golden-file tests are meaningful.
"""

from __future__ import annotations

import math
from pathlib import Path

from .events import EventDict, key_to_str
from .trackdata import Dataset

PALETTE = ("#1b6ca8", "#d1495b", "#66a182", "#edae49", "#8d5a97", "#3d3d3d")

_STYLE = (
    "text{font-family:monospace;font-size:11px;fill:#222}"
    ".bout{fill:#1b6ca8}.axis{stroke:#222;stroke-width:1}"
    ".grid{stroke:#ddd;stroke-width:1}.seg{fill:none;stroke-width:1.5}"
)


def _fmt(v: float) -> str:
    return format(float(v), ".2f")


def render_ethogram(
    named_dicts,
    *,
    width: int = 900,
    row_height: int = 22,
    label_width: int = 220,
) -> str:
    """One raster row per (behavior name, subject key); ticks mark bouts.

    named_dicts: ordered (name, EventDict) pairs; keys within a name are
    sorted for a stable row order.
    """
    named_dicts = list(named_dicts)
    rows = []
    n_frames = 1
    for name, evdict in named_dicts:
        n_frames = max(n_frames, evdict.n_frames)
        for key in sorted(evdict.entries, key=key_to_str):
            rows.append((f"{name}:{key_to_str(key)}", evdict.entries[key]))
    plot_w = width - label_width - 10
    height = 30 + row_height * max(len(rows), 1)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<style>{_STYLE}</style>",
    ]
    x0 = label_width
    y_axis = height - 18
    parts.append(f'<line class="axis" x1="{x0}" y1="{y_axis}" x2="{x0 + plot_w}" y2="{y_axis}"/>')
    parts.append(f'<text x="{x0}" y="{height - 4}">0</text>')
    parts.append(f'<text x="{x0 + plot_w - 40}" y="{height - 4}">{n_frames}</text>')
    for i, (label, seq) in enumerate(rows):
        y = 8 + i * row_height
        parts.append(f'<text x="4" y="{y + 11}">{_escape(label)}</text>')
        for ev in seq.events:
            rx = x0 + ev.start / n_frames * plot_w
            rw = max((ev.end - ev.start) / n_frames * plot_w, 0.5)
            parts.append(
                f'<rect class="bout" x="{_fmt(rx)}" y="{y}" width="{_fmt(rw)}" height="{row_height - 8}"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_trajectory(
    d: Dataset,
    animal: str,
    bodyparts=("all",),
    events: EventDict | None = None,
) -> str:
    """Polylines of the selected bodyparts, restricted to event frames.

    Lines break at missing keypoints and at event boundaries. The viewBox is
    the dataset's frame size, so coordinates map one-to-one to pixels.
    """
    a = d.animal_index(animal)
    if list(bodyparts) == ["all"]:
        part_idx = list(range(len(d.bodypart_names)))
    else:
        part_idx = [d.bodypart_index(p) for p in bodyparts]
    w, h = d.frame_size

    if events is None:
        frame_ok = [True] * d.n_frames
    else:
        frame_ok = [False] * d.n_frames
        for key, seq in events.entries.items():
            key_animal = key[0] if isinstance(key, tuple) else key
            if key_animal != animal:
                continue
            for ev in seq.events:
                for f in range(ev.start, ev.end):
                    frame_ok[f] = True

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f"<style>{_STYLE}</style>",
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="none" stroke="#222"/>',
    ]
    for color_i, b in enumerate(part_idx):
        color = PALETTE[color_i % len(PALETTE)]
        run: list[str] = []
        for f in range(d.n_frames):
            x, y = d.xy[a, f, b]
            usable = frame_ok[f] and not (math.isnan(x) or math.isnan(y))
            if usable:
                run.append(f"{_fmt(x)},{_fmt(y)}")
            elif run:
                _emit_run(parts, run, color)
                run = []
        if run:
            _emit_run(parts, run, color)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _emit_run(parts: list[str], run: list[str], color: str) -> None:
    if len(run) == 1:
        x, y = run[0].split(",")
        parts.append(f'<circle cx="{x}" cy="{y}" r="1.5" fill="{color}"/>')
    else:
        parts.append(f'<polyline class="seg" stroke="{color}" points="{" ".join(run)}"/>')


def export_ethogram(named_dicts, path) -> Path:
    path = Path(path)
    path.write_bytes(render_ethogram(named_dicts).encode("utf-8"))
    return path


def export_trajectory(d: Dataset, animal: str, bodyparts, events, path) -> Path:
    path = Path(path)
    path.write_bytes(render_trajectory(d, animal, bodyparts, events).encode("utf-8"))
    return path
