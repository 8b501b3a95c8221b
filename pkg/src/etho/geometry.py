"""Planar polygon primitives used by the relation tables.

Conventions, fixed for determinism:
  - image coordinates (x right, y down); vertex winding normalized so the
    shoelace signed area is positive in raw (x, y) values;
  - points exactly on a polygon edge or vertex count as inside;
  - polygon-level constants (area, centroid, bbox) are accumulated with
    plain sequential loops so results are reproducible term for term.
"""

from __future__ import annotations

import numpy as np

from .errors import GeometryError


def signed_area(vertices) -> float:
    """Shoelace signed area; positive for counter-clockwise winding."""
    total = 0.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = float(vertices[i][0]), float(vertices[i][1])
        x1, y1 = float(vertices[(i + 1) % n][0]), float(vertices[(i + 1) % n][1])
        total += x0 * y1 - x1 * y0
    return total / 2.0


def _segments_properly_intersect(p, q, r, s) -> bool:
    """True when open segments pq and rs cross or overlap collinearly."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_segment(a, b, c):
        return (
            min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])
        )

    o1 = orient(p, q, r)
    o2 = orient(p, q, s)
    o3 = orient(r, s, p)
    o4 = orient(r, s, q)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        return True
    # collinear overlaps count as intersections
    if o1 == 0 and on_segment(p, q, r):
        return True
    if o2 == 0 and on_segment(p, q, s):
        return True
    if o3 == 0 and on_segment(r, s, p):
        return True
    if o4 == 0 and on_segment(r, s, q):
        return True
    return False


def validate_polygon(vertices) -> np.ndarray:
    """Validate and normalize a polygon to counter-clockwise winding.

    Rejects polygons with fewer than 3 vertices, repeated consecutive
    vertices, zero area (collinear), or self-intersections between
    non-adjacent edges. Returns a read-only (n, 2) float64 array.
    """
    pts = [(float(v[0]), float(v[1])) for v in vertices]
    n = len(pts)
    if n < 3:
        raise GeometryError(f"polygon needs at least 3 vertices, got {n}")
    for i in range(n):
        if pts[i] == pts[(i + 1) % n]:
            raise GeometryError(f"repeated consecutive vertex at index {i}")
    edges = [(pts[i], pts[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or j == (i + 1) % n or (j + 1) % n == i:
                continue  # adjacent edges share an endpoint by construction
            if _segments_properly_intersect(*edges[i], *edges[j]):
                raise GeometryError(f"self-intersecting polygon: edges {i} and {j} cross")
    area = signed_area(pts)
    if area == 0.0:
        raise GeometryError("degenerate polygon: zero area (collinear vertices)")
    if area < 0:
        pts = pts[::-1]
    arr = np.asarray(pts, dtype=np.float64)
    arr.flags.writeable = False
    return arr


def polygon_centroid(vertices) -> tuple[float, float]:
    """Area-weighted centroid, sequential accumulation."""
    n = len(vertices)
    a = 0.0
    cx = 0.0
    cy = 0.0
    for i in range(n):
        x0, y0 = float(vertices[i][0]), float(vertices[i][1])
        x1, y1 = float(vertices[(i + 1) % n][0]), float(vertices[(i + 1) % n][1])
        cross = x0 * y1 - x1 * y0
        a += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    a /= 2.0
    return cx / (6.0 * a), cy / (6.0 * a)


def polygon_bbox(vertices) -> tuple[float, float, float, float]:
    """(min_x, min_y, max_x, max_y)."""
    xs = [float(v[0]) for v in vertices]
    ys = [float(v[1]) for v in vertices]
    return min(xs), min(ys), max(xs), max(ys)


def point_in_polygon(x: float, y: float, vertices) -> bool:
    """Boundary-inclusive point-in-polygon test for one point."""
    n = len(vertices)
    inside = False
    for i in range(n):
        xi, yi = float(vertices[i][0]), float(vertices[i][1])
        xj, yj = float(vertices[(i + 1) % n][0]), float(vertices[(i + 1) % n][1])
        # boundary check: point on the closed segment (i, j)
        if (xj - xi) * (y - yi) - (yj - yi) * (x - xi) == 0.0:
            if min(xi, xj) <= x <= max(xi, xj) and min(yi, yj) <= y <= max(yi, yj):
                return True
        if (yi > y) != (yj > y):
            x_cross = xi + (y - yi) * (xj - xi) / (yj - yi)
            if x < x_cross:
                inside = not inside
    return inside


def points_in_polygon(xs: np.ndarray, ys: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Vectorized boundary-inclusive test; NaN coordinates map to False.

    Runs the same arithmetic as point_in_polygon edge by edge so results
    agree exactly with the scalar form.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    inside = np.zeros(xs.shape, dtype=bool)
    boundary = np.zeros(xs.shape, dtype=bool)
    n = len(vertices)
    with np.errstate(invalid="ignore", divide="ignore"):
        for i in range(n):
            xi, yi = float(vertices[i][0]), float(vertices[i][1])
            xj, yj = float(vertices[(i + 1) % n][0]), float(vertices[(i + 1) % n][1])
            collinear = (xj - xi) * (ys - yi) - (yj - yi) * (xs - xi) == 0.0
            in_box = (
                (np.minimum(xi, xj) <= xs)
                & (xs <= np.maximum(xi, xj))
                & (np.minimum(yi, yj) <= ys)
                & (ys <= np.maximum(yi, yj))
            )
            boundary |= collinear & in_box
            straddles = (yi > ys) != (yj > ys)
            if yj != yi:
                x_cross = xi + (ys - yi) * (xj - xi) / (yj - yi)
                inside ^= straddles & (xs < x_cross)
    result = inside | boundary
    result &= ~(np.isnan(xs) | np.isnan(ys))
    return result
