"""Planar segment predicates used by the trajectory self-intersection scan."""

from __future__ import annotations

import numpy as np


def orientation(p, q, r) -> float:
    """Signed area cross product of (q - p) x (r - p)."""
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def properly_intersect(p1, p2, q1, q2) -> bool:
    """True for a transversal interior crossing of the two open segments.

    Touching endpoints and collinear overlaps are degenerate configurations
    and report False; this predicate is the strict orientation test on
    doubles.
    """
    d1 = orientation(p1, p2, q1)
    d2 = orientation(p1, p2, q2)
    d3 = orientation(q1, q2, p1)
    d4 = orientation(q1, q2, p2)
    return (d1 > 0.0) != (d2 > 0.0) and (d3 > 0.0) != (d4 > 0.0) and (
        d1 != 0.0 and d2 != 0.0 and d3 != 0.0 and d4 != 0.0
    )


def intersection_point(p1, p2, q1, q2):
    """Crossing point of two properly intersecting segments."""
    r = (p2[0] - p1[0], p2[1] - p1[1])
    s = (q2[0] - q1[0], q2[1] - q1[1])
    denom = r[0] * s[1] - r[1] * s[0]
    t = ((q1[0] - p1[0]) * s[1] - (q1[1] - p1[1]) * s[0]) / denom
    return (p1[0] + t * r[0], p1[1] + t * r[1])


def polyline_self_intersections(points: np.ndarray) -> list:
    """All transversal crossings between non-adjacent segments of a polyline.

    Each segment is tested against all later non-adjacent ones with a
    vectorized bounding-box rejection before the exact orientation test, so
    the quadratic part runs inside numpy and only genuinely close pairs pay
    for the full predicate.  Returns a sorted list of (i, j, (x, y)) with
    segment indices i < j - 1.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[1] != 2:
        raise ValueError(f"need an (n, 2) point array, got shape {P.shape}")
    n_seg = len(P) - 1
    if n_seg < 3:
        return []
    A = P[:-1]
    B = P[1:]
    lo = np.minimum(A, B)
    hi = np.maximum(A, B)
    hits = []
    for i in range(n_seg - 2):
        j0 = i + 2
        overlap = ~(
            (lo[i, 0] > hi[j0:, 0])
            | (lo[j0:, 0] > hi[i, 0])
            | (lo[i, 1] > hi[j0:, 1])
            | (lo[j0:, 1] > hi[i, 1])
        )
        if not overlap.any():
            continue
        js = np.nonzero(overlap)[0] + j0
        r = B[i] - A[i]
        qa = A[js] - A[i]
        qb = B[js] - A[i]
        d1 = r[0] * qa[:, 1] - r[1] * qa[:, 0]
        d2 = r[0] * qb[:, 1] - r[1] * qb[:, 0]
        s = B[js] - A[js]
        pa = A[i] - A[js]
        pb = B[i] - A[js]
        d3 = s[:, 0] * pa[:, 1] - s[:, 1] * pa[:, 0]
        d4 = s[:, 0] * pb[:, 1] - s[:, 1] * pb[:, 0]
        proper = (
            ((d1 > 0.0) != (d2 > 0.0))
            & ((d3 > 0.0) != (d4 > 0.0))
            & (d1 != 0.0)
            & (d2 != 0.0)
            & (d3 != 0.0)
            & (d4 != 0.0)
        )
        for j in js[np.nonzero(proper)[0]]:
            hits.append((i, int(j), intersection_point(A[i], B[i], A[j], B[j])))
    return hits
