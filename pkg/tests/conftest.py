"""Shared fixtures and oracles for the test suite."""

import numpy as np
import pytest

# Reading-order numbering (top-left to bottom-right) of the nine nullcline
# cells for the reference parameter signs a < 0 < c, b < 0.  Cell ids are
# the (i, j) pairs returned by isocline_region: i positions y1 against its
# two sorted nullclines, j positions y2, so j = 2 is the top row.
REGION_NUMBERS = {
    (0, 2): 1, (1, 2): 2, (2, 2): 3,
    (0, 1): 4, (1, 1): 5, (2, 1): 6,
    (0, 0): 7, (1, 0): 8, (2, 0): 9,
}


@pytest.fixture
def region_numbers():
    return dict(REGION_NUMBERS)


def brute_force_self_intersections(points: np.ndarray) -> set:
    """Independent all-pairs oracle: parametric segment solve, strict interior.

    Returns the set of non-adjacent segment index pairs (i, j), i < j - 1,
    whose segments cross transversally.
    """
    P = np.asarray(points, dtype=float)
    A, B = P[:-1], P[1:]
    n = len(A)
    hits = set()
    for i in range(n - 2):
        r = B[i] - A[i]
        js = np.arange(i + 2, n)
        q1 = A[js]
        s = B[js] - q1
        denom = r[0] * s[:, 1] - r[1] * s[:, 0]
        ok = denom != 0.0
        qp = q1 - A[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / denom
            u = (qp[:, 0] * r[1] - qp[:, 1] * r[0]) / denom
        mask = ok & (t > 0.0) & (t < 1.0) & (u > 0.0) & (u < 1.0)
        for j in js[mask]:
            hits.add((i, int(j)))
    return hits


def random_polyline(rng: np.random.Generator, n_segments: int) -> np.ndarray:
    """A meandering random walk that self-crosses now and then."""
    steps = rng.normal(scale=1.0, size=(n_segments, 2))
    return np.vstack([[0.0, 0.0], np.cumsum(steps, axis=0)])
