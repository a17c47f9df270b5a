"""Numerical domain-of-attraction mapping on grids of initial conditions.

A scan integrates every grid node to a fixed horizon, classifies the
trajectory tail against the known equilibria, and records one label per
node.  Labels are small integers: nonnegative values index the equilibrium
converged to, ESCAPED marks blow-up past the escape radius, UNDETERMINED
everything else (slow fractional decay is common and is never coerced into
a convergence claim).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geometry import polyline_self_intersections
from .lotka import LotkaSystem, equilibria as lotka_equilibria, rhs as lotka_rhs
from .solver import DEFAULT_ESCAPE_RADIUS, Trajectory, abm_solve_batch

ESCAPED = -1
UNDETERMINED = -2

NUDGE = 1e-9

logger = logging.getLogger(__name__)


def label_name(code: int) -> str:
    if code == ESCAPED:
        return "escaped"
    if code == UNDETERMINED:
        return "undetermined"
    if code >= 0:
        return f"converged_to_{code}"
    raise ValueError(f"unknown label code {code}")


@dataclass(frozen=True)
class GridSpec:
    """Rectangular node grid: n1 x n2 nodes spanning the two closed ranges."""

    y1_range: tuple
    y2_range: tuple
    n1: int
    n2: int

    def __post_init__(self):
        r1 = (float(self.y1_range[0]), float(self.y1_range[1]))
        r2 = (float(self.y2_range[0]), float(self.y2_range[1]))
        object.__setattr__(self, "y1_range", r1)
        object.__setattr__(self, "y2_range", r2)
        if not (r1[0] < r1[1] and r2[0] < r2[1]):
            raise ValueError("ranges must satisfy lo < hi")
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError("need at least 2 nodes per axis")

    @property
    def y1_nodes(self) -> np.ndarray:
        return np.linspace(self.y1_range[0], self.y1_range[1], self.n1)

    @property
    def y2_nodes(self) -> np.ndarray:
        return np.linspace(self.y2_range[0], self.y2_range[1], self.n2)

    @property
    def spacing(self) -> tuple:
        return (
            (self.y1_range[1] - self.y1_range[0]) / (self.n1 - 1),
            (self.y2_range[1] - self.y2_range[0]) / (self.n2 - 1),
        )


@dataclass(frozen=True)
class ScanSettings:
    """Horizon, step, convergence band, and escape radius for basin scans."""

    t_end: float = 40.0
    h: float = 0.05
    eps: float = 1e-3
    window_fraction: float = 0.1
    escape_radius: float = DEFAULT_ESCAPE_RADIUS

    def __post_init__(self):
        if self.eps <= 0.0 or not (0.0 < self.window_fraction < 1.0):
            raise ValueError("need eps > 0 and window_fraction in (0, 1)")
        if self.t_end <= 0.0 or self.h <= 0.0:
            raise ValueError("need positive horizon and step")


@dataclass(frozen=True)
class BasinMap:
    """Scan result: labels[i, j] classifies node (y1_nodes[i], y2_nodes[j])."""

    grid: GridSpec
    labels: np.ndarray
    equilibria: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.shape != (self.grid.n1, self.grid.n2):
            raise ValueError(
                f"labels shape {lab.shape} does not match grid {(self.grid.n1, self.grid.n2)}"
            )

    def converged_mask(self, target: int) -> np.ndarray:
        return self.labels == int(target)


def _window_start(n_states: int, window_fraction: float) -> int:
    return int(math.floor((1.0 - window_fraction) * (n_states - 1)))


def classify_trajectory(
    traj: Trajectory,
    equilibria_points: Sequence,
    eps: float = 1e-3,
    window_fraction: float = 0.1,
    escaped: Optional[bool] = None,
) -> int:
    """Label one trajectory: ESCAPED, ConvergedTo(k), or UNDETERMINED.

    ConvergedTo(k) requires every state in the trailing window_fraction of
    the trajectory to lie within eps * max(1, |Y_k|) of equilibrium k; the
    first equilibrium (in the given order) satisfying this wins.
    """
    if eps <= 0.0 or not (0.0 < window_fraction < 1.0):
        raise ValueError("need eps > 0 and window_fraction in (0, 1)")
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if escaped is None:
        escaped = traj.escaped
    if escaped:
        return ESCAPED
    states = traj.states
    window = states[_window_start(len(states), window_fraction):]
    for k, eq in enumerate(equilibria_points):
        eq = np.asarray(eq, dtype=float)
        tol = eps * max(1.0, float(np.linalg.norm(eq)))
        dist = np.linalg.norm(window - eq[None, :], axis=1)
        if bool((dist <= tol).all()):
            return k
    return UNDETERMINED


def _nudge_nodes(nodes: np.ndarray, special_values: Sequence[float]) -> np.ndarray:
    """Shift nodes sitting exactly on an axis or nullcline by +1e-9.

    The axes are invariant manifolds of the flow, so an exactly on-axis
    start would sample one-dimensional dynamics instead of the planar basin.
    """
    out = nodes.copy()
    specials = np.asarray(list(special_values), dtype=float)
    on_line = np.isin(out, specials)
    if on_line.any():
        rows = on_line.any(axis=1)
        out[rows] += NUDGE
    return out


@dataclass(frozen=True)
class ScanModel:
    """What a scan needs: orders, a batch-vectorized rhs, and equilibria."""

    orders: tuple
    rhs: object
    equilibria: np.ndarray
    nullcline_values: tuple = ()
    description: dict = field(default_factory=dict)


def scan_model_for(system) -> ScanModel:
    """Adapt a LotkaSystem (or compatible object) for scanning."""
    if isinstance(system, LotkaSystem):
        p = system.params
        eqs = np.asarray(lotka_equilibria(p), dtype=float)
        return ScanModel(
            orders=(system.alpha.value, system.beta.value),
            rhs=lambda t, y: lotka_rhs(p, y),
            equilibria=eqs,
            nullcline_values=(0.0, p.c / p.b, p.a / p.b),
            description={
                "model": "lotka",
                "a": p.a,
                "b": p.b,
                "c": p.c,
                "alpha": str(system.alpha),
                "beta": str(system.beta),
            },
        )
    return system  # already a ScanModel-compatible object


def scan_basin(
    system,
    grid: GridSpec,
    settings: ScanSettings = ScanSettings(),
    workers: int = 1,
) -> BasinMap:
    """Integrate every grid node and classify where it ends up.

    The grid is processed one row (fixed y1 node) at a time with the
    batched kernel; rows are independent work items handed to a thread
    pool, so the label array is identical for any worker count.
    """
    model = scan_model_for(system)
    if model.orders and any(a > 1.0 for a in model.orders):
        raise ValueError("scan requires all orders in (0, 1]; lift the system first")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    y1s = grid.y1_nodes
    y2s = grid.y2_nodes
    labels = np.empty((grid.n1, grid.n2), dtype=np.int64)
    n_steps = max(1, int(round(settings.t_end / settings.h)))
    eq_pts = np.asarray(model.equilibria, dtype=float)

    def run_row(i: int) -> np.ndarray:
        nodes = np.column_stack([np.full(grid.n2, y1s[i]), y2s])
        nodes = _nudge_nodes(nodes, model.nullcline_values)
        states, escaped, esc_step = abm_solve_batch(
            model.orders,
            model.rhs,
            nodes,
            settings.t_end,
            settings.h,
            escape_radius=settings.escape_radius,
            vectorized=True,
        )
        row = np.empty(grid.n2, dtype=np.int64)
        w0 = _window_start(n_steps + 1, settings.window_fraction)
        window = states[w0:]
        for k in range(grid.n2):
            if escaped[k]:
                row[k] = ESCAPED
                continue
            row[k] = UNDETERMINED
            for e_idx in range(len(eq_pts)):
                eq = eq_pts[e_idx]
                tol = settings.eps * max(1.0, float(np.linalg.norm(eq)))
                dist = np.linalg.norm(window[:, k, :] - eq[None, :], axis=1)
                if bool((dist <= tol).all()):
                    row[k] = e_idx
                    break
        return row

    if workers == 1:
        for i in range(grid.n1):
            labels[i] = run_row(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, row in enumerate(pool.map(run_row, range(grid.n1))):
                labels[i] = row
    metadata = dict(model.description)
    metadata.update(
        {
            "t_end": settings.t_end,
            "h": settings.h,
            "eps": settings.eps,
            "window_fraction": settings.window_fraction,
            "escape_radius": settings.escape_radius,
            "orders": [float(a) for a in model.orders],
        }
    )
    return BasinMap(grid=grid, labels=labels, equilibria=eq_pts, metadata=metadata)


def boundary_extract(basin_map: BasinMap, target: int) -> np.ndarray:
    """Midpoints of grid edges where membership in ConvergedTo(target) flips.

    The midpoints come back chained by nearest neighbour starting from the
    lexicographically smallest one.  A map with no boundary (all-in or
    all-out) yields an empty (0, 2) array.
    """
    member = basin_map.converged_mask(target)
    y1s = basin_map.grid.y1_nodes
    y2s = basin_map.grid.y2_nodes
    mids = []
    flip_h = member[:-1, :] != member[1:, :]
    for i, j in zip(*np.nonzero(flip_h)):
        mids.append((0.5 * (y1s[i] + y1s[i + 1]), y2s[j]))
    flip_v = member[:, :-1] != member[:, 1:]
    for i, j in zip(*np.nonzero(flip_v)):
        mids.append((y1s[i], 0.5 * (y2s[j] + y2s[j + 1])))
    if not mids:
        logger.info("no basin boundary: membership in label %d is uniform", int(target))
        return np.empty((0, 2))
    pts = np.asarray(sorted(mids))
    # nearest-neighbour chaining
    remaining = list(range(1, len(pts)))
    chain = [0]
    while remaining:
        last = pts[chain[-1]]
        dists = np.linalg.norm(pts[remaining] - last, axis=1)
        nxt = int(np.argmin(dists))
        chain.append(remaining.pop(nxt))
    return pts[chain]


def detect_self_intersection(traj) -> list:
    """Transversal self-crossings of the (y1, y2) projection of a trajectory.

    Accepts a Trajectory or a plain (n, 2+) point array; needs at least 4
    points.  Adjacent segments and degenerate (collinear or endpoint)
    contacts are excluded; an empty list means no tie.
    """
    pts = traj.states if isinstance(traj, Trajectory) else np.asarray(traj, dtype=float)
    if pts.ndim != 2 or len(pts) < 4:
        raise ValueError("need a trajectory with at least 4 points")
    return polyline_self_intersections(pts[:, :2])
