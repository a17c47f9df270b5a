"""Basin scanner tests: classification, grid scans, boundaries, ties."""

import numpy as np
import pytest

from conftest import REGION_NUMBERS, brute_force_self_intersections, random_polyline
from fracdyn.basin import (
    ESCAPED,
    UNDETERMINED,
    BasinMap,
    GridSpec,
    ScanSettings,
    _nudge_nodes,
    boundary_extract,
    classify_trajectory,
    detect_self_intersection,
    label_name,
    scan_basin,
)
from fracdyn.lotka import LotkaParams, LotkaSystem, isocline_region, rhs as lotka_rhs
from fracdyn.solver import Trajectory, abm_solve_batch
from fracdyn.stability import reduce_order


def make_system(a, b, c, alpha, beta):
    return LotkaSystem(LotkaParams(a, b, c), reduce_order(alpha), reduce_order(beta))


def make_traj(points, escaped=False, h=0.1):
    pts = np.asarray(points, dtype=float)
    return Trajectory(times=np.arange(len(pts)) * h, states=pts, escaped=escaped)


class TestClassifyTrajectory:
    def test_constant_at_equilibrium(self):
        traj = make_traj([[0.5, 0.5]] * 10)
        label = classify_trajectory(traj, [(0.0, 0.0), (0.5, 0.5)])
        assert label == 1

    def test_escaped_wins(self):
        traj = make_traj([[0.0, 0.0]] * 10, escaped=True)
        assert classify_trajectory(traj, [(0.0, 0.0)]) == ESCAPED

    def test_undetermined_when_tail_wanders(self):
        pts = np.column_stack([np.linspace(0, 1, 20), np.zeros(20)])
        traj = make_traj(pts)
        assert classify_trajectory(traj, [(0.0, 0.0)], eps=1e-3) == UNDETERMINED

    def test_window_semantics(self):
        # converges into the ball only for the last 10% of samples
        n = 100
        pts = np.zeros((n, 2))
        pts[:89, 0] = 1.0  # far until index 88
        traj = make_traj(pts)
        assert classify_trajectory(traj, [(0.0, 0.0)], eps=1e-3, window_fraction=0.1) == 0
        assert (
            classify_trajectory(traj, [(0.0, 0.0)], eps=1e-3, window_fraction=0.5)
            == UNDETERMINED
        )

    def test_tolerance_scales_with_equilibrium_norm(self):
        eq = (30.0, 40.0)  # norm 50 -> tolerance 50 * eps
        traj = make_traj([[30.0, 40.0 + 0.04]] * 10)
        assert classify_trajectory(traj, [eq], eps=1e-3) == 0
        assert classify_trajectory(traj, [(0.0, 0.05)], eps=1e-3) == UNDETERMINED

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            classify_trajectory(
                Trajectory(times=np.array([]), states=np.empty((0, 2))), [(0, 0)]
            )

    def test_label_names(self):
        assert label_name(ESCAPED) == "escaped"
        assert label_name(UNDETERMINED) == "undetermined"
        assert label_name(1) == "converged_to_1"
        with pytest.raises(ValueError):
            label_name(-7)


class TestGridSpec:
    def test_nodes_and_spacing(self):
        g = GridSpec((-4, 4), (0, 2), 5, 3)
        assert np.allclose(g.y1_nodes, [-4, -2, 0, 2, 4])
        assert np.allclose(g.y2_nodes, [0, 1, 2])
        assert g.spacing == (2.0, 1.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            GridSpec((1, 1), (0, 2), 3, 3)
        with pytest.raises(ValueError):
            GridSpec((0, 1), (0, 2), 1, 3)


class TestNudge:
    def test_on_line_nodes_shift(self):
        nodes = np.array([[0.0, 0.5], [0.25, 0.5], [0.3, -1.0]])
        out = _nudge_nodes(nodes, (0.0, -1.0))
        assert np.allclose(out[0], [1e-9, 0.5 + 1e-9])
        assert np.allclose(out[1], [0.25, 0.5])
        assert np.allclose(out[2], [0.3 + 1e-9, -1.0 + 1e-9])


class TestScanBasin:
    def test_shape_contract(self):
        sys_ = make_system(1, -1, 1, "1/2", "1/2")
        grid = GridSpec((-2, -1), (-2, -1), 2, 3)
        basin = scan_basin(sys_, grid, ScanSettings(t_end=5, h=0.05, eps=0.5))
        assert basin.labels.shape == (2, 3)

    def test_workers_do_not_change_labels(self):
        sys_ = make_system(-1, -1, 1, "1/1", "1/1")
        grid = GridSpec((-3, 3), (-3, 3), 9, 9)
        settings = ScanSettings(t_end=20, h=0.05)
        one = scan_basin(sys_, grid, settings, workers=1)
        four = scan_basin(sys_, grid, settings, workers=4)
        assert (one.labels == four.labels).all()

    def test_repeat_runs_identical(self):
        sys_ = make_system(-1, -1, 1, "1/2", "1/2")
        grid = GridSpec((-2, 2), (-2, 2), 5, 5)
        settings = ScanSettings(t_end=10, h=0.05)
        assert (
            scan_basin(sys_, grid, settings).labels == scan_basin(sys_, grid, settings).labels
        ).all()

    def test_third_quadrant_converges_for_spiral_signs(self):
        # fractional orders: detectable convergence band for algebraic tails
        sys_ = make_system(1, -1, 1, "1/2", "1/2")
        grid = GridSpec((-2.5, -0.5), (-2.5, -0.5), 5, 5)
        basin = scan_basin(sys_, grid, ScanSettings(t_end=40, h=0.05, eps=0.3))
        assert (basin.labels == 1).all()  # everything to the coexistence point

    def test_escape_labels_for_blowup_region(self):
        sys_ = make_system(-1, -1, 1, "1/1", "1/1")
        grid = GridSpec((-4, -2), (2, 4), 3, 3)  # inside the blow-up cell
        basin = scan_basin(sys_, grid, ScanSettings(t_end=20, h=0.05))
        assert (basin.labels == ESCAPED).all()

    def test_rejects_orders_above_one(self):
        sys_ = make_system(1, -1, 1, "3/2", "3/2")
        with pytest.raises(ValueError):
            scan_basin(sys_, GridSpec((-1, 1), (-1, 1), 3, 3))


class TestRegionInvariance:
    # Trajectories seeded inside the four forever-invariant nullcline cells
    # (reading-order numbers 5, 6, 8, 9 for the reference signs) must stay
    # in their starting cell over the whole simulated horizon, up to a
    # 1e-5 boundary band for states that hug an invariant axis at the
    # integrator's absolute accuracy floor.
    CELL_SAMPLES = {
        (1, 1): [(-0.5, 0.5), (-0.2, 0.8)],
        (2, 1): [(0.5, 0.5), (1.2, 0.8)],
        (1, 0): [(-0.5, -0.5), (-0.2, -0.2)],
        (2, 0): [(0.5, -0.5), (1.5, -1.0)],
    }

    @pytest.mark.parametrize("alpha", [0.3, 0.6, 1.0])
    @pytest.mark.parametrize("beta", [0.3, 0.6, 1.0])
    def test_invariant_cells(self, alpha, beta):
        tol = 1e-5
        bounds1 = {0: (-np.inf, -1.0), 1: (-1.0, 0.0), 2: (0.0, np.inf)}
        bounds2 = {0: (-np.inf, 0.0), 1: (0.0, 1.0), 2: (1.0, np.inf)}
        for cell, pts in self.CELL_SAMPLES.items():
            assert REGION_NUMBERS[cell] in (5, 6, 8, 9)
            params = LotkaParams(-1, -1, 1)
            states, escaped, _ = abm_solve_batch(
                (alpha, beta),
                lambda t, y: lotka_rhs(params, y),
                np.asarray(pts),
                10.0,
                0.01,
            )
            assert not escaped.any()
            lo1, hi1 = bounds1[cell[0]]
            lo2, hi2 = bounds2[cell[1]]
            y1 = states[..., 0]
            y2 = states[..., 1]
            assert (y1 >= lo1 - tol).all() and (y1 <= hi1 + tol).all(), (cell, alpha, beta)
            assert (y2 >= lo2 - tol).all() and (y2 <= hi2 + tol).all(), (cell, alpha, beta)

    def test_blowup_cell_is_also_invariant_until_escape(self):
        # reading-order cell 1 (top-left): trajectories head to infinity
        p = LotkaParams(-1, -1, 1)
        sys_ = make_system(-1, -1, 1, "1/1", "1/1")
        grid = GridSpec((-3, -2), (2, 3), 2, 2)
        basin = scan_basin(sys_, grid, ScanSettings(t_end=20, h=0.05))
        assert (basin.labels == ESCAPED).all()
        assert isocline_region(p, (-2.5, 2.5)) == (0, 2)
        assert REGION_NUMBERS[(0, 2)] == 1


class TestQuadrantClaim:
    @pytest.mark.parametrize("alpha,beta", [(0.5, 0.5), (0.8, 0.5), (0.6, 0.9)])
    def test_third_quadrant_for_negative_b(self, alpha, beta):
        sys_ = make_system(1, -1, 1, alpha, beta)
        grid = GridSpec((-2.8, -0.2), (-2.8, -0.2), 4, 4)
        basin = scan_basin(sys_, grid, ScanSettings(t_end=40, h=0.05, eps=0.3))
        assert (basin.labels == 1).all()

    @pytest.mark.parametrize("alpha,beta", [(0.5, 0.5), (0.6, 0.9)])
    def test_first_quadrant_for_positive_b(self, alpha, beta):
        sys_ = make_system(1, 1, 1, alpha, beta)
        grid = GridSpec((0.2, 2.8), (0.2, 2.8), 4, 4)
        basin = scan_basin(sys_, grid, ScanSettings(t_end=40, h=0.05, eps=0.3))
        assert (basin.labels == 1).all()


class TestBoundaryExtract:
    def synthetic_map(self, labels):
        labels = np.asarray(labels)
        grid = GridSpec((0, labels.shape[0] - 1.0), (0, labels.shape[1] - 1.0), *labels.shape)
        return BasinMap(grid=grid, labels=labels, equilibria=np.zeros((2, 2)))

    def test_half_plane_split_gives_vertical_line(self):
        labels = np.zeros((6, 5), dtype=int)
        labels[3:, :] = ESCAPED
        basin = self.synthetic_map(labels)
        mids = boundary_extract(basin, 0)
        assert len(mids) == 5
        assert np.allclose(mids[:, 0], 2.5)
        assert sorted(mids[:, 1]) == [0, 1, 2, 3, 4]

    def test_chain_ordering_is_nearest_neighbor(self):
        labels = np.zeros((6, 5), dtype=int)
        labels[3:, :] = ESCAPED
        mids = boundary_extract(self.synthetic_map(labels), 0)
        steps = np.linalg.norm(np.diff(mids, axis=0), axis=1)
        assert (steps == 1.0).all()

    def test_uniform_map_is_empty(self):
        basin = self.synthetic_map(np.zeros((4, 4), dtype=int))
        assert boundary_extract(basin, 0).shape == (0, 2)

    def test_all_escaped_is_empty(self):
        basin = self.synthetic_map(np.full((4, 4), ESCAPED))
        assert boundary_extract(basin, 0).shape == (0, 2)


class TestDetectSelfIntersection:
    def test_straight_line_has_none(self):
        pts = np.column_stack([np.linspace(0, 1, 50), np.linspace(0, 2, 50)])
        assert detect_self_intersection(pts) == []

    def test_figure_eight_crossing(self):
        pts = np.array([[0.0, 0.0], [2.0, 2.0], [2.0, 0.0], [0.0, 2.0], [-1.0, 2.0]])
        hits = detect_self_intersection(pts)
        assert len(hits) == 1
        i, j, (x, y) = hits[0]
        assert (i, j) == (0, 2)
        assert (x, y) == pytest.approx((1.0, 1.0))

    def test_adjacent_segments_excluded(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0]])
        hits = detect_self_intersection(pts)
        assert all(j - i > 1 for i, j, _ in hits)

    def test_collinear_overlap_excluded(self):
        pts = np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 0.0], [3.0, 0.0]])
        # last segment retraces the x-axis: collinear with segment 0, degenerate
        hits = detect_self_intersection(pts)
        assert (0, 3) not in [(i, j) for i, j, _ in hits]

    def test_touching_endpoint_excluded(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [1.0, -1.0], [0.5, 0.0]])
        hits = detect_self_intersection(pts)
        # the tail touches segment 0 exactly at (0.5, 0): not transversal
        assert all((x, y) != (0.5, 0.0) for _, _, (x, y) in hits)

    def test_needs_four_points(self):
        with pytest.raises(ValueError):
            detect_self_intersection(np.zeros((3, 2)))

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_brute_force_oracle(self, seed):
        rng = np.random.default_rng(seed)
        pts = random_polyline(rng, n_segments=200)
        fast = {(i, j) for i, j, _ in detect_self_intersection(pts)}
        assert fast == brute_force_self_intersections(pts)

    def test_accepts_trajectory_objects(self):
        pts = np.array([[0.0, 0.0], [2.0, 2.0], [2.0, 0.0], [0.0, 2.0]])
        traj = make_traj(pts)
        assert len(detect_self_intersection(traj)) == 1
