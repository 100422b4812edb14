import math

import numpy as np
import pytest

from gsbm.geometry import TorusBox, block_sup_distance
from gsbm.partition import (
    build_block_grid,
    build_visibility_graph,
    occupied_blocks,
    validate_parameters,
    vertex_visibility_connected,
)
from gsbm.sampler import sample

from _naive import connected_brute


class TestBlockGrid:
    def test_floor_arithmetic(self, step_profile):
        n = math.e**10
        g = sample(1.0, n, step_profile, 1, seed=1)
        grid = build_block_grid(g, chi=0.2, delta=0.1)
        assert grid.nominal_volume == pytest.approx(2.0)
        assert grid.blocks_per_axis == 11013
        assert grid.block_side == pytest.approx(g.box.side / 11013)
        assert grid.block_side >= grid.nominal_volume

    def test_vertex_at_origin_in_block_zero(self, step_profile):
        g = sample(2.0, 500.0, step_profile, 1, seed=2)
        g.positions[0] = 0.0
        grid = build_block_grid(g, chi=0.3, delta=0.1)
        assert grid.vertex_block[0] == 0

    def test_occupancy_partitions_vertices(self, step_profile):
        for seed in range(50):
            g = sample(1.5, 300.0, step_profile, 1, seed=seed)
            grid = build_block_grid(g, chi=0.3, delta=0.1)
            assert grid.occupancy.sum() == g.n_vertices

    def test_block_too_large_rejected(self, step_profile):
        g = sample(2.0, 100.0, step_profile, 1, seed=3)
        with pytest.raises(ValueError, match="diameter"):
            build_block_grid(g, chi=1.5, delta=0.1)

    def test_tiling_covers_box(self, step_profile):
        g = sample(2.0, 400.0, step_profile, 2, seed=4)
        grid = build_block_grid(g, chi=0.05, delta=0.1)
        assert grid.blocks_per_axis * grid.block_side == pytest.approx(g.box.side)
        # every vertex lands in a valid block
        assert np.all(grid.vertex_block >= 0)
        assert np.all(grid.vertex_block < grid.total_blocks)


class TestOccupiedBlocks:
    def test_empty_graph(self, step_profile):
        g = sample(0.001, 50.0, step_profile, 1, seed=5)
        if g.n_vertices == 0:
            grid = build_block_grid(g, chi=0.3, delta=0.1)
            assert len(occupied_blocks(grid)) == 0

    def test_zero_threshold_includes_all(self, step_profile):
        g = sample(1.0, 300.0, step_profile, 1, seed=6)
        grid = build_block_grid(g, chi=0.3, delta=0.0)
        assert len(occupied_blocks(grid)) == grid.total_blocks

    def test_at_least_boundary(self, step_profile):
        g = sample(1.0, 300.0, step_profile, 1, seed=7)
        grid = build_block_grid(g, chi=0.3, delta=0.2)
        occ = set(occupied_blocks(grid).tolist())
        thr = grid.delta_threshold
        for b in range(grid.total_blocks):
            assert (b in occ) == (grid.occupancy[b] >= thr)


class TestVisibilityGraph:
    def test_single_occupied_block_connected(self, step_profile):
        g = sample(2.0, 100.0, step_profile, 1, seed=8)
        grid = build_block_grid(g, chi=0.9 / math.log(100.0), delta=0.0)
        vis = build_visibility_graph(grid, g)
        assert vis.connected

    def test_two_distant_blocks_disconnected(self, step_profile):
        g = sample(1.0, 4000.0, step_profile, 1, seed=9)
        grid = build_block_grid(g, chi=0.3, delta=0.01)
        # keep only two far-apart blocks occupied
        grid.occupancy[:] = 0
        far = grid.total_blocks // 2
        grid.occupancy[0] = grid.occupancy[far] = 10**6
        vis = build_visibility_graph(grid, g)
        assert not vis.connected
        assert vis.parent is None and vis.bfs_order is None

    @pytest.mark.parametrize("d", [1, 2])
    def test_edges_match_all_pairs_sup_scan(self, step_profile, d):
        for seed in range(10):
            g = sample(1.5, 800.0 if d == 1 else 1500.0, step_profile, d, seed=seed)
            grid = build_block_grid(g, chi=0.25, delta=0.05)
            vis = build_visibility_graph(grid, g)
            got = set()
            for b, nbrs in vis.adjacency.items():
                for nb in nbrs:
                    got.add((min(b, int(nb)), max(b, int(nb))))
            occ = occupied_blocks(grid)
            box = TorusBox(d=d, side=g.box.side, n=g.box.n)
            want = set()
            for i in range(len(occ)):
                for j in range(i + 1, len(occ)):
                    a, b = int(occ[i]), int(occ[j])
                    sup = block_sup_distance(
                        grid.block_bounds(a), grid.block_bounds(b), box
                    )
                    if sup <= g.visibility_radius:
                        want.add((a, b))
            assert got == want

    def test_bfs_order_parents_precede_children(self, step_profile):
        g = sample(2.0, 2000.0, step_profile, 1, seed=10)
        grid = build_block_grid(g, chi=0.3, delta=0.05)
        vis = build_visibility_graph(grid, g)
        if vis.connected:
            pos = {b: i for i, b in enumerate(vis.bfs_order)}
            assert vis.bfs_order[0] == int(occupied_blocks(grid)[0])
            for b in vis.bfs_order[1:]:
                assert pos[vis.parent[b]] < pos[b]


class TestValidateParameters:
    def test_d1_valid(self):
        rep = validate_parameters(
            d=1, lam=3.0, r=1.0, chi=0.2, delta=0.05, chi0=0.3, delta_factor=0.5
        )
        assert rep.ok, rep.violations

    def test_d1_lambda_r_too_small(self):
        rep = validate_parameters(
            d=1, lam=0.9, r=1.0, chi=0.2, delta=0.05, chi0=0.3
        )
        assert not rep.ok
        assert any("lambda * r" in v for v in rep.violations)

    def test_d2_inner_factor_negative(self):
        rep = validate_parameters(
            d=2, lam=3.0, r=1.0, chi=0.3, delta=0.05, chi0=0.5
        )
        assert not rep.ok
        assert any("must be positive" in v for v in rep.violations)

    def test_d2_valid_point(self):
        rep = validate_parameters(
            d=2, lam=2.0, r=1.0, chi=0.015, delta=0.003, chi0=0.02
        )
        assert rep.ok, rep.violations

    def test_chi_window(self):
        rep = validate_parameters(
            d=1, lam=3.0, r=1.0, chi=0.05, delta=0.01, chi0=0.3
        )
        assert not rep.ok
        assert any("chi0/2" in v for v in rep.violations)

    def test_delta_ceiling(self):
        rep = validate_parameters(
            d=1, lam=3.0, r=1.0, chi=0.2, delta=0.15, chi0=0.3, delta_factor=0.5
        )
        assert not rep.ok
        assert any("delta_factor" in v for v in rep.violations)


class TestVertexVisibilityConnected:
    def test_single_vertex(self, step_profile):
        for seed in range(100):
            g = sample(0.01, 120.0, step_profile, 1, seed=seed)
            if g.n_vertices == 1:
                assert vertex_visibility_connected(g)
                return

    def test_two_distant_vertices(self, step_profile):
        g = sample(0.02, 1000.0, step_profile, 1, seed=0)
        # force two antipodal vertices
        g.positions = np.array([[0.0], [500.0]])
        g.sigma_star = np.array([1, -1], dtype=np.int8)
        g.indptr = np.zeros(3, dtype=np.int64)
        g.indices = np.empty(0, dtype=np.int64)
        g._cells = None
        assert not vertex_visibility_connected(g)

    @pytest.mark.parametrize("d", [1, 2])
    def test_matches_bfs_oracle(self, step_profile, d):
        hits = {True: 0, False: 0}
        for seed in range(50):
            lam = 0.2 + 0.4 * (seed % 5)
            g = sample(lam, 400.0, step_profile, d, seed=seed)
            if g.n_vertices == 0 or g.n_vertices > 500:
                continue
            got = vertex_visibility_connected(g)
            want = connected_brute(g.positions, g.visibility_radius, g.box.side)
            assert got == want
            hits[got] += 1
        # the sweep should exercise both outcomes
        assert hits[True] > 0 and hits[False] > 0
