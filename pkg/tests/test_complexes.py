import heapq
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepfilt import Subpolyhedron, WeightedComplex, simplex_volume, total_area
from sepfilt.errors import NondegenerateViolation
from sepfilt.generators import circle


# ---------------------------------------------------------------------------
# independent oracles


def dijkstra_oracle(geometry, source):
    """Plain heapq Dijkstra over the metric-graph arcs."""
    matrix = geometry.graph._matrix
    indptr, indices, data = matrix.indptr, matrix.indices, matrix.data
    dist = [math.inf] * geometry.n_nodes
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, node = heapq.heappop(heap)
        if d > dist[node]:
            continue
        for k in range(indptr[node], indptr[node + 1]):
            other = int(indices[k])
            nd = d + float(data[k])
            if nd < dist[other]:
                dist[other] = nd
                heapq.heappush(heap, (nd, other))
    return dist


def flat_torus_disk_area_mc(side, radius, samples=200000, seed=20240817):
    """Monte-Carlo area of a metric disk on the flat side x side torus."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, side, size=(samples, 2))
    wrapped = np.minimum(np.abs(pts), side - np.abs(pts))
    dist = np.hypot(wrapped[:, 0], wrapped[:, 1])
    return side * side * float((dist <= radius).mean())


# frozen from the oracle above (seed 20240817, 200k samples); true value is pi
MC_DISK_AREA = 3.13368


# ---------------------------------------------------------------------------
# simplex volumes


def test_right_triangle_volume():
    assert simplex_volume([1.0, 1.0, math.sqrt(2.0)]) == pytest.approx(0.5)


def test_regular_tetrahedron_volume():
    expected = math.sqrt(2.0) / 12.0
    assert simplex_volume([1.0] * 6) == pytest.approx(expected, abs=1e-12)


def test_degenerate_triangle_rejected():
    with pytest.raises(NondegenerateViolation):
        simplex_volume([1.0, 1.0, 2.0])


def test_bad_length_count_rejected():
    with pytest.raises(ValueError):
        simplex_volume([1.0, 1.0])


@given(st.floats(min_value=0.1, max_value=10.0))
@settings(max_examples=30, deadline=None)
def test_volume_scaling_law(scale):
    base = simplex_volume([1.0, 1.0, math.sqrt(2.0)])
    scaled = simplex_volume([scale, scale, scale * math.sqrt(2.0)])
    assert scaled == pytest.approx(base * scale**2, rel=1e-9)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_volume_matches_coordinate_determinant(d):
    # oracle: volume of an embedded simplex from the Gram determinant of its
    # coordinate edge vectors, sqrt(det(B B^T)) / d!
    rng = np.random.default_rng(50 + d)
    for _ in range(25):
        points = rng.normal(size=(d + 1, d))
        diffs = points[1:] - points[0]
        oracle = math.sqrt(abs(np.linalg.det(diffs @ diffs.T))) / math.factorial(d)
        if oracle < 1e-3:
            continue
        lengths = [
            float(np.linalg.norm(points[i] - points[j]))
            for i in range(d + 1)
            for j in range(i + 1, d + 1)
        ]
        assert simplex_volume(lengths) == pytest.approx(oracle, rel=1e-8)


def test_volume_invariant_under_relabeling():
    rng = np.random.default_rng(9)
    points = rng.normal(size=(4, 3))
    for perm in ((1, 0, 2, 3), (3, 2, 1, 0), (2, 0, 3, 1)):
        shuffled = points[list(perm)]
        lengths = [
            float(np.linalg.norm(shuffled[i] - shuffled[j]))
            for i in range(4)
            for j in range(i + 1, 4)
        ]
        base = [
            float(np.linalg.norm(points[i] - points[j]))
            for i in range(4)
            for j in range(i + 1, 4)
        ]
        assert simplex_volume(lengths) == pytest.approx(
            simplex_volume(base), rel=1e-9
        )


# ---------------------------------------------------------------------------
# total area


def test_two_triangles_additive():
    complex_ = WeightedComplex(
        2,
        [(0, 1, 2), (3, 4, 5)],
        {
            (0, 1): 1.0, (0, 2): 1.0, (1, 2): math.sqrt(2.0),
            (3, 4): 1.0, (3, 5): 1.0, (4, 5): math.sqrt(2.0),
        },
    )
    assert total_area(complex_.geometry(0)) == pytest.approx(1.0)


def test_empty_subpolyhedron_area(circle8_geom):
    assert total_area(Subpolyhedron(circle8_geom, ())) == 0.0


def test_torus_total_area(torus4_d1):
    # 32 unit right triangles of area 1/2 each
    assert total_area(torus4_d1) == pytest.approx(16.0)


def test_disjoint_union_additivity():
    one = circle(6, 3.0)
    both = WeightedComplex(
        1,
        list(one.simplices) + [(u + 6, v + 6) for u, v in one.simplices],
        {
            **one.edge_lengths,
            **{(u + 6, v + 6): l for (u, v), l in one.edge_lengths.items()},
        },
    )
    assert total_area(both.geometry(0)) == pytest.approx(
        2 * total_area(one.geometry(0)), abs=1e-12
    )


# ---------------------------------------------------------------------------
# balls


def test_ball_all_nodes_beyond_diameter(circle8_geom):
    ball = circle8_geom.ball(0, 2.5)
    assert ball.nodes == frozenset(range(circle8_geom.n_nodes))
    assert len(ball.cells) == len(circle8_geom.cells)


def test_ball_tiny_radius_is_center_only(circle8_geom):
    ball = circle8_geom.ball(0, 1e-9)
    assert ball.nodes == frozenset({0})
    assert ball.cells == ()


def test_ball_matches_dijkstra_oracle(torus4_d1):
    oracle = dijkstra_oracle(torus4_d1, 0)
    ball = torus4_d1.ball(0, 1.0)
    expected = {v for v, d in enumerate(oracle) if d <= 1.0}
    assert ball.nodes == expected
    for cell in ball.cells:
        assert all(oracle[v] <= 1.0 for v in cell)


def test_graph_distance_matches_oracle(torus4_d1):
    oracle = dijkstra_oracle(torus4_d1, 5)
    computed = torus4_d1.graph.distances_from(5)
    assert np.allclose(computed, oracle)


def test_ball_volume_saturates(torus4_d1):
    assert torus4_d1.ball_volume(0, 100.0) == pytest.approx(16.0)


def test_ball_volume_vanishes_at_small_radius(torus4_d1):
    value = torus4_d1.ball_volume(0, 1e-9)
    # only fractional credit from the cells touching the center
    assert value <= torus4_d1.cell_volumes.max() * 7


def test_ball_volume_near_disk_area(torus4):
    geometry = torus4.geometry(3)
    value, boundary = geometry.ball_volume_detail(0, 1.0)
    assert abs(value - MC_DISK_AREA) / MC_DISK_AREA <= 0.10
    oracle_now = flat_torus_disk_area_mc(4, 1.0)
    assert oracle_now == pytest.approx(MC_DISK_AREA, abs=1e-9)


def test_ball_monotonicity(torus4_d1, circle8_geom):
    rng = random.Random(11)
    for geometry in (torus4_d1, circle8_geom):
        for _ in range(100):
            r1, r2 = sorted(rng.uniform(0.05, 2.0) for _ in range(2))
            if r1 == r2:
                continue
            center = rng.randrange(geometry.n_nodes)
            small = geometry.ball(center, r1)
            large = geometry.ball(center, r2)
            assert small.nodes <= large.nodes
            assert set(small.cells) <= set(large.cells)
            assert geometry.ball_volume(center, r1) <= geometry.ball_volume(
                center, r2
            ) + 1e-12


def test_graph_connected_when_complex_is(torus4_d1):
    distances = torus4_d1.graph.all_distances()
    assert np.isfinite(distances).all()


def test_triangle_inequality(torus4_d1):
    rng = random.Random(7)
    for _ in range(100):
        a, b, c = (rng.randrange(torus4_d1.n_nodes) for _ in range(3))
        dab = torus4_d1.graph.distance(a, b)
        dbc = torus4_d1.graph.distance(b, c)
        dac = torus4_d1.graph.distance(a, c)
        assert dac <= dab + dbc + 1e-9


def test_refinement_convergence(torus3):
    # frozen configuration: center 0, radius 1.0; deltas shrink monotonically
    volumes = [torus3.geometry(depth).ball_volume(0, 1.0) for depth in (1, 2, 3, 4)]
    deltas = [abs(volumes[i + 1] - volumes[i]) for i in range(3)]
    assert deltas[0] >= deltas[1] >= deltas[2]


# ---------------------------------------------------------------------------
# construction validation


def test_missing_edge_rejected():
    with pytest.raises(ValueError):
        WeightedComplex(1, [(0, 1)], {})


def test_metric_violating_triangle_rejected():
    with pytest.raises(NondegenerateViolation):
        WeightedComplex(2, [(0, 1, 2)], {(0, 1): 1.0, (0, 2): 1.0, (1, 2): 2.0})


def test_wrong_arity_rejected():
    with pytest.raises(ValueError):
        WeightedComplex(2, [(0, 1)], {(0, 1): 1.0})


def test_json_round_trip(torus4):
    clone = WeightedComplex.from_json(torus4.to_json())
    assert clone.simplices == torus4.simplices
    assert clone.edge_lengths == torus4.edge_lengths
    assert clone.metadata == torus4.metadata


def test_subpolyhedron_validation(circle8_geom):
    with pytest.raises(Exception):
        Subpolyhedron(circle8_geom, [(0, 1)])  # an edge is not a facet here


def test_node_barycentric_coordinates(circle8_geom):
    from fractions import Fraction

    support = circle8_geom.node_barycentric(0)
    assert support == {0: Fraction(1)}


def test_generated_surfaces_euler_characteristic(torus4_d1, genus2):
    def euler(geometry):
        edges = {
            face for cell in geometry.cells for face in
            [(cell[0], cell[1]), (cell[0], cell[2]), (cell[1], cell[2])]
        }
        return geometry.n_nodes - len(edges) + len(geometry.cells)

    assert euler(torus4_d1) == 0
    assert euler(genus2.geometry(0)) == -2


def test_generated_surfaces_closed(genus2):
    geometry = genus2.geometry(0)
    counts = {}
    for cell in geometry.cells:
        for face in [(cell[0], cell[1]), (cell[0], cell[2]), (cell[1], cell[2])]:
            counts[face] = counts.get(face, 0) + 1
    assert set(counts.values()) == {2}


def test_circle_distances_exact(circle8_geom):
    # 16 nodes spaced 0.25 around a circumference-4 circle: the distance
    # multiset from any node is 0, two of each arc length, then 2.0
    dist = sorted(circle8_geom.graph.distances_from(0).tolist())
    expected = sorted(
        [0.0, 2.0] + [0.25 * k for k in range(1, 8) for _ in range(2)]
    )
    assert dist == pytest.approx(expected, abs=1e-12)
