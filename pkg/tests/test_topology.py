import random
from collections import deque
from fractions import Fraction as F
from itertools import combinations

import networkx as nx
import pytest

from ifstopo import (InvalidInput, UnsupportedInput, analyze, build_adjacency,
                     check_conditions, clopen_partition, connected_components,
                     count_windows, find_arc, hutchinson_step, iterate_attractor,
                     min_gap, nested_connectivity_report, perfectness_proxy, preset)
from ifstopo.attractor import IFSystem
from ifstopo.geometry import AffineMap, Box

CMTS = preset("cmts")
SC = preset("sierpinski-carpet")
GASKET = preset("sierpinski-gasket")


def brute_edges(cells):
    items = list(cells)
    return {(a, b) for (a, x), (b, y) in combinations(items, 2) if x.intersects(y)}


def brute_gap(cells):
    return min(x.distance_squared(y) for x, y in combinations(cells.boxes(), 2))


def nx_components(cells):
    g = nx.Graph()
    g.add_nodes_from(cells.addresses())
    g.add_edges_from(brute_edges(cells))
    return nx.number_connected_components(g)


def carpet_grid(k):
    """Level-k carpet squares from the base-3 digit rule: square (i, j) is
    removed when some digit position has both digits equal to 1."""
    n = 3 ** k
    def kept(i, j):
        for _ in range(k):
            if i % 3 == 1 and j % 3 == 1:
                return False
            i, j = i // 3, j // 3
        return True
    return [[kept(i, j) for j in range(n)] for i in range(n)]


def flood_fill_windows(grid):
    n = len(grid)
    seen = [[False] * n for _ in range(n)]
    windows = 0
    for i in range(n):
        for j in range(n):
            if grid[i][j] or seen[i][j]:
                continue
            seen[i][j] = True
            queue, border = deque([(i, j)]), False
            while queue:
                a, b = queue.popleft()
                border |= a in (0, n - 1) or b in (0, n - 1)
                for c, d in ((a + 1, b), (a - 1, b), (a, b + 1), (a, b - 1)):
                    if 0 <= c < n and 0 <= d < n and not grid[c][d] and not seen[c][d]:
                        seen[c][d] = True
                        queue.append((c, d))
            windows += not border
    return windows


# -- adjacency -------------------------------------------------------------

def test_adjacency_cmts_level1_has_no_edges():
    g = build_adjacency(iterate_attractor(CMTS, 1))
    assert g.edges == []


def test_adjacency_carpet_level1_ring():
    cells = iterate_attractor(SC, 1)
    g = build_adjacency(cells)
    assert set(g.edges) == brute_edges(cells)
    # the 8 border cells form a ring: every cell has a left/right/up/down
    # neighbour around the hole
    assert all(len(nb) >= 2 for nb in g.neighbors.values())
    assert connected_components(g)[0] == 1


def test_adjacency_level0():
    g = build_adjacency(iterate_attractor(SC, 0))
    assert g.nodes == [()] and g.edges == []


@pytest.mark.parametrize("ifs,k", [(CMTS, 6), (SC, 2), (SC, 3), (GASKET, 4)],
                         ids=["cmts6", "sc2", "sc3", "gasket4"])
def test_adjacency_matches_all_pairs(ifs, k):
    cells = iterate_attractor(ifs, k)
    g = build_adjacency(cells)
    assert set(g.edges) == brute_edges(cells)
    assert all(a < b for a, b in g.edges)


def test_adjacency_mixed_sizes():
    # two ratios: small cells next to large ones
    ifs = IFSystem((AffineMap.diagonal([F(1, 2)], [0]),
                    AffineMap.diagonal([F(1, 4)], [F(1, 2)]),
                    AffineMap.diagonal([F(1, 8)], [F(7, 8)])), Box.unit(1))
    cells = iterate_attractor(ifs, 4)
    assert set(build_adjacency(cells).edges) == brute_edges(cells)


# -- components --------------------------------------------------------------

def test_components_carpet_level2():
    count, labels = connected_components(build_adjacency(iterate_attractor(SC, 2)))
    assert count == 1
    assert set(labels.values()) == {(1, 1)}


@pytest.mark.parametrize("k", range(1, 11))
def test_components_cmts(k):
    cells = iterate_attractor(CMTS, k)
    count, labels = connected_components(build_adjacency(cells))
    assert count == 2 ** k
    assert all(labels[a] == a for a in cells.addresses())
    if k <= 8:
        assert brute_gap(cells) > 0
        assert nx_components(cells) == count


def test_components_single_node():
    assert connected_components(build_adjacency(iterate_attractor(CMTS, 0)))[0] == 1


def test_component_labels_are_smallest_address():
    ifs = IFSystem((AffineMap.diagonal([F(1, 3)], [0]),
                    AffineMap.diagonal([F(1, 3)], [F(1, 3)]),
                    AffineMap.diagonal([F(1, 3)], [F(2, 3)]),
                    AffineMap.diagonal([F(1, 5)], [F(4, 5)])), Box.unit(1))
    cells = iterate_attractor(ifs, 2)
    count, labels = connected_components(build_adjacency(cells))
    assert count == nx_components(cells)
    for a, lab in labels.items():
        assert lab <= a and labels[lab] == lab


# -- gaps --------------------------------------------------------------------

def test_min_gap_examples():
    assert min_gap(iterate_attractor(CMTS, 1)) == F(1, 9)
    assert min_gap(iterate_attractor(SC, 1)) == 0
    with pytest.raises(InvalidInput):
        min_gap(iterate_attractor(CMTS, 0))


@pytest.mark.parametrize("k", range(1, 9))
def test_min_gap_cmts_exhaustive(k):
    cells = iterate_attractor(CMTS, k)
    assert min_gap(cells) == brute_gap(cells) == F(1, 9 ** k)


def test_min_gap_disconnected_planar_set():
    # four corner squares of side 1/4: gaps of 1/2
    ifs = IFSystem(tuple(AffineMap.diagonal([F(1, 4), F(1, 4)], v) for v in
                         [(0, 0), (F(3, 4), 0), (0, F(3, 4)), (F(3, 4), F(3, 4))]),
                   Box.unit(2))
    for k in (1, 2, 3):
        cells = iterate_attractor(ifs, k)
        assert min_gap(cells) == brute_gap(cells)


# -- conditions --------------------------------------------------------------

def test_conditions_cmts():
    c = check_conditions(CMTS)
    assert c.as_tuple() == (True, True, True)
    assert c.fixed_points == ((0,), (1,))
    assert c.lipschitz_sum == F(2, 3)


def test_conditions_carpet_and_gasket():
    assert check_conditions(SC).as_tuple() == (True, True, False)
    assert check_conditions(SC).lipschitz_sum == F(8, 3)
    g = check_conditions(GASKET)
    assert g.as_tuple() == (True, True, False)
    assert g.lipschitz_sum == F(3, 2)


def test_conditions_singleton_fixed_point_set():
    f = AffineMap.diagonal([F(1, 3)], [0])
    g = AffineMap.diagonal([F(1, 2)], [0])
    assert check_conditions(IFSystem((f, g), Box.unit(1))).condition_ii is False


def test_conditions_invariant_under_permutation():
    rng = random.Random(3)
    for ifs in (CMTS, SC, GASKET):
        base = check_conditions(ifs)
        for _ in range(5):
            maps = list(ifs.maps)
            rng.shuffle(maps)
            c = check_conditions(IFSystem(tuple(maps), ifs.ambient_box))
            assert c.as_tuple() == base.as_tuple()
            assert c.fixed_points == base.fixed_points
            assert c.lipschitz_sum == base.lipschitz_sum


# -- perfectness -------------------------------------------------------------

@pytest.mark.parametrize("ifs,k_max", [(CMTS, 8), (SC, 4)], ids=["cmts", "carpet"])
def test_perfectness_proxy(ifs, k_max):
    cells = iterate_attractor(ifs, 0)
    for _ in range(k_max + 1):
        nxt = hutchinson_step(ifs, cells)
        ok, bad = perfectness_proxy(cells, nxt)
        assert ok and bad == []
        cells = nxt


def test_perfectness_fails_for_identical_maps():
    f = AffineMap.diagonal([F(1, 3)], [0])
    ifs = IFSystem((f, f), Box.unit(1))
    x1 = iterate_attractor(ifs, 1)
    ok, bad = perfectness_proxy(x1, hutchinson_step(ifs, x1))
    assert not ok and bad[0] == (1,)


def test_perfectness_requires_consecutive_levels():
    with pytest.raises(InvalidInput):
        perfectness_proxy(iterate_attractor(CMTS, 1), iterate_attractor(CMTS, 3))


# -- clopen partition ----------------------------------------------------------

def test_clopen_partition_cmts():
    assert clopen_partition(iterate_attractor(CMTS, 1)) == (((1,),), ((2,),))
    y, rest = clopen_partition(iterate_attractor(CMTS, 2))
    assert y == ((1, 1),)
    assert rest == ((1, 2), (2, 1), (2, 2))


@pytest.mark.parametrize("k", range(1, 6))
def test_clopen_partition_carpet_none(k):
    assert clopen_partition(iterate_attractor(SC, k)) is None


def test_clopen_partition_carpet_level6():
    cells = iterate_attractor(SC, 6)
    assert clopen_partition(cells) is None


def test_clopen_partition_needs_two_cells():
    with pytest.raises(InvalidInput):
        clopen_partition(iterate_attractor(CMTS, 0))


def test_clopen_iff_disconnected():
    for ifs, k in [(CMTS, 3), (SC, 2), (GASKET, 3)]:
        cells = iterate_attractor(ifs, k)
        count, _ = connected_components(build_adjacency(cells))
        assert (clopen_partition(cells) is None) == (count == 1)


# -- arcs --------------------------------------------------------------------

def _segments_inside(cells, line):
    # each segment must sit in one convex cell
    return all(any(b.contains_point(p) and b.contains_point(q) for b in cells.boxes())
               for p, q in zip(line, line[1:]))


def test_find_arc_figure_example():
    cells = iterate_attractor(SC, 2)
    line = find_arc(cells, (F(1, 18), F(1, 18)), (F(17, 18), F(17, 18)))
    assert line is not None
    assert line[0] == (F(1, 18), F(1, 18)) and line[-1] == (F(17, 18), F(17, 18))
    assert _segments_inside(cells, line)


def test_find_arc_cmts_none():
    assert find_arc(iterate_attractor(CMTS, 1), (0,), (1,)) is None


def test_find_arc_same_point():
    cells = iterate_attractor(SC, 2)
    p = (F(1, 20), F(1, 30))
    assert find_arc(cells, p, p) == [p, p]


def test_find_arc_outside():
    with pytest.raises(InvalidInput):
        find_arc(iterate_attractor(SC, 1), (F(1, 2), F(1, 2)), (0, 0))


def test_find_arc_iff_same_component():
    rng = random.Random(11)
    for ifs, k in [(CMTS, 3), (GASKET, 3), (SC, 2)]:
        cells = iterate_attractor(ifs, k)
        g = build_adjacency(cells)
        _, labels = connected_components(g)
        items = list(cells)
        for _ in range(15):
            (a, x), (b, y) = rng.choice(items), rng.choice(items)
            p, q = x.center(), y.center()
            a, b = cells.locate(p), cells.locate(q)
            line = find_arc(cells, p, q, g)
            assert (line is not None) == (labels[a] == labels[b])
            if line:
                assert _segments_inside(cells, line)


# -- windows -----------------------------------------------------------------

def test_windows_examples():
    assert count_windows(iterate_attractor(SC, 1)) == 1
    assert count_windows(iterate_attractor(SC, 2)) == 9
    assert count_windows(iterate_attractor(SC, 3)) == 73


def test_windows_recurrence_against_grid_oracle():
    w = {1: 1}
    for k in range(2, 5):
        w[k] = 8 * w[k - 1] + 1
    for k in range(1, 5):
        assert flood_fill_windows(carpet_grid(k)) == w[k]
        assert count_windows(iterate_attractor(SC, k)) == w[k]


def test_windows_grid_oracle_matches_cells():
    cells = iterate_attractor(SC, 3)
    grid = carpet_grid(3)
    covered = {(int(b.lower[0] * 27), int(b.lower[1] * 27)) for b in cells.boxes()}
    assert covered == {(i, j) for i in range(27) for j in range(27) if grid[i][j]}


def test_windows_alignment_and_dimension():
    with pytest.raises(UnsupportedInput):
        count_windows(iterate_attractor(CMTS, 2))
    with pytest.raises(UnsupportedInput):
        count_windows(iterate_attractor(GASKET, 2), resolution=9)
    assert count_windows(iterate_attractor(SC, 2), resolution=27) == 9


# -- nested connectivity ------------------------------------------------------

def test_nested_report_carpet():
    rep = nested_connectivity_report(SC, 4)
    assert [(n.level, n.component_count, n.nested) for n in rep] == \
        [(k, 1, True) for k in range(5)]


def test_nested_report_carpet_level5():
    rep = nested_connectivity_report(SC, 5)
    assert all(n.component_count == 1 and n.nested for n in rep)


def test_nested_report_cmts():
    rep = nested_connectivity_report(CMTS, 8)
    assert [n.component_count for n in rep] == [2 ** k for k in range(9)]
    assert all(n.nested for n in rep)


def test_nested_report_depth0():
    rep = nested_connectivity_report(SC, 0)
    assert [(n.level, n.component_count, n.nested) for n in rep] == [(0, 1, True)]


# -- dichotomy and report -----------------------------------------------------

def test_dichotomy_small_depths():
    for k in range(1, 7):
        cells = iterate_attractor(CMTS, k)
        assert min_gap(cells) > 0
        assert connected_components(build_adjacency(cells))[0] == 2 ** k
    for k in range(1, 4):
        cells = iterate_attractor(SC, k)
        assert min_gap(cells) == 0
        assert connected_components(build_adjacency(cells))[0] == 1


def test_analyze_reports():
    r = analyze(CMTS, 5)
    assert (r.component_count, r.touching, r.conditions.as_tuple()) == (32, False, (True,) * 3)
    assert r.min_gap_squared == F(1, 3 ** 10)
    assert r.zero_dim_evidence and r.perfect_proxy and r.window_count is None
    r = analyze(SC, 2)
    assert (r.component_count, r.window_count) == (1, 9)
    assert r.conditions.as_tuple() == (True, True, False)
    assert not r.zero_dim_evidence and not r.clopen_partition_found
    assert analyze(GASKET, 3).component_count == 1


def test_analyze_level0():
    r = analyze(CMTS, 0)
    assert r.cell_count == 1 and r.min_gap_squared is None
    assert r.perfect_proxy_levels == (0, 1) and r.perfect_proxy


def test_report_serialisation_is_stable():
    a, b = analyze(SC, 2), analyze(SC, 2)
    assert a.to_text() == b.to_text()
    assert a.to_json() == b.to_json()
    text = a.to_text()
    assert "windows: 9" in text
    assert "0-dim evidence at depth 2: false" in text
    assert "lipschitz_sum: 8/3" in text
