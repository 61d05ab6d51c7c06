"""Finite-resolution topology of cell approximations.

Connectedness is read off the cell-contact graph of X_k (closed cells that
share even a single point are adjacent).  Zero-dimensionality and
perfectness can only be witnessed at a finite depth; reports say so.
"""
from __future__ import annotations

import json
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .attractor import (Address, CellSet, IFSystem, check_budget,
                        hutchinson_step, iterate_levels, lipschitz_sum)
from .errors import InvalidInput, UnsupportedInput
from .geometry import Box, Point, as_point, fixed_point, format_point, format_rational


def _integer_boxes(boxes: Sequence[Box]):
    """Rescale boxes onto a common integer lattice (exact)."""
    scale = math.lcm(*(c.denominator for b in boxes for c in b.lower + b.upper))
    def scaled(p):
        return tuple(c.numerator * (scale // c.denominator) for c in p)
    return scale, [(scaled(b.lower), scaled(b.upper)) for b in boxes]


def _touch(a, b) -> bool:
    (alo, ahi), (blo, bhi) = a, b
    return all(x <= w and z <= y for x, y, z, w in zip(alo, ahi, blo, bhi))


def _gap2(a, b) -> int:
    (alo, ahi), (blo, bhi) = a, b
    total = 0
    for x, y, z, w in zip(alo, ahi, blo, bhi):
        g = max(z - y, x - w, 0)
        total += g * g
    return total


@dataclass
class AdjacencyGraph:
    nodes: List[Address]
    edges: List[Tuple[Address, Address]]
    neighbors: Dict[Address, List[Address]] = field(repr=False)

    @property
    def edge_count(self) -> int:
        return len(self.edges)


def build_adjacency(cells: CellSet) -> AdjacencyGraph:
    """Contact graph of the cells.

    Candidate pairs come from a uniform bucket grid whose spacing is the
    widest cell extent, so each cell lands in at most two buckets per axis
    and only bucket-mates are tested exactly.
    """
    nodes = cells.addresses()
    _, ibox = _integer_boxes(cells.boxes())
    spacing = max(max(hi - lo for lo, hi in zip(*b)) for b in ibox) or 1
    buckets = defaultdict(list)
    for idx, (lo, hi) in enumerate(ibox):
        ranges = [range(l // spacing, h // spacing + 1) for l, h in zip(lo, hi)]
        for key in product(*ranges):
            buckets[key].append(idx)
    pairs = set()
    for members in buckets.values():
        for i, j in combinations(members, 2):
            pairs.add((i, j) if i < j else (j, i))
    edges = sorted((i, j) for i, j in pairs if _touch(ibox[i], ibox[j]))
    neighbors = {a: [] for a in nodes}
    for i, j in edges:
        neighbors[nodes[i]].append(nodes[j])
        neighbors[nodes[j]].append(nodes[i])
    for lst in neighbors.values():
        lst.sort()
    return AdjacencyGraph(nodes, [(nodes[i], nodes[j]) for i, j in edges], neighbors)


class UnionFind:
    """Union-find over 0..n-1; the root of a set is always its smallest
    member, which makes labels deterministic."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.count = n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.count -= 1


def connected_components(graph: AdjacencyGraph) -> Tuple[int, Dict[Address, Address]]:
    """Component count and a label per node (smallest address in its component)."""
    index = {a: i for i, a in enumerate(graph.nodes)}
    uf = UnionFind(len(graph.nodes))
    for a, b in graph.edges:
        uf.union(index[a], index[b])
    labels = {a: graph.nodes[uf.find(i)] for i, a in enumerate(graph.nodes)}
    return uf.count, labels


def min_gap(cells: CellSet) -> Fraction:
    """Smallest squared distance between two distinct cells; 0 when some pair touches."""
    if len(cells) < 2:
        raise InvalidInput("min_gap needs at least two cells")
    scale, ibox = _integer_boxes(cells.boxes())
    order = sorted(range(len(ibox)), key=lambda i: ibox[i][0][0])
    best = None
    for pos, i in enumerate(order):
        hi_x = ibox[i][1][0]
        for j in order[pos + 1:]:
            dx = ibox[j][0][0] - hi_x
            if best is not None and dx > 0 and dx * dx >= best:
                break
            g = _gap2(ibox[i], ibox[j])
            if g == 0:
                return Fraction(0)
            if best is None or g < best:
                best = g
    return Fraction(best, scale * scale)


@dataclass(frozen=True)
class Conditions:
    """Injectivity (i), non-singleton fixed-point set (ii) and contraction
    sum below one (iii), with their witnesses."""

    condition_i: bool
    condition_ii: bool
    condition_iii: bool
    determinants: Tuple[Fraction, ...]
    fixed_points: Tuple[Point, ...]
    lipschitz_sum: Fraction

    def as_tuple(self) -> Tuple[bool, bool, bool]:
        return (self.condition_i, self.condition_ii, self.condition_iii)


def check_conditions(ifs: IFSystem) -> Conditions:
    dets = tuple(f.determinant() for f in ifs.maps)
    fixed = tuple(sorted({fixed_point(f) for f in ifs.maps}))
    total = lipschitz_sum(ifs)
    return Conditions(all(d != 0 for d in dets), len(fixed) >= 2, total < 1,
                      dets, fixed, total)


def perfectness_proxy(cells_k: CellSet, cells_k1: CellSet) -> Tuple[bool, List[Address]]:
    """Every level-k cell must hold at least two distinct level-(k+1) cells.

    Returns ``(ok, violating_addresses)``.
    """
    if cells_k1.level != cells_k.level + 1:
        raise InvalidInput(f"levels {cells_k.level} and {cells_k1.level} "
                           "are not consecutive")
    if cells_k1.ifs != cells_k.ifs:
        raise InvalidInput("cell sets come from different IFSs")
    m = cells_k.ifs.m
    bad = []
    for addr, box in cells_k.cells.items():
        children = {cells_k1.cells[addr + (j,)] for j in range(1, m + 1)}
        inside = {c for c in children if box.contains_box(c)}
        if len(inside) < 2:
            bad.append(addr)
    return not bad, bad


def clopen_partition(cells: CellSet, graph: Optional[AdjacencyGraph] = None):
    """Split off the component of the smallest address as ``Y``.

    Returns ``(Y, complement)`` as address tuples, or None when X_k is
    connected.  Components are separated by a positive gap, so ``Y`` is
    open and closed in X_k.
    """
    if len(cells) < 2:
        raise InvalidInput("clopen_partition needs at least two cells")
    graph = graph or build_adjacency(cells)
    count, labels = connected_components(graph)
    if count == 1:
        return None
    first = graph.nodes[0]
    y = tuple(a for a in graph.nodes if labels[a] == first)
    rest = tuple(a for a in graph.nodes if labels[a] != first)
    return y, rest


def _shortest_path(graph: AdjacencyGraph, start: Address, goal: Address):
    prev = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nb in graph.neighbors[node]:
            if nb not in prev:
                prev[nb] = node
                queue.append(nb)
    if goal not in prev:
        return None
    path = [goal]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


def find_arc(cells: CellSet, p, q, graph: Optional[AdjacencyGraph] = None):
    """Polyline from p to q inside the union of cells, or None.

    The route is p, centre of p's cell, then for each step of a shortest
    cell path the centre of the shared face/corner followed by the next
    centre, and finally q.  Each segment sits inside one convex cell.
    """
    p, q = as_point(p), as_point(q)
    start, goal = cells.locate(p), cells.locate(q)
    if start is None or goal is None:
        raise InvalidInput("arc endpoints must lie in the cell union")
    if start == goal:
        return [p, q] if p != q else [p, p]
    graph = graph or build_adjacency(cells)
    path = _shortest_path(graph, start, goal)
    if path is None:
        return None
    boxes = cells.cells
    line = [p, boxes[path[0]].center()]
    for a, b in zip(path, path[1:]):
        line.append(boxes[a].intersection(boxes[b]).center())
        line.append(boxes[b].center())
    line.append(q)
    return [pt for i, pt in enumerate(line) if i == 0 or pt != line[i - 1]]


def in_union(cells: CellSet, point) -> bool:
    return cells.locate(point) is not None


_MAX_WINDOW_GRID = 3 ** 8


def count_windows(cells: CellSet, ambient: Optional[Box] = None,
                  resolution: Optional[int] = None) -> int:
    """Number of complement components of a planar X_k that stay away from
    the ambient boundary.

    The complement is rasterised on the exact ``resolution``-per-side grid
    of the ambient box (inferred from the coordinates when not given).
    """
    ambient = ambient or cells.ifs.ambient_box
    if ambient.dimension != 2:
        raise UnsupportedInput("windows are only defined for planar sets")
    extent = [hi - lo for lo, hi in zip(ambient.lower, ambient.upper)]
    normalized = [tuple(tuple((c - lo) / e for c, lo, e in zip(corner, ambient.lower, extent))
                        for corner in (b.lower, b.upper))
                  for b in cells.boxes()]
    if resolution is None:
        resolution = math.lcm(*(c.denominator for nb in normalized
                                for corner in nb for c in corner))
        if resolution > _MAX_WINDOW_GRID:
            raise UnsupportedInput(f"grid of {resolution} per side is too fine")
    covered = np.zeros((resolution, resolution), dtype=bool)
    for lower, upper in normalized:
        idx = []
        for c in lower + upper:
            v = c * resolution
            if v.denominator != 1:
                raise UnsupportedInput(f"cell corner {format_rational(c)} is not "
                                       f"on the 1/{resolution} grid")
            idx.append(int(v))
        x0, y0, x1, y1 = idx
        covered[x0:x1, y0:y1] = True
    labels, n = ndimage.label(~covered)
    border = set(np.unique(np.concatenate(
        [labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]]))) - {0}
    return n - len(border)


@dataclass(frozen=True)
class NestedLevel:
    level: int
    component_count: int
    nested: bool


def _level_components(ifs: IFSystem, k_max: int, budget=None):
    for cells in iterate_levels(ifs, k_max, budget):
        graph = build_adjacency(cells)
        count, labels = connected_components(graph)
        yield cells, graph, count, labels


def _nested_ok(cells: CellSet, labels, parent_cells, parent_labels) -> bool:
    if parent_cells is None:
        return True
    seen = {}
    for addr, box in cells.cells.items():
        parent = addr[:-1]
        if not parent_cells.cells[parent].contains_box(box):
            return False
        owner = parent_labels[parent]
        if seen.setdefault(labels[addr], owner) != owner:
            return False
    return True


def nested_connectivity_report(ifs: IFSystem, k_max: int, budget=None) -> List[NestedLevel]:
    """Per level: component count of X_k and whether every component of X_k
    sits inside a single component of X_{k-1}."""
    out = []
    prev_cells = prev_labels = None
    for cells, _, count, labels in _level_components(ifs, k_max, budget):
        out.append(NestedLevel(cells.level, count,
                               _nested_ok(cells, labels, prev_cells, prev_labels)))
        prev_cells, prev_labels = cells, labels
    return out


@dataclass
class PropertyReport:
    ifs: str
    level: int
    cell_count: int
    component_count: int
    min_gap_squared: Optional[Fraction]
    clopen_partition_found: bool
    clopen_sizes: Optional[Tuple[int, int]]
    perfect_proxy: bool
    perfect_proxy_levels: Tuple[int, int]
    conditions: Conditions
    window_count: Optional[int]
    nested: List[NestedLevel]

    @property
    def touching(self) -> bool:
        return self.min_gap_squared == 0

    @property
    def zero_dim_evidence(self) -> bool:
        """Every level 1..k splits into singleton components.  Evidence, not proof."""
        m = len(self.conditions.determinants)
        return self.level > 0 and all(n.component_count == m ** n.level
                                      for n in self.nested if n.level > 0)

    def to_dict(self) -> dict:
        c = self.conditions
        gap = self.min_gap_squared
        return {
            "ifs": self.ifs,
            "level": self.level,
            "cells": self.cell_count,
            "components": self.component_count,
            "min_gap_squared": None if gap is None else format_rational(gap),
            "touching": None if gap is None else gap == 0,
            "clopen_partition_found": self.clopen_partition_found,
            "clopen_partition_sizes": (None if self.clopen_sizes is None
                                       else list(self.clopen_sizes)),
            "perfect_proxy": self.perfect_proxy,
            "perfect_proxy_levels": list(self.perfect_proxy_levels),
            "condition_i": c.condition_i,
            "condition_ii": c.condition_ii,
            "condition_iii": c.condition_iii,
            "fixed_points": [format_point(p) for p in c.fixed_points],
            "lipschitz_sum": format_rational(c.lipschitz_sum),
            "windows": self.window_count,
            "nested_levels": [
                {"level": n.level, "components": n.component_count, "nested": n.nested}
                for n in self.nested],
            "zero_dim_evidence": {
                "label": f"0-dim evidence at depth {self.level}",
                "value": self.zero_dim_evidence,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        lines = []
        for key, value in self.to_dict().items():
            if key == "nested_levels":
                for n in value:
                    lines.append(f"nested_level.{n['level']}: components={n['components']} "
                                 f"nested={_flag(n['nested'])}")
            elif key == "zero_dim_evidence":
                lines.append(f"{value['label']}: {_flag(value['value'])}")
            elif isinstance(value, list):
                lines.append(f"{key}: {' '.join(map(str, value))}")
            else:
                lines.append(f"{key}: {_flag(value)}")
        return "\n".join(lines) + "\n"


def _flag(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def analyze(ifs: IFSystem, k: int, budget=None) -> PropertyReport:
    check_budget(ifs, max(k, 1), budget)
    nested, levels = [], {}
    prev = None
    for cells, graph, count, labels in _level_components(ifs, k, budget):
        ok = _nested_ok(cells, labels, *(prev or (None, None)))
        nested.append(NestedLevel(cells.level, count, ok))
        prev = (cells, labels)
        # Keep the two deepest levels for the perfectness proxy.
        levels = {lvl: v for lvl, v in levels.items() if lvl >= cells.level - 1}
        levels[cells.level] = (cells, graph, count)
    cells, graph, count = levels[k]
    if k == 0:
        pair = (cells, hutchinson_step(ifs, cells))
    else:
        pair = (levels[k - 1][0], cells)
    perfect, _ = perfectness_proxy(*pair)

    gap = min_gap(cells) if len(cells) >= 2 else None
    split = clopen_partition(cells, graph) if len(cells) >= 2 else None
    windows = None
    if ifs.dimension == 2:
        try:
            windows = count_windows(cells)
        except UnsupportedInput:
            windows = None
    return PropertyReport(
        ifs=ifs.name, level=k, cell_count=len(cells), component_count=count,
        min_gap_squared=gap, clopen_partition_found=split is not None,
        clopen_sizes=None if split is None else (len(split[0]), len(split[1])),
        perfect_proxy=perfect, perfect_proxy_levels=(pair[0].level, pair[1].level),
        conditions=check_conditions(ifs), window_count=windows, nested=nested)
