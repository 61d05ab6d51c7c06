"""Level-k box approximations of IFS attractors.

A level-k approximation is the union of the cells
``f_{j1} o ... o f_{jk}(ambient)`` over all words ``j1...jk``.  Words are
tuples of 1-based map indices, outermost map first.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

from .errors import InvalidInput, ResourceLimit
from .geometry import (AffineMap, Box, HausdorffDistance, as_point,
                       format_point, format_rational, hausdorff_distance,
                       map_box, parse_point)

Address = Tuple[int, ...]

BUDGET_ENV = "IFSTOPO_BUDGET"
DEFAULT_BUDGET = 10 ** 6


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise InvalidInput(f"{BUDGET_ENV}={raw!r} is not an integer") from None
    if value < 1:
        raise InvalidInput(f"{BUDGET_ENV} must be positive")
    return value


@dataclass(frozen=True)
class IFSystem:
    maps: Tuple[AffineMap, ...]
    ambient_box: Box
    name: str = "custom"

    def __post_init__(self):
        maps = tuple(self.maps)
        object.__setattr__(self, "maps", maps)
        if len(maps) < 2:
            raise InvalidInput(f"an IFS needs at least 2 maps, got {len(maps)}")
        for j, f in enumerate(maps, 1):
            if f.dimension != self.ambient_box.dimension:
                raise InvalidInput(f"map {j} has dimension {f.dimension}, "
                                   f"ambient box {self.ambient_box.dimension}")
            if not self.ambient_box.contains_box(map_box(f, self.ambient_box)):
                raise InvalidInput(f"map {j} does not send the ambient box into itself")

    @property
    def m(self) -> int:
        return len(self.maps)

    @property
    def dimension(self) -> int:
        return self.ambient_box.dimension


def _cmts() -> IFSystem:
    third = Fraction(1, 3)
    return IFSystem((AffineMap.diagonal([third], [0]),
                     AffineMap.diagonal([third], [Fraction(2, 3)])),
                    Box.unit(1), "cmts")


def _carpet() -> IFSystem:
    third = Fraction(1, 3)
    # f1..f8 in the usual order: bottom row, middle row without centre, top row.
    offsets = [(0, 0), (1, 0), (2, 0), (0, 1), (2, 1), (0, 2), (1, 2), (2, 2)]
    maps = tuple(AffineMap.diagonal([third, third], [third * a, third * b])
                 for a, b in offsets)
    return IFSystem(maps, Box.unit(2), "sierpinski-carpet")


def _gasket() -> IFSystem:
    half = Fraction(1, 2)
    offsets = [(0, 0), (half, 0), (0, half)]
    return IFSystem(tuple(AffineMap.diagonal([half, half], v) for v in offsets),
                    Box.unit(2), "sierpinski-gasket")


PRESETS = {
    "cmts": _cmts,
    "sierpinski-carpet": _carpet,
    "sierpinski-gasket": _gasket,
}


def preset(name: str) -> IFSystem:
    try:
        return PRESETS[name]()
    except KeyError:
        raise InvalidInput(f"unknown preset {name!r}; choose from "
                           f"{', '.join(sorted(PRESETS))}") from None


def lipschitz_sum(ifs: IFSystem) -> Fraction:
    return sum((f.lipschitz for f in ifs.maps), Fraction(0))


@dataclass(frozen=True)
class CellSet:
    """Cells of X_k keyed by address, in lexicographic address order."""

    level: int
    cells: Dict[Address, Box] = field(repr=False)
    ifs: IFSystem = field(repr=False)

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[Tuple[Address, Box]]:
        return iter(self.cells.items())

    def addresses(self) -> List[Address]:
        return list(self.cells)

    def boxes(self) -> List[Box]:
        return list(self.cells.values())

    def centers(self):
        return [b.center() for b in self.cells.values()]

    def locate(self, point) -> Optional[Address]:
        """Smallest address whose cell contains ``point``, or None."""
        point = as_point(point)
        for addr, box in self.cells.items():
            if box.contains_point(point):
                return addr
        return None


def check_budget(ifs: IFSystem, k: int, budget: Optional[int] = None) -> None:
    if k < 0:
        raise InvalidInput(f"depth must be non-negative, got {k}")
    budget = default_budget() if budget is None else budget
    count = ifs.m ** k
    if count > budget:
        raise ResourceLimit(f"{ifs.m}^{k} = {count} cells exceeds the cell "
                            f"budget of {budget}")


def level_zero(ifs: IFSystem) -> CellSet:
    return CellSet(0, {(): ifs.ambient_box}, ifs)


def hutchinson_step(ifs: IFSystem, cells: CellSet) -> CellSet:
    """One application of ``A -> U_j f_j(A)``, keeping addresses apart."""
    if cells.ifs != ifs:
        raise InvalidInput("cell set was generated by a different IFS")
    out = {}
    for j, f in enumerate(ifs.maps, 1):
        for addr, box in cells.cells.items():
            out[(j,) + addr] = map_box(f, box)
    return CellSet(cells.level + 1, out, ifs)


def iterate_attractor(ifs: IFSystem, k: int, budget: Optional[int] = None) -> CellSet:
    check_budget(ifs, k, budget)
    cells = level_zero(ifs)
    for _ in range(k):
        cells = hutchinson_step(ifs, cells)
    return cells


def iterate_levels(ifs: IFSystem, k_max: int, budget: Optional[int] = None):
    """Yield X_0, X_1, ..., X_{k_max}."""
    check_budget(ifs, k_max, budget)
    cells = level_zero(ifs)
    yield cells
    for _ in range(k_max):
        cells = hutchinson_step(ifs, cells)
        yield cells


def max_cell_diameter(cells: CellSet) -> Fraction:
    """Largest squared cell diameter."""
    return max(b.diameter_squared() for b in cells.cells.values())


def convergence_trace(ifs: IFSystem, k_max: int,
                      budget: Optional[int] = None) -> List[Tuple[int, HausdorffDistance]]:
    """Hausdorff distances between the cell-centre clouds of X_k and X_{k+1}
    for k = 0 .. k_max-1."""
    trace = []
    previous = None
    for cells in iterate_levels(ifs, k_max, budget):
        centers = cells.centers()
        if previous is not None:
            trace.append((cells.level - 1, hausdorff_distance(previous, centers)))
        previous = centers
    return trace


# ---------------------------------------------------------------------------
# Structured text: IFS definitions and cell-set exports share one format.
#
#   name: cmts
#   dimension: 1
#   box: 0/1 1/1
#   map: 1/3 0/1            (diagonal entries, then offset; comma separated)
#   level: 2                (cell sets only)
#   cell: 1,2 2/9 1/3       (address, lower corner, upper corner)

def format_address(addr: Address) -> str:
    return ",".join(map(str, addr)) if addr else "-"


def parse_address(text: str) -> Address:
    text = text.strip()
    if text in ("-", ""):
        return ()
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise InvalidInput(f"bad address {text!r}") from None


def dumps_ifs(ifs: IFSystem) -> str:
    lines = [f"name: {ifs.name}",
             f"dimension: {ifs.dimension}",
             f"box: {format_point(ifs.ambient_box.lower)} "
             f"{format_point(ifs.ambient_box.upper)}"]
    for f in ifs.maps:
        if not f.is_diagonal:
            raise InvalidInput("only diagonal maps can be written")
        diag = [f.matrix[i][i] for i in range(f.dimension)]
        lines.append(f"map: {format_point(diag)} {format_point(f.offset)}")
    return "\n".join(lines) + "\n"


def _records(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise InvalidInput(f"line {lineno}: expected 'key: value'")
        yield lineno, key.strip(), value.split()


def _parse(text: str):
    name, dimension, box, maps, level, cells = "custom", None, None, [], None, {}
    for lineno, key, values in _records(text):
        try:
            if key == "name":
                name = " ".join(values)
            elif key == "dimension":
                dimension = int(values[0])
            elif key == "box":
                box = Box(parse_point(values[0]), parse_point(values[1]))
            elif key == "map":
                maps.append(AffineMap.diagonal(parse_point(values[0]),
                                               parse_point(values[1])))
            elif key == "level":
                level = int(values[0])
            elif key == "cell":
                cells[parse_address(values[0])] = Box(parse_point(values[1]),
                                                      parse_point(values[2]))
            else:
                raise InvalidInput(f"unknown key {key!r}")
        except (IndexError, ValueError) as exc:
            raise InvalidInput(f"line {lineno}: {exc}") from None
    if box is None:
        raise InvalidInput("missing 'box:' line")
    if dimension is not None and dimension != box.dimension:
        raise InvalidInput(f"dimension {dimension} disagrees with box")
    return IFSystem(tuple(maps), box, name), level, cells


def loads_ifs(text: str) -> IFSystem:
    return _parse(text)[0]


def dumps_cellset(cells: CellSet) -> str:
    out = [dumps_ifs(cells.ifs), f"level: {cells.level}\n"]
    for addr, box in cells.cells.items():
        out.append(f"cell: {format_address(addr)} {format_point(box.lower)} "
                   f"{format_point(box.upper)}\n")
    return "".join(out)


def loads_cellset(text: str) -> CellSet:
    ifs, level, cells = _parse(text)
    if level is None:
        raise InvalidInput("missing 'level:' line")
    if len(cells) != ifs.m ** level:
        raise InvalidInput(f"expected {ifs.m ** level} cells, found {len(cells)}")
    return CellSet(level, dict(sorted(cells.items())), ifs)


def format_summary(cells: CellSet) -> Dict[str, str]:
    """Exact numbers for the attractor command's summary."""
    return {
        "ifs": cells.ifs.name,
        "level": str(cells.level),
        "cells": str(len(cells)),
        "max_cell_diameter_squared": format_rational(max_cell_diameter(cells)),
        "lipschitz_sum": format_rational(lipschitz_sum(cells.ifs)),
    }
