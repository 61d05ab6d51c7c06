"""Exact rational geometry: affine contractions, boxes, distances.

Everything here works on :class:`fractions.Fraction` coordinates so that
touching/separated decisions never depend on a tolerance.  Points are
plain tuples of Fractions; a 1-D point is a 1-tuple.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInput, UnsupportedInput

Point = Tuple[Fraction, ...]


def as_rational(x) -> Fraction:
    """Coerce ints, Fractions and "num/den" strings to a Fraction.

    Floats are refused: a float silently carries binary rounding error into
    what is supposed to be exact geometry.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool) or isinstance(x, float):
        raise InvalidInput(f"refusing inexact coordinate {x!r}")
    try:
        return Fraction(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InvalidInput(f"not a rational number: {x!r}") from exc


def as_point(p) -> Point:
    if isinstance(p, (int, Fraction, str)):
        p = (p,)
    return tuple(as_rational(c) for c in p)


def format_rational(x: Fraction) -> str:
    """Machine-readable form, always "num/den"."""
    return f"{x.numerator}/{x.denominator}"


def format_point(p: Sequence[Fraction]) -> str:
    return ",".join(format_rational(c) for c in p)


def parse_point(text: str) -> Point:
    return tuple(as_rational(t.strip()) for t in text.split(","))


def squared_distance(p: Sequence[Fraction], q: Sequence[Fraction]) -> Fraction:
    if len(p) != len(q):
        raise InvalidInput(f"dimension mismatch: {len(p)} vs {len(q)}")
    return sum(((a - b) ** 2 for a, b in zip(p, q)), Fraction(0))


def _is_diagonal(matrix) -> bool:
    return all(matrix[i][j] == 0 for i in range(len(matrix))
               for j in range(len(matrix)) if i != j)


@dataclass(frozen=True)
class AffineMap:
    """The contraction ``x -> matrix @ x + offset`` with exact entries.

    ``lipschitz`` is computed when not given.  For a diagonal matrix it is
    the exact operator norm ``max |d_i|``; otherwise the rational bound
    ``max(||A||_1, ||A||_inf)`` which dominates the spectral norm.
    """

    matrix: Tuple[Tuple[Fraction, ...], ...]
    offset: Point
    lipschitz: Optional[Fraction] = None

    def __post_init__(self):
        matrix = tuple(tuple(as_rational(v) for v in row) for row in self.matrix)
        offset = as_point(self.offset)
        n = len(matrix)
        if n == 0 or any(len(row) != n for row in matrix):
            raise InvalidInput("matrix must be square and non-empty")
        if len(offset) != n:
            raise InvalidInput(f"offset has dimension {len(offset)}, matrix {n}")
        if _is_diagonal(matrix):
            lip = max(abs(matrix[i][i]) for i in range(n))
            if self.lipschitz is not None and as_rational(self.lipschitz) != lip:
                raise InvalidInput(
                    f"supplied lipschitz {self.lipschitz} differs from exact "
                    f"value {format_rational(lip)} of a diagonal map")
        elif self.lipschitz is not None:
            lip = as_rational(self.lipschitz)
        else:
            col = max(sum(abs(matrix[i][j]) for i in range(n)) for j in range(n))
            row = max(sum(abs(v) for v in r) for r in matrix)
            lip = max(col, row)
        if not 0 < lip < 1:
            raise InvalidInput(
                f"not a contraction: lipschitz constant {format_rational(lip)}")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "lipschitz", lip)

    @classmethod
    def diagonal(cls, diag, offset) -> "AffineMap":
        diag = as_point(diag)
        n = len(diag)
        matrix = tuple(tuple(diag[i] if i == j else Fraction(0) for j in range(n))
                       for i in range(n))
        return cls(matrix, offset)

    @property
    def dimension(self) -> int:
        return len(self.offset)

    @property
    def is_diagonal(self) -> bool:
        return _is_diagonal(self.matrix)

    def determinant(self) -> Fraction:
        m = self.matrix
        if self.dimension == 1:
            return m[0][0]
        if self.dimension == 2:
            return m[0][0] * m[1][1] - m[0][1] * m[1][0]
        raise UnsupportedInput("only dimensions 1 and 2 are supported")

    def __call__(self, point) -> Point:
        return apply_map(self, point)


def apply_map(fmap: AffineMap, point) -> Point:
    point = as_point(point)
    if len(point) != fmap.dimension:
        raise InvalidInput(
            f"point has dimension {len(point)}, map has {fmap.dimension}")
    return tuple(sum((a * x for a, x in zip(row, point)), Fraction(0)) + b
                 for row, b in zip(fmap.matrix, fmap.offset))


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box ``[lower, upper]``."""

    lower: Point
    upper: Point

    def __post_init__(self):
        lower, upper = as_point(self.lower), as_point(self.upper)
        if len(lower) != len(upper):
            raise InvalidInput("lower and upper corners differ in dimension")
        if any(lo > hi for lo, hi in zip(lower, upper)):
            raise InvalidInput(f"empty box: {lower} > {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def _trusted(cls, lower: Point, upper: Point) -> "Box":
        # Skips validation; callers guarantee Fraction tuples with lower <= upper.
        box = object.__new__(cls)
        object.__setattr__(box, "lower", lower)
        object.__setattr__(box, "upper", upper)
        return box

    @classmethod
    def unit(cls, dimension: int) -> "Box":
        return cls((0,) * dimension, (1,) * dimension)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def diameter_squared(self) -> Fraction:
        return squared_distance(self.lower, self.upper)

    def center(self) -> Point:
        return tuple((lo + hi) / 2 for lo, hi in zip(self.lower, self.upper))

    def contains_point(self, point) -> bool:
        point = as_point(point)
        return all(lo <= x <= hi for lo, x, hi in zip(self.lower, point, self.upper))

    def contains_box(self, other: "Box") -> bool:
        return all(a <= c and d <= b for a, b, c, d in
                   zip(self.lower, self.upper, other.lower, other.upper))

    def intersects(self, other: "Box") -> bool:
        return all(a <= d and c <= b for a, b, c, d in
                   zip(self.lower, self.upper, other.lower, other.upper))

    def intersection(self, other: "Box") -> Optional["Box"]:
        if not self.intersects(other):
            return None
        return Box(tuple(max(a, c) for a, c in zip(self.lower, other.lower)),
                   tuple(min(b, d) for b, d in zip(self.upper, other.upper)))

    def distance_squared(self, other: "Box") -> Fraction:
        """Squared Euclidean distance between the two closed boxes (0 if they meet)."""
        total = Fraction(0)
        for a, b, c, d in zip(self.lower, self.upper, other.lower, other.upper):
            gap = max(c - b, a - d, 0)
            total += gap * gap
        return total


def map_box(fmap: AffineMap, box: Box) -> Box:
    """Exact image of ``box`` under a diagonal map with positive entries."""
    if box.dimension != fmap.dimension:
        raise InvalidInput(
            f"box has dimension {box.dimension}, map has {fmap.dimension}")
    if not fmap.is_diagonal:
        raise UnsupportedInput("map_box needs a diagonal matrix")
    diag = [fmap.matrix[i][i] for i in range(fmap.dimension)]
    if any(d <= 0 for d in diag):
        raise UnsupportedInput("map_box needs positive diagonal entries")
    return Box._trusted(
        tuple(d * lo + b for d, lo, b in zip(diag, box.lower, fmap.offset)),
        tuple(d * hi + b for d, hi, b in zip(diag, box.upper, fmap.offset)))


def _solve(a, b):
    # Gauss-Jordan over the rationals.
    n = len(b)
    rows = [list(a[i]) + [b[i]] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            raise ArithmeticError("singular system")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        p = rows[col][col]
        rows[col] = [v / p for v in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [v - factor * w for v, w in zip(rows[r], rows[col])]
    return tuple(rows[i][n] for i in range(n))


def fixed_point(fmap: AffineMap) -> Point:
    """The unique solution of ``A x + b = x``."""
    n = fmap.dimension
    i_minus_a = [[(1 if i == j else 0) - fmap.matrix[i][j] for j in range(n)]
                 for i in range(n)]
    try:
        return _solve(i_minus_a, fmap.offset)
    except ArithmeticError as exc:  # impossible for a genuine contraction
        raise RuntimeError(f"I - A singular for contraction {fmap}") from exc


@dataclass(frozen=True)
class HausdorffDistance:
    """Exact squared Hausdorff distance; ``value`` is the decimal rendering."""

    squared: Fraction

    @property
    def value(self) -> float:
        return math.sqrt(self.squared)

    def __float__(self) -> float:
        return self.value


# Integer coordinates up to this bound keep every squared 2-D distance
# below 2**53, so float64 arithmetic inside the k-d tree is exact.
_EXACT_FLOAT_BOUND = 2 ** 25
_BRUTE_FORCE_PAIRS = 4096


def _directed_brute(a, b) -> Fraction:
    return max(min(squared_distance(x, y) for y in b) for x in a)


def _directed_kdtree(a_int: np.ndarray, b_int: np.ndarray) -> int:
    tree = cKDTree(b_int.astype(np.float64))
    _, idx = tree.query(a_int.astype(np.float64), k=1)
    diff = a_int - b_int[idx]
    return int((diff * diff).sum(axis=1).max())


def hausdorff_distance(a: Iterable, b: Iterable) -> HausdorffDistance:
    """Hausdorff distance between two finite point sets.

    Small inputs go through the exhaustive pairwise definition.  Larger ones
    are rescaled onto a common integer lattice and searched with a k-d tree;
    the lattice bound keeps that search exact, and the winning pair is
    re-measured in integers.
    """
    a = [as_point(p) for p in a]
    b = [as_point(p) for p in b]
    if not a or not b:
        raise InvalidInput("Hausdorff distance needs non-empty sets")
    dims = {len(p) for p in a} | {len(p) for p in b}
    if len(dims) != 1:
        raise InvalidInput(f"mixed point dimensions {sorted(dims)}")
    if len(a) * len(b) <= _BRUTE_FORCE_PAIRS:
        return HausdorffDistance(max(_directed_brute(a, b), _directed_brute(b, a)))

    scale = math.lcm(*(c.denominator for p in a + b for c in p))
    a_int = [[c.numerator * (scale // c.denominator) for c in p] for p in a]
    b_int = [[c.numerator * (scale // c.denominator) for c in p] for p in b]
    biggest = max(abs(v) for p in a_int + b_int for v in p)
    if biggest > _EXACT_FLOAT_BOUND:
        return HausdorffDistance(max(_directed_brute(a, b), _directed_brute(b, a)))
    a_arr = np.array(a_int, dtype=np.int64)
    b_arr = np.array(b_int, dtype=np.int64)
    sq = max(_directed_kdtree(a_arr, b_arr), _directed_kdtree(b_arr, a_arr))
    return HausdorffDistance(Fraction(sq, scale * scale))
