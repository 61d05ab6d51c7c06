"""Collapse quotients of the Cantor set on its binary code space.

A depth-k word ``w`` over {1, 2} names the cylinder whose left endpoint is
``sum 2*[w_i == 2] / 3**i``.  ``Y`` is a cylinder (all words with a fixed
prefix, by default ``1``, i.e. the part of the Cantor set in [0, 1/3]).
The collapse map sends every word outside ``Y`` to a chosen word ``q`` in
``Y`` and fixes ``Y``; its fibres are the classes of the decomposition.

At finite depth the quotient topology on finitely many classes is
discrete, so all checks are metric and bijection checks on exact
rationals.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, List, Optional, Sequence, Tuple

from .attractor import preset
from .errors import InvalidInput
from .geometry import apply_map, format_rational

Word = Tuple[int, ...]

CLOSEDNESS_NOTE = ("the collapse map is continuous between compact metric "
                   "spaces, hence closed; no separate check is run")


def all_words(depth: int, m: int = 2) -> List[Word]:
    return list(product(range(1, m + 1), repeat=depth))


def code_value(word: Sequence[int]) -> Fraction:
    """Left endpoint of the Cantor cylinder named by ``word``."""
    value, scale = Fraction(0), Fraction(1)
    for s in word:
        scale /= 3
        if s == 2:
            value += 2 * scale
        elif s != 1:
            raise InvalidInput(f"symbol {s} is not in {{1, 2}}")
    return value


def word_of_point(x: Fraction, depth: int) -> Word:
    """Address of the depth-``depth`` Cantor cell containing ``x``."""
    if not 0 <= x <= 1:
        raise InvalidInput(f"{x} lies outside [0, 1]")
    word = []
    t = Fraction(x)
    for _ in range(depth):
        t *= 3
        digit = min(int(t), 2)
        if digit == 1:
            raise InvalidInput(f"{x} is not in the level-{depth} Cantor cells")
        word.append(1 + digit // 2)
        t -= digit
    return tuple(word)


def format_word(word: Word) -> str:
    return "".join(map(str, word)) if word else "-"


def parse_word(text: str) -> Word:
    text = text.strip()
    if text in ("", "-"):
        return ()
    if "," in text:
        return tuple(int(t) for t in text.split(","))
    if not text.isdigit():
        raise InvalidInput(f"bad word {text!r}")
    return tuple(int(c) for c in text)


@dataclass(frozen=True)
class CodePoint:
    word: Word

    @property
    def numeric_value(self) -> Fraction:
        return code_value(self.word)


@dataclass(frozen=True)
class Decomposition:
    """A partition of all depth-``depth`` words.

    ``classes`` is sorted by smallest member; each class is a sorted tuple.
    For the collapse kind ``y_prefix`` names the cylinder ``Y`` and ``q``
    the word the complement of ``Y`` is glued to.
    """

    depth: int
    classes: Tuple[Tuple[Word, ...], ...]
    kind: str
    y_prefix: Word = ()
    q: Optional[Word] = None
    m: int = 2
    _index: Dict[Word, int] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        index = {}
        for i, cls in enumerate(self.classes):
            for w in cls:
                index[w] = i
        object.__setattr__(self, "_index", index)

    def class_of(self, word: Word) -> Tuple[Word, ...]:
        try:
            return self.classes[self._index[tuple(word)]]
        except KeyError:
            raise InvalidInput(f"{format_word(word)} is not a depth-{self.depth} "
                               "word") from None

    def in_y(self, word: Word) -> bool:
        return tuple(word[:len(self.y_prefix)]) == self.y_prefix

    def representative(self, cls: Sequence[Word]) -> Word:
        """The unique word of ``Y`` in a class (the inverse of h)."""
        reps = [w for w in cls if self.in_y(w)]
        if len(reps) != 1:
            raise InvalidInput(f"class {[format_word(w) for w in cls]} has "
                               f"{len(reps)} members in Y")
        return reps[0]

    def label_of(self, word: Word) -> Word:
        return self.representative(self.class_of(word))

    def labels(self) -> List[Word]:
        return sorted(self.representative(c) for c in self.classes)

    def dumps(self) -> str:
        lines = [f"depth: {self.depth}", f"kind: {self.kind}"]
        if self.kind == "collapse":
            lines += [f"y_prefix: {format_word(self.y_prefix)}",
                      f"q: {format_word(self.q)}"]
        lines += ["class: " + " ".join(format_word(w) for w in cls)
                  for cls in self.classes]
        return "\n".join(lines) + "\n"


def loads_decomposition(text: str) -> Decomposition:
    fields, classes = {}, []
    for raw in text.splitlines():
        key, _, value = raw.partition(":")
        key, value = key.strip(), value.strip()
        if not key:
            continue
        if key == "class":
            classes.append(tuple(parse_word(t) for t in value.split()))
        else:
            fields[key] = value
    try:
        depth, kind = int(fields["depth"]), fields["kind"]
    except (KeyError, ValueError):
        raise InvalidInput("decomposition text needs depth and kind") from None
    return Decomposition(depth, tuple(classes), kind,
                         parse_word(fields.get("y_prefix", "")),
                         parse_word(fields["q"]) if "q" in fields else None)


def trivial_decomposition(depth: int, m: int = 2) -> Decomposition:
    return Decomposition(depth, tuple((w,) for w in all_words(depth, m)), "trivial")


def build_collapse_quotient(depth: int, y_prefix: Word = (1,),
                            q: Optional[Word] = None) -> Decomposition:
    """Fibres of the map fixing ``Y`` and sending everything else to ``q``."""
    y_prefix = tuple(y_prefix)
    if depth < 1:
        raise InvalidInput("depth must be at least 1")
    if not 1 <= len(y_prefix) <= depth:
        raise InvalidInput(f"Y prefix {format_word(y_prefix)} must have length "
                           f"between 1 and the depth {depth}")
    if any(s not in (1, 2) for s in y_prefix):
        raise InvalidInput("Y prefix symbols must be 1 or 2")
    if q is None:
        q = y_prefix + (1,) * (depth - len(y_prefix))
    q = tuple(q)
    if len(q) != depth or any(s not in (1, 2) for s in q):
        raise InvalidInput(f"q = {format_word(q)} is not a depth-{depth} word")
    if q[:len(y_prefix)] != y_prefix:
        raise InvalidInput(f"q = {format_word(q)} is not in Y = "
                           f"{format_word(y_prefix)}*")
    words = all_words(depth)
    big = tuple(w for w in words if w == q or w[:len(y_prefix)] != y_prefix)
    singles = [(w,) for w in words if w[:len(y_prefix)] == y_prefix and w != q]
    classes = tuple(sorted(singles + [big]))
    return Decomposition(depth, classes, "collapse", y_prefix, q)


def partition_laws(d: Decomposition) -> List[str]:
    """Violated partition laws (empty list when all hold)."""
    problems = []
    words = all_words(d.depth, d.m)
    members = [w for cls in d.classes for w in cls]
    if len(members) != len(set(members)):
        problems.append("classes overlap")
    if set(members) != set(words):
        problems.append("classes do not cover all words")
    big = [c for c in d.classes if len(c) > 1]
    if d.kind == "trivial" and big:
        problems.append("trivial decomposition has a non-singleton class")
    if d.kind == "collapse":
        if len(big) != 1:
            problems.append(f"collapse has {len(big)} non-singleton classes")
        elif any(not d.in_y(c[0]) for c in d.classes if len(c) == 1):
            problems.append("a singleton class lies outside Y")
    return problems


class PushforwardMetric:
    """rho(c, c') = |x(h^-1 c) - x(h^-1 c')| on class labels."""

    def __init__(self, d: Decomposition):
        self.decomposition = d
        self._points = {c: code_value(c) for c in d.labels()}

    def point(self, label: Word) -> Fraction:
        try:
            return self._points[tuple(label)]
        except KeyError:
            raise InvalidInput(f"{format_word(label)} is not a class label") from None

    def __call__(self, c: Word, c2: Word) -> Fraction:
        return abs(self.point(c) - self.point(c2))


def metric_axiom_violations(rho: PushforwardMetric) -> List[str]:
    labels = rho.decomposition.labels()
    bad = []
    for a in labels:
        if rho(a, a) != 0:
            bad.append(f"rho({format_word(a)}, itself) != 0")
    for a, b in combinations(labels, 2):
        if rho(a, b) <= 0:
            bad.append(f"rho({format_word(a)}, {format_word(b)}) not positive")
        if rho(a, b) != rho(b, a):
            bad.append(f"asymmetric at {format_word(a)}, {format_word(b)}")
    for a, b, c in product(labels, repeat=3):
        if rho(a, c) > rho(a, b) + rho(b, c):
            bad.append("triangle inequality fails at "
                       f"{format_word(a)}, {format_word(b)}, {format_word(c)}")
    return bad


def _ratio_range(pairs):
    ratios = [num / den for num, den in pairs]
    if not ratios:
        return None, None
    return min(ratios), max(ratios)


def _fmt(x):
    return None if x is None else format_rational(x)


@dataclass
class HomeomorphismReport:
    depth: int
    bijective: bool
    inverse_ok: bool
    ratio_min: Optional[Fraction]
    ratio_max: Optional[Fraction]
    mapping: Dict[Word, Word]
    metric_table: Optional[Dict[Tuple[Word, Word], Fraction]]
    note: str = CLOSEDNESS_NOTE

    @property
    def passed(self) -> bool:
        unit = self.ratio_min in (None, 1) and self.ratio_max in (None, 1)
        return self.bijective and self.inverse_ok and unit

    def to_dict(self) -> dict:
        out = {
            "check": "quotient_homeomorphism",
            "depth": self.depth,
            "passed": self.passed,
            "bijective": self.bijective,
            "inverse_ok": self.inverse_ok,
            "lipschitz_ratio_min": _fmt(self.ratio_min),
            "lipschitz_ratio_max": _fmt(self.ratio_max),
            "h": {format_word(w): format_word(c) for w, c in self.mapping.items()},
            "note": self.note,
        }
        if self.metric_table is not None:
            out["rho"] = {f"{format_word(a)}|{format_word(b)}": format_rational(v)
                          for (a, b), v in self.metric_table.items()}
        return out


def verify_quotient_homeomorphism(d: Decomposition) -> HomeomorphismReport:
    """Check that h: Y -> D_f, w -> class of w, is a bijection and an
    isometry for the pushforward metric (Lipschitz ratio 1 both ways)."""
    if d.kind != "collapse":
        raise InvalidInput("homeomorphism check needs a collapse decomposition")
    rho = PushforwardMetric(d)
    y_words = [w for w in all_words(d.depth) if d.in_y(w)]
    h = {w: d.class_of(w) for w in y_words}
    images = list(h.values())
    bijective = (len(set(images)) == len(images)
                 and set(images) == set(d.classes))
    labels = {w: d.representative(c) for w, c in h.items()}
    inverse_ok = all(labels[w] == w for w in y_words)
    lo, hi = _ratio_range((rho(labels[a], labels[b]), abs(code_value(a) - code_value(b)))
                          for a, b in combinations(y_words, 2))
    table = None
    if d.depth <= 6:
        table = {(a, b): rho(a, b) for a, b in product(d.labels(), repeat=2)}
    return HomeomorphismReport(d.depth, bijective, inverse_ok, lo, hi, labels, table)


def nontriviality_check(d: Decomposition):
    """``(True, class)`` for the first class with two or more words."""
    for cls in d.classes:
        if len(cls) >= 2:
            return True, cls
    return False, None


@dataclass
class SelfSimilarityReport:
    depth: int
    code_depth: int
    bijective: bool
    round_trip: bool
    resolvable: bool
    contraction_max: Optional[Fraction]
    covering: bool
    unique_cover: bool
    images: Dict[int, List[Word]]

    @property
    def passed(self) -> bool:
        contraction = self.contraction_max is None or self.contraction_max <= Fraction(1, 3)
        return (self.bijective and self.round_trip and self.resolvable
                and contraction and self.covering)

    def to_dict(self) -> dict:
        return {
            "check": "conjugate_self_similarity",
            "depth": self.depth,
            "code_depth": self.code_depth,
            "passed": self.passed,
            "conjugacy_bijective": self.bijective,
            "conjugacy_round_trip": self.round_trip,
            "images_resolvable": self.resolvable,
            "contraction_ratio_max": _fmt(self.contraction_max),
            "contraction_bound": "1/3",
            "covering": self.covering,
            "each_label_in_one_image": self.unique_cover,
            "images": {str(j): [format_word(c) for c in imgs]
                       for j, imgs in self.images.items()},
        }


def _shift(prefix: Word):
    """The similarity Y -> Cantor set dropping ``prefix``, and its inverse."""
    base, scale = code_value(prefix), Fraction(3) ** len(prefix)
    return (lambda x: (x - base) * scale), (lambda t: base + t / scale)


def conjugate_selfsimilarity_check(d: Decomposition) -> SelfSimilarityReport:
    """Transport the Cantor maps f_j to the quotient and test them.

    ``g`` sends a Cantor word ``u`` to the class of ``prefix + u``; the
    induced map is ``q_j = g o f_j o g^-1``.  On each class it acts on the
    class point (the left endpoint of its Y-word); the image point is
    located in the depth-k cells, which must agree with the symbolic image
    class ``prefix + j + u[:-1]``.  Distances are measured between the
    exact image points.
    """
    if d.kind not in ("collapse", "trivial"):
        raise InvalidInput(f"unsupported decomposition kind {d.kind!r}")
    p = len(d.y_prefix)
    need = p + 1
    if d.depth < need:
        raise InvalidInput(f"depth {d.depth} cannot resolve images; "
                           f"depth >= {need} required")
    code_depth = d.depth - p
    labels = d.labels()
    g = {u: d.label_of(d.y_prefix + u) for u in all_words(code_depth)}
    g_inv = {c: c[p:] for c in labels}
    bijective = len(set(g.values())) == len(g) and set(g.values()) == set(labels)
    round_trip = (all(g_inv[g[u]] == u for u in g)
                  and all(g[g_inv[c]] == c for c in labels))

    to_code, from_code = _shift(d.y_prefix)
    maps = preset("cmts").maps
    points = {c: code_value(c) for c in labels}
    resolvable = all(to_code(points[c]) == code_value(g_inv[c]) for c in labels)
    images, image_points = {}, {}
    for j, f in enumerate(maps, 1):
        imgs = []
        for c in labels:
            y = from_code(apply_map(f, (to_code(points[c]),))[0])
            symbolic = g[((j,) + g_inv[c])[:code_depth]]
            located = d.label_of(word_of_point(y, d.depth))
            resolvable &= symbolic == located
            image_points[j, c] = y
            imgs.append(symbolic)
        images[j] = imgs

    worst = None
    for j in images:
        for a, b in combinations(labels, 2):
            ratio = abs(image_points[j, a] - image_points[j, b]) / abs(points[a] - points[b])
            worst = ratio if worst is None else max(worst, ratio)
    covered = set().union(*(set(v) for v in images.values()))
    covering = covered == set(labels)
    unique = all(sum(c in set(v) for v in images.values()) == 1 for c in labels)
    return SelfSimilarityReport(d.depth, code_depth, bijective, round_trip,
                                resolvable, worst, covering, unique, images)


@dataclass(frozen=True)
class Cylinder:
    """All depth-``depth`` words starting with ``prefix`` (empty: every word)."""

    prefix: Word
    depth: int


@dataclass
class CantorHomeoReport:
    space: str
    conjugacy: str
    source_size: int
    target_depth: int
    bijective: bool
    ratio_min: Optional[Fraction]
    ratio_max: Optional[Fraction]
    expected_ratio: Fraction

    @property
    def passed(self) -> bool:
        return (self.bijective and self.ratio_min in (None, self.expected_ratio)
                and self.ratio_max in (None, self.expected_ratio))

    def to_dict(self) -> dict:
        return {
            "check": "homeomorphic_to_cantor_set",
            "space": self.space,
            "conjugacy": self.conjugacy,
            "passed": self.passed,
            "source_points": self.source_size,
            "target_depth": self.target_depth,
            "bijective": self.bijective,
            "expansion_min": _fmt(self.ratio_min),
            "expansion_max": _fmt(self.ratio_max),
            "expansion_expected": format_rational(self.expected_ratio),
        }


def homeo_to_cmts_check(space) -> CantorHomeoReport:
    """Exhibit the explicit conjugacy of a cylinder or collapse quotient
    with the full code space and check it is a bijective similarity."""
    if isinstance(space, Cylinder):
        prefix, depth = tuple(space.prefix), space.depth
        if len(prefix) > depth:
            raise InvalidInput("cylinder prefix longer than depth")
        source = [w for w in all_words(depth) if w[:len(prefix)] == prefix]
        forward = {w: w[len(prefix):] for w in source}
        dist = lambda a, b: abs(code_value(a) - code_value(b))
        kind = "cylinder" if prefix else "full"
        name = f"shift dropping {format_word(prefix)}" if prefix else "identity"
    elif isinstance(space, Decomposition):
        if space.kind != "collapse":
            raise InvalidInput("only collapse decompositions are supported")
        prefix, depth = space.y_prefix, space.depth
        rho = PushforwardMetric(space)
        source = space.labels()
        forward = {c: c[len(prefix):] for c in source}
        dist = rho
        kind, name = "decomposition", f"shift dropping {format_word(prefix)} after h^-1"
    else:
        raise InvalidInput(f"unsupported space {space!r}")
    target_depth = depth - len(prefix)
    targets = list(forward.values())
    bijective = (len(set(targets)) == len(targets)
                 and set(targets) == set(all_words(target_depth)))
    lo, hi = _ratio_range((abs(code_value(forward[a]) - code_value(forward[b])), dist(a, b))
                          for a, b in combinations(source, 2))
    return CantorHomeoReport(kind, name, len(source), target_depth, bijective,
                             lo, hi, Fraction(3) ** len(prefix))


@dataclass
class IterationReport:
    index: int
    depth: int
    decomposition: Decomposition
    homeomorphism: HomeomorphismReport
    nontrivial: bool
    witness: Optional[Tuple[Word, ...]]
    self_similarity: SelfSimilarityReport
    cantor: CantorHomeoReport
    partition_problems: List[str]
    lifted_partition_ok: bool
    lifted_witness: Tuple[Word, ...]
    property_report: object = None

    @property
    def passed(self) -> bool:
        return (self.homeomorphism.passed and self.nontrivial
                and self.self_similarity.passed and self.cantor.passed
                and not self.partition_problems and self.lifted_partition_ok)

    def to_dict(self) -> dict:
        out = {
            "iteration": self.index,
            "depth": self.depth,
            "passed": self.passed,
            "partition_laws": "ok" if not self.partition_problems else self.partition_problems,
            "nontrivial": self.nontrivial,
            "witness": [format_word(w) for w in self.witness or ()],
            "lifted_partition_ok": self.lifted_partition_ok,
            "lifted_witness_size": len(self.lifted_witness),
            "decomposition": {
                "depth": self.decomposition.depth,
                "kind": self.decomposition.kind,
                "classes": [[format_word(w) for w in c] for c in self.decomposition.classes],
            },
            "homeomorphism": self.homeomorphism.to_dict(),
            "self_similarity": self.self_similarity.to_dict(),
            "cantor_conjugacy": self.cantor.to_dict(),
        }
        if self.property_report is not None:
            out["canonical_model"] = self.property_report.to_dict()
        return out


def iterate_quotients(n: int, depth: int, y_prefix: Word = (1,),
                      q: Optional[Word] = None, with_properties: bool = True
                      ) -> List[IterationReport]:
    """Build D_1, ..., D_n with D_0 the depth-``depth`` code space.

    Between iterations the quotient is carried back to the Cantor code
    space through its shift conjugacy, losing ``len(y_prefix)`` symbols of
    resolution each time.  Every class is also lifted to the original
    depth-``depth`` words to confirm D_i is a quotient of D_{i-1}.
    """
    from .topology import analyze  # topology imports nothing from here

    y_prefix = tuple(y_prefix)
    p = len(y_prefix)
    if n < 1:
        raise InvalidInput("need at least one iteration")
    if p < 1:
        raise InvalidInput("Y prefix must be non-empty")
    required = n * p + 1
    if depth < required:
        raise InvalidInput(f"depth {depth} too small for {n} iterations; "
                           f"depth >= {required} required")
    originals = set(all_words(depth))
    lift = {w: (w,) for w in originals}
    reports = []
    current = depth
    for i in range(1, n + 1):
        qi = None if q is None else tuple(q)[:current]
        d = build_collapse_quotient(current, y_prefix, qi)
        homeo = verify_quotient_homeomorphism(d)
        nontrivial, witness = nontriviality_check(d)
        selfsim = conjugate_selfsimilarity_check(d)
        cantor = homeo_to_cmts_check(d)

        lifted = {c: tuple(sorted(w for word in c for w in lift[word]))
                  for c in d.classes}
        flat = [w for cls in lifted.values() for w in cls]
        lifted_ok = len(flat) == len(originals) and set(flat) == originals
        big = max(lifted.values(), key=len)

        nxt = current - p
        prop = analyze(preset("cmts"), nxt) if with_properties else None
        reports.append(IterationReport(i, current, d, homeo, nontrivial, witness,
                                       selfsim, cantor, partition_laws(d), lifted_ok,
                                       big, prop))
        # Re-canonicalise: Cantor word u stands for the class of prefix + u.
        lift = {u: lifted[d.class_of(y_prefix + u)] for u in all_words(nxt)}
        current = nxt
    return reports


def reports_to_json(items) -> str:
    return json.dumps([r.to_dict() for r in items], indent=2) + "\n"
