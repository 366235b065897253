"""Exact polytope algebra for nonnegative, down-closed rate regions.

Regions are stored as half-spaces a.r <= b with componentwise-nonnegative
rational normals (nonnegativity r >= 0 is implicit) plus an exact vertex
list.  All comparisons are decidable: vertex enumeration, containment and
equality use Fraction arithmetic throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)

Halfspace = tuple[tuple[Fraction, ...], Fraction]
Point = tuple[Fraction, ...]


class PolytopeError(ValueError):
    pass


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def _solve_square(rows: list[list[Fraction]], rhs: list[Fraction]):
    """Gaussian elimination; None when the system is singular."""
    n = len(rows)
    m = [row[:] + [rhs[i]] for i, row in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        inv = ONE / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return [m[i][n] for i in range(n)]


def normalize_halfspace(a: Sequence[Fraction], b: Fraction) -> Halfspace:
    """Scale to coprime integer coefficients."""
    a = tuple(_frac(v) for v in a)
    b = _frac(b)
    denom = 1
    for v in (*a, b):
        denom = denom * v.denominator // gcd(denom, v.denominator)
    ints = [int(v * denom) for v in (*a, b)]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(Fraction(v) for v in ints[:-1]), Fraction(ints[-1])


def enumerate_vertices(dim: int, halfspaces: Sequence[Halfspace]) -> tuple[Point, ...]:
    """All vertices of {r >= 0, a.r <= b}; requires a bounded region."""
    planes: list[tuple[tuple[Fraction, ...], Fraction]] = []
    for i in range(dim):
        axis = tuple(ONE if j == i else ZERO for j in range(dim))
        planes.append((axis, ZERO))
    planes.extend(halfspaces)

    def feasible(pt):
        if any(x < 0 for x in pt):
            return False
        return all(
            sum(ai * xi for ai, xi in zip(a, pt)) <= b for a, b in halfspaces
        )

    found: set[Point] = set()
    if feasible(tuple(ZERO for _ in range(dim))):
        found.add(tuple(ZERO for _ in range(dim)))
    for subset in combinations(range(len(planes)), dim):
        rows = [list(planes[i][0]) for i in subset]
        rhs = [planes[i][1] for i in subset]
        sol = _solve_square(rows, rhs)
        if sol is None:
            continue
        pt = tuple(sol)
        if feasible(pt):
            found.add(pt)
    # with nonnegative normals, coordinate i is bounded iff some a[i] > 0
    for i in range(dim):
        if not any(a[i] > 0 for a, _b in halfspaces):
            raise PolytopeError(f"region unbounded along coordinate {i}")
    return tuple(sorted(found))


@dataclass(frozen=True)
class RatePolytope:
    """Down-closed convex region of achievable nonnegative rate tuples."""

    dim: int
    halfspaces: tuple[Halfspace, ...]
    vertices: tuple[Point, ...]
    provenance: str = "inner"

    def contains(self, point: Sequence[Fraction]) -> bool:
        pt = tuple(_frac(v) for v in point)
        if len(pt) != self.dim:
            raise PolytopeError("dimension mismatch")
        if any(v < 0 for v in pt):
            return False
        return all(
            sum(ai * xi for ai, xi in zip(a, pt)) <= b
            for a, b in self.halfspaces
        )

    def support(self, weights: Sequence[Fraction]) -> Fraction:
        """max w.r over the region (vertex scan; regions are bounded)."""
        w = tuple(_frac(v) for v in weights)
        if len(w) != self.dim:
            raise PolytopeError("dimension mismatch")
        return max(
            sum((wi * vi for wi, vi in zip(w, v)), ZERO) for v in self.vertices
        )

    def scale(self, factor) -> "RatePolytope":
        f = _frac(factor)
        if f <= 0:
            raise PolytopeError("scale factor must be positive")
        hs = tuple(normalize_halfspace(a, b * f) for a, b in self.halfspaces)
        vs = tuple(tuple(x * f for x in v) for v in self.vertices)
        return RatePolytope(self.dim, hs, vs, self.provenance)

    def with_provenance(self, provenance: str) -> "RatePolytope":
        return RatePolytope(self.dim, self.halfspaces, self.vertices, provenance)

    def is_down_closed_at_vertices(self) -> bool:
        for v in self.vertices:
            for i in range(self.dim):
                if v[i] == 0:
                    continue
                drop = tuple(ZERO if j == i else x for j, x in enumerate(v))
                if not self.contains(drop):
                    return False
        return True

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "halfspaces": [
                {"a": [str(x) for x in a], "b": str(b)}
                for a, b in self.halfspaces
            ],
            "vertices": [[str(x) for x in v] for v in self.vertices],
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def vertices_csv(self) -> str:
        lines = [",".join(f"r{i+1}" for i in range(self.dim))]
        for v in self.vertices:
            lines.append(",".join(str(x) for x in v))
        return "\n".join(lines) + "\n"


def _reduce_halfspaces(
    dim: int, halfspaces: Iterable[Halfspace]
) -> tuple[Halfspace, ...]:
    """Drop duplicates and inequalities implied by the rest."""
    from .simplex import solve_lp

    cleaned = []
    seen = set()
    for a, b in halfspaces:
        a, b = normalize_halfspace(a, b)
        if all(v == 0 for v in a):
            if b < 0:
                raise PolytopeError("infeasible halfspace 0 <= b < 0")
            continue
        if any(v < 0 for v in a):
            raise PolytopeError("halfspace normals must be nonnegative")
        if (a, b) not in seen:
            seen.add((a, b))
            cleaned.append((a, b))
    cleaned.sort()
    kept: list[Halfspace] = []
    remaining = list(cleaned)
    while remaining:
        a, b = remaining.pop(0)
        others = kept + remaining
        if others:
            res = solve_lp(
                list(a),
                a_ub=[list(oa) for oa, _ob in others],
                b_ub=[ob for _oa, ob in others],
            )
            if res.status == "optimal" and res.value <= b:
                continue  # implied by the rest
        kept.append((a, b))
    return tuple(sorted(kept))


def from_halfspaces(
    dim: int, halfspaces: Iterable[Halfspace], provenance: str
) -> RatePolytope:
    hs = _reduce_halfspaces(dim, halfspaces)
    verts = enumerate_vertices(dim, hs)
    return RatePolytope(dim, hs, verts, provenance)


def from_points(
    dim: int, points: Iterable[Sequence[Fraction]], provenance: str
) -> RatePolytope:
    """Down-closed convex hull of a finite point set."""
    pts = {tuple(_frac(x) for x in p) for p in points}
    pts.add(tuple(ZERO for _ in range(dim)))
    for p in pts:
        if len(p) != dim:
            raise PolytopeError("dimension mismatch")
        if any(x < 0 for x in p):
            raise PolytopeError("points must be nonnegative")
    # closing under coordinate zeroing makes every hull facet pass through
    # dim affinely independent candidates
    candidates: set[Point] = set()
    for p in pts:
        for mask in range(2 ** dim):
            candidates.add(
                tuple(ZERO if mask >> i & 1 else x for i, x in enumerate(p))
            )
    cand = sorted(candidates)

    halfspaces: set[Halfspace] = set()
    for i in range(dim):
        cap = max(p[i] for p in cand)
        axis = tuple(ONE if j == i else ZERO for j in range(dim))
        halfspaces.add(normalize_halfspace(axis, cap))
    for subset in combinations(cand, dim):
        rows = [list(p) for p in subset]
        sol = _solve_square(rows, [ONE] * dim)
        if sol is None:
            continue
        a = tuple(sol)
        if any(v < 0 for v in a):
            continue
        if all(sum(ai * xi for ai, xi in zip(a, p)) <= ONE for p in cand):
            halfspaces.add(normalize_halfspace(a, ONE))
    return from_halfspaces(dim, halfspaces, provenance)


def union_hull(p: RatePolytope, q: RatePolytope, provenance: str) -> RatePolytope:
    if p.dim != q.dim:
        raise PolytopeError("dimension mismatch")
    return from_points(p.dim, p.vertices + q.vertices, provenance)


def intersect(p: RatePolytope, q: RatePolytope, provenance: str) -> RatePolytope:
    if p.dim != q.dim:
        raise PolytopeError("dimension mismatch")
    return from_halfspaces(p.dim, p.halfspaces + q.halfspaces, provenance)


def equal(p: RatePolytope, q: RatePolytope) -> bool:
    if p.dim != q.dim:
        raise PolytopeError("dimension mismatch")
    return sorted(p.vertices) == sorted(q.vertices)


def certify(inner: RatePolytope, outer: RatePolytope):
    """Exactness certificate: "exact" or a gap direction.

    Requires inner to be contained in outer; returns ("exact", None) when
    the regions coincide, otherwise ("gap", w) for a weight vector w along
    which the support functions differ.
    """
    if inner.dim != outer.dim:
        raise PolytopeError("dimension mismatch")
    for v in inner.vertices:
        if not outer.contains(v):
            raise PolytopeError("inner region is not contained in outer region")
    if equal(inner, outer):
        return "exact", None

    def primitive(a):
        return normalize_halfspace(a, ZERO)[0]

    for a, b in inner.halfspaces:
        if outer.support(a) > b:
            return "gap", primitive(a)
    # outer adds no support anywhere yet differs: witness any outer vertex
    for v in outer.vertices:
        if not inner.contains(v):
            for a, b in inner.halfspaces:
                if sum(ai * xi for ai, xi in zip(a, v)) > b:
                    return "gap", primitive(a)
    raise PolytopeError("regions differ but no separating direction found")


def from_dict(doc: dict) -> RatePolytope:
    try:
        dim = int(doc["dim"])
        hs = [
            (tuple(Fraction(x) for x in item["a"]), Fraction(item["b"]))
            for item in doc["halfspaces"]
        ]
        provenance = doc.get("provenance", "fixture")
    except (KeyError, TypeError, ValueError) as exc:
        raise PolytopeError(f"malformed polytope document: {exc}") from exc
    poly = from_halfspaces(dim, hs, provenance)
    if "vertices" in doc and doc["vertices"] is not None:
        declared = sorted(
            tuple(Fraction(x) for x in v) for v in doc["vertices"]
        )
        if declared != sorted(poly.vertices):
            raise PolytopeError("declared vertices do not match halfspaces")
    return poly


def from_json(text: str) -> RatePolytope:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PolytopeError(f"malformed polytope JSON: {exc}") from exc
    return from_dict(doc)
