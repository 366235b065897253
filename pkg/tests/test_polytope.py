from fractions import Fraction as F

import pytest

from qnetflow.polytope import (
    PolytopeError,
    certify,
    equal,
    from_halfspaces,
    from_json,
    from_points,
    intersect,
    normalize_halfspace,
    union_hull,
)


def triangle(b=1):
    return from_halfspaces(2, [((F(1), F(1)), F(b))], "fixture")


class TestConstruction:
    def test_triangle_vertices(self):
        t = triangle()
        assert t.vertices == ((F(0), F(0)), (F(0), F(1)), (F(1), F(0)))

    def test_redundant_halfspaces_removed(self):
        p = from_halfspaces(
            2,
            [((F(1), F(1)), F(1)), ((F(1), F(0)), F(5)), ((F(2), F(2)), F(2))],
            "outer",
        )
        assert p.halfspaces == (((F(1), F(1)), F(1)),)

    def test_normalization_to_coprime_integers(self):
        a, b = normalize_halfspace((F(1, 2), F(1, 2)), F(3, 4))
        assert (a, b) == ((F(2), F(2)), F(3))

    def test_hull_from_points(self):
        hull = from_points(2, [(2, 1), (1, 2)], "inner")
        assert hull.support((1, 1)) == 3
        assert hull.contains((F(3, 2), F(3, 2)))
        assert not hull.contains((2, F(3, 2)))

    def test_hull_facet_through_projection(self):
        # the r1 + r2 <= 2 facet is supported by a projected point
        hull = from_points(3, [(1, 1, 1), (2, 0, 0)], "inner")
        assert hull.support((1, 1, 0)) == 2
        assert ((F(1), F(1), F(0)), F(2)) in hull.halfspaces

    def test_dead_coordinate(self):
        p = from_points(2, [(1, 0)], "inner")
        assert not p.contains((0, F(1, 100)))
        assert p.contains((1, 0))

    def test_unbounded_rejected(self):
        with pytest.raises(PolytopeError, match="unbounded"):
            from_halfspaces(2, [((F(1), F(0)), F(1))], "outer")


class TestOps:
    def test_equal_by_vertices(self):
        assert equal(triangle(), from_points(2, [(1, 0), (0, 1)], "x"))
        assert not equal(triangle(), triangle(2))

    def test_contains_dimension_mismatch(self):
        with pytest.raises(PolytopeError):
            triangle().contains((1, 1, 1))

    def test_scale(self):
        assert equal(triangle().scale(3), triangle(3))
        assert triangle(2).scale(F(1, 2)).support((1, 1)) == 1

    def test_down_closed(self):
        assert triangle().is_down_closed_at_vertices()

    def test_certify_exact_reflexive(self):
        assert certify(triangle(), triangle()) == ("exact", None)

    def test_certify_gap_direction(self):
        inner = from_halfspaces(
            2,
            [((F(1), F(0)), F(1)), ((F(0), F(1)), F(1)), ((F(2), F(2)), F(3))],
            "inner",
        )
        outer = from_halfspaces(
            2, [((F(1), F(0)), F(1)), ((F(0), F(1)), F(1))], "outer"
        )
        status, direction = certify(inner, outer)
        assert status == "gap"
        assert direction == (F(1), F(1))

    def test_certify_requires_containment(self):
        with pytest.raises(PolytopeError):
            certify(triangle(2), triangle(1))

    def test_union_and_intersection(self):
        sq = from_halfspaces(
            2, [((F(1), F(0)), F(1)), ((F(0), F(1)), F(1))], "x"
        )
        tall = from_points(2, [(F(1, 2), 2)], "x")
        u = union_hull(sq, tall, "inner")
        assert u.contains((F(1, 2), 2)) and u.contains((1, 1))
        i = intersect(sq, tall, "outer")
        assert i.support((0, 1)) == 1

    def test_json_round_trip(self):
        t = from_points(2, [(1, F(1, 2)), (F(1, 2), 1)], "fixture")
        again = from_json(t.to_json())
        assert equal(t, again)
        assert again.provenance == "fixture"

    def test_json_vertex_consistency_enforced(self):
        doc = triangle().to_dict()
        doc["vertices"] = [["0", "0"], ["5", "5"]]
        with pytest.raises(PolytopeError, match="vertices"):
            from_json(__import__("json").dumps(doc))

    def test_csv_dump(self):
        csv = triangle().vertices_csv()
        assert csv.splitlines()[0] == "r1,r2"
        assert "1,0" in csv
