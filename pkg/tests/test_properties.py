"""Cross-cutting consistency properties on random small networks."""

import random

from conftest import random_two_pair_network
from qnetflow.flows import max_weighted_rate
from qnetflow.network import Scenario, builtin_network
from qnetflow.polytope import equal
from qnetflow.regions import PathPacking, inner_region, outer_region

UN = Scenario.UNASSISTED
FW = Scenario.FORWARD
BW = Scenario.BACKWARD

PROBE_DIRS = [(1, 0), (0, 1), (1, 1), (2, 1), (1, 2)]


def packing(net, scenario, max_len=4):
    return PathPacking(net, scenario, max_len)


class TestFormulationAgreement:
    def test_path_packing_equals_edge_lp_undirected(self):
        rng = random.Random(31)
        for _ in range(6):
            net = random_two_pair_network(rng, n_helpers=3, n_edges=10)
            pk = packing(net, BW, max_len=len(net.vertex_ids))
            for w in ((1, 1), (1, 0), (2, 1)):
                lp_value, _, _ = max_weighted_rate(net, w, "undirected")
                assert pk.support(w) == lp_value

    def test_path_packing_equals_edge_lp_directed(self):
        rng = random.Random(37)
        for _ in range(6):
            net = random_two_pair_network(rng, n_helpers=3, n_edges=10)
            pk = packing(net, UN, max_len=len(net.vertex_ids))
            for w in ((1, 1), (0, 1)):
                lp_value, _, _ = max_weighted_rate(net, w, "directed")
                assert pk.support(w) == lp_value


class TestSupportProperties:
    def test_assistance_monotone_support(self):
        rng = random.Random(41)
        for _ in range(10):
            net = random_two_pair_network(rng, n_helpers=3, n_edges=9)
            pks = {sc: packing(net, sc) for sc in (UN, FW, BW)}
            for w in PROBE_DIRS:
                hu = pks[UN].support(w)
                hf = pks[FW].support(w)
                hb = pks[BW].support(w)
                assert hu <= hf <= hb

    def test_inner_support_below_cut_bounds(self):
        rng = random.Random(43)
        for _ in range(10):
            net = random_two_pair_network(rng, n_helpers=3, n_edges=9)
            for sc in (UN, FW, BW):
                outer = outer_region(net, sc)
                pk = packing(net, sc)
                for a, b in outer.halfspaces:
                    assert pk.support(a) <= b

    def test_capacity_scaling_covariance_support(self):
        rng = random.Random(47)
        for _ in range(6):
            net = random_two_pair_network(rng, n_helpers=3, n_edges=9)
            for m in (2, 3):
                scaled = net.scale_capacities(m)
                for sc in (UN, BW):
                    base = packing(net, sc)
                    big = packing(scaled, sc)
                    for w in ((1, 1), (1, 2)):
                        assert big.support(w) == m * base.support(w)


class TestMaterializedProperties:
    def test_regions_down_closed_and_scaled(self):
        for name in ("butterfly", "inverted_crown"):
            net = builtin_network(name)
            for sc in (UN, FW, BW):
                region = inner_region(net, sc)
                assert region.is_down_closed_at_vertices()
                scaled_net = net.scale_capacities(2)
                assert equal(inner_region(scaled_net, sc), region.scale(2))

    def test_materialization_matches_oracle_on_randoms(self):
        rng = random.Random(53)
        for _ in range(4):
            net = random_two_pair_network(rng, n_helpers=2, n_edges=8)
            pk = packing(net, BW, max_len=6)
            region = inner_region(net, BW, max_len=6)
            for w in PROBE_DIRS:
                assert region.support(w) == pk.support(w)
            for v in region.vertices:
                assert pk.contains(v)

    def test_two_way_equals_backward_on_randoms(self):
        rng = random.Random(59)
        for _ in range(4):
            net = random_two_pair_network(rng, n_helpers=2, n_edges=8)
            assert equal(
                inner_region(net, Scenario.TWO_WAY, max_len=5),
                inner_region(net, BW, max_len=5),
            )
