"""Scenario-aware rate-region machinery.

Outer bounds come from vertex cuts (directed capacity for the unassisted
model, both directions once classical assistance makes channels effectively
reversible).  Inner bounds pack admissible commodity paths fractionally:
forward assistance admits a backward-running segment when an entirely
forward witness path can carry the teleportation corrections past it, and
backward/two-way assistance removes orientation altogether.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .flows import (
    CutCertificate,
    cut_capacities,
    decompose_paths,
    max_flow_min_cut,
    routing_feasible,
)
from .network import UNLIMITED, Network, Scenario
from .polytope import (
    RatePolytope,
    from_halfspaces,
    normalize_halfspace,
    union_hull,
)
from .simplex import solve_lp

ZERO = Fraction(0)
ONE = Fraction(1)

PATH_ENUM_CAP = 100_000


class RegionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Cut outer bounds


@dataclass(frozen=True)
class CutBound:
    """Upper bound on a rate sum, witnessed by a vertex bipartition."""

    subset: tuple[int, ...]
    bound: Fraction
    cut: CutCertificate
    mode: str  # "directed" | "both"
    exhaustive: bool = True

    def halfspace(self, k: int):
        a = tuple(ONE if i + 1 in self.subset else ZERO for i in range(k))
        return normalize_halfspace(a, self.bound)


def _assisted_min_cut(net: Network, subset: Sequence[int]):
    """Minimum of forward+backward capacity over cuts splitting each pair."""
    ids = sorted(net.vertex_ids)
    best = None
    for mask in range(1, 2 ** len(ids) - 1):
        side = frozenset(ids[j] for j in range(len(ids)) if mask >> j & 1)
        if not all(
            (net.sender(i) in side) != (net.receiver(i) in side)
            for i in subset
        ):
            continue
        cert = cut_capacities(net, side)
        value = cert.both_directions
        if best is None or value < best[0]:
            best = (value, cert)
    if best is None:
        raise RegionError(f"no cut separates every pair in {subset}")
    return best


ENUMERATION_CAP = 20


def cut_outer_bounds(
    net: Network,
    scenario: Scenario,
    subsets: Iterable[Sequence[int]],
    require_exhaustive: bool = False,
) -> list[CutBound]:
    """Rate-sum upper bounds for each requested subset of pairs.

    Unassisted bounds minimize forward cut capacity over cuts with the
    subset's senders on one side and its receivers on the other; assisted
    bounds count both directions over cuts separating each pair.  Above
    the enumeration cap the assisted search is restricted to cuts keeping
    all senders together (flagged non-exhaustive) unless the caller
    demands exhaustiveness, in which case this raises.
    """
    bounds = []
    for raw in subsets:
        subset = tuple(sorted(set(raw)))
        if not subset:
            raise RegionError("empty pair subset")
        if any(i < 1 or i > net.k for i in subset):
            raise RegionError(f"pair index out of range in {subset}")
        if scenario is Scenario.UNASSISTED:
            senders = {net.sender(i) for i in subset}
            receivers = {net.receiver(i) for i in subset}
            value, cert = max_flow_min_cut(net, senders, receivers, "directed")
            bounds.append(CutBound(subset, value, cert, "directed"))
        else:
            if len(net.vertex_ids) <= ENUMERATION_CAP:
                value, cert = _assisted_min_cut(net, subset)
                bounds.append(CutBound(subset, value, cert, "both"))
            elif require_exhaustive:
                raise RegionError(
                    f"{len(net.vertex_ids)} vertices exceed the exhaustive "
                    f"cut enumeration cap of {ENUMERATION_CAP}"
                )
            else:
                senders = {net.sender(i) for i in subset}
                receivers = {net.receiver(i) for i in subset}
                value, cert = max_flow_min_cut(
                    net, senders, receivers, "undirected"
                )
                bounds.append(
                    CutBound(subset, value, cert, "both", exhaustive=False)
                )
    return bounds


def _default_subsets(k: int) -> list[tuple[int, ...]]:
    if k <= 3:
        out = []
        for size in range(1, k + 1):
            out.extend(combinations(range(1, k + 1), size))
        return out
    singles = [(i,) for i in range(1, k + 1)]
    return singles + [tuple(range(1, k + 1))]


def outer_region(
    net: Network,
    scenario: Scenario,
    subsets: Iterable[Sequence[int]] | None = None,
) -> RatePolytope:
    """Intersection of the cut bounds as a rate polytope."""
    subsets = list(subsets) if subsets is not None else _default_subsets(net.k)
    for i in range(1, net.k + 1):
        if (i,) not in [tuple(sorted(set(s))) for s in subsets]:
            subsets.append((i,))
    bounds = cut_outer_bounds(net, scenario, subsets)
    return from_halfspaces(
        net.k, [b.halfspace(net.k) for b in bounds], "outer"
    )


# ---------------------------------------------------------------------------
# Admissible paths


@dataclass(frozen=True)
class BridgeWitness:
    """Forward path certifying one backward-running segment.

    The segment occupies path positions [start, end]; the witness runs from
    the segment's entry vertex to an on-path vertex at position >= end.
    """

    start: int
    end: int
    vertices: tuple[str, ...]
    edge_ids: tuple[str, ...]


@dataclass(frozen=True)
class AdmissiblePath:
    pair: int
    vertices: tuple[str, ...]
    edge_ids: tuple[str, ...]
    forward_flags: tuple[bool, ...]
    bridges: tuple[BridgeWitness, ...] = ()

    @property
    def fully_forward(self) -> bool:
        return all(self.forward_flags)


def _reversed_segments(forward_flags: Sequence[bool]):
    """Maximal runs of reversed steps as (first_step, last_step)."""
    runs = []
    i = 0
    while i < len(forward_flags):
        if forward_flags[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(forward_flags) and not forward_flags[j + 1]:
            j += 1
        runs.append((i, j))
        i = j + 1
    return runs


def _shortest_forward_path(net: Network, src: str, targets: set[str]):
    """BFS over properly oriented channels; deterministic neighbor order."""
    if src in targets:
        return (src,), ()
    prev: dict[str, tuple[str, str]] = {}
    seen = {src}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        for e in sorted(net.out_edges(v), key=lambda e: (e.head, e.id)):
            if e.head in seen:
                continue
            seen.add(e.head)
            prev[e.head] = (v, e.id)
            if e.head in targets:
                vs, es = [e.head], []
                cur = e.head
                while cur != src:
                    p, eid = prev[cur]
                    es.append(eid)
                    vs.append(p)
                    cur = p
                return tuple(reversed(vs)), tuple(reversed(es))
            queue.append(e.head)
    return None


def check_reversal_condition(
    net: Network,
    vertices: Sequence[str],
    edge_ids: Sequence[str],
    forward_flags: Sequence[bool],
):
    """Bridge witnesses for every backward-running segment of a path.

    Returns (True, witnesses) when each maximal reversed segment has an
    entirely forward path from its entry vertex to an on-path vertex at or
    beyond its exit; otherwise (False, (start, end)) for the failing
    segment.  Shortest witnesses are chosen by breadth-first search.
    """
    vertices = tuple(vertices)
    if len(set(vertices)) != len(vertices):
        raise RegionError("path is not simple")
    witnesses = []
    for start, end in _reversed_segments(forward_flags):
        entry = vertices[start]
        beyond = set(vertices[end + 1:])
        found = _shortest_forward_path(net, entry, beyond)
        if found is None:
            return False, (start, end)
        vs, es = found
        witnesses.append(BridgeWitness(start, end + 1, vs, es))
    return True, tuple(witnesses)


def enumerate_admissible_paths(
    net: Network, pair: int, scenario: Scenario, max_len: int
) -> list[AdmissiblePath]:
    """All capacity-charging paths a commodity may use under a scenario.

    Unassisted paths follow channel orientation; backward/two-way paths
    ignore it; forward-assisted paths may run segments backwards when the
    reversal witness exists.
    """
    if max_len < 1:
        raise RegionError("max_len must be at least 1")
    if scenario is Scenario.ENT_ASSISTED:
        raise RegionError("entanglement assistance has no path model; "
                          "use ent_assisted_region")
    src = net.sender(pair)
    dst = net.receiver(pair)
    allow_reversed = scenario is not Scenario.UNASSISTED

    steps: dict[str, list[tuple[str, str, bool]]] = {
        v: [] for v in net.vertex_ids
    }
    for e in net.edges:
        steps[e.tail].append((e.head, e.id, True))
        if allow_reversed:
            steps[e.head].append((e.tail, e.id, False))
    for v in steps:
        steps[v].sort()

    out: list[AdmissiblePath] = []
    truncated = False

    def dfs(v, vs, es, flags):
        nonlocal truncated
        if len(out) >= PATH_ENUM_CAP:
            truncated = True
            return
        if v == dst:
            if scenario is Scenario.FORWARD and not all(flags):
                ok, wit = check_reversal_condition(net, vs, es, flags)
                if not ok:
                    return
                out.append(AdmissiblePath(pair, vs, es, flags, wit))
            else:
                out.append(AdmissiblePath(pair, vs, es, flags))
            return
        if len(es) >= max_len:
            return
        for head, eid, fwd in steps[v]:
            if head in vs:
                continue
            dfs(head, vs + (head,), es + (eid,), flags + (fwd,))

    dfs(src, (src,), (), ())
    if truncated:
        warnings.warn(
            f"path enumeration for pair {pair} truncated at {PATH_ENUM_CAP}",
            RuntimeWarning,
        )
    return out


# ---------------------------------------------------------------------------
# Inner regions by fractional path packing


class PathPacking:
    """Admissible paths of every pair plus the packing LP over them."""

    def __init__(self, net: Network, scenario: Scenario, max_len: int | None = None):
        if max_len is None:
            max_len = len(net.vertex_ids)
        self.net = net
        self.scenario = scenario
        self.max_len = max_len
        self._warn_short_cap(net, scenario, max_len)
        self.paths: list[AdmissiblePath] = []
        for i in range(1, net.k + 1):
            self.paths.extend(
                enumerate_admissible_paths(net, i, scenario, max_len)
            )
        big = net.finite_capacity_total() + 1
        self._caps = [
            big if e.capacity is UNLIMITED else e.capacity
            for e in sorted(net.edges, key=lambda e: e.id)
        ]
        self._edge_order = [e.id for e in sorted(net.edges, key=lambda e: e.id)]

    @staticmethod
    def _warn_short_cap(net, scenario, max_len):
        for i in range(1, net.k + 1):
            found = _shortest_any_path(
                net, net.sender(i), net.receiver(i),
                scenario is not Scenario.UNASSISTED,
            )
            if found is not None and found > max_len:
                warnings.warn(
                    f"max_len {max_len} below shortest route for pair {i}",
                    RuntimeWarning,
                )

    def _rows(self):
        a_ub = []
        for eid in self._edge_order:
            a_ub.append([
                ONE if eid in p.edge_ids else ZERO for p in self.paths
            ])
        return a_ub, list(self._caps)

    def support(self, weights: Sequence[Fraction]) -> Fraction:
        """max sum(w_i r_i) over the packing polytope."""
        w = [Fraction(x) for x in weights]
        if len(w) != self.net.k:
            raise RegionError("weight dimension mismatch")
        if not self.paths:
            return ZERO
        objective = [w[p.pair - 1] for p in self.paths]
        a_ub, b_ub = self._rows()
        res = solve_lp(objective, a_ub, b_ub)
        if res.status != "optimal":
            raise RegionError(f"packing LP unexpectedly {res.status}")
        return res.value

    def contains(self, rates: Sequence[Fraction]) -> bool:
        """Exact membership of a rate vector in the packing polytope."""
        r = [Fraction(x) for x in rates]
        if len(r) != self.net.k:
            raise RegionError("rate dimension mismatch")
        if any(x < 0 for x in r):
            return False
        a_eq = []
        for i in range(1, self.net.k + 1):
            a_eq.append([ONE if p.pair == i else ZERO for p in self.paths])
        a_ub, b_ub = self._rows()
        nv = len(self.paths)
        res = solve_lp([ZERO] * nv, a_ub, b_ub, a_eq, r)
        return res.status == "optimal"


def _shortest_any_path(net, src, dst, undirected):
    seen = {src}
    queue = deque([(src, 0)])
    while queue:
        v, d = queue.popleft()
        if v == dst:
            return d
        nxt = [e.head for e in net.out_edges(v)]
        if undirected:
            nxt += [e.tail for e in net.in_edges(v)]
        for h in sorted(nxt):
            if h not in seen:
                seen.add(h)
                queue.append((h, d + 1))
    return None


def _primitive_grid(k: int, top: int) -> list[tuple[Fraction, ...]]:
    from math import gcd

    dirs = []
    seen = set()

    def rec(prefix):
        if len(prefix) == k:
            if any(prefix):
                g = 0
                for v in prefix:
                    g = gcd(g, v)
                prim = tuple(v // g for v in prefix)
                if prim not in seen:
                    seen.add(prim)
                    dirs.append(tuple(Fraction(v) for v in prim))
            return
        for v in range(top + 1):
            rec(prefix + (v,))

    rec(())
    return dirs


def materialize_region(
    support,
    contains,
    k: int,
    provenance: str,
    seed_top: int = 2,
    max_rounds: int = 40,
) -> RatePolytope:
    """Exact H/V-representation of a region given by LP oracles.

    Probes a grid of small integer directions, builds the induced outer
    polytope and verifies each candidate vertex by exact membership; any
    unverified vertex triggers probes along combinations of its active
    normals (widening the grid if necessary).  The result is returned only
    once every vertex passes membership, so it equals the oracle region.
    """
    probed: dict[tuple[Fraction, ...], Fraction] = {}

    def probe(w):
        w = normalize_halfspace(w, ZERO)[0]
        if not any(w):
            return
        if w not in probed:
            probed[w] = support(w)

    top = seed_top
    for w in _primitive_grid(k, top):
        probe(w)
    for _ in range(max_rounds):
        poly = from_halfspaces(
            k, [(a, b) for a, b in probed.items()], provenance
        )
        bad = [v for v in poly.vertices if not contains(v)]
        if not bad:
            return poly
        before = len(probed)
        for v in bad:
            active = [
                a for a, b in poly.halfspaces
                if sum(ai * xi for ai, xi in zip(a, v)) == b
            ]
            for i in range(len(active)):
                for j in range(i + 1, len(active)):
                    probe(tuple(x + y for x, y in zip(active[i], active[j])))
            if active:
                probe(tuple(sum(col) for col in zip(*active)))
        if len(probed) == before:
            top *= 2
            for w in _primitive_grid(k, top):
                probe(w)
    raise RegionError("region materialization did not converge")


def inner_region(
    net: Network,
    scenario: Scenario,
    max_len: int | None = None,
) -> RatePolytope | PathPacking:
    """Achievable region from fractional packing of admissible paths.

    Materialized exactly for at most three pairs; larger networks get the
    PathPacking oracle (support and membership queries only).
    """
    packing = PathPacking(net, scenario, max_len)
    if net.k > 3:
        return packing
    return materialize_region(
        packing.support, packing.contains, net.k, "inner"
    )


# ---------------------------------------------------------------------------
# Exact two-pair region under backward assistance


@dataclass(frozen=True)
class TwoPairDecomposition:
    """Structure induced by the two rate-sum-minimizing cuts.

    The cut keeping both senders together and the cut keeping sender 1
    with receiver 2 split the vertices into four blocks; channel capacity
    between the blocks falls into six bundles (v/h/d) and the single-vertex
    terminal cuts give the access bottlenecks.
    """

    vertical_side: frozenset[str]
    horizontal_side: frozenset[str]
    v1: Fraction
    v2: Fraction
    h1: Fraction
    h2: Fraction
    d1: Fraction
    d2: Fraction
    a1: Fraction
    a2: Fraction
    b1: Fraction
    b2: Fraction


def _block_capacity(net: Network, xs: frozenset[str], ys: frozenset[str]) -> Fraction:
    total = ZERO
    for e in net.edges:
        cap = e.capacity
        if cap is UNLIMITED:
            cap = net.finite_capacity_total() + 1
        if (e.tail in xs and e.head in ys) or (e.tail in ys and e.head in xs):
            total += cap
    return total


def two_pair_back_exact(net: Network) -> tuple[RatePolytope, TwoPairDecomposition]:
    """Exact back-assisted rate region for two pairs.

    The region is cut out by the undirected minimum cuts separating each
    pair plus the smaller of the two pair-sum cuts (senders together, or
    sender 1 with receiver 2).
    """
    if net.k != 2:
        raise RegionError("exact two-pair solver needs exactly 2 pairs")
    a1v, a2v = net.sender(1), net.sender(2)
    b1v, b2v = net.receiver(1), net.receiver(2)
    r1, _ = max_flow_min_cut(net, {a1v}, {b1v}, "undirected")
    r2, _ = max_flow_min_cut(net, {a2v}, {b2v}, "undirected")
    sv_val, sv_cut = max_flow_min_cut(net, {a1v, a2v}, {b1v, b2v}, "undirected")
    sh_val, sh_cut = max_flow_min_cut(net, {a1v, b2v}, {a2v, b1v}, "undirected")
    rsum = min(sv_val, sh_val)

    sv, sh = sv_cut.side, sh_cut.side
    all_v = frozenset(net.vertex_ids)
    p1 = sv & sh
    p2 = sv - sh
    p3 = sh - sv
    p4 = all_v - sv - sh
    decomp = TwoPairDecomposition(
        vertical_side=sv,
        horizontal_side=sh,
        v1=_block_capacity(net, p1, p3),
        v2=_block_capacity(net, p2, p4),
        h1=_block_capacity(net, p1, p2),
        h2=_block_capacity(net, p3, p4),
        d1=_block_capacity(net, p1, p4),
        d2=_block_capacity(net, p2, p3),
        a1=cut_capacities(net, {a1v}).both_directions,
        a2=cut_capacities(net, {a2v}).both_directions,
        b1=cut_capacities(net, {b1v}).both_directions,
        b2=cut_capacities(net, {b2v}).both_directions,
    )
    region = from_halfspaces(
        2,
        [
            ((ONE, ZERO), r1),
            ((ZERO, ONE), r2),
            ((ONE, ONE), rsum),
        ],
        "exact",
    )
    return region, decomp


def two_pair_back_protocol(
    net: Network, target: Sequence[Fraction]
) -> list[tuple[int, tuple[str, ...], tuple[str, ...], Fraction]]:
    """Fractional path packing attaining a point of the two-pair region.

    The packing routes the target rates as an undirected multicommodity
    flow and splits it into simple paths; the result is re-checked against
    every channel capacity before being returned.
    """
    region, _ = two_pair_back_exact(net)
    target = tuple(Fraction(x) for x in target)
    if not region.contains(target):
        raise RegionError(f"target {target} outside the achievable region")
    ok, flow = routing_feasible(net, target, "undirected")
    if not ok:
        raise RegionError("routing LP disagrees with the cut region")
    packing = decompose_paths(net, flow)
    usage: dict[str, Fraction] = {}
    per_pair = [ZERO, ZERO]
    for pair, _vs, eids, amount in packing:
        per_pair[pair - 1] += amount
        for eid in eids:
            usage[eid] = usage.get(eid, ZERO) + amount
    for eid, used in usage.items():
        cap = net.edge(eid).capacity
        if cap is not UNLIMITED and used > cap:
            raise RegionError(f"packing oversubscribes channel {eid!r}")
    if tuple(per_pair) != target:
        raise RegionError("packing does not attain the target rates")
    return packing


# ---------------------------------------------------------------------------
# Entanglement-assisted reduction


@dataclass(frozen=True)
class EntAssistedRegions:
    """Classical bounds and the derived quantum region with free ebits."""

    classical_outer: RatePolytope
    classical_inner: RatePolytope
    quantum_region: RatePolytope
    exact: bool
    gap_direction: tuple[Fraction, ...] | None


def ent_assisted_region(
    net: Network,
    classical_inner_fixture: RatePolytope | None = None,
) -> EntAssistedRegions:
    """Reduce entanglement-assisted quantum rates to classical ones.

    Free ebits let every channel carry two classical bits, and shared
    entanglement converts classical back to quantum at half rate, so the
    quantum region is half the classical one.  The classical inner bound
    is doubled directed routing, optionally improved by a known coding
    region supplied as a fixture.
    """
    from .polytope import certify

    unassisted_cuts = outer_region(net, Scenario.UNASSISTED)
    classical_outer = unassisted_cuts.scale(2).with_provenance("outer")
    routing = inner_region(net, Scenario.UNASSISTED)
    classical_inner = routing.scale(2).with_provenance("inner")
    if classical_inner_fixture is not None:
        if classical_inner_fixture.dim != net.k:
            raise RegionError("fixture dimension mismatch")
        classical_inner = union_hull(
            classical_inner, classical_inner_fixture, "inner"
        )
    status, direction = certify(classical_inner, classical_outer)
    exact = status == "exact"
    quantum = classical_inner.scale(Fraction(1, 2)).with_provenance(
        "exact" if exact else "inner"
    )
    return EntAssistedRegions(
        classical_outer=classical_outer,
        classical_inner=classical_inner,
        quantum_region=quantum,
        exact=exact,
        gap_direction=direction,
    )


def classical_multicast_rate(
    net: Network, source: str, receivers: Iterable[str]
) -> Fraction:
    """Rate of sharing one source stream with every receiver by coding.

    Equals the smallest directed max-flow from the source to any receiver;
    unreachable receivers force the rate to zero.
    """
    receivers = sorted(set(receivers))
    if not receivers:
        raise RegionError("at least one receiver is required")
    if source in receivers:
        raise RegionError("source cannot be one of the receivers")
    best = None
    for r in receivers:
        value, _ = max_flow_min_cut(net, {source}, {r}, "directed")
        if best is None or value < best:
            best = value
    return best
