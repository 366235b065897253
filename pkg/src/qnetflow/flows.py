"""Classical graph engines: max-flow/min-cut and multicommodity routing.

All arithmetic is exact (fractions.Fraction); "undirected" mode treats each
channel as usable in either direction with both directions drawing on one
shared capacity pool.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .network import UNLIMITED, Network
from .simplex import solve_lp

ZERO = Fraction(0)


class FlowError(ValueError):
    pass


@dataclass(frozen=True)
class CutCertificate:
    """Vertex bipartition with its crossing capacities."""

    side: frozenset[str]
    forward_capacity: Fraction
    backward_capacity: Fraction

    @property
    def both_directions(self) -> Fraction:
        return self.forward_capacity + self.backward_capacity


def cut_capacities(net: Network, side: Iterable[str]) -> CutCertificate:
    """Forward/backward capacity of the cut with the given side S."""
    side = frozenset(side)
    fwd = ZERO
    bwd = ZERO
    for e in net.edges:
        cap = e.capacity
        if cap is UNLIMITED:
            cap = net.finite_capacity_total() + 1
        if e.tail in side and e.head not in side:
            fwd += cap
        elif e.head in side and e.tail not in side:
            bwd += cap
    return CutCertificate(side, fwd, bwd)


def _arc_list(net: Network, orientation: str):
    """(tail, head, capacity, edge_id, forward?) arcs for the flow engine."""
    big = net.finite_capacity_total() + 1
    arcs = []
    for e in net.edges:
        cap = big if e.capacity is UNLIMITED else e.capacity
        arcs.append((e.tail, e.head, cap, e.id, True))
        if orientation == "undirected":
            arcs.append((e.head, e.tail, cap, e.id, False))
    return arcs


def max_flow_min_cut(
    net: Network,
    sources: Iterable[str],
    sinks: Iterable[str],
    orientation: str = "directed",
) -> tuple[Fraction, CutCertificate]:
    """Maximum flow between vertex sets and a minimum cut attaining it.

    The returned cut side is the set of vertices reachable from the sources
    in the final residual graph (so it always contains the sources and
    excludes the sinks).
    """
    sources = set(sources)
    sinks = set(sinks)
    if sources & sinks:
        raise FlowError("source and sink sets overlap")
    for v in sources | sinks:
        net.vertex(v)

    arcs = _arc_list(net, orientation)
    # residual capacities per arc plus reverse slots
    cap = [a[2] for a in arcs] + [ZERO] * len(arcs)
    n_arcs = len(arcs)
    out: dict[str, list[int]] = {v: [] for v in net.vertex_ids}
    for i, (t, h, _c, _e, _f) in enumerate(arcs):
        out[t].append(i)
        out[h].append(i + n_arcs)

    def endpoints(idx):
        if idx < n_arcs:
            return arcs[idx][0], arcs[idx][1]
        t, h = arcs[idx - n_arcs][0], arcs[idx - n_arcs][1]
        return h, t

    value = ZERO
    while True:
        prev: dict[str, int] = {}
        seen = set(sources)
        queue = deque(sorted(sources))
        goal = None
        while queue:
            v = queue.popleft()
            if v in sinks:
                goal = v
                break
            for idx in out[v]:
                if cap[idx] <= 0:
                    continue
                _t, h = endpoints(idx)
                if h in seen:
                    continue
                seen.add(h)
                prev[h] = idx
                queue.append(h)
        if goal is None:
            break
        # walk back to find the bottleneck, then augment
        path = []
        v = goal
        while v not in sources:
            idx = prev[v]
            path.append(idx)
            v = endpoints(idx)[0]
        bottleneck = min(cap[idx] for idx in path)
        for idx in path:
            cap[idx] -= bottleneck
            rev = idx + n_arcs if idx < n_arcs else idx - n_arcs
            cap[rev] += bottleneck
        value += bottleneck

    # residual reachability gives the canonical minimum cut
    seen = set(sources)
    queue = deque(sorted(sources))
    while queue:
        v = queue.popleft()
        for idx in out[v]:
            if cap[idx] <= 0:
                continue
            _t, h = endpoints(idx)
            if h not in seen:
                seen.add(h)
                queue.append(h)
    return value, cut_capacities(net, seen)


@dataclass(frozen=True)
class CommodityFlow:
    """Per-pair edge flows at a given rate vector.

    Flows are signed in undirected mode: positive along the declared edge
    direction, negative against it.
    """

    rates: tuple[Fraction, ...]
    flows: tuple[Mapping[str, Fraction], ...]
    orientation: str = "directed"

    def edge_usage(self, edge_id: str) -> Fraction:
        return sum((abs(f.get(edge_id, ZERO)) for f in self.flows), ZERO)


def _conservation_residual(net: Network, pair: int, flow: Mapping[str, Fraction]):
    """Net outflow per vertex for one commodity."""
    resid = {v: ZERO for v in net.vertex_ids}
    for e in net.edges:
        f = flow.get(e.id, ZERO)
        resid[e.tail] += f
        resid[e.head] -= f
    return resid


def _multicommodity_lp(net: Network, orientation: str):
    """Shared LP skeleton: variable layout and capacity/conservation rows.

    Variables per commodity: one per arc (two arcs per edge when undirected)
    followed by one rate variable per commodity at the end.
    """
    arcs = []
    for e in net.edges:
        arcs.append((e.tail, e.head, e.id, True))
        if orientation == "undirected":
            arcs.append((e.head, e.tail, e.id, False))
    k = net.k
    na = len(arcs)
    nvars = na * k + k

    def var(c, a):
        return c * na + a

    a_ub, b_ub = [], []
    big = net.finite_capacity_total() + 1
    for e in net.edges:
        row = [ZERO] * nvars
        for a, (_t, _h, eid, _f) in enumerate(arcs):
            if eid == e.id:
                for c in range(k):
                    row[var(c, a)] = Fraction(1)
        cap = big if e.capacity is UNLIMITED else e.capacity
        a_ub.append(row)
        b_ub.append(cap)

    a_eq, b_eq = [], []
    for c in range(k):
        s = net.sender(c + 1)
        r = net.receiver(c + 1)
        for v in net.vertex_ids:
            if v == r:
                continue  # sink balance is implied
            row = [ZERO] * nvars
            for a, (t, h, _eid, _f) in enumerate(arcs):
                if t == v:
                    row[var(c, a)] += 1
                if h == v:
                    row[var(c, a)] -= 1
            if v == s:
                row[na * k + c] = Fraction(-1)
            a_eq.append(row)
            b_eq.append(ZERO)
    return arcs, nvars, a_ub, b_ub, a_eq, b_eq


def _extract_flow(net: Network, orientation, arcs, x, k, na) -> CommodityFlow:
    flows = []
    rates = []
    for c in range(k):
        per_edge: dict[str, Fraction] = {}
        for a, (_t, _h, eid, fwd) in enumerate(arcs):
            v = x[c * na + a]
            if v == 0:
                continue
            per_edge[eid] = per_edge.get(eid, ZERO) + (v if fwd else -v)
        per_edge = {eid: v for eid, v in per_edge.items() if v != 0}
        flows.append(per_edge)
        rates.append(x[na * k + c])
    return CommodityFlow(tuple(rates), tuple(flows), orientation)


def routing_feasible(
    net: Network,
    rates: Sequence[Fraction],
    orientation: str = "directed",
) -> tuple[bool, CommodityFlow | CutCertificate | None]:
    """Exact feasibility of fractional multicommodity routing at given rates.

    Returns (True, witness flow) or (False, violated cut) when a simple
    cut certificate exists; (False, None) signals plain LP infeasibility.
    """
    rates = [Fraction(r) for r in rates]
    if len(rates) != net.k:
        raise FlowError(f"expected {net.k} rates, got {len(rates)}")
    if any(r < 0 for r in rates):
        raise FlowError("rates must be nonnegative")

    arcs, nvars, a_ub, b_ub, a_eq, b_eq = _multicommodity_lp(net, orientation)
    na = len(arcs)
    k = net.k
    for c in range(k):
        row = [ZERO] * nvars
        row[na * k + c] = Fraction(1)
        a_eq.append(row)
        b_eq.append(rates[c])
    res = solve_lp([ZERO] * nvars, a_ub, b_ub, a_eq, b_eq)
    if res.status == "optimal":
        return True, _extract_flow(net, orientation, arcs, res.x, k, na)
    return False, _violated_cut(net, rates, orientation)


def _violated_cut(net, rates, orientation) -> CutCertificate | None:
    """Search single- and multi-commodity cuts that certify infeasibility."""
    from itertools import combinations

    k = net.k
    if len(net.vertex_ids) > 20:
        return None
    ids = sorted(net.vertex_ids)
    subsets = []
    for size in range(1, k + 1):
        subsets.extend(combinations(range(1, k + 1), size))
    for sigma in subsets:
        demand = sum((rates[i - 1] for i in sigma), ZERO)
        best = None
        for mask in range(1, 2 ** len(ids) - 1):
            side = {ids[j] for j in range(len(ids)) if mask >> j & 1}
            if orientation == "directed":
                if not all(
                    net.sender(i) in side and net.receiver(i) not in side
                    for i in sigma
                ):
                    continue
                value = cut_capacities(net, side).forward_capacity
            else:
                if not all(
                    (net.sender(i) in side) != (net.receiver(i) in side)
                    for i in sigma
                ):
                    continue
                value = cut_capacities(net, side).both_directions
            if best is None or value < best[0]:
                best = (value, side)
        if best is not None and best[0] < demand:
            return cut_capacities(net, best[1])
    return None


def max_weighted_rate(
    net: Network,
    weights: Sequence[Fraction],
    orientation: str = "directed",
) -> tuple[Fraction, tuple[Fraction, ...], CommodityFlow]:
    """Maximize sum(w_i * r_i) over the fractional routing polytope."""
    weights = [Fraction(w) for w in weights]
    if len(weights) != net.k:
        raise FlowError(f"expected {net.k} weights, got {len(weights)}")
    if any(w < 0 for w in weights):
        raise FlowError("weights must be nonnegative")
    if all(w == 0 for w in weights):
        raise FlowError("weights must not all be zero")

    arcs, nvars, a_ub, b_ub, a_eq, b_eq = _multicommodity_lp(net, orientation)
    na = len(arcs)
    k = net.k
    objective = [ZERO] * nvars
    for c in range(k):
        objective[na * k + c] = weights[c]
    res = solve_lp(objective, a_ub, b_ub, a_eq, b_eq)
    if res.status != "optimal":
        raise FlowError(f"routing LP unexpectedly {res.status}")
    flow = _extract_flow(net, orientation, arcs, res.x, k, na)
    return res.value, flow.rates, flow


def decompose_paths(
    net: Network, flow: CommodityFlow
) -> list[tuple[int, tuple[str, ...], tuple[str, ...], Fraction]]:
    """Split a conserved flow into simple sender-receiver paths.

    Returns (pair, vertex path, edge ids, amount) entries; any residual
    circulation is discarded.  Raises on non-conserved input.
    """
    out: list[tuple[int, tuple[str, ...], tuple[str, ...], Fraction]] = []
    for c, per_edge in enumerate(flow.flows, start=1):
        s, r = net.sender(c), net.receiver(c)
        resid = _conservation_residual(net, c, per_edge)
        for v in net.vertex_ids:
            if v in (s, r):
                continue
            if resid[v] != 0:
                raise FlowError(f"flow for pair {c} not conserved at {v!r}")
        if resid[s] != flow.rates[c - 1] or resid[s] != -resid[r]:
            raise FlowError(f"flow for pair {c} does not match its rate")

        # positive-direction residual arcs, deterministic ordering
        arc_flow: dict[tuple[str, str, str], Fraction] = {}
        for e in sorted(net.edges, key=lambda e: e.id):
            f = per_edge.get(e.id, ZERO)
            if f > 0:
                arc_flow[(e.tail, e.head, e.id)] = f
            elif f < 0:
                arc_flow[(e.head, e.tail, e.id)] = -f

        def find_path():
            # depth-first walk over positive arcs from sender to receiver
            stack = [(s, (s,), ())]
            visited_edges: set = set()
            while stack:
                v, vs, es = stack.pop()
                if v == r:
                    return vs, es
                for key in sorted(arc_flow, reverse=True):
                    t, h, eid = key
                    if t != v or arc_flow[key] <= 0:
                        continue
                    if h in vs:
                        continue
                    stack.append((h, vs + (h,), es + (key,)))
            return None

        while True:
            found = find_path()
            if found is None:
                break
            vs, es = found
            amount = min(arc_flow[key] for key in es)
            for key in es:
                arc_flow[key] -= amount
                if arc_flow[key] == 0:
                    del arc_flow[key]
            out.append((c, vs, tuple(key[2] for key in es), amount))
            if len(out) > 10 * len(net.edges) * net.k + 10:
                raise FlowError("path decomposition failed to terminate")
    return out
