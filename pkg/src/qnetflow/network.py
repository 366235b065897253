"""Network model: directed capacitated multigraphs carrying commodity pairs.

A network is a set of role-tagged vertices (senders, receivers, helpers)
joined by directed channels with exact rational capacities, plus an ordered
list of sender/receiver pairs.  Everything is immutable after validation, so
networks can be shared freely between solvers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Sequence


class NetworkError(ValueError):
    """Malformed or inconsistent network description."""


class NonLayerableError(NetworkError):
    """Network has no three-layer normal form."""


class _Unlimited:
    """Capacity sentinel comparing above every finite rational."""

    _singleton = None

    def __new__(cls):
        if cls._singleton is None:
            cls._singleton = super().__new__(cls)
        return cls._singleton

    def __gt__(self, other):
        return not isinstance(other, _Unlimited)

    def __ge__(self, other):
        return True

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return isinstance(other, _Unlimited)

    def __repr__(self):
        return "UNLIMITED"


UNLIMITED = _Unlimited()

Capacity = object  # Fraction | UNLIMITED


def parse_capacity(raw) -> Capacity:
    """Parse an integer, "p/q" string or "unlimited" into a capacity."""
    if isinstance(raw, _Unlimited):
        return UNLIMITED
    if isinstance(raw, str) and raw.strip().lower() == "unlimited":
        return UNLIMITED
    if isinstance(raw, bool):
        raise NetworkError(f"invalid capacity {raw!r}")
    try:
        value = Fraction(raw)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise NetworkError(f"invalid capacity {raw!r}") from exc
    if value < 0:
        raise NetworkError(f"negative capacity {raw!r}")
    return value


def format_capacity(cap: Capacity) -> str:
    if cap is UNLIMITED:
        return "unlimited"
    return str(cap)


@dataclass(frozen=True)
class Vertex:
    id: str
    kind: str  # "sender" | "receiver" | "helper"
    pair: int | None = None  # 1-based pair index for terminals

    @property
    def role(self) -> str:
        if self.kind == "helper":
            return "helper"
        return f"{self.kind}:{self.pair}"


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    capacity: Capacity


@dataclass(frozen=True)
class Network:
    """Validated directed multigraph with k commodity pairs."""

    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    pairs: tuple[tuple[str, str], ...]
    name: str = ""

    # -- lookups ---------------------------------------------------------

    @property
    def k(self) -> int:
        return len(self.pairs)

    @property
    def vertex_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.vertices)

    def vertex(self, vid: str) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise NetworkError(f"unknown vertex {vid!r}")

    def edge(self, eid: str) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise NetworkError(f"unknown edge {eid!r}")

    def sender(self, pair: int) -> str:
        return self.pairs[pair - 1][0]

    def receiver(self, pair: int) -> str:
        return self.pairs[pair - 1][1]

    def out_edges(self, vid: str) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.tail == vid)

    def in_edges(self, vid: str) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.head == vid)

    def incident_edges(self, vid: str) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if vid in (e.tail, e.head))

    def finite_capacity_total(self) -> Fraction:
        return sum(
            (e.capacity for e in self.edges if e.capacity is not UNLIMITED),
            Fraction(0),
        )

    # -- transforms ------------------------------------------------------

    def capacity_scale(self) -> int:
        """Least common multiple of capacity denominators."""
        denoms = [
            e.capacity.denominator
            for e in self.edges
            if e.capacity is not UNLIMITED
        ]
        return lcm(*denoms) if denoms else 1

    def normalized(self) -> tuple["Network", int]:
        """Integer-capacity version of this network plus the scale used."""
        scale = self.capacity_scale()
        return self.scale_capacities(scale), scale

    def scale_capacities(self, factor) -> "Network":
        factor = Fraction(factor)
        scaled = tuple(
            Edge(e.id, e.tail, e.head,
                 UNLIMITED if e.capacity is UNLIMITED else e.capacity * factor)
            for e in self.edges
        )
        return Network(self.vertices, scaled, self.pairs, self.name)

    def to_dict(self) -> dict:
        return {
            "vertices": [{"id": v.id, "role": v.role} for v in self.vertices],
            "edges": [
                {
                    "id": e.id,
                    "tail": e.tail,
                    "head": e.head,
                    "capacity": format_capacity(e.capacity),
                }
                for e in self.edges
            ],
            "pairs": [list(p) for p in self.pairs],
        }


def _parse_role(raw: str) -> tuple[str, int | None]:
    if raw == "helper":
        return "helper", None
    for kind in ("sender", "receiver"):
        if raw.startswith(kind + ":"):
            try:
                idx = int(raw.split(":", 1)[1])
            except ValueError:
                raise NetworkError(f"invalid role {raw!r}")
            if idx < 1:
                raise NetworkError(f"invalid pair index in role {raw!r}")
            return kind, idx
    raise NetworkError(f"invalid role {raw!r}")


def build_network(vertices: Iterable[Vertex], edges: Iterable[Edge],
                  pairs: Sequence[Sequence[str]], name: str = "") -> Network:
    """Validate raw parts and assemble a Network."""
    vertices = tuple(vertices)
    edges = tuple(edges)
    pairs = tuple((str(s), str(r)) for s, r in pairs)

    ids = [v.id for v in vertices]
    if len(set(ids)) != len(ids):
        raise NetworkError("duplicate vertex id")
    by_id = {v.id: v for v in vertices}

    if not pairs:
        raise NetworkError("at least one commodity pair is required")
    for i, (s, r) in enumerate(pairs, start=1):
        for vid, kind in ((s, "sender"), (r, "receiver")):
            if vid not in by_id:
                raise NetworkError(f"pair {i} references unknown vertex {vid!r}")
            v = by_id[vid]
            if v.kind != kind or v.pair != i:
                raise NetworkError(
                    f"vertex {vid!r} must carry role {kind}:{i} for pair {i}"
                )
        if s == r:
            raise NetworkError(f"pair {i} has identical endpoints")
    # role tags must be backed by the pair list; one role per vertex means no
    # vertex can serve two pairs in the same (or any) terminal role
    for v in vertices:
        if v.kind == "helper":
            continue
        if v.pair is None or v.pair > len(pairs):
            raise NetworkError(f"vertex {v.id!r} tagged for missing pair")
        expected = pairs[v.pair - 1][0 if v.kind == "sender" else 1]
        if expected != v.id:
            raise NetworkError(f"role of vertex {v.id!r} conflicts with pair list")

    eids = [e.id for e in edges]
    if len(set(eids)) != len(eids):
        raise NetworkError("duplicate edge id")
    for e in edges:
        if e.tail not in by_id:
            raise NetworkError(f"edge {e.id!r} has unknown tail {e.tail!r}")
        if e.head not in by_id:
            raise NetworkError(f"edge {e.id!r} has unknown head {e.head!r}")
        if e.tail == e.head:
            raise NetworkError(f"edge {e.id!r} is a self-loop")
        if e.capacity is not UNLIMITED and e.capacity < 0:
            raise NetworkError("negative capacity")
    return Network(vertices, edges, pairs, name)


def parse_network(text, name: str = "") -> Network:
    """Parse a network document (JSON string or already-decoded dict)."""
    if isinstance(text, (str, bytes)):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise NetworkError(f"malformed network document: {exc}") from exc
    else:
        doc = text
    if not isinstance(doc, Mapping):
        raise NetworkError("network document must be a JSON object")
    for key in ("vertices", "edges", "pairs"):
        if key not in doc:
            raise NetworkError(f"missing {key!r} section")

    vertices = []
    for raw in doc["vertices"]:
        try:
            kind, pair = _parse_role(raw["role"])
            vertices.append(Vertex(str(raw["id"]), kind, pair))
        except (KeyError, TypeError) as exc:
            raise NetworkError(f"malformed vertex entry {raw!r}") from exc
    edges = []
    for raw in doc["edges"]:
        try:
            edges.append(
                Edge(str(raw["id"]), str(raw["tail"]), str(raw["head"]),
                     parse_capacity(raw["capacity"]))
            )
        except (KeyError, TypeError) as exc:
            raise NetworkError(f"malformed edge entry {raw!r}") from exc
    return build_network(vertices, edges, doc["pairs"], name=name)


def serialize_network(net: Network) -> str:
    return json.dumps(net.to_dict(), indent=2, sort_keys=True)


class Scenario(Enum):
    """Classical/entanglement assistance model governing a computation."""

    UNASSISTED = "unassisted"
    FORWARD = "forward"
    BACKWARD = "backward"
    TWO_WAY = "twoway"
    ENT_ASSISTED = "ent"

    @classmethod
    def from_string(cls, raw: str) -> "Scenario":
        key = raw.strip().lower().replace("-", "").replace("_", "")
        table = {
            "unassisted": cls.UNASSISTED,
            "none": cls.UNASSISTED,
            "forward": cls.FORWARD,
            "forwardcc": cls.FORWARD,
            "backward": cls.BACKWARD,
            "backwardcc": cls.BACKWARD,
            "twoway": cls.TWO_WAY,
            "twowaycc": cls.TWO_WAY,
            "ent": cls.ENT_ASSISTED,
            "entassisted": cls.ENT_ASSISTED,
        }
        if key not in table:
            raise NetworkError(f"unknown scenario {raw!r}")
        return table[key]

    @property
    def undirected(self) -> bool:
        # two-way assistance computes identically to backward assistance
        return self in (Scenario.BACKWARD, Scenario.TWO_WAY)


def _terminals(k: int) -> tuple[list[Vertex], list[tuple[str, str]]]:
    vs = [Vertex(f"A{i}", "sender", i) for i in range(1, k + 1)]
    vs += [Vertex(f"B{i}", "receiver", i) for i in range(1, k + 1)]
    pairs = [(f"A{i}", f"B{i}") for i in range(1, k + 1)]
    return vs, pairs


def _unit_edges(arcs: Sequence[tuple[str, str]]) -> list[Edge]:
    return [Edge(t + h, t, h, Fraction(1)) for t, h in arcs]


def builtin_network(name: str) -> Network:
    """Bundled example networks addressable as ``builtin:<name>``."""
    if name == "butterfly":
        vs, pairs = _terminals(2)
        vs += [Vertex("C1", "helper"), Vertex("C2", "helper")]
        arcs = [("A1", "C1"), ("A2", "C1"), ("C1", "C2"),
                ("A1", "B2"), ("A2", "B1"), ("C2", "B1"), ("C2", "B2")]
        return build_network(vs, _unit_edges(arcs), pairs, name="butterfly")
    if name == "inverted_crown":
        vs, pairs = _terminals(3)
        vs += [Vertex("C1", "helper"), Vertex("C2", "helper")]
        arcs = [("A1", "A3"), ("A2", "A3"),
                ("A1", "B2"), ("A2", "B1"),
                ("A3", "C1"), ("A3", "C2"),
                ("C1", "B2"), ("C2", "B1"),
                ("C1", "B3"), ("C2", "B3")]
        return build_network(vs, _unit_edges(arcs), pairs, name="inverted_crown")
    if name == "path":
        vs, pairs = _terminals(1)
        vs += [Vertex("C", "helper")]
        return build_network(vs, _unit_edges([("A1", "C"), ("C", "B1")]),
                             pairs, name="path")
    if name == "shallow_demo":
        vs, pairs = _terminals(2)
        vs += [Vertex("C11", "helper"), Vertex("C12", "helper"),
               Vertex("C21", "helper")]
        arcs = [("A1", "C11"), ("A2", "C12"), ("C11", "C21"),
                ("C12", "C21"), ("C21", "B1"), ("C21", "B2")]
        return build_network(vs, _unit_edges(arcs), pairs, name="shallow_demo")
    raise NetworkError(f"unknown builtin network {name!r}")


def load_network(spec: str) -> Network:
    """Load from ``builtin:<name>`` or a JSON file path."""
    if spec.startswith("builtin:"):
        return builtin_network(spec.split(":", 1)[1])
    try:
        with open(spec, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise NetworkError(f"cannot read network file {spec!r}: {exc}") from exc
    return parse_network(text, name=spec)


# ---------------------------------------------------------------------------
# Three-layer normal form


@dataclass(frozen=True)
class LayeredNetwork:
    """Three-layer rewrite of a network.

    Every capacity-bearing channel connects adjacent layers
    (sender -> relay-1 -> relay-2 -> receiver); copies of one original
    vertex are chained by unlimited-capacity edges.
    """

    original: Network
    network: Network
    layers: Mapping[str, int]
    duplicates: Mapping[str, tuple[str, ...]]
    unlimited_edges: tuple[str, ...]

    def copies(self, original_id: str) -> tuple[str, ...]:
        return self.duplicates.get(original_id, (original_id,))

    def original_of(self, copy_id: str) -> str:
        for orig, copies in self.duplicates.items():
            if copy_id in copies:
                return orig
        return copy_id


def _longest_distances(net: Network, roots: Mapping[str, int]) -> dict[str, int]:
    """Longest path length from the rooted start layers; cycles are fatal."""
    order: list[str] = []
    state: dict[str, int] = {}

    def visit(v: str, stack: set[str]):
        if state.get(v) == 2:
            return
        if v in stack:
            raise NonLayerableError("network contains a directed cycle")
        stack.add(v)
        for e in net.out_edges(v):
            visit(e.head, stack)
        stack.discard(v)
        state[v] = 2
        order.append(v)

    for v in net.vertex_ids:
        visit(v, set())
    dist = dict(roots)
    for v in reversed(order):
        base = dist.get(v, 0)
        for e in net.in_edges(v):
            if e.tail in dist:
                base = max(base, dist[e.tail] + 1)
        dist[v] = base
    return dist


def normalize_layers(net: Network) -> LayeredNetwork:
    """Rewrite ``net`` into the three-layer normal form.

    Senders that receive channels (or feed receivers directly) are split
    into relay-layer copies joined by unlimited edges, so that every
    capacity edge spans exactly one layer.  Raises NonLayerableError when
    some simple sender-to-receiver path is longer than three hops.
    """
    if net.k == 0:
        raise NetworkError("layering needs at least one pair")
    senders = {net.sender(i) for i in range(1, net.k + 1)}
    receivers = {net.receiver(i) for i in range(1, net.k + 1)}
    for r in sorted(receivers):
        if net.out_edges(r):
            raise NonLayerableError(f"receiver {r!r} has outgoing channels")

    roots = {v.id: 0 for v in net.vertices
             if v.id in senders or not net.in_edges(v.id)}
    dist = _longest_distances(net, roots)

    # target layer of each original vertex (primary copy)
    layer: dict[str, int] = {}
    for v in net.vertices:
        if v.id in receivers:
            layer[v.id] = 3
        elif v.id in senders:
            layer[v.id] = 0
        else:
            d = max(dist[v.id], 1)
            if d > 2:
                raise NonLayerableError(
                    f"vertex {v.id!r} sits {d} hops deep; no 3-layer form"
                )
            layer[v.id] = d

    def head_layer(vid: str) -> int:
        if vid in receivers:
            return 3
        if vid in senders:
            # channels into a sender terminate at its relay copy
            d = dist[vid]
            if d > 2:
                raise NonLayerableError(
                    f"sender {vid!r} sits {d} hops deep; no 3-layer form"
                )
            return max(d, 1)
        return layer[vid]

    copies: dict[tuple[str, int], str] = {}
    new_vertices: list[Vertex] = list(net.vertices)
    new_edges: list[Edge] = []
    unlimited: list[str] = []
    layers_out: dict[str, int] = dict(layer)

    def copy_at(vid: str, lay: int) -> str:
        if lay == layer[vid]:
            return vid
        if lay < 1 or lay > 2:
            raise NonLayerableError(
                f"vertex {vid!r} would need a copy outside the relay layers"
            )
        key = (vid, lay)
        if key not in copies:
            cid = f"{vid}@{lay}"
            copies[key] = cid
            new_vertices.append(Vertex(cid, "helper"))
            layers_out[cid] = lay
            eid = f"__dup_{cid}"
            new_edges.append(Edge(eid, vid, cid, UNLIMITED))
            unlimited.append(eid)
        return copies[key]

    for e in net.edges:
        hl = head_layer(e.head)
        head = copy_at(e.head, hl) if e.head not in receivers else e.head
        tail = copy_at(e.tail, hl - 1)
        new_edges.append(Edge(e.id, tail, head, e.capacity))

    duplicates = {}
    for (vid, _lay), cid in copies.items():
        duplicates.setdefault(vid, [vid])
        duplicates[vid].append(cid)
    layered = build_network(new_vertices, new_edges, net.pairs,
                            name=net.name + "+layered" if net.name else "layered")
    return LayeredNetwork(
        original=net,
        network=layered,
        layers=layers_out,
        duplicates={k: tuple(v) for k, v in duplicates.items()},
        unlimited_edges=tuple(unlimited),
    )
