import random
from fractions import Fraction

from qnetflow.network import Edge, Vertex, build_network


def random_two_pair_network(rng: random.Random, n_helpers=4, n_edges=12,
                            connected=True):
    """Random unit-capacity digraph on 2 pairs plus helpers."""
    names = ["A1", "A2", "B1", "B2"] + [f"H{i}" for i in range(1, n_helpers + 1)]
    vertices = [
        Vertex("A1", "sender", 1), Vertex("A2", "sender", 2),
        Vertex("B1", "receiver", 1), Vertex("B2", "receiver", 2),
    ] + [Vertex(f"H{i}", "helper") for i in range(1, n_helpers + 1)]
    candidates = [(t, h) for t in names for h in names if t != h]
    while True:
        arcs = rng.sample(candidates, n_edges)
        if not connected or _undirected_connected(names, arcs):
            break
    edges = [Edge(f"e{i}", t, h, Fraction(1)) for i, (t, h) in enumerate(arcs)]
    return build_network(vertices, edges, [("A1", "B1"), ("A2", "B2")])


def _undirected_connected(names, arcs):
    adj = {v: set() for v in names}
    for t, h in arcs:
        adj[t].add(h)
        adj[h].add(t)
    seen = {names[0]}
    stack = [names[0]]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(names)
