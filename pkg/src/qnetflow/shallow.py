"""Certification that routing alone attains the unassisted region.

A network qualifies when receivers are pure sinks, no simple sender-to-
receiver path exceeds three hops, and the layered form contains no
sender-anchored four-cycle through two distinct first-layer relays.  On
such networks the fractional routing region is the full achievable region,
so the certificate upgrades its provenance to exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from .network import Network, NonLayerableError, Scenario, normalize_layers
from .polytope import RatePolytope
from .regions import inner_region

SEARCH_BUDGET = 1_000_000


class ShallowSearchBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class ShallowCertificate:
    receivers_are_sinks: bool
    max_path_len: int
    forbidden_4cycles: tuple[tuple[str, str, str, str], ...]
    layering_failure: str | None = None
    verdict: str | None = None  # "certified" | "not_applicable"
    reasons: tuple[str, ...] = ()
    region: RatePolytope | None = None

    def conditions_hold(self) -> bool:
        return (
            self.receivers_are_sinks
            and self.max_path_len <= 3
            and not self.forbidden_4cycles
            and self.layering_failure is None
        )

    def to_dict(self) -> dict:
        return {
            "receivers_are_sinks": self.receivers_are_sinks,
            "max_path_len": self.max_path_len,
            "forbidden_4cycles": [list(c) for c in self.forbidden_4cycles],
            "layering_failure": self.layering_failure,
            "verdict": self.verdict,
            "reasons": list(self.reasons),
            "region": self.region.to_dict() if self.region else None,
        }


def _longest_simple_path(net: Network) -> int:
    """Longest simple sender-to-receiver path, by bounded exhaustive DFS."""
    senders = [net.sender(i) for i in range(1, net.k + 1)]
    receivers = {net.receiver(i) for i in range(1, net.k + 1)}
    budget = SEARCH_BUDGET
    best = 0

    def dfs(v, visited, length):
        nonlocal budget, best
        budget -= 1
        if budget <= 0:
            raise ShallowSearchBudgetError("path search budget exceeded")
        if v in receivers:
            best = max(best, length)
        for e in sorted(net.out_edges(v), key=lambda e: (e.head, e.id)):
            if e.head in visited:
                continue
            dfs(e.head, visited | {e.head}, length + 1)

    for s in senders:
        dfs(s, {s}, 0)
    return best


def _forbidden_4cycles(net: Network):
    """Sender-anchored 4-cycles through two distinct layer-1 relays."""
    layered = normalize_layers(net)
    lnet = layered.network
    lay = layered.layers
    senders = [lnet.sender(i) for i in range(1, lnet.k + 1)]
    found = []
    for a in senders:
        relays = sorted(
            e.head for e in lnet.out_edges(a) if lay.get(e.head) == 1
        )
        for i in range(len(relays)):
            for j in range(i + 1, len(relays)):
                c1a, c1b = relays[i], relays[j]
                if layered.original_of(c1a) == layered.original_of(c1b):
                    continue  # copies of one party cannot close a cycle
                joint = sorted(
                    {e.head for e in lnet.out_edges(c1a) if lay.get(e.head) == 2}
                    & {e.head for e in lnet.out_edges(c1b) if lay.get(e.head) == 2}
                )
                for c2 in joint:
                    found.append((a, c1a, c2, c1b))
    return tuple(sorted(found))


def check_conditions(net: Network) -> ShallowCertificate:
    """Evaluate the three shallow-network hypotheses (no verdict applied)."""
    receivers = {net.receiver(i) for i in range(1, net.k + 1)}
    sinks = all(not net.out_edges(r) for r in receivers)
    max_len = _longest_simple_path(net)
    cycles: tuple = ()
    failure = None
    try:
        cycles = _forbidden_4cycles(net)
    except NonLayerableError as exc:
        failure = str(exc)
    return ShallowCertificate(
        receivers_are_sinks=sinks,
        max_path_len=max_len,
        forbidden_4cycles=cycles,
        layering_failure=failure,
    )


def certify_routing_optimal(net: Network) -> ShallowCertificate:
    """Certify the unassisted region as the routing region when possible."""
    cert = check_conditions(net)
    reasons = []
    if not cert.receivers_are_sinks:
        reasons.append("receivers have outgoing channels")
    if cert.max_path_len > 3:
        reasons.append(
            f"longest sender-receiver path has {cert.max_path_len} hops"
        )
    if cert.forbidden_4cycles:
        reasons.append("forbidden 4-cycle")
    if cert.layering_failure is not None:
        reasons.append(f"no layered form: {cert.layering_failure}")
    if reasons:
        return ShallowCertificate(
            cert.receivers_are_sinks,
            cert.max_path_len,
            cert.forbidden_4cycles,
            cert.layering_failure,
            verdict="not_applicable",
            reasons=tuple(reasons),
        )
    region = inner_region(net, Scenario.UNASSISTED)
    return ShallowCertificate(
        cert.receivers_are_sinks,
        cert.max_path_len,
        cert.forbidden_4cycles,
        cert.layering_failure,
        verdict="certified",
        region=region.with_provenance("exact"),
    )
