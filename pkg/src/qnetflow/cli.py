"""Batch command-line front end.

Subcommands: analyze, simulate, two-pair, certify-shallow, eoa,
multicast-rate.  Networks are JSON files or ``builtin:<name>``.  Output is
deterministic JSON (or CSV for region vertices).  Exit codes: 0 success,
1 input error, 2 exactness required but bounds gap, 3 fidelity failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import fixtures
from .assistance import AssistanceError, AssistanceInstance, eoa_regularized, merging_ledger
from .network import NetworkError, Scenario, load_network
from .polytope import PolytopeError, RatePolytope, certify, equal, from_json
from .protocols import (
    ProtocolError,
    run_protocol,
    script_from_json,
    verify_protocol,
)
from .regions import (
    RegionError,
    cut_outer_bounds,
    ent_assisted_region,
    classical_multicast_rate,
    inner_region,
    outer_region,
    two_pair_back_exact,
    _default_subsets,
)
from .shallow import certify_routing_optimal
from .states import StateError, state_from_json

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_GAP = 2
EXIT_FIDELITY = 3


class CliInputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliInputError(message)


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _load_fixture(path: str) -> RatePolytope:
    if path.startswith("fixture:"):
        return fixtures.fixture_region(path.split(":", 1)[1])
    with open(path, "r", encoding="utf-8") as fh:
        return from_json(fh.read())


def _parse_subsets(raw: list[str]) -> list[tuple[int, ...]]:
    out = []
    for item in raw:
        out.append(tuple(int(p) for p in item.split(",") if p))
    return out


def cmd_analyze(args) -> int:
    net = load_network(args.network)
    scenario = Scenario.from_string(args.scenario)
    fixture = _load_fixture(args.fixture) if args.fixture else None

    if scenario is Scenario.ENT_ASSISTED:
        rep = ent_assisted_region(net, fixture)
        doc = {
            "network": net.name or args.network,
            "scenario": scenario.value,
            "classical_outer": rep.classical_outer.to_dict(),
            "classical_inner": rep.classical_inner.to_dict(),
            "quantum_region": rep.quantum_region.to_dict(),
            "certification": "exact" if rep.exact else "gap",
            "gap_direction": (
                [str(x) for x in rep.gap_direction] if rep.gap_direction else None
            ),
        }
        if args.format == "csv":
            sys.stdout.write(rep.quantum_region.vertices_csv())
        else:
            _emit(doc)
        if args.require_exact and not rep.exact:
            return EXIT_GAP
        return EXIT_OK

    subsets = _default_subsets(net.k)
    for extra in _parse_subsets(args.subset):
        if extra not in subsets:
            subsets.append(extra)
    bounds = cut_outer_bounds(net, scenario, subsets)
    outer = outer_region(net, scenario, subsets)
    inner = inner_region(net, scenario, args.max_len)

    cert_doc = None
    exactness = "gap"
    status, direction = certify(inner, outer)
    if status == "exact":
        exactness = "exact"
    if scenario is Scenario.UNASSISTED:
        cert = certify_routing_optimal(net)
        cert_doc = cert.to_dict()
        if cert.verdict == "certified":
            exactness = "exact"
            inner = inner.with_provenance("exact")
    fixture_match = None
    if fixture is not None:
        fixture_match = equal(inner, fixture)
        if fixture_match:
            exactness = "exact"

    doc = {
        "network": net.name or args.network,
        "scenario": scenario.value,
        "outer_bounds": [
            {
                "subset": list(b.subset),
                "bound": str(b.bound),
                "cut_side": sorted(b.cut.side),
                "mode": b.mode,
                "exhaustive": b.exhaustive,
            }
            for b in bounds
        ],
        "outer_region": outer.to_dict(),
        "inner_region": inner.to_dict(),
        "certification": exactness,
        "gap_direction": [str(x) for x in direction] if direction else None,
        "shallow_certificate": cert_doc,
        "fixture_match": fixture_match,
    }
    if args.format == "csv":
        sys.stdout.write(inner.vertices_csv())
    else:
        _emit(doc)
    if args.require_exact and exactness != "exact":
        return EXIT_GAP
    return EXIT_OK


def cmd_simulate(args) -> int:
    net = load_network(args.network)
    scenario = Scenario.from_string(args.scenario)
    with open(args.script, "r", encoding="utf-8") as fh:
        script = script_from_json(fh.read())
    expected = [Fraction(r) for r in args.rates.split(",")] if args.rates else None
    if expected is None:
        result = run_protocol(net, scenario, script)
        _emit({"ledger": result.ledger.to_dict()})
        return EXIT_OK
    report = verify_protocol(net, scenario, script, expected)
    _emit(report.to_dict())
    if not all(f >= 1 - 1e-9 for f in report.fidelities.values()):
        return EXIT_FIDELITY
    if not report.passed:
        return EXIT_FIDELITY
    return EXIT_OK


def cmd_two_pair(args) -> int:
    net = load_network(args.network)
    region, decomp = two_pair_back_exact(net)
    _emit({
        "network": net.name or args.network,
        "region": region.to_dict(),
        "decomposition": {
            "vertical_side": sorted(decomp.vertical_side),
            "horizontal_side": sorted(decomp.horizontal_side),
            "bundles": {
                "v1": str(decomp.v1), "v2": str(decomp.v2),
                "h1": str(decomp.h1), "h2": str(decomp.h2),
                "d1": str(decomp.d1), "d2": str(decomp.d2),
            },
            "bottlenecks": {
                "a1": str(decomp.a1), "a2": str(decomp.a2),
                "b1": str(decomp.b1), "b2": str(decomp.b2),
            },
        },
    })
    return EXIT_OK


def cmd_certify_shallow(args) -> int:
    net = load_network(args.network)
    cert = certify_routing_optimal(net)
    _emit(cert.to_dict())
    return EXIT_OK


def cmd_eoa(args) -> int:
    with open(args.state, "r", encoding="utf-8") as fh:
        state = state_from_json(fh.read())
    inst = AssistanceInstance(state, args.party_a, args.party_b)
    value, partition = eoa_regularized(inst)
    doc = {"value": value, "partition": list(partition)}
    if args.ledger:
        tc = [h for h in inst.helpers if h not in partition]
        doc["ledger"] = merging_ledger(inst, partition, tc).to_dict()
    _emit(doc)
    return EXIT_OK


def cmd_multicast(args) -> int:
    net = load_network(args.network)
    receivers = args.receivers.split(",")
    rate = classical_multicast_rate(net, args.source, receivers)
    _emit({"source": args.source, "receivers": sorted(receivers),
           "rate": str(rate)})
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="qnetflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="outer/inner rate regions")
    p.add_argument("network")
    p.add_argument("--scenario", default="unassisted")
    p.add_argument("--max-len", type=int, default=None, dest="max_len")
    p.add_argument("--subset", action="append", default=[],
                   help="extra pair subset, e.g. 1,3 (repeatable)")
    p.add_argument("--fixture", default=None,
                   help="region JSON path or fixture:<name>")
    p.add_argument("--require-exact", action="store_true", dest="require_exact")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("simulate", help="run/verify a protocol script")
    p.add_argument("network")
    p.add_argument("script")
    p.add_argument("--scenario", default="unassisted")
    p.add_argument("--rates", default=None,
                   help="expected rates, e.g. 1/2,1")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("two-pair", help="exact back-assisted 2-pair region")
    p.add_argument("network")
    p.set_defaults(fn=cmd_two_pair)

    p = sub.add_parser("certify-shallow", help="routing-optimality certificate")
    p.add_argument("network")
    p.set_defaults(fn=cmd_certify_shallow)

    p = sub.add_parser("eoa", help="regularized entanglement of assistance")
    p.add_argument("state")
    p.add_argument("party_a")
    p.add_argument("party_b")
    p.add_argument("--ledger", action="store_true")
    p.set_defaults(fn=cmd_eoa)

    p = sub.add_parser("multicast-rate", help="coded multicast inner bound")
    p.add_argument("network")
    p.add_argument("source")
    p.add_argument("receivers", help="comma-separated receiver vertices")
    p.set_defaults(fn=cmd_multicast)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except (CliInputError, NetworkError, RegionError, PolytopeError,
            ProtocolError, StateError, AssistanceError, OSError,
            ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
