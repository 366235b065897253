"""Bundled reference regions for the example networks.

Each fixture is the proven achievable region of one network/scenario
combination, stored as JSON with provenance "fixture".  The facets that do
not follow from generic cut bounds are the instance-specific ones whose
entropic justification is exercised by the protocol audits.
"""

from __future__ import annotations

from importlib import resources

from .polytope import RatePolytope, from_json

FIXTURE_NAMES = (
    "butterfly_unassisted",
    "butterfly_forward",
    "butterfly_backward",
    "butterfly_ent_classical",
    "butterfly_ent_quantum",
    "crown_unassisted",
    "crown_forward",
    "crown_backward",
)


def fixture_region(name: str) -> RatePolytope:
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}")
    text = (
        resources.files("qnetflow")
        .joinpath("fixtures", f"{name}.json")
        .read_text(encoding="utf-8")
    )
    return from_json(text)
