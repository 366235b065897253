"""Regularized entanglement of assistance and the merging ebit ledger.

For a multiparty pure state with two distinguished parties, helpers measure
and broadcast, leaving the distinguished pair with min over helper subsets T
of S(A u T) ebits per copy.  The ledger variant accounts, partition by
partition, how many ebits each helper group generates (positive) or consumes
(negative) along the way.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import chain, combinations
from typing import Sequence

from .states import PureStateVector, QubitLabel, entropy

TOL = 1e-9
MAX_QUBITS = 14


class AssistanceError(ValueError):
    pass


@dataclass(frozen=True)
class AssistanceInstance:
    """Pure multiparty state with distinguished parties A and B."""

    state: PureStateVector
    party_a: str
    party_b: str

    def __post_init__(self):
        parties = {lab.party for lab in self.state.labels}
        for p in (self.party_a, self.party_b):
            if p not in parties:
                raise AssistanceError(f"party {p!r} holds no qubits")
        if self.party_a == self.party_b:
            raise AssistanceError("distinguished parties must differ")
        if self.state.n_qubits > MAX_QUBITS:
            raise AssistanceError(
                f"dense simulation guard: more than {MAX_QUBITS} qubits"
            )

    @property
    def helpers(self) -> tuple[str, ...]:
        return tuple(sorted(
            {lab.party for lab in self.state.labels}
            - {self.party_a, self.party_b}
        ))

    def qubits_of(self, parties) -> list[QubitLabel]:
        parties = set(parties)
        return [lab for lab in self.state.labels if lab.party in parties]


def _subsets(items: Sequence[str]):
    """Subsets ordered by size then lexicographically."""
    return chain.from_iterable(
        combinations(items, n) for n in range(len(items) + 1)
    )


def eoa_regularized(inst: AssistanceInstance) -> tuple[float, tuple[str, ...]]:
    """min over helper subsets T of min(S(A u T), S(B u T^c)), in ebits.

    For a pure global state both entropies agree for every T (asserted);
    ties break toward the smallest, lexicographically first subset.
    """
    helpers = inst.helpers
    best = None
    best_t = None
    for t in _subsets(helpers):
        tc = tuple(h for h in helpers if h not in t)
        side_a = entropy(inst.state, inst.qubits_of({inst.party_a, *t}))
        side_b = entropy(inst.state, inst.qubits_of({inst.party_b, *tc}))
        if abs(side_a - side_b) > TOL:
            raise AssistanceError(
                f"purity violated: S(AT)={side_a} differs from S(BT^c)={side_b}"
            )
        value = min(side_a, side_b)
        if best is None or value < best - TOL:
            best = value
            best_t = t
    return best, best_t


@dataclass(frozen=True)
class LedgerEntry:
    parties: tuple[str, ...]
    ebits: float
    consumed: bool  # negative entries consume entanglement


@dataclass(frozen=True)
class MergingLedger:
    pair_ebits: float  # between A and B
    group_t: LedgerEntry
    group_tc: LedgerEntry
    per_party: tuple[LedgerEntry, ...]
    advisory: str | None

    def to_dict(self) -> dict:
        def entry(e):
            return {"parties": list(e.parties), "ebits": e.ebits,
                    "consumed": e.consumed}

        return {
            "pair_ebits": self.pair_ebits,
            "group_T": entry(self.group_t),
            "group_Tc": entry(self.group_tc),
            "per_party": [entry(e) for e in self.per_party],
            "advisory": self.advisory,
        }


def merging_ledger(
    inst: AssistanceInstance,
    t_order: Sequence[str],
    tc_order: Sequence[str],
) -> MergingLedger:
    """Ebit ledger for handing the helpers off in a fixed order.

    Per copy of the state: S(A T) ebits end up between A and B; the T group
    nets -S(T|A) ebits with A and the complement nets -S(T^c|B) with B, with
    per-party amounts -S(T_i | A T_1..T_{i-1}) (and mirrored for T^c).  The
    chain rule makes the per-party amounts add up to their group totals;
    this is asserted within 1e-9.
    """
    t_order = tuple(t_order)
    tc_order = tuple(tc_order)
    if sorted(t_order + tc_order) != sorted(inst.helpers):
        raise AssistanceError("partition must cover every helper exactly once")

    st = inst.state
    a_qubits = inst.qubits_of({inst.party_a})
    b_qubits = inst.qubits_of({inst.party_b})
    t_qubits = inst.qubits_of(set(t_order))
    tc_qubits = inst.qubits_of(set(tc_order))

    pair_ebits = entropy(st, a_qubits + t_qubits)
    minus_s_t_given_a = -(entropy(st, a_qubits + t_qubits) - entropy(st, a_qubits))
    minus_s_tc_given_b = -(entropy(st, b_qubits + tc_qubits) - entropy(st, b_qubits))

    def chain_entries(order, anchor_qubits, anchor):
        entries = []
        seen: list[QubitLabel] = list(anchor_qubits)
        for party in order:
            q = inst.qubits_of({party})
            amount = -(entropy(st, seen + q) - entropy(st, seen))
            entries.append(LedgerEntry((party, anchor), amount, amount < -TOL))
            seen = seen + q
        return entries

    per_t = chain_entries(t_order, a_qubits, inst.party_a)
    per_tc = chain_entries(tc_order, b_qubits, inst.party_b)

    for entries, total, side in (
        (per_t, minus_s_t_given_a, "T"),
        (per_tc, minus_s_tc_given_b, "T^c"),
    ):
        if abs(sum(e.ebits for e in entries) - total) > TOL:
            raise AssistanceError(f"chain rule violated on the {side} side")

    advisory = None
    negatives = [e for e in per_t + per_tc if e.consumed]
    if not tc_order and negatives:
        advisory = (
            "empty complement: the consuming entries can be avoided by "
            "merging without back entanglement"
        )
    return MergingLedger(
        pair_ebits=pair_ebits,
        group_t=LedgerEntry(t_order, minus_s_t_given_a,
                            minus_s_t_given_a < -TOL),
        group_tc=LedgerEntry(tc_order, minus_s_tc_given_b,
                             minus_s_tc_given_b < -TOL),
        per_party=tuple(per_t + per_tc),
        advisory=advisory,
    )
