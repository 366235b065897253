import random

import numpy as np
import pytest

from qnetflow.assistance import (
    AssistanceError,
    AssistanceInstance,
    eoa_regularized,
    merging_ledger,
)
from qnetflow.states import PureStateVector, QubitLabel, basis_state, ghz_state

TOL = 1e-9


def q(party, idx=0):
    return QubitLabel(party, "m", idx)


def random_state(rng, parties):
    labels = tuple(q(p) for p in parties)
    vec = np.array(
        [rng.gauss(0, 1) + 1j * rng.gauss(0, 1) for _ in range(2 ** len(labels))]
    )
    return PureStateVector(labels, vec / np.linalg.norm(vec))


class TestRegularized:
    def test_ghz_value_one_empty_tiebreak(self):
        inst = AssistanceInstance(ghz_state([q("A"), q("B"), q("C")]), "A", "B")
        value, partition = eoa_regularized(inst)
        assert abs(value - 1) < TOL
        assert partition == ()  # empty set wins the tie against {C}

    def test_product_state_zero(self):
        st = basis_state((q("A"), q("B"), q("C")), "000")
        value, _ = eoa_regularized(AssistanceInstance(st, "A", "B"))
        assert abs(value) < TOL

    def test_no_helpers_degenerates_to_bipartite_entanglement(self):
        rng = random.Random(2)
        st = random_state(rng, ["A", "B"])
        from qnetflow.states import entropy

        value, partition = eoa_regularized(AssistanceInstance(st, "A", "B"))
        assert partition == ()
        assert abs(value - entropy(st, [q("A")])) < TOL

    def test_swap_of_distinguished_parties(self):
        rng = random.Random(4)
        for _ in range(5):
            st = random_state(rng, ["A", "B", "C", "D"])
            v1, _ = eoa_regularized(AssistanceInstance(st, "A", "B"))
            v2, _ = eoa_regularized(AssistanceInstance(st, "B", "A"))
            assert abs(v1 - v2) < TOL

    def test_local_unitary_invariance(self):
        from qnetflow.states import apply

        rng = random.Random(6)
        st = random_state(rng, ["A", "B", "C"])
        base, _ = eoa_regularized(AssistanceInstance(st, "A", "B"))
        for party in ("A", "B", "C"):
            theta = rng.uniform(0, np.pi)
            u = np.array([[np.cos(theta), -np.sin(theta)],
                          [np.sin(theta), np.cos(theta)]], dtype=complex)
            rotated = apply(st, u, [q(party)])
            value, _ = eoa_regularized(AssistanceInstance(rotated, "A", "B"))
            assert abs(value - base) < TOL

    def test_guards(self):
        st = basis_state((q("A"), q("B")), "00")
        with pytest.raises(AssistanceError):
            AssistanceInstance(st, "A", "A")
        with pytest.raises(AssistanceError):
            AssistanceInstance(st, "A", "Z")


class TestLedger:
    def test_ghz_single_helper(self):
        inst = AssistanceInstance(ghz_state([q("A"), q("B"), q("C")]), "A", "B")
        ledger = merging_ledger(inst, ("C",), ())
        assert abs(ledger.pair_ebits - 1) < TOL  # S(AC) = 1
        assert abs(ledger.group_t.ebits) < TOL   # -S(C|A) = 0
        assert not ledger.group_t.consumed

    def test_product_state_all_zero(self):
        st = basis_state((q("A"), q("B"), q("C"), q("D")), "0000")
        inst = AssistanceInstance(st, "A", "B")
        ledger = merging_ledger(inst, ("C",), ("D",))
        assert abs(ledger.pair_ebits) < TOL
        assert all(abs(e.ebits) < TOL for e in ledger.per_party)

    def test_chain_rule_on_random_states(self):
        rng = random.Random(8)
        for trial in range(20):
            parties = ["A", "B", "C", "D"] + (["E"] if trial % 2 else [])
            st = random_state(rng, parties)
            inst = AssistanceInstance(st, "A", "B")
            helpers = inst.helpers
            cutpoint = rng.randint(0, len(helpers))
            t = helpers[:cutpoint]
            tc = helpers[cutpoint:]
            ledger = merging_ledger(inst, t, tc)  # chain identity asserted inside
            t_total = sum(e.ebits for e in ledger.per_party[:len(t)])
            assert abs(t_total - ledger.group_t.ebits) < TOL

    def test_partition_must_cover(self):
        inst = AssistanceInstance(
            ghz_state([q("A"), q("B"), q("C"), q("D")]), "A", "B"
        )
        with pytest.raises(AssistanceError, match="cover"):
            merging_ledger(inst, ("C",), ())

    def test_empty_complement_advisory(self):
        # a state where handing all helpers to A's side consumes entanglement
        rng = random.Random(12)
        for _ in range(10):
            st = random_state(rng, ["A", "B", "C", "D"])
            inst = AssistanceInstance(st, "A", "B")
            ledger = merging_ledger(inst, ("C", "D"), ())
            if any(e.consumed for e in ledger.per_party):
                assert ledger.advisory is not None
                break
        else:
            pytest.skip("no consuming draw found")
