import random

import numpy as np
import pytest

from qnetflow.states import (
    DensityOperator,
    PureStateVector,
    QubitLabel,
    StateError,
    apply,
    basis_state,
    bell_pair,
    coherent_info,
    cond_entropy,
    controlled,
    entanglement_entropy,
    entropy,
    fidelity,
    ghz_state,
    move_register,
    mutual_info,
    partial_trace,
    product_with,
    sample_measurement,
    state_from_json,
    state_to_json,
    trace_distance,
    zero_state,
)

TOL = 1e-9


def q(party, reg, idx=0):
    return QubitLabel(party, reg, idx)


def random_pure(rng, labels):
    n = len(labels)
    vec = np.array(
        [rng.gauss(0, 1) + 1j * rng.gauss(0, 1) for _ in range(2 ** n)]
    )
    return PureStateVector(tuple(labels), vec / np.linalg.norm(vec))


class TestGates:
    def test_hadamard(self):
        st = apply(zero_state([q("A", "x")]), "H", [q("A", "x")])
        assert np.allclose(st.amplitudes, [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_cnot(self):
        st = basis_state([q("A", "x"), q("A", "y")], "10")
        st = apply(st, "CX", [q("A", "x"), q("A", "y")])
        assert np.allclose(st.amplitudes, [0, 0, 0, 1])  # |11>

    def test_non_unitary_rejected(self):
        with pytest.raises(StateError, match="unitary"):
            apply(zero_state([q("A", "x")]), np.array([[1, 0], [1, 1]]),
                  [q("A", "x")])

    def test_unknown_register(self):
        with pytest.raises(StateError):
            apply(zero_state([q("A", "x")]), "X", [q("A", "nope")])

    def test_move_round_trip_is_identity(self):
        st = bell_pair(q("A", "x"), q("B", "y"))
        moved = move_register(st, [q("B", "y")], "C")
        back = move_register(moved, [q("C", "y")], "B")
        assert back.labels == st.labels
        assert np.array_equal(back.amplitudes, st.amplitudes)

    def test_controlled_matches_explicit(self):
        st = basis_state([q("A", "c"), q("A", "t")], "10")
        got = controlled(st, [q("A", "c")], "X", [q("A", "t")])
        assert np.allclose(got.amplitudes, [0, 0, 0, 1])


class TestEntropies:
    def test_epr_half(self):
        st = bell_pair(q("A", "x"), q("B", "y"))
        assert abs(entropy(st, [q("A", "x")]) - 1) < TOL

    def test_pure_state_complement_symmetry(self):
        rng = random.Random(3)
        labels = [q("A", "x"), q("B", "y"), q("C", "z"), q("D", "w")]
        st = random_pure(rng, labels)
        for r in range(1, 4):
            part = labels[:r]
            comp = labels[r:]
            assert abs(entropy(st, part) - entropy(st, comp)) < TOL

    def test_ghz_mutual_and_coherent_info(self):
        labels = [q("P1", "g"), q("P2", "g"), q("P3", "g")]
        st = ghz_state(labels)
        assert abs(entropy(st, labels[1:2]) - 1) < TOL
        assert abs(entropy(st, labels[:2]) - 1) < TOL
        assert abs(mutual_info(st, labels[:1], labels[1:2]) - 1) < TOL
        assert abs(coherent_info(st, labels[:1], labels[1:2])) < TOL

    def test_cond_entropy_epr_is_minus_one(self):
        st = bell_pair(q("A", "x"), q("B", "y"))
        assert abs(cond_entropy(st, [q("A", "x")], [q("B", "y")]) + 1) < TOL

    def test_additivity_over_products(self):
        rng = random.Random(5)
        a = random_pure(rng, [q("A", "x"), q("B", "y")])
        b = random_pure(rng, [q("C", "z"), q("D", "w")])
        st = product_with(a, b)
        lhs = entropy(st, [q("A", "x"), q("C", "z")])
        rhs = entropy(a, [q("A", "x")]) + entropy(b, [q("C", "z")])
        assert abs(lhs - rhs) < TOL

    def test_strong_subadditivity_random(self):
        rng = random.Random(11)
        labels = [q("A", "a"), q("B", "b"), q("C", "c")]
        for _ in range(20):
            st = random_pure(rng, labels + [q("E", "e")])
            ab = entropy(st, labels[:2])
            bc = entropy(st, labels[1:])
            abc = entropy(st, labels)
            b = entropy(st, labels[1:2])
            assert ab + bc >= abc + b - TOL

    def test_local_unitary_invariance(self):
        rng = random.Random(13)
        labels = [q("A", "a"), q("B", "b"), q("C", "c")]
        st = random_pure(rng, labels)
        before = entropy(st, labels[:1])
        rotated = apply(st, "H", [labels[1]])
        rotated = apply(rotated, "Y", [labels[2]])
        assert abs(entropy(rotated, labels[:1]) - before) < TOL
        moved = move_register(st, [labels[2]], "Z")
        assert abs(entropy(moved, labels[:1]) - before) < TOL

    def test_density_operator_entropy(self):
        st = bell_pair(q("A", "x"), q("B", "y"))
        rho = partial_trace(st, [q("A", "x")])
        assert isinstance(rho, DensityOperator)
        assert abs(entropy(rho) - 1) < TOL


class TestDistances:
    def test_entanglement_of_epr(self):
        st = bell_pair(q("A", "x"), q("B", "y"))
        assert abs(entanglement_entropy(st, [q("A", "x")]) - 1) < TOL

    def test_self_fidelity(self):
        rng = random.Random(17)
        st = random_pure(rng, [q("A", "x"), q("B", "y")])
        assert abs(fidelity(st, st) - 1) < TOL

    def test_fidelity_orthogonal(self):
        a = basis_state([q("A", "x")], "0")
        b = basis_state([q("A", "x")], "1")
        assert fidelity(a, b) < TOL

    def test_trace_distance_epr_vs_product(self):
        # independent 2x2 oracle: both states live in span{|00>, |11>};
        # difference has eigenvalues +-sqrt(det) with det = -(1/4 + 1/4)
        labels = [q("A", "x"), q("B", "y")]
        epr = bell_pair(*labels)
        prod = basis_state(labels, "00")
        rho = np.outer(epr.amplitudes, epr.amplitudes.conj())
        sig = np.outer(prod.amplitudes, prod.amplitudes.conj())
        oracle = 0.5 * np.abs(np.linalg.eigvalsh(rho - sig)).sum()
        assert abs(oracle - np.sqrt(0.5)) < TOL
        assert abs(trace_distance(epr, prod) - oracle) < TOL

    def test_trace_distance_label_permutation(self):
        a = bell_pair(q("A", "x"), q("B", "y"))
        b = PureStateVector(
            (q("B", "y"), q("A", "x")), a.amplitudes.copy()
        )
        assert trace_distance(a, b) < 1e-7


class TestSamplingAndJson:
    def test_sampling_collapses(self):
        rng = random.Random(0)
        st = bell_pair(q("A", "x"), q("B", "y"))
        bits, collapsed = sample_measurement(st, [q("A", "x")], rng)
        assert bits in ("0", "1")
        assert abs(entropy(collapsed, [q("B", "y")])) < TOL

    def test_json_round_trip(self):
        rng = random.Random(23)
        st = random_pure(rng, [q("A", "x"), q("B", "y"), q("C", "z")])
        again = state_from_json(state_to_json(st))
        assert again.labels == st.labels
        assert fidelity(again, st) > 1 - 1e-9

    def test_normalization_guard(self):
        bad = np.zeros(2, dtype=complex)
        bad[0] = 2.0
        with pytest.raises(StateError, match="normalized"):
            PureStateVector((q("A", "x"),), bad)
