import pytest

from qnetflow.network import Scenario, builtin_network
from qnetflow.protocols import (
    BUILTIN_PROTOCOLS,
    CreateEbit,
    Measure,
    MessageSpec,
    ProtocolError,
    ProtocolScript,
    SendClassical,
    SendQuantum,
    builtin_protocol,
    butterfly_xor_scheme,
    delivered_bits,
    run_classical_linear_protocol,
    run_protocol,
    script_from_dict,
    script_to_dict,
    secret_sharing_audit,
    verify_protocol,
)

FID = 1 - 1e-9


def routing_script(edge_chain, n_calls=1, pair=1, reg="m1"):
    steps = tuple(SendQuantum(eid, call, reg) for eid, call in edge_chain)
    return ProtocolScript(n_calls, (MessageSpec(pair, reg),), steps)


class TestLegality:
    def test_capacity_exceeded_same_call(self):
        net = builtin_network("butterfly")
        script = ProtocolScript(
            1,
            (MessageSpec(1, "m1"), MessageSpec(2, "m2")),
            (
                SendQuantum("A1C1", 0, "m1"),
                SendQuantum("C1C2", 0, "m1"),
                SendQuantum("A2C1", 0, "m2"),
                SendQuantum("C1C2", 0, "m2"),
            ),
        )
        with pytest.raises(ProtocolError, match="capacity exceeded"):
            run_protocol(net, Scenario.UNASSISTED, script)

    def test_unowned_register(self):
        net = builtin_network("butterfly")
        script = routing_script([("C1C2", 0)])  # m1 still at A1
        with pytest.raises(ProtocolError, match="cannot act|owned"):
            run_protocol(net, Scenario.UNASSISTED, script)

    def test_free_classical_forbidden_unassisted(self):
        net = builtin_network("butterfly")
        script = ProtocolScript(
            1,
            (MessageSpec(1, "m1"),),
            (Measure("A1", ("m1",), "computational"),
             SendClassical("A1", "B1", "m1")),
        )
        with pytest.raises(ProtocolError, match="not permitted"):
            run_protocol(net, Scenario.UNASSISTED, script)

    def test_forward_classical_requires_reachability(self):
        net = builtin_network("butterfly")
        # no directed path B1 -> A1
        script = ProtocolScript(
            1,
            (MessageSpec(1, "m1"),),
            (SendQuantum("A1C1", 0, "m1"),
             SendQuantum("C1C2", 0, "m1"),
             SendQuantum("C2B1", 0, "m1"),
             Measure("B1", ("m1",), "computational"),
             SendClassical("B1", "A1", "m1")),
        )
        with pytest.raises(ProtocolError, match="not permitted"):
            run_protocol(net, Scenario.FORWARD, script)
        # the reverse direction is fine under backward assistance
        run_protocol(net, Scenario.BACKWARD, script)

    def test_nonlocal_ebit_needs_ent_assistance(self):
        net = builtin_network("butterfly")
        script = ProtocolScript(
            1, (), (CreateEbit("A1", "x", "B1", "y"),)
        )
        with pytest.raises(ProtocolError, match="entanglement assistance"):
            run_protocol(net, Scenario.BACKWARD, script)
        result = run_protocol(net, Scenario.ENT_ASSISTED, script)
        assert result.ledger.ebits_created == {("A1", "B1"): 1}

    def test_neighbor_ebit_model(self):
        net = builtin_network("butterfly")
        far = ProtocolScript(1, (), (CreateEbit("A1", "x", "B1", "y"),))
        with pytest.raises(ProtocolError, match="neighbor"):
            run_protocol(net, Scenario.ENT_ASSISTED, far, ebit_model="neighbor")
        near = ProtocolScript(1, (), (CreateEbit("A1", "x", "C1", "y"),))
        run_protocol(net, Scenario.ENT_ASSISTED, near, ebit_model="neighbor")

    def test_call_index_range(self):
        net = builtin_network("butterfly")
        script = routing_script([("A1C1", 2)])
        with pytest.raises(ProtocolError, match="call index"):
            run_protocol(net, Scenario.UNASSISTED, script)


class TestBuiltinProtocols:
    @pytest.mark.parametrize(
        "name",
        [n for n in BUILTIN_PROTOCOLS if n != "superdense"],
    )
    def test_fidelity_and_rates(self, name):
        bp = builtin_protocol(name)
        report = verify_protocol(bp.network, bp.scenario, bp.script, bp.rates)
        assert report.passed
        assert all(f >= FID for f in report.fidelities.values())
        assert report.rates == bp.rates
        assert report.capacities_ok

    def test_superdense_truth_table(self):
        bp = builtin_protocol("superdense")
        for b1 in "01":
            for b2 in "01":
                result = run_protocol(
                    bp.network, bp.scenario, bp.script,
                    message_bits={"in.b1": b1, "in.b2": b2},
                )
                assert delivered_bits(result, "sd.a") == b1
                assert delivered_bits(result, "sd.b") == b2
                assert result.ledger.quantum_uses == {("A1B1", 0): 1}

    def test_roundtrip_composes_identities(self):
        # teleportation riding on superdense-coded corrections: the quantum
        # message survives one channel use plus two ebits
        bp = builtin_protocol("teleport_superdense_roundtrip")
        report = verify_protocol(bp.network, bp.scenario, bp.script, bp.rates)
        assert report.passed
        assert sum(report.ledger.ebits_created.values()) == 2

    def test_broken_script_loses_fidelity(self):
        # drop one teleportation correction (classical send + controlled X)
        from qnetflow.protocols import Controlled

        bp = builtin_protocol("butterfly_backward_zero_two")
        filtered = tuple(
            s for s in bp.script.steps
            if not (isinstance(s, SendClassical) and s.register == "rv1.send")
            and not (isinstance(s, Controlled) and s.control == "rv1.send")
        )
        broken = ProtocolScript(
            bp.script.n_calls, bp.script.messages, filtered, "broken"
        )
        report = verify_protocol(bp.network, bp.scenario, broken, bp.rates)
        assert not report.passed
        assert report.fidelities[2] < FID

    def test_ledger_unchanged_without_references(self):
        bp = builtin_protocol("butterfly_backward_zero_two")
        entangled = run_protocol(bp.network, bp.scenario, bp.script)
        plain = run_protocol(bp.network, bp.scenario, bp.script, inputs="zero")
        assert entangled.ledger.quantum_uses == plain.ledger.quantum_uses
        assert entangled.ledger.classical_messages == plain.ledger.classical_messages

    def test_sampling_matches_deferred_measurement(self):
        bp = builtin_protocol("reverse_edge_teleport")
        for seed in range(4):
            result = run_protocol(bp.network, bp.scenario, bp.script,
                                  sample=True, seed=seed)
            from qnetflow.states import bell_pair, partial_trace, \
                state_fidelity_with_density

            ref = result.references["m1"]
            msg = result.registers["m1"]
            rho = partial_trace(result.final_state, list(ref) + list(msg))
            target = bell_pair(ref[0], msg[0])
            assert state_fidelity_with_density(rho, target) >= FID


class TestAudit:
    def test_butterfly_share_bound(self):
        bp = builtin_protocol("butterfly_unassisted_routing")
        result = run_protocol(bp.network, bp.scenario, bp.script)
        report = secret_sharing_audit(
            result, "transit",
            significant=["m1", "m2"],
            unauthorized=["junk1.send", "junk2.send"],
            rest=["junk1.keep", "junk2.keep"],
        )
        assert report.gamma <= 1e-9
        assert abs(report.secret_entropy - 2) <= 1e-9
        assert report.epsilon_prime <= 1e-9
        assert report.bound_holds

    def test_product_inputs_trivial_bound(self):
        bp = builtin_protocol("butterfly_unassisted_routing")
        result = run_protocol(bp.network, bp.scenario, bp.script, inputs="zero")
        report = secret_sharing_audit(
            result, "transit",
            significant=["m1", "m2"],
            unauthorized=["junk1.send", "junk2.send"],
            rest=["junk1.keep", "junk2.keep"],
        )
        assert report.secret_entropy <= 1e-9
        assert report.bound_holds

    def test_partition_must_cover(self):
        bp = builtin_protocol("butterfly_unassisted_routing")
        result = run_protocol(bp.network, bp.scenario, bp.script)
        with pytest.raises(ProtocolError, match="misses"):
            secret_sharing_audit(result, "transit",
                                 significant=["m1"], unauthorized=[], rest=[])


class TestClassicalCoding:
    def test_butterfly_scheme_delivers_everywhere(self):
        net = builtin_network("butterfly")
        assignments, decoders = butterfly_xor_scheme()
        report = run_classical_linear_protocol(net, assignments, decoders)
        assert report.receiver_gets("B1", "x1")
        assert report.receiver_gets("B2", "x2")

    def test_identity_routing_single_path(self):
        net = builtin_network("path")
        report = run_classical_linear_protocol(
            net, {"A1C": ["x1"], "CB1": ["x1"]}, {"B1": {"x1": ["CB1"]}}
        )
        assert report.receiver_gets("B1", "x1")

    def test_each_edge_deletion_breaks_a_receiver(self):
        net = builtin_network("butterfly")
        assignments, decoders = butterfly_xor_scheme()
        for eid in assignments:
            pruned = {k: v for k, v in assignments.items() if k != eid}
            usable = {
                rcv: {bit: [e for e in eids if e in pruned]
                      for bit, eids in wants.items()}
                for rcv, wants in decoders.items()
            }
            try:
                report = run_classical_linear_protocol(net, pruned, usable)
            except ProtocolError:
                # a downstream symbol lost its input: the scheme is dead
                continue
            broken = ("x1" not in report.decodable.get("B1", ())
                      or "x2" not in report.decodable.get("B2", ()))
            assert broken, f"deleting {eid} should break a receiver"

    def test_causality_violation(self):
        net = builtin_network("butterfly")
        with pytest.raises(ProtocolError, match="causality|cyclic"):
            run_classical_linear_protocol(
                net, {"C1C2": ["x1"], "C2B1": ["x1"]},
                {"B1": {"x1": ["C2B1"]}},
            )


class TestScriptJson:
    def test_round_trip(self):
        bp = builtin_protocol("butterfly_forward_half_one")
        again = script_from_dict(script_to_dict(bp.script))
        assert again == bp.script

    def test_malformed(self):
        with pytest.raises(ProtocolError):
            script_from_dict({"steps": []})
