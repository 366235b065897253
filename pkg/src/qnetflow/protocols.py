"""Protocol execution on a network under a scenario's resource rules.

Scripts are ordered resource-checked steps over named single- or multi-qubit
registers.  Measurements are deferred by default (basis rotation plus
coherent classically-controlled corrections) so the global state stays pure
for entropy audits; a flag switches to genuine sampling.  Every channel use
is charged to a (edge, call) ledger slot and checked against capacity.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .network import UNLIMITED, Network, Scenario, build_network, Vertex, Edge
from .states import (
    PureStateVector,
    QubitLabel,
    apply,
    bell_pair,
    basis_state,
    coherent_info,
    controlled,
    entropy,
    move_register,
    mutual_info,
    partial_trace,
    product_with,
    sample_measurement,
    state_fidelity_with_density,
)

FID_TOL = 1e-9


class ProtocolError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Script steps


@dataclass(frozen=True)
class LocalOp:
    party: str
    gate: str
    registers: tuple[str, ...]


@dataclass(frozen=True)
class CreateEbit:
    party_a: str
    register_a: str
    party_b: str
    register_b: str


@dataclass(frozen=True)
class PrepareBits:
    party: str
    register: str
    bits: str


@dataclass(frozen=True)
class SendQuantum:
    edge_id: str
    call: int
    register: str


@dataclass(frozen=True)
class SendClassical:
    sender: str
    receiver: str
    register: str


@dataclass(frozen=True)
class Measure:
    party: str
    registers: tuple[str, ...]
    basis: str = "computational"  # or "bell"


@dataclass(frozen=True)
class Controlled:
    party: str
    control: str
    gate: str
    target: str


@dataclass(frozen=True)
class Discard:
    party: str
    registers: tuple[str, ...]


@dataclass(frozen=True)
class Rename:
    party: str
    old: str
    new: str


@dataclass(frozen=True)
class Snapshot:
    label: str


Step = object


@dataclass(frozen=True)
class MessageSpec:
    pair: int
    register: str
    qubits: int = 1


@dataclass(frozen=True)
class ProtocolScript:
    n_calls: int
    messages: tuple[MessageSpec, ...]
    steps: tuple[Step, ...]
    name: str = ""


@dataclass
class ResourceLedger:
    quantum_uses: dict[tuple[str, int], int] = field(default_factory=dict)
    classical_messages: list[tuple[str, str, str, int]] = field(default_factory=list)
    ebits_created: dict[tuple[str, str], int] = field(default_factory=dict)

    def charge_quantum(self, edge_id: str, call: int, qubits: int):
        key = (edge_id, call)
        self.quantum_uses[key] = self.quantum_uses.get(key, 0) + qubits

    def respects_capacities(self, net: Network) -> bool:
        for (eid, _call), used in self.quantum_uses.items():
            cap = net.edge(eid).capacity
            if cap is not UNLIMITED and Fraction(used) > cap:
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "quantum_uses": [
                {"edge": eid, "call": call, "qubits": n}
                for (eid, call), n in sorted(self.quantum_uses.items())
            ],
            "classical_messages": [
                {"from": a, "to": b, "register": r, "bits": n}
                for a, b, r, n in self.classical_messages
            ],
            "ebits_created": [
                {"parties": list(p), "count": n}
                for p, n in sorted(self.ebits_created.items())
            ],
        }


# ---------------------------------------------------------------------------
# Runtime


def _reachable(net: Network, src: str, dst: str) -> bool:
    seen = {src}
    stack = [src]
    while stack:
        v = stack.pop()
        if v == dst:
            return True
        for e in net.out_edges(v):
            if e.head not in seen:
                seen.add(e.head)
                stack.append(e.head)
    return dst in seen


def _classical_send_allowed(net: Network, scenario: Scenario,
                            sender: str, receiver: str) -> bool:
    if scenario is Scenario.FORWARD:
        return _reachable(net, sender, receiver)
    if scenario is Scenario.BACKWARD:
        return _reachable(net, receiver, sender)
    if scenario is Scenario.TWO_WAY:
        return _reachable(net, sender, receiver) or _reachable(net, receiver, sender)
    return False  # unassisted and entanglement-assisted: no free messages


@dataclass
class ProtocolRunResult:
    network: Network
    scenario: Scenario
    script: ProtocolScript
    initial_state: PureStateVector
    final_state: PureStateVector
    registers: dict[str, tuple[QubitLabel, ...]]
    classical_registers: set[str]
    snapshots: dict[str, tuple[PureStateVector, dict[str, tuple[QubitLabel, ...]]]]
    ledger: ResourceLedger
    references: dict[str, tuple[QubitLabel, ...]]  # message register -> refs

    def owner(self, register: str) -> str:
        labels = self.registers[register]
        return labels[0].party


REF_PARTY_PREFIX = "ref:"


def run_protocol(
    net: Network,
    scenario: Scenario,
    script: ProtocolScript,
    inputs: str = "entangled",
    message_bits: Mapping[str, str] | None = None,
    sample: bool = False,
    seed: int = 0,
    ebit_model: str = "any",
) -> ProtocolRunResult:
    """Execute a script, enforcing ownership and resource legality stepwise.

    Messages are prepared as halves of maximal entanglement with reference
    registers unless ``inputs="zero"`` or explicit ``message_bits`` are
    given.  ``ebit_model="neighbor"`` restricts free ebits (entanglement
    assistance only) to parties joined by a channel; no rate claims are
    attached to that variant.  Raises ProtocolError on any capacity,
    permission or ownership violation.
    """
    message_bits = dict(message_bits or {})
    rng = random.Random(seed)

    registers: dict[str, tuple[QubitLabel, ...]] = {}
    classical: set[str] = set()
    references: dict[str, tuple[QubitLabel, ...]] = {}

    state: PureStateVector | None = None

    def extend(new_state):
        nonlocal state
        state = new_state if state is None else product_with(state, new_state)

    for spec in script.messages:
        if spec.pair < 1 or spec.pair > net.k:
            raise ProtocolError(f"message {spec.register!r} names a missing pair")
        sender = net.sender(spec.pair)
        msg = tuple(QubitLabel(sender, spec.register, i) for i in range(spec.qubits))
        if spec.register in message_bits:
            bits = message_bits[spec.register]
            extend(basis_state(msg, bits))
        elif inputs == "zero":
            extend(basis_state(msg, "0" * spec.qubits))
        else:
            refs = tuple(
                QubitLabel(f"{REF_PARTY_PREFIX}{spec.pair}", f"R_{spec.register}", i)
                for i in range(spec.qubits)
            )
            for r, m in zip(refs, msg):
                extend(bell_pair(r, m))
            references[spec.register] = refs
        registers[spec.register] = msg

    if state is None:
        state = basis_state((QubitLabel("__pad__", "pad", 0),), "0")
        registers["__pad__"] = state.labels

    def require_owner(party, reg):
        if reg not in registers:
            raise ProtocolError(f"unknown register {reg!r}")
        owner = registers[reg][0].party
        if owner != party:
            raise ProtocolError(
                f"{party!r} cannot act on register {reg!r} owned by {owner!r}"
            )

    def fresh_name(reg):
        if reg in registers:
            raise ProtocolError(f"register name {reg!r} already in use")

    ledger = ResourceLedger()
    snapshots: dict = {}

    for step in script.steps:
        if isinstance(step, LocalOp):
            qubits = []
            for reg in step.registers:
                require_owner(step.party, reg)
                qubits.extend(registers[reg])
            state = apply(state, step.gate, qubits)
        elif isinstance(step, CreateEbit):
            if step.party_a != step.party_b and scenario is not Scenario.ENT_ASSISTED:
                raise ProtocolError(
                    "nonlocal ebit creation requires entanglement assistance"
                )
            if (step.party_a != step.party_b and ebit_model == "neighbor"
                    and not any(
                        {e.tail, e.head} == {step.party_a, step.party_b}
                        for e in net.edges
                    )):
                raise ProtocolError(
                    f"neighbor ebit model forbids a free "
                    f"{step.party_a!r}-{step.party_b!r} pair"
                )
            for party, reg in ((step.party_a, step.register_a),
                               (step.party_b, step.register_b)):
                fresh_name(reg)
                net.vertex(party)
            la = QubitLabel(step.party_a, step.register_a, 0)
            lb = QubitLabel(step.party_b, step.register_b, 0)
            extend(bell_pair(la, lb))
            registers[step.register_a] = (la,)
            registers[step.register_b] = (lb,)
            key = tuple(sorted((step.party_a, step.party_b)))
            ledger.ebits_created[key] = ledger.ebits_created.get(key, 0) + 1
        elif isinstance(step, PrepareBits):
            fresh_name(step.register)
            net.vertex(step.party)
            labels = tuple(
                QubitLabel(step.party, step.register, i)
                for i in range(len(step.bits))
            )
            extend(basis_state(labels, step.bits))
            registers[step.register] = labels
            classical.add(step.register)
        elif isinstance(step, SendQuantum):
            edge = net.edge(step.edge_id)
            if step.call < 0 or step.call >= script.n_calls:
                raise ProtocolError(
                    f"call index {step.call} outside 0..{script.n_calls - 1}"
                )
            require_owner(edge.tail, step.register)
            nq = len(registers[step.register])
            used = ledger.quantum_uses.get((edge.id, step.call), 0)
            if edge.capacity is not UNLIMITED and Fraction(used + nq) > edge.capacity:
                raise ProtocolError(
                    f"capacity exceeded on channel {edge.id!r} in call {step.call}"
                )
            ledger.charge_quantum(edge.id, step.call, nq)
            state = move_register(state, registers[step.register], edge.head)
            registers[step.register] = tuple(
                QubitLabel(edge.head, l.register, l.index)
                for l in registers[step.register]
            )
        elif isinstance(step, SendClassical):
            require_owner(step.sender, step.register)
            if step.register not in classical:
                raise ProtocolError(
                    f"register {step.register!r} holds no measurement outcome"
                )
            if not _classical_send_allowed(net, scenario, step.sender, step.receiver):
                raise ProtocolError(
                    f"classical message {step.sender!r}->{step.receiver!r} "
                    f"not permitted under {scenario.value}"
                )
            net.vertex(step.receiver)
            state = move_register(state, registers[step.register], step.receiver)
            registers[step.register] = tuple(
                QubitLabel(step.receiver, l.register, l.index)
                for l in registers[step.register]
            )
            ledger.classical_messages.append(
                (step.sender, step.receiver, step.register,
                 len(registers[step.register]))
            )
        elif isinstance(step, Measure):
            qubits = []
            for reg in step.registers:
                require_owner(step.party, reg)
                qubits.extend(registers[reg])
            if step.basis == "bell":
                if len(qubits) != 2:
                    raise ProtocolError("bell basis needs exactly two qubits")
                state = apply(state, "CX", qubits)
                state = apply(state, "H", [qubits[0]])
            elif step.basis != "computational":
                raise ProtocolError(f"unknown measurement basis {step.basis!r}")
            if sample:
                _bits, state = sample_measurement(state, qubits, rng)
            classical.update(step.registers)
        elif isinstance(step, Controlled):
            require_owner(step.party, step.control)
            require_owner(step.party, step.target)
            if step.control not in classical:
                raise ProtocolError(
                    f"control register {step.control!r} is not a measurement outcome"
                )
            state = controlled(
                state, registers[step.control], step.gate, registers[step.target]
            )
        elif isinstance(step, Discard):
            for reg in step.registers:
                require_owner(step.party, reg)
                state = move_register(state, registers[reg], "__trash__")
                registers[reg] = tuple(
                    QubitLabel("__trash__", l.register, l.index)
                    for l in registers[reg]
                )
        elif isinstance(step, Rename):
            require_owner(step.party, step.old)
            fresh_name(step.new)
            registers[step.new] = registers.pop(step.old)
            if step.old in classical:
                classical.discard(step.old)
                classical.add(step.new)
        elif isinstance(step, Snapshot):
            snapshots[step.label] = (state, dict(registers))
        else:
            raise ProtocolError(f"unknown step {step!r}")

    if not ledger.respects_capacities(net):
        raise ProtocolError("ledger audit found a capacity violation")

    return ProtocolRunResult(
        network=net,
        scenario=scenario,
        script=script,
        initial_state=_initial_state(script, net, inputs, message_bits),
        final_state=state,
        registers=registers,
        classical_registers=classical,
        snapshots=snapshots,
        ledger=ledger,
        references=references,
    )


def _initial_state(script, net, inputs, message_bits):
    state = None
    for spec in script.messages:
        sender = net.sender(spec.pair)
        msg = tuple(QubitLabel(sender, spec.register, i) for i in range(spec.qubits))
        if spec.register in message_bits:
            part = basis_state(msg, message_bits[spec.register])
        elif inputs == "zero":
            part = basis_state(msg, "0" * spec.qubits)
        else:
            part = None
            for i in range(spec.qubits):
                ref = QubitLabel(f"{REF_PARTY_PREFIX}{spec.pair}",
                                 f"R_{spec.register}", i)
                piece = bell_pair(ref, msg[i])
                part = piece if part is None else product_with(part, piece)
        state = part if state is None else product_with(state, part)
    return state


# ---------------------------------------------------------------------------
# Verification


@dataclass
class ProtocolReport:
    fidelities: dict[int, float]
    rates: tuple[Fraction, ...]
    expected_rates: tuple[Fraction, ...]
    n_calls: int
    ledger: ResourceLedger
    capacities_ok: bool
    passed: bool

    def to_dict(self) -> dict:
        return {
            "fidelities": {str(k): v for k, v in sorted(self.fidelities.items())},
            "rates": [str(r) for r in self.rates],
            "expected_rates": [str(r) for r in self.expected_rates],
            "n_calls": self.n_calls,
            "capacities_ok": self.capacities_ok,
            "passed": self.passed,
            "ledger": self.ledger.to_dict(),
        }


def verify_protocol(
    net: Network,
    scenario: Scenario,
    script: ProtocolScript,
    expected_rates: Sequence[Fraction] | None = None,
) -> ProtocolReport:
    """Run a script and check entanglement delivery per pair.

    Each message register must end at its pair's receiver; the joint state
    of (references, delivered registers) is compared against the initial
    maximal entanglement.  When expected rates are omitted, only fidelity
    and capacity checks decide the verdict.
    """
    result = run_protocol(net, scenario, script)

    per_pair_msgs: dict[int, list[str]] = {}
    for spec in script.messages:
        per_pair_msgs.setdefault(spec.pair, []).append(spec.register)

    fidelities: dict[int, float] = {}
    qubits_delivered = [0] * net.k
    for pair in sorted(per_pair_msgs):
        receiver = net.receiver(pair)
        pairs_of_labels = []
        for reg in per_pair_msgs[pair]:
            labels = result.registers[reg]
            if labels[0].party != receiver:
                raise ProtocolError(
                    f"message {reg!r} ended at {labels[0].party!r}, "
                    f"not receiver {receiver!r}"
                )
            refs = result.references[reg]
            pairs_of_labels.extend(zip(refs, labels))
            qubits_delivered[pair - 1] += len(labels)
        target = None
        for ref, msg in pairs_of_labels:
            piece = bell_pair(ref, msg)
            target = piece if target is None else product_with(target, piece)
        keep = [lab for rm in pairs_of_labels for lab in rm]
        rho = partial_trace(result.final_state, keep)
        fidelities[pair] = state_fidelity_with_density(rho, target)

    rates = tuple(
        Fraction(qubits_delivered[i], script.n_calls) for i in range(net.k)
    )
    expected = (rates if expected_rates is None
                else tuple(Fraction(r) for r in expected_rates))
    ok_fid = all(f >= 1 - FID_TOL for f in fidelities.values())
    ok_rates = rates == expected
    caps = result.ledger.respects_capacities(net)
    return ProtocolReport(
        fidelities=fidelities,
        rates=rates,
        expected_rates=expected,
        n_calls=script.n_calls,
        ledger=result.ledger,
        capacities_ok=caps,
        passed=ok_fid and ok_rates and caps,
    )


def delivered_bits(result: ProtocolRunResult, register: str) -> str:
    """Computational-basis content of a register, exact up to 1e-9."""
    labels = result.registers[register]
    rho = partial_trace(result.final_state, list(labels))
    diag = np.real(np.diag(rho.matrix))
    idx = int(np.argmax(diag))
    if diag[idx] < 1 - FID_TOL:
        raise ProtocolError(f"register {register!r} is not a definite bit string")
    return format(idx, f"0{len(labels)}b")


# ---------------------------------------------------------------------------
# Entropic audit


@dataclass
class AuditReport:
    mutual_info_unauthorized: float
    secret_entropy: float
    significant_share_entropy: float
    epsilon_prime: float
    gamma: float
    bound_holds: bool

    def to_dict(self) -> dict:
        return {
            "I(Su:R)": self.mutual_info_unauthorized,
            "S(secret)": self.secret_entropy,
            "S(Ss)": self.significant_share_entropy,
            "epsilon_prime": self.epsilon_prime,
            "gamma": self.gamma,
            "bound_holds": self.bound_holds,
        }


def secret_sharing_audit(
    result: ProtocolRunResult,
    snapshot: str,
    significant: Sequence[str],
    unauthorized: Sequence[str],
    rest: Sequence[str],
) -> AuditReport:
    """Check the significant-share entropy bound on a recorded trace.

    ``significant``/``unauthorized``/``rest`` name registers at the
    snapshot; together they must cover every non-reference qubit.  The
    report carries I(Su:R), the coherent-information deficit between the
    original secret and the delivered one, and whether
    S(Ss) >= S(secret) - (eps' + gamma)/2 held on this run.
    """
    if snapshot not in result.snapshots:
        raise ProtocolError(f"no snapshot named {snapshot!r}")
    state, regs = result.snapshots[snapshot]

    def labels_of(names):
        out = []
        for name in names:
            if name not in regs:
                raise ProtocolError(f"unknown register {name!r} at snapshot")
            out.extend(regs[name])
        return out

    s_s = labels_of(significant)
    s_u = labels_of(unauthorized)
    s_rest = labels_of(rest)
    refs = [l for l in state.labels if l.party.startswith(REF_PARTY_PREFIX)]
    covered = set(s_s) | set(s_u) | set(s_rest) | set(refs)
    missing = [l for l in state.labels if l not in covered]
    if missing:
        raise ProtocolError(
            f"share partition misses in-flight registers: {missing}"
        )

    gamma = mutual_info(state, s_u, refs) if s_u else 0.0
    s_secret = entropy(state, refs)
    s_share = entropy(state, s_s)

    # coherent information deficit between original and delivered secret
    init = result.initial_state
    init_refs = [l for l in init.labels if l.party.startswith(REF_PARTY_PREFIX)]
    init_secret = [l for l in init.labels if not l.party.startswith(REF_PARTY_PREFIX)]
    ic_before = coherent_info(init, init_refs, init_secret)
    final = result.final_state
    delivered = [
        lab
        for reg, refs_ in result.references.items()
        for lab in result.registers[reg]
    ]
    final_refs = [l for l in final.labels if l.party.startswith(REF_PARTY_PREFIX)]
    ic_after = coherent_info(final, final_refs, delivered)
    eps = ic_before - ic_after

    bound = s_share >= s_secret - (eps + gamma) / 2 - FID_TOL
    return AuditReport(
        mutual_info_unauthorized=gamma,
        secret_entropy=s_secret,
        significant_share_entropy=s_share,
        epsilon_prime=eps,
        gamma=gamma,
        bound_holds=bound,
    )


# ---------------------------------------------------------------------------
# Classical linear coding over GF(2)


@dataclass
class ClassicalCodingReport:
    delivered: dict[str, dict[str, bool]]
    decodable: dict[str, tuple[str, ...]]

    def receiver_gets(self, receiver: str, bit: str) -> bool:
        return self.delivered.get(receiver, {}).get(bit, False)


def _span_reduce(masks: Iterable[int]) -> list[int]:
    basis: list[int] = []
    for m in masks:
        for b in basis:
            m = min(m, m ^ b)
        if m:
            basis.append(m)
            basis.sort(reverse=True)
    return basis


def _in_span(basis: Sequence[int], m: int) -> bool:
    for b in basis:
        m = min(m, m ^ b)
    return m == 0


def run_classical_linear_protocol(
    net: Network,
    assignments: Mapping[str, Iterable[str]],
    decoders: Mapping[str, Mapping[str, Iterable[str]]],
) -> ClassicalCodingReport:
    """Evaluate a GF(2) linear coding scheme over all inputs.

    Each pair's sender originates one bit ``x<i>``; ``assignments`` give the
    parity carried by each channel and ``decoders`` the parity of received
    symbols each receiver combines per target bit.  Channel forms must be
    computable from symbols available at their tails (causality), checked
    by fixpoint placement.
    """
    k = net.k
    bit_names = [f"x{i}" for i in range(1, k + 1)]
    bit_mask = {name: 1 << i for i, name in enumerate(bit_names)}

    def mask_of(names):
        m = 0
        for name in names:
            if name not in bit_mask:
                raise ProtocolError(f"unknown source bit {name!r}")
            m ^= bit_mask[name]
        return m

    forms = {}
    for eid, names in assignments.items():
        edge = net.edge(eid)
        if edge.capacity is not UNLIMITED and edge.capacity < 1:
            raise ProtocolError(f"channel {eid!r} lacks capacity for a symbol")
        forms[eid] = mask_of(names)

    origin = {net.sender(i): bit_mask[f"x{i}"] for i in range(1, k + 1)}
    available: dict[str, list[int]] = {
        v: ([origin[v]] if v in origin else []) for v in net.vertex_ids
    }
    placed: set[str] = set()
    progress = True
    while progress:
        progress = False
        for eid in sorted(forms):
            if eid in placed:
                continue
            edge = net.edge(eid)
            if _in_span(_span_reduce(available[edge.tail]), forms[eid]):
                placed.add(eid)
                available[edge.head].append(forms[eid])
                progress = True
    unplaced = sorted(set(forms) - placed)
    if unplaced:
        raise ProtocolError(
            f"channels {unplaced} use symbols unavailable at their tails "
            "(causality violation or cyclic dependency)"
        )

    delivered: dict[str, dict[str, bool]] = {}
    for receiver, wanted in decoders.items():
        net.vertex(receiver)
        in_ids = {e.id for e in net.in_edges(receiver)}
        delivered[receiver] = {}
        for bit, symbol_edges in wanted.items():
            symbol_edges = list(symbol_edges)
            for eid in symbol_edges:
                if eid not in in_ids:
                    raise ProtocolError(
                        f"decoder at {receiver!r} uses symbol {eid!r} "
                        "not delivered to it"
                    )
                if eid not in forms:
                    raise ProtocolError(f"channel {eid!r} carries no symbol")
            target = bit_mask[bit]
            combined = 0
            for eid in symbol_edges:
                combined ^= forms[eid]
            ok = True
            for inp in range(2 ** k):
                value = bin(combined & inp).count("1") % 2
                want = bin(target & inp).count("1") % 2
                if value != want:
                    ok = False
                    break
            delivered[receiver][bit] = ok

    decodable = {}
    for receiver in decoders:
        received = [forms[e.id] for e in net.in_edges(receiver) if e.id in forms]
        if receiver in origin:
            received.append(origin[receiver])
        basis = _span_reduce(received)
        decodable[receiver] = tuple(
            name for name in bit_names if _in_span(basis, bit_mask[name])
        )
    return ClassicalCodingReport(delivered=delivered, decodable=decodable)


def butterfly_xor_scheme():
    """The one-call coding scheme for the classical butterfly network."""
    assignments = {
        "A1C1": ["x1"],
        "A2C1": ["x2"],
        "C1C2": ["x1", "x2"],
        "A1B2": ["x1"],
        "A2B1": ["x2"],
        "C2B1": ["x1", "x2"],
        "C2B2": ["x1", "x2"],
    }
    decoders = {
        "B1": {"x1": ["A2B1", "C2B1"]},
        "B2": {"x2": ["A1B2", "C2B2"]},
    }
    return assignments, decoders


# ---------------------------------------------------------------------------
# Script JSON


_STEP_TYPES = {
    "local_op": LocalOp,
    "create_ebit": CreateEbit,
    "prepare_bits": PrepareBits,
    "send_quantum": SendQuantum,
    "send_classical": SendClassical,
    "measure": Measure,
    "controlled": Controlled,
    "discard": Discard,
    "rename": Rename,
    "snapshot": Snapshot,
}
_TYPE_NAMES = {cls: name for name, cls in _STEP_TYPES.items()}


def script_to_dict(script: ProtocolScript) -> dict:
    steps = []
    for step in script.steps:
        doc = {"type": _TYPE_NAMES[type(step)]}
        for key, value in vars(step).items():
            doc[key] = list(value) if isinstance(value, tuple) else value
        steps.append(doc)
    return {
        "name": script.name,
        "n_calls": script.n_calls,
        "messages": [
            {"pair": m.pair, "register": m.register, "qubits": m.qubits}
            for m in script.messages
        ],
        "steps": steps,
    }


def script_from_dict(doc: Mapping) -> ProtocolScript:
    try:
        messages = tuple(
            MessageSpec(int(m["pair"]), str(m["register"]), int(m.get("qubits", 1)))
            for m in doc["messages"]
        )
        steps = []
        for raw in doc["steps"]:
            raw = dict(raw)
            cls = _STEP_TYPES[raw.pop("type")]
            for key, value in raw.items():
                if isinstance(value, list):
                    raw[key] = tuple(value)
            steps.append(cls(**raw))
        return ProtocolScript(
            n_calls=int(doc["n_calls"]),
            messages=messages,
            steps=tuple(steps),
            name=str(doc.get("name", "")),
        )
    except (KeyError, TypeError) as exc:
        raise ProtocolError(f"malformed script document: {exc}") from exc


def script_from_json(text: str) -> ProtocolScript:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed script JSON: {exc}") from exc
    return script_from_dict(doc)


# ---------------------------------------------------------------------------
# Bundled protocols


def _teleport_steps(msg: str, src: str, dst: str, eb_local: str, eb_remote: str):
    """Teleport ``msg`` from src to dst consuming (eb_local, eb_remote)."""
    return [
        Measure(src, (msg, eb_local), "bell"),
        SendClassical(src, dst, msg),
        SendClassical(src, dst, eb_local),
        Controlled(dst, eb_local, "X", eb_remote),
        Controlled(dst, msg, "Z", eb_remote),
        Rename(dst, msg, msg + ".syndrome"),
        Rename(dst, eb_remote, msg),
    ]


@dataclass(frozen=True)
class BuiltinProtocol:
    name: str
    network: Network
    scenario: Scenario
    script: ProtocolScript
    rates: tuple[Fraction, ...]


def _single_edge_net(tail: str, head: str) -> Network:
    vs = [Vertex("A1", "sender", 1), Vertex("B1", "receiver", 1)]
    es = [Edge(tail + head, tail, head, Fraction(1))]
    return build_network(vs, es, [("A1", "B1")], name=f"edge_{tail}{head}")


def builtin_protocol(name: str) -> BuiltinProtocol:
    from .network import builtin_network

    half = Fraction(1, 2)
    if name == "butterfly_unassisted_routing":
        net = builtin_network("butterfly")
        steps = [
            SendQuantum("A1C1", 0, "m1"),
            SendQuantum("C1C2", 0, "m1"),
            CreateEbit("A1", "junk1.keep", "A1", "junk1.send"),
            SendQuantum("A1B2", 0, "junk1.send"),
            CreateEbit("A2", "junk2.keep", "A2", "junk2.send"),
            SendQuantum("A2B1", 0, "junk2.send"),
            SendQuantum("A2C1", 1, "m2"),
            SendQuantum("C1C2", 1, "m2"),
            Snapshot("transit"),
            SendQuantum("C2B1", 1, "m1"),
            SendQuantum("C2B2", 1, "m2"),
        ]
        script = ProtocolScript(
            2,
            (MessageSpec(1, "m1"), MessageSpec(2, "m2")),
            tuple(steps),
            name,
        )
        return BuiltinProtocol(name, net, Scenario.UNASSISTED, script, (half, half))
    if name == "butterfly_backward_zero_two":
        net = builtin_network("butterfly")
        steps = [
            SendQuantum("A2C1", 0, "m2a"),
            CreateEbit("A1", "rv1.keep", "A1", "rv1.send"),
            SendQuantum("A1C1", 0, "rv1.send"),
            *_teleport_steps("m2a", "C1", "A1", "rv1.send", "rv1.keep"),
            SendQuantum("A1B2", 0, "m2a"),
            SendQuantum("A2B1", 0, "m2b"),
            CreateEbit("C2", "rv2.keep", "C2", "rv2.send"),
            SendQuantum("C2B1", 0, "rv2.send"),
            *_teleport_steps("m2b", "B1", "C2", "rv2.send", "rv2.keep"),
            SendQuantum("C2B2", 0, "m2b"),
        ]
        script = ProtocolScript(
            1,
            (MessageSpec(2, "m2a"), MessageSpec(2, "m2b")),
            tuple(steps),
            name,
        )
        return BuiltinProtocol(
            name, net, Scenario.BACKWARD, script, (Fraction(0), Fraction(2))
        )
    if name == "butterfly_forward_half_one":
        net = builtin_network("butterfly")
        steps = [
            # call 0: route one pair-2 qubit plainly, predistribute the ebit
            SendQuantum("A2C1", 0, "m2b"),
            SendQuantum("C1C2", 0, "m2b"),
            SendQuantum("C2B2", 0, "m2b"),
            CreateEbit("A1", "td.c1", "A1", "td.b2"),
            SendQuantum("A1C1", 0, "td.c1"),
            SendQuantum("A1B2", 0, "td.b2"),
            # call 1: teleport the second pair-2 qubit, route pair 1
            SendQuantum("A2C1", 1, "m2a"),
            *_teleport_steps("m2a", "C1", "B2", "td.c1", "td.b2"),
            SendQuantum("A1C1", 1, "m1"),
            SendQuantum("C1C2", 1, "m1"),
            SendQuantum("C2B1", 1, "m1"),
        ]
        script = ProtocolScript(
            2,
            (MessageSpec(1, "m1"), MessageSpec(2, "m2a"), MessageSpec(2, "m2b")),
            tuple(steps),
            name,
        )
        return BuiltinProtocol(
            name, net, Scenario.FORWARD, script, (half, Fraction(1))
        )
    if name == "reverse_edge_teleport":
        net = _single_edge_net("B1", "A1")
        steps = [
            CreateEbit("B1", "rv.keep", "B1", "rv.send"),
            SendQuantum("B1A1", 0, "rv.send"),
            *_teleport_steps("m1", "A1", "B1", "rv.send", "rv.keep"),
        ]
        script = ProtocolScript(1, (MessageSpec(1, "m1"),), tuple(steps), name)
        return BuiltinProtocol(name, net, Scenario.BACKWARD, script, (Fraction(1),))
    if name == "superdense":
        # run with message_bits={"in.b1": ..., "in.b2": ...}; after the
        # receiver's basis change sd.a holds bit 1 and sd.b bit 2
        net = _single_edge_net("A1", "B1")
        steps = [
            Measure("A1", ("in.b1",), "computational"),
            Measure("A1", ("in.b2",), "computational"),
            CreateEbit("A1", "sd.a", "B1", "sd.b"),
            Controlled("A1", "in.b2", "X", "sd.a"),
            Controlled("A1", "in.b1", "Z", "sd.a"),
            SendQuantum("A1B1", 0, "sd.a"),
            Measure("B1", ("sd.a", "sd.b"), "bell"),
        ]
        script = ProtocolScript(
            1, (MessageSpec(1, "in.b1"), MessageSpec(1, "in.b2")),
            tuple(steps), name,
        )
        return BuiltinProtocol(
            name, net, Scenario.ENT_ASSISTED, script, (Fraction(0),)
        )
    if name == "teleport_superdense_roundtrip":
        net = _single_edge_net("A1", "B1")
        steps = [
            CreateEbit("A1", "tp.c", "B1", "tp.t"),
            Measure("A1", ("m1", "tp.c"), "bell"),
            CreateEbit("A1", "sd.a", "B1", "sd.b"),
            Controlled("A1", "tp.c", "X", "sd.a"),
            Controlled("A1", "m1", "Z", "sd.a"),
            SendQuantum("A1B1", 0, "sd.a"),
            Measure("B1", ("sd.a", "sd.b"), "bell"),
            Controlled("B1", "sd.b", "X", "tp.t"),
            Controlled("B1", "sd.a", "Z", "tp.t"),
            Rename("A1", "m1", "m1.syndrome"),
            Rename("B1", "tp.t", "m1"),
        ]
        script = ProtocolScript(1, (MessageSpec(1, "m1"),), tuple(steps), name)
        return BuiltinProtocol(
            name, net, Scenario.ENT_ASSISTED, script, (Fraction(1),)
        )
    if name == "crown_routing":
        net = builtin_network("inverted_crown")
        steps = [
            SendQuantum("A1A3", 0, "m1"),
            SendQuantum("A2A3", 0, "m2"),
            SendQuantum("A3C2", 0, "m1"),
            SendQuantum("A3C1", 0, "m2"),
            CreateEbit("A1", "junk1.keep", "A1", "junk1.send"),
            SendQuantum("A1B2", 0, "junk1.send"),
            CreateEbit("A2", "junk2.keep", "A2", "junk2.send"),
            SendQuantum("A2B1", 0, "junk2.send"),
            SendQuantum("A3C1", 1, "m3a"),
            SendQuantum("A3C2", 1, "m3b"),
            Snapshot("transit"),
            SendQuantum("C2B1", 1, "m1"),
            SendQuantum("C1B2", 1, "m2"),
            SendQuantum("C1B3", 1, "m3a"),
            SendQuantum("C2B3", 1, "m3b"),
        ]
        script = ProtocolScript(
            2,
            (MessageSpec(1, "m1"), MessageSpec(2, "m2"),
             MessageSpec(3, "m3a"), MessageSpec(3, "m3b")),
            tuple(steps),
            name,
        )
        return BuiltinProtocol(
            name, net, Scenario.UNASSISTED, script, (half, half, Fraction(1))
        )
    if name == "crown_one_one_zero":
        net = builtin_network("inverted_crown")
        steps = [
            SendQuantum("A1A3", 0, "m1"),
            SendQuantum("A2A3", 0, "m2"),
            SendQuantum("A3C2", 0, "m1"),
            SendQuantum("A3C1", 0, "m2"),
            SendQuantum("C2B1", 0, "m1"),
            SendQuantum("C1B2", 0, "m2"),
        ]
        script = ProtocolScript(
            1, (MessageSpec(1, "m1"), MessageSpec(2, "m2")), tuple(steps), name
        )
        return BuiltinProtocol(
            name, net, Scenario.UNASSISTED, script,
            (Fraction(1), Fraction(1), Fraction(0)),
        )
    if name == "crown_zero_zero_two":
        net = builtin_network("inverted_crown")
        steps = [
            SendQuantum("A3C1", 0, "m3a"),
            SendQuantum("C1B3", 0, "m3a"),
            SendQuantum("A3C2", 0, "m3b"),
            SendQuantum("C2B3", 0, "m3b"),
        ]
        script = ProtocolScript(
            1, (MessageSpec(3, "m3a"), MessageSpec(3, "m3b")), tuple(steps), name
        )
        return BuiltinProtocol(
            name, net, Scenario.UNASSISTED, script,
            (Fraction(0), Fraction(0), Fraction(2)),
        )
    if name == "crown_forward_one_zero_two":
        net = builtin_network("inverted_crown")
        steps = [
            SendQuantum("A3C1", 0, "m3a"),
            SendQuantum("C1B3", 0, "m3a"),
            SendQuantum("A3C2", 0, "m3b"),
            SendQuantum("C2B3", 0, "m3b"),
            CreateEbit("A2", "rv.a3", "A2", "rv.b1"),
            SendQuantum("A2A3", 0, "rv.a3"),
            SendQuantum("A2B1", 0, "rv.b1"),
            SendQuantum("A1A3", 0, "m1"),
            *_teleport_steps("m1", "A3", "B1", "rv.a3", "rv.b1"),
        ]
        script = ProtocolScript(
            1,
            (MessageSpec(1, "m1"), MessageSpec(3, "m3a"), MessageSpec(3, "m3b")),
            tuple(steps),
            name,
        )
        return BuiltinProtocol(
            name, net, Scenario.FORWARD, script,
            (Fraction(1), Fraction(0), Fraction(2)),
        )
    raise ProtocolError(f"unknown builtin protocol {name!r}")


BUILTIN_PROTOCOLS = (
    "butterfly_unassisted_routing",
    "butterfly_backward_zero_two",
    "butterfly_forward_half_one",
    "reverse_edge_teleport",
    "superdense",
    "teleport_superdense_roundtrip",
    "crown_routing",
    "crown_one_one_zero",
    "crown_zero_zero_two",
    "crown_forward_one_zero_two",
)
