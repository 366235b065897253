"""Dense statevector and density-operator kernel with entropy functionals.

Qubits carry (party, register, index) labels so protocol code can address
them by ownership.  States are values: every operation returns a new state.
Double precision is used throughout with 1e-9 comparison tolerances;
eigenvalues are clamped to [0, 1] before logs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

ATOL = 1e-10
NORM_TOL = 1e-12


class StateError(ValueError):
    pass


class QubitLabel(NamedTuple):
    party: str
    register: str
    index: int


# single- and two-qubit gate matrices
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
CX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

GATES = {"H": H, "X": X, "Y": Y, "Z": Z, "I": I2, "CX": CX, "CNOT": CX,
         "CZ": CZ, "SWAP": SWAP}


@dataclass(frozen=True)
class PureStateVector:
    labels: tuple[QubitLabel, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        n = len(self.labels)
        if len(set(self.labels)) != n:
            raise StateError("duplicate qubit labels")
        if self.amplitudes.shape != (2 ** n,):
            raise StateError("amplitude array size mismatch")
        norm = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(norm - 1.0) > 1e-9:
            raise StateError(f"state not normalized (|psi|^2 = {norm})")

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def positions(self, labels: Iterable[QubitLabel]) -> list[int]:
        index = {lab: i for i, lab in enumerate(self.labels)}
        out = []
        for lab in labels:
            if lab not in index:
                raise StateError(f"unknown register qubit {lab}")
            out.append(index[lab])
        return out

    def select(self, party: str | None = None, register: str | None = None):
        return tuple(
            lab for lab in self.labels
            if (party is None or lab.party == party)
            and (register is None or lab.register == register)
        )


@dataclass(frozen=True)
class DensityOperator:
    labels: tuple[QubitLabel, ...]
    matrix: np.ndarray

    def __post_init__(self):
        d = 2 ** len(self.labels)
        if self.matrix.shape != (d, d):
            raise StateError("density matrix size mismatch")
        if not np.allclose(self.matrix, self.matrix.conj().T, atol=1e-9):
            raise StateError("density matrix not Hermitian")
        if abs(np.trace(self.matrix).real - 1.0) > 1e-9:
            raise StateError("density matrix trace differs from 1")


def zero_state(labels: Sequence[QubitLabel]) -> PureStateVector:
    amps = np.zeros(2 ** len(labels), dtype=complex)
    amps[0] = 1.0
    return PureStateVector(tuple(labels), amps)


def product_with(state: PureStateVector, other: PureStateVector) -> PureStateVector:
    return PureStateVector(
        state.labels + other.labels, np.kron(state.amplitudes, other.amplitudes)
    )


def bell_pair(a: QubitLabel, b: QubitLabel) -> PureStateVector:
    amps = np.zeros(4, dtype=complex)
    amps[0b00] = amps[0b11] = 1 / np.sqrt(2)
    return PureStateVector((a, b), amps)


def ghz_state(labels: Sequence[QubitLabel]) -> PureStateVector:
    n = len(labels)
    amps = np.zeros(2 ** n, dtype=complex)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return PureStateVector(tuple(labels), amps)


def basis_state(labels: Sequence[QubitLabel], bits: str) -> PureStateVector:
    if len(bits) != len(labels):
        raise StateError("bit string length mismatch")
    amps = np.zeros(2 ** len(labels), dtype=complex)
    amps[int(bits, 2)] = 1.0
    return PureStateVector(tuple(labels), amps)


def apply(
    state: PureStateVector,
    gate: np.ndarray | str,
    qubits: Sequence[QubitLabel],
) -> PureStateVector:
    """Apply a unitary to the named qubits."""
    if isinstance(gate, str):
        try:
            gate = GATES[gate.upper()]
        except KeyError:
            raise StateError(f"unknown gate {gate!r}")
    gate = np.asarray(gate, dtype=complex)
    m = len(qubits)
    if gate.shape != (2 ** m, 2 ** m):
        raise StateError("gate size does not match qubit count")
    if not np.allclose(gate @ gate.conj().T, np.eye(2 ** m), atol=ATOL):
        raise StateError("gate is not unitary")
    n = state.n_qubits
    pos = state.positions(qubits)
    tensor = state.amplitudes.reshape((2,) * n)
    tensor = np.moveaxis(tensor, pos, range(m))
    tensor = (gate @ tensor.reshape(2 ** m, -1)).reshape((2,) * n)
    tensor = np.moveaxis(tensor, range(m), pos)
    return PureStateVector(state.labels, tensor.reshape(-1).copy())


def controlled(
    state: PureStateVector,
    controls: Sequence[QubitLabel],
    gate: np.ndarray | str,
    targets: Sequence[QubitLabel],
) -> PureStateVector:
    """Apply the gate on targets conditioned on all controls being |1>."""
    if isinstance(gate, str):
        gate = GATES[gate.upper()]
    gate = np.asarray(gate, dtype=complex)
    nc, nt = len(controls), len(targets)
    dim = 2 ** (nc + nt)
    full = np.eye(dim, dtype=complex)
    block = 2 ** nt
    full[dim - block:, dim - block:] = gate
    return apply(state, full, list(controls) + list(targets))


def move_register(
    state: PureStateVector, labels: Sequence[QubitLabel], new_party: str
) -> PureStateVector:
    """Relabel ownership; amplitudes are untouched."""
    moving = set(labels)
    state.positions(labels)  # validates existence
    relabeled = tuple(
        QubitLabel(new_party, lab.register, lab.index) if lab in moving else lab
        for lab in state.labels
    )
    return PureStateVector(relabeled, state.amplitudes)


def _split_matrix(state: PureStateVector, part: Sequence[QubitLabel]):
    """Amplitudes as a (part) x (rest) matrix."""
    pos = state.positions(part)
    rest = [i for i in range(state.n_qubits) if i not in pos]
    tensor = state.amplitudes.reshape((2,) * state.n_qubits)
    tensor = np.transpose(tensor, pos + rest)
    return tensor.reshape(2 ** len(pos), 2 ** len(rest))


def partial_trace(
    state: PureStateVector, keep: Sequence[QubitLabel]
) -> DensityOperator:
    keep = list(keep)
    m = _split_matrix(state, keep)
    rho = m @ m.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityOperator(tuple(keep), rho)


def _clamped_eigenvalues(rho: np.ndarray) -> np.ndarray:
    vals = np.linalg.eigvalsh(rho)
    return np.clip(vals.real, 0.0, 1.0)


def _entropy_from_probs(p: np.ndarray) -> float:
    p = p[p > 1e-15]
    return float(-(p * np.log2(p)).sum()) if p.size else 0.0


def entropy(state, subsystem: Sequence[QubitLabel] | None = None) -> float:
    """Von Neumann entropy in bits of a subsystem (or a whole density op)."""
    if isinstance(state, DensityOperator):
        if subsystem is None or tuple(subsystem) == state.labels:
            return _entropy_from_probs(_clamped_eigenvalues(state.matrix))
        raise StateError("subsystem lookup inside a DensityOperator "
                         "is not supported; trace the pure state instead")
    if subsystem is None:
        return 0.0
    subsystem = list(subsystem)
    if not subsystem:
        return 0.0
    if len(subsystem) > state.n_qubits - len(subsystem):
        # purity: complementary subsystems have equal entropy; use smaller
        comp = [lab for lab in state.labels if lab not in set(subsystem)]
        if not comp:
            return 0.0
        subsystem = comp
    m = _split_matrix(state, subsystem)
    sing = np.linalg.svd(m, compute_uv=False)
    return _entropy_from_probs(np.clip(sing ** 2, 0.0, 1.0))


def mutual_info(
    state: PureStateVector, x: Sequence[QubitLabel], y: Sequence[QubitLabel]
) -> float:
    x, y = list(x), list(y)
    if set(x) & set(y):
        raise StateError("mutual information needs disjoint subsystems")
    return entropy(state, x) + entropy(state, y) - entropy(state, x + y)


def coherent_info(
    state: PureStateVector, src: Sequence[QubitLabel], dst: Sequence[QubitLabel]
) -> float:
    """S(dst) - S(src, dst)."""
    src, dst = list(src), list(dst)
    return entropy(state, dst) - entropy(state, src + dst)


def cond_entropy(
    state: PureStateVector, x: Sequence[QubitLabel], y: Sequence[QubitLabel]
) -> float:
    """S(x|y) = S(xy) - S(y)."""
    x, y = list(x), list(y)
    return entropy(state, x + y) - entropy(state, y)


def entanglement_entropy(
    state: PureStateVector, part: Sequence[QubitLabel]
) -> float:
    """Bipartite pure-state entanglement across (part | rest) in ebits."""
    return entropy(state, list(part))


def fidelity(state: PureStateVector, target: PureStateVector) -> float:
    """|<target|state>|^2, matching target's qubit ordering."""
    if set(state.labels) != set(target.labels):
        raise StateError("states live on different registers")
    m = _split_matrix(state, list(target.labels))
    vec = m.reshape(-1)
    return float(abs(np.vdot(target.amplitudes, vec)) ** 2)


def state_fidelity_with_density(
    rho: DensityOperator, target: PureStateVector
) -> float:
    """<target|rho|target> for a pure target."""
    if set(rho.labels) != set(target.labels):
        raise StateError("states live on different registers")
    perm = [rho.labels.index(lab) for lab in target.labels]
    n = len(rho.labels)
    t = target.amplitudes.reshape((2,) * n)
    t = np.transpose(t, np.argsort(perm)).reshape(-1)
    return float((t.conj() @ rho.matrix @ t).real)


def trace_distance(a, b) -> float:
    """Half the trace norm of the difference of two states."""
    def as_matrix(s):
        if isinstance(s, DensityOperator):
            return s.labels, s.matrix
        return s.labels, np.outer(s.amplitudes, s.amplitudes.conj())

    la, ma = as_matrix(a)
    lb, mb = as_matrix(b)
    if set(la) != set(lb):
        raise StateError("states live on different registers")
    if la != lb:
        perm = [lb.index(lab) for lab in la]
        n = len(lb)
        t = mb.reshape((2,) * n + (2,) * n)
        t = np.transpose(t, perm + [n + p for p in perm])
        mb = t.reshape(2 ** n, 2 ** n)
    vals = np.linalg.eigvalsh(ma - mb)
    return float(0.5 * np.abs(vals).sum())


def sample_measurement(
    state: PureStateVector, qubits: Sequence[QubitLabel], rng
) -> tuple[str, PureStateVector]:
    """Projective computational-basis measurement with genuine sampling."""
    pos = state.positions(qubits)
    n = state.n_qubits
    tensor = state.amplitudes.reshape((2,) * n)
    probs = np.abs(tensor) ** 2
    axes = tuple(i for i in range(n) if i not in pos)
    marginal = probs.sum(axis=axes) if axes else probs
    flat = marginal.reshape(-1)
    outcome = rng.choices(range(flat.size), weights=flat.tolist())[0]
    bits = format(outcome, f"0{len(pos)}b")
    slicer = [slice(None)] * n
    for p, b in zip(pos, bits):
        slicer[p] = int(b)
    collapsed = np.zeros_like(tensor)
    collapsed[tuple(slicer)] = tensor[tuple(slicer)]
    vec = collapsed.reshape(-1)
    vec = vec / np.linalg.norm(vec)
    return bits, PureStateVector(state.labels, vec)


# ---------------------------------------------------------------------------
# sparse JSON form


def state_to_dict(state: PureStateVector, threshold: float = 1e-12) -> dict:
    entries = []
    n = state.n_qubits
    for idx, amp in enumerate(state.amplitudes):
        if abs(amp) > threshold:
            entries.append([format(idx, f"0{n}b"), amp.real, amp.imag])
    return {
        "registers": [[lab.party, lab.register, lab.index]
                      for lab in state.labels],
        "amplitudes": entries,
    }


def state_to_json(state: PureStateVector) -> str:
    return json.dumps(state_to_dict(state), indent=2, sort_keys=True)


def state_from_dict(doc: dict) -> PureStateVector:
    try:
        labels = tuple(
            QubitLabel(str(p), str(r), int(i)) for p, r, i in doc["registers"]
        )
        amps = np.zeros(2 ** len(labels), dtype=complex)
        for bits, re, im in doc["amplitudes"]:
            amps[int(bits, 2)] = complex(re, im)
    except (KeyError, TypeError, ValueError) as exc:
        raise StateError(f"malformed state document: {exc}") from exc
    norm = np.linalg.norm(amps)
    if norm < NORM_TOL:
        raise StateError("state document has zero norm")
    return PureStateVector(labels, amps / norm)


def state_from_json(text: str) -> PureStateVector:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateError(f"malformed state JSON: {exc}") from exc
    return state_from_dict(doc)
