"""Dense statevector emulator: states, gates, circuits, unitaries, observables.

Conventions (fixed package-wide):
  * qubit 0 is the low bit of the basis index, so basis state |k> assigns
    bit j of k to qubit j and kets are written |q_{n-1} ... q_1 q_0>.
  * Rz(a) = diag(1, e^{ia}) on its target.
  * ZZ(a) = CNOT (1 x Rz(a)) CNOT, i.e. phase e^{ia} on odd-parity states.
  * Rx(a) = exp(-i a X / 2), Ry(a) = exp(-i a Y / 2).
  * Any op may carry extra (controls, polarities): it then acts only on the
    subspace where each control bit equals its polarity.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError

DENSE_QUBIT_LIMIT = 12

_TARGET_COUNT = {
    "x": 1, "rz": 1, "rx": 1, "ry": 1, "cnot": 2, "toffoli": 3,
    "zz": 2, "crz": 2, "crx": 2, "gphase": 0,
}
ROTATION_KINDS = frozenset({"rz", "rx", "ry", "zz", "crz", "crx", "gphase"})
# Diagonal in the computational basis (controls keep an op diagonal).
DIAGONAL_KINDS = frozenset({"rz", "zz", "crz", "gphase"})
PERMUTATION_KINDS = frozenset({"x", "cnot", "toffoli"})


@dataclass(frozen=True)
class GateOp:
    """One gate: a kind, its own qubits, an optional angle, optional extra controls."""

    kind: str
    targets: tuple[int, ...] = ()
    angle: float | None = None
    controls: tuple[int, ...] = ()
    polarities: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in _TARGET_COUNT:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        object.__setattr__(self, "controls", tuple(int(q) for q in self.controls))
        object.__setattr__(self, "polarities", tuple(int(p) for p in self.polarities))
        if len(self.targets) != _TARGET_COUNT[self.kind]:
            raise ValueError(f"{self.kind} expects {_TARGET_COUNT[self.kind]} qubits, got {self.targets}")
        wires = self.targets + self.controls
        if len(set(wires)) != len(wires):
            raise ValueError(f"repeated qubit in {self}")
        if any(q < 0 for q in wires):
            raise ValueError("negative qubit index")
        if len(self.polarities) != len(self.controls):
            raise ValueError("polarity list must match control list")
        if any(p not in (0, 1) for p in self.polarities):
            raise ValueError("polarities must be 0 or 1")
        has_angle = self.angle is not None
        if has_angle != (self.kind in ROTATION_KINDS):
            raise ValueError(f"angle {'missing' if not has_angle else 'not allowed'} for {self.kind}")
        if has_angle:
            object.__setattr__(self, "angle", float(self.angle))

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + self.controls

    def is_diagonal(self) -> bool:
        return self.kind in DIAGONAL_KINDS

    def inverse(self) -> "GateOp":
        if self.kind in ROTATION_KINDS:
            return GateOp(self.kind, self.targets, -self.angle, self.controls, self.polarities)
        return self  # x / cnot / toffoli are involutions

    def controlled(self, wire: int, polarity: int) -> "GateOp":
        return GateOp(self.kind, self.targets, self.angle,
                      self.controls + (wire,), self.polarities + (polarity,))


# Shorthand constructors.
def x(q: int) -> GateOp: return GateOp("x", (q,))
def rz(q: int, angle: float) -> GateOp: return GateOp("rz", (q,), angle)
def rx(q: int, angle: float) -> GateOp: return GateOp("rx", (q,), angle)
def ry(q: int, angle: float) -> GateOp: return GateOp("ry", (q,), angle)
def cnot(control: int, target: int) -> GateOp: return GateOp("cnot", (control, target))
def toffoli(c1: int, c2: int, target: int) -> GateOp: return GateOp("toffoli", (c1, c2, target))
def zz(a: int, b: int, angle: float) -> GateOp: return GateOp("zz", (a, b), angle)
def crz(control: int, target: int, angle: float) -> GateOp: return GateOp("crz", (control, target), angle)
def crx(control: int, target: int, angle: float) -> GateOp: return GateOp("crx", (control, target), angle)
def gphase(angle: float) -> GateOp: return GateOp("gphase", (), angle)


def mcx(target: int, controls: tuple[int, ...], polarities: tuple[int, ...]) -> GateOp:
    """X on `target` conditioned on every control bit matching its polarity."""
    return GateOp("x", (target,), None, tuple(controls), tuple(polarities))


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list on a fixed-size register."""

    num_qubits: int
    ops: tuple[GateOp, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            if any(q >= self.num_qubits for q in op.qubits):
                raise ValueError(f"op {op} exceeds register size {self.num_qubits}")

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.num_qubits != self.num_qubits:
            raise ValueError("register size mismatch")
        return Circuit(self.num_qubits, self.ops + other.ops)

    def __len__(self) -> int:
        return len(self.ops)

    def inverse(self) -> "Circuit":
        return Circuit(self.num_qubits, tuple(op.inverse() for op in reversed(self.ops)))

    def controlled(self, wire: int, polarity: int) -> "Circuit":
        """Every op conditioned on one extra control wire (must be inside the register)."""
        return Circuit(self.num_qubits, tuple(op.controlled(wire, polarity) for op in self.ops))

    def widened(self, num_qubits: int) -> "Circuit":
        if num_qubits < self.num_qubits:
            raise ValueError("cannot shrink a circuit")
        return Circuit(num_qubits, self.ops)

    def to_dict(self) -> dict:
        ops = []
        for op in self.ops:
            d = {"kind": op.kind, "targets": list(op.targets)}
            if op.angle is not None:
                d["angle"] = op.angle
            if op.controls:
                d["controls"] = list(op.controls)
                d["polarities"] = list(op.polarities)
            ops.append(d)
        return {"num_qubits": self.num_qubits, "ops": ops}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Circuit":
        ops = tuple(
            GateOp(d["kind"], tuple(d["targets"]), d.get("angle"),
                   tuple(d.get("controls", ())), tuple(d.get("polarities", ())))
            for d in data["ops"]
        )
        return cls(int(data["num_qubits"]), ops)

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitudes over 2^num_qubits basis states."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.num_qubits,):
            raise ValueError(f"expected {1 << self.num_qubits} amplitudes, got shape {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis_state(cls, num_qubits: int, index: int) -> "StateVector":
        if not 0 <= index < (1 << num_qubits):
            raise ValueError(f"basis index {index} out of range")
        amps = np.zeros(1 << num_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(num_qubits, amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex)
        n = int(round(math.log2(amps.size)))
        if 1 << n != amps.size:
            raise ValueError("amplitude count is not a power of two")
        nrm = np.linalg.norm(amps)
        if normalize:
            if nrm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / nrm
        elif abs(nrm - 1.0) > 1e-8:
            raise ValueError(f"state not normalized: |psi|={nrm}")
        return cls(n, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class Unitary:
    """Dense complex matrix of size dim x dim (dim a power of two)."""

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.entries, dtype=complex)
        if mat.shape != (self.dim, self.dim):
            raise ValueError("matrix shape mismatch")
        n = int(round(math.log2(self.dim)))
        if 1 << n != self.dim:
            raise ValueError("dim must be a power of two")
        object.__setattr__(self, "entries", mat)

    @classmethod
    def from_matrix(cls, matrix, check: bool = True, tol: float = 1e-9) -> "Unitary":
        mat = np.asarray(matrix, dtype=complex)
        u = cls(mat.shape[0], mat)
        if check and not u.is_unitary(tol):
            raise ValueError("matrix is not unitary")
        return u

    @classmethod
    def from_diagonal(cls, diag) -> "Unitary":
        d = np.asarray(diag, dtype=complex)
        return cls(d.size, np.diag(d))

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def is_unitary(self, tol: float = 1e-9) -> bool:
        err = self.entries.conj().T @ self.entries - np.eye(self.dim)
        return float(np.abs(err).max()) <= tol

    def diagonal_part(self):
        """Diagonal vector if the matrix is diagonal to 1e-12, else None."""
        off = self.entries - np.diag(np.diag(self.entries))
        if float(np.abs(off).max()) < 1e-12:
            return np.diag(self.entries).copy()
        return None


_INDEX_CACHE: dict[int, np.ndarray] = {}


def _indices(dim: int) -> np.ndarray:
    idx = _INDEX_CACHE.get(dim)
    if idx is None:
        idx = np.arange(dim)
        _INDEX_CACHE[dim] = idx
    return idx


def _control_mask(op: GateOp, dim: int):
    if not op.controls:
        return None
    idx = _indices(dim)
    sel = np.ones(dim, dtype=bool)
    for c, p in zip(op.controls, op.polarities):
        sel &= ((idx >> c) & 1) == p
    return sel


def _apply_op(psi: np.ndarray, op: GateOp, num_qubits: int) -> np.ndarray:
    """Apply one gate to psi (first axis indexes the 2^n basis). Returns a new array."""
    dim = 1 << num_qubits
    idx = _indices(dim)
    sel = _control_mask(op, dim)
    kind = op.kind

    if kind in DIAGONAL_KINDS:
        if kind == "gphase":
            where = np.ones(dim, dtype=bool)
        elif kind == "rz":
            where = ((idx >> op.targets[0]) & 1) == 1
        elif kind == "zz":
            a, b = op.targets
            where = (((idx >> a) ^ (idx >> b)) & 1) == 1
        else:  # crz
            c, t = op.targets
            where = (((idx >> c) & (idx >> t)) & 1) == 1
        if sel is not None:
            where = where & sel
        out = psi.copy()
        out[where] *= cmath.exp(1j * op.angle)
        return out

    if kind in PERMUTATION_KINDS:
        if kind == "x":
            t = op.targets[0]
            active = sel
        elif kind == "cnot":
            c, t = op.targets
            active = ((idx >> c) & 1) == 1
            if sel is not None:
                active = active & sel
        else:  # toffoli
            c1, c2, t = op.targets
            active = (((idx >> c1) & (idx >> c2)) & 1) == 1
            if sel is not None:
                active = active & sel
        flipped = idx ^ (1 << t)
        if active is None:
            return psi[flipped]
        out = psi.copy()
        out[active] = psi[flipped[active]]
        return out

    # rx / ry / crx: genuine 2x2 mixing on the target bit.
    if kind == "crx":
        c, t = op.targets
        active = ((idx >> c) & 1) == 1
        if sel is not None:
            active = active & sel
    else:
        t = op.targets[0]
        active = sel
    half = op.angle / 2.0
    co, si = math.cos(half), math.sin(half)
    if kind == "ry":
        m00, m01, m10, m11 = co, -si, si, co
    else:  # rx, crx
        m00, m01, m10, m11 = co, -1j * si, -1j * si, co
    low = ((idx >> t) & 1) == 0
    if active is not None:
        low = low & active
    rows0 = idx[low]
    rows1 = rows0 | (1 << t)
    out = psi.copy()
    a0, a1 = psi[rows0], psi[rows1]
    out[rows0] = m00 * a0 + m01 * a1
    out[rows1] = m10 * a0 + m11 * a1
    return out


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    """U_gate |psi>. Pure; norm is preserved by construction."""
    if any(q >= state.num_qubits for q in gate.qubits):
        raise ValueError(f"gate {gate} out of range for {state.num_qubits} qubits")
    nrm = state.norm()
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"contract violation: input state has norm {nrm}")
    return StateVector(state.num_qubits, _apply_op(state.amplitudes, gate, state.num_qubits))


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    if circuit.num_qubits != state.num_qubits:
        raise ValueError("circuit/state size mismatch")
    amps = state.amplitudes
    for op in circuit.ops:
        amps = _apply_op(amps, op, circuit.num_qubits)
    return StateVector(state.num_qubits, amps)


def circuit_unitary(circuit: Circuit, qubit_limit: int = DENSE_QUBIT_LIMIT) -> Unitary:
    """Dense matrix of the circuit; column j is the image of basis state j."""
    if circuit.num_qubits > qubit_limit:
        raise ResourceLimitError(
            f"dense unitary for {circuit.num_qubits} qubits exceeds the {qubit_limit}-qubit bound")
    dim = 1 << circuit.num_qubits
    mat = np.eye(dim, dtype=complex)
    for op in circuit.ops:
        mat = _apply_op(mat, op, circuit.num_qubits)
    return Unitary(dim, mat)


def circuit_diagonal(circuit: Circuit) -> np.ndarray:
    """Diagonal of an all-diagonal-gate circuit, in O(ops * 2^n)."""
    dim = 1 << circuit.num_qubits
    diag = np.ones(dim, dtype=complex)
    for op in circuit.ops:
        if not op.is_diagonal():
            raise ValueError(f"circuit contains non-diagonal op {op}")
        diag = _apply_op(diag, op, circuit.num_qubits)
    return diag


def state_fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2; global-phase invariant."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("state size mismatch")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def expectation_z(state: StateVector, qubit: int) -> float:
    """<Z_qubit> = sum_k |psi_k|^2 (-1)^{bit(k, qubit)}."""
    if not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit {qubit} out of range")
    bits = (_indices(state.amplitudes.size) >> qubit) & 1
    probs = np.abs(state.amplitudes) ** 2
    return float(np.sum(probs * (1 - 2 * bits)))


def classical_map(circuit: Circuit, bits: np.ndarray) -> np.ndarray:
    """Map computational-basis inputs through a permutation circuit (x/cnot/toffoli only).

    bits: uint8 array of shape (batch, num_qubits); returns the same shape.
    Used for exhaustive truth-table checks of comparator logic.
    """
    out = np.array(bits, dtype=np.uint8, copy=True)
    if out.ndim == 1:
        out = out[None, :]
    for op in circuit.ops:
        active = np.ones(out.shape[0], dtype=bool)
        for c, p in zip(op.controls, op.polarities):
            active &= out[:, c] == p
        if op.kind == "x":
            t = op.targets[0]
        elif op.kind == "cnot":
            c, t = op.targets
            active &= out[:, c] == 1
        elif op.kind == "toffoli":
            c1, c2, t = op.targets
            active &= (out[:, c1] == 1) & (out[:, c2] == 1)
        else:
            raise ValueError(f"non-classical op {op}")
        out[active, t] ^= 1
    return out
