"""Shared brute-force oracles, implemented independently of the package internals."""
import cmath
import math

import numpy as np
import pytest

from walshpress.core import Circuit, GateOp


def _local_matrix(op: GateOp) -> np.ndarray:
    """Gate matrix on the targets-local space; local bit i is targets[i]."""
    a = op.angle
    if op.kind == "x":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if op.kind == "rz":
        return np.diag([1.0, cmath.exp(1j * a)])
    if op.kind == "rx":
        c, s = math.cos(a / 2), math.sin(a / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if op.kind == "ry":
        c, s = math.cos(a / 2), math.sin(a / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if op.kind == "cnot":
        # local index = control + 2*target
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0] = m[2, 2] = 1.0
        m[3, 1] = m[1, 3] = 1.0
        return m
    if op.kind == "zz":
        e = cmath.exp(1j * a)
        return np.diag([1.0, e, e, 1.0])
    if op.kind == "crz":
        return np.diag([1.0, 1.0, 1.0, cmath.exp(1j * a)])
    if op.kind == "crx":
        c, s = math.cos(a / 2), math.sin(a / 2)
        m = np.eye(4, dtype=complex)
        m[1, 1] = m[3, 3] = c
        m[1, 3] = m[3, 1] = -1j * s
        return m
    if op.kind == "toffoli":
        m = np.eye(8, dtype=complex)
        m[3, 3] = m[7, 7] = 0.0
        m[3, 7] = m[7, 3] = 1.0
        return m
    if op.kind == "gphase":
        return np.array([[cmath.exp(1j * a)]])
    raise ValueError(op.kind)


def oracle_gate_matrix(op: GateOp, n: int) -> np.ndarray:
    """Dense 2^n x 2^n matrix of one (possibly multi-controlled) gate."""
    dim = 1 << n
    base = _local_matrix(op)
    mat = np.zeros((dim, dim), dtype=complex)
    tg = op.targets
    for k in range(dim):
        if any(((k >> c) & 1) != p for c, p in zip(op.controls, op.polarities)):
            mat[k, k] = 1.0
            continue
        if not tg:
            mat[k, k] = base[0, 0]
            continue
        loc_in = sum(((k >> q) & 1) << i for i, q in enumerate(tg))
        for loc_out in range(base.shape[0]):
            amp = base[loc_out, loc_in]
            if amp == 0:
                continue
            kk = k
            for i, q in enumerate(tg):
                bit = (loc_out >> i) & 1
                kk = (kk & ~(1 << q)) | (bit << q)
            mat[kk, k] += amp
    return mat


def oracle_circuit_unitary(circuit: Circuit) -> np.ndarray:
    mat = np.eye(1 << circuit.num_qubits, dtype=complex)
    for op in circuit.ops:
        mat = oracle_gate_matrix(op, circuit.num_qubits) @ mat
    return mat


def oracle_centered_dft(n: int) -> np.ndarray:
    """C[m, k] = exp(-2 pi i (m - N/2) k / N) / sqrt(N), via explicit loops."""
    dim = 1 << n
    out = np.empty((dim, dim), dtype=complex)
    for m in range(dim):
        for k in range(dim):
            out[m, k] = cmath.exp(-2j * math.pi * (m - dim // 2) * k / dim)
    return out / math.sqrt(dim)


def oracle_walsh_value(mask: int, k: int) -> int:
    return -1 if bin(mask & k).count("1") % 2 else 1


def oracle_bell_lhst(u_mat: np.ndarray, a_mat: np.ndarray, n: int):
    """Literal Bell-pair protocol on 2n qubits: prepare |Phi+>^{x n} between
    register A (low bits) and B (high bits), apply U to A and conj(ansatz) to B,
    then project each pair onto |Phi+>. Returns (per-pair fidelities, c_lhst, c_hst).
    """
    dim = 1 << n
    psi = np.zeros((dim, dim), dtype=complex)  # psi[b, a]
    for a in range(dim):
        psi[a, a] = 1.0 / math.sqrt(dim)
    psi = psi @ u_mat.T          # U on register A
    psi = a_mat.conj() @ psi     # conj(A) on register B
    fids = []
    for j in range(n):
        bit = 1 << j
        total = 0.0
        for rest_a in range(dim):
            if rest_a & bit:
                continue
            for rest_b in range(dim):
                if rest_b & bit:
                    continue
                s = psi[rest_b, rest_a] + psi[rest_b | bit, rest_a | bit]
                total += abs(s / 2.0) ** 2
        fids.append(2.0 * total)
    fids = np.array(fids)
    c_hst = 1.0 - abs(np.trace(u_mat @ a_mat.conj().T)) ** 2 / dim**2
    return fids, 1.0 - float(fids.mean()), float(c_hst)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_circuit(n: int, depth: int, rng: np.random.Generator,
                   kinds=("x", "rz", "rx", "ry", "cnot", "toffoli", "zz", "crz", "crx", "gphase")) -> Circuit:
    ops = []
    for _ in range(depth):
        kind = rng.choice(kinds)
        need = {"x": 1, "rz": 1, "rx": 1, "ry": 1, "cnot": 2, "toffoli": 3,
                "zz": 2, "crz": 2, "crx": 2, "gphase": 0}[kind]
        if need > n:
            kind, need = "rz", 1
        qs = tuple(int(q) for q in rng.choice(n, size=need, replace=False))
        angle = float(rng.uniform(-math.pi, math.pi))
        if kind in ("x", "cnot", "toffoli"):
            ops.append(GateOp(kind, qs))
        else:
            ops.append(GateOp(kind, qs, angle))
    return Circuit(n, tuple(ops))


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return amps / np.linalg.norm(amps)
