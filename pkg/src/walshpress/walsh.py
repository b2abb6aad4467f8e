"""Walsh-basis expansion of diagonal operators: transform, locality, truncation, synthesis.

A mask j over n qubits selects the Walsh function W_j(k) = (-1)^{popcount(j & k)},
realized on a register as the Pauli-Z string picked out by the bits of j. Any
real function on the 2^n grid points expands as f(k) = sum_j fhat_j W_j(k) with
fhat_j = 2^{-n} sum_k f(k) W_j(k).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Circuit, GateOp, gphase, rz, zz
from .errors import UnsupportedOrderError

LINEAR = "linear"
RING = "ring"
TOPOLOGIES = (LINEAR, RING)


@dataclass(frozen=True)
class WalshTerm:
    mask: int
    coeff: float

    def __post_init__(self):
        if self.mask < 0:
            raise ValueError("mask must be nonnegative")
        object.__setattr__(self, "coeff", float(self.coeff))


@dataclass(frozen=True)
class DiagonalSpec:
    """A diagonal operator as Walsh coefficients with pairwise-distinct masks."""

    n: int
    terms: tuple[WalshTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        masks = [t.mask for t in self.terms]
        if len(set(masks)) != len(masks):
            raise ValueError("duplicate Walsh masks")
        if masks and max(masks) >= (1 << self.n):
            raise ValueError("mask exceeds register size")

    def coeff_array(self) -> np.ndarray:
        out = np.zeros(1 << self.n)
        for t in self.terms:
            out[t.mask] = t.coeff
        return out

    def coeff(self, mask: int) -> float:
        for t in self.terms:
            if t.mask == mask:
                return t.coeff
        return 0.0

    def to_dict(self) -> dict:
        return {"n": self.n, "terms": [{"mask": t.mask, "coeff": t.coeff} for t in self.terms]}

    @classmethod
    def from_dict(cls, data: dict) -> "DiagonalSpec":
        return cls(int(data["n"]), tuple(WalshTerm(d["mask"], d["coeff"]) for d in data["terms"]))


def _fwht(values: np.ndarray) -> np.ndarray:
    """In-place fast Walsh-Hadamard butterfly; returns sum_k f(k) (-1)^{j.k} per j."""
    a = np.array(values, dtype=float)
    h = 1
    while h < a.size:
        for start in range(0, a.size, h * 2):
            left = a[start:start + h].copy()
            right = a[start + h:start + 2 * h]
            a[start:start + h] = left + right
            a[start + h:start + 2 * h] = left - right
        h *= 2
    return a


def walsh_transform(values) -> DiagonalSpec:
    """Coefficients fhat_j = 2^{-n} sum_k f(k) W_j(k); exact-zero coefficients are dropped."""
    vals = np.asarray(values, dtype=float)
    n = int(round(math.log2(vals.size)))
    if 1 << n != vals.size:
        raise ValueError("length must be a power of two")
    coeffs = _fwht(vals) / vals.size
    terms = tuple(WalshTerm(j, c) for j, c in enumerate(coeffs) if c != 0.0)
    return DiagonalSpec(n, terms)


def inverse_walsh_transform(spec: DiagonalSpec) -> np.ndarray:
    """Reconstruct the sampled values f(k) = sum_j fhat_j W_j(k)."""
    return _fwht(spec.coeff_array())


def term_order(term: WalshTerm) -> int:
    """Hamming weight of the mask: 0 is a global phase, 1 an Rz, 2 a ZZ."""
    return bin(term.mask).count("1")


def _mask_qubits(mask: int) -> list[int]:
    return [q for q in range(mask.bit_length()) if (mask >> q) & 1]


def pair_locality(i: int, j: int, topology: str, n: int) -> int:
    """Locality of a ZZ on qubits i < j: one plus the array distance."""
    if topology not in TOPOLOGIES:
        raise ValueError(f"unknown topology {topology!r}")
    d = abs(j - i)
    if topology == RING:
        d = min(d, n - d)
    return d + 1


def term_locality(term: WalshTerm, topology: str, n: int) -> int:
    order = term_order(term)
    if order == 0:
        return 0
    if order == 1:
        return 1
    if order == 2:
        i, j = _mask_qubits(term.mask)
        return pair_locality(i, j, topology, n)
    raise UnsupportedOrderError(f"locality undefined for order-{order} term (mask {term.mask:#x})")


def truncate(spec: DiagonalSpec, max_order: int, max_locality: float, topology: str = LINEAR) -> DiagonalSpec:
    """Keep exactly the terms with order <= max_order and locality <= max_locality.

    Coefficients are never rescaled here; compensating for dropped terms is the
    optimizer's job.
    """
    if max_locality != math.inf and max_order > 2:
        raise UnsupportedOrderError("locality filtering is defined only for orders <= 2")
    kept = []
    for t in spec.terms:
        order = term_order(t)
        if order > max_order:
            continue
        if max_locality != math.inf and term_locality(t, topology, spec.n) > max_locality:
            continue
        kept.append(t)
    return DiagonalSpec(spec.n, tuple(kept))


def admitted_masks(n: int, max_locality: float, topology: str = LINEAR) -> list[int]:
    """All masks of order <= 2 with locality <= max_locality, in increasing-locality order.

    This is the theta key set of the truncated diagonal ansatz: mask 0, every
    single-qubit mask, then qubit pairs sorted by (locality, low qubit).
    """
    masks = [0] + [1 << q for q in range(n)]
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            loc = pair_locality(i, j, topology, n)
            if loc <= max_locality:
                pairs.append((loc, i, j))
    pairs.sort()
    masks.extend((1 << i) | (1 << j) for _, i, j in pairs)
    return masks


def diagonal_circuit(spec: DiagonalSpec, tau: float) -> Circuit:
    """Circuit for prod_j exp(-i tau fhat_j Z^{(j)}), one rotation per order>=1 term.

    exp(-i tau c Z-string) = gphase(-tau c) * rotation(2 tau c); the per-term
    global phases are accumulated into a single leading gphase op so that the
    diagonal is reproduced exactly, not only up to phase.
    """
    ops: list[GateOp] = []
    phase_total = 0.0
    ordered = sorted(spec.terms, key=lambda t: (term_order(t), t.mask))
    for t in ordered:
        order = term_order(t)
        if order > 2:
            raise UnsupportedOrderError(f"no circuit realization for order-{order} term")
        phase_total += -tau * t.coeff
        if order == 1:
            ops.append(rz(_mask_qubits(t.mask)[0], 2.0 * tau * t.coeff))
        elif order == 2:
            i, j = _mask_qubits(t.mask)
            ops.append(zz(i, j, 2.0 * tau * t.coeff))
    return Circuit(spec.n, (gphase(phase_total),) + tuple(ops))
