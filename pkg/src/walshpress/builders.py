"""Explicit circuit constructions: quadratic phase operators, the centered QFT,
log-size comparators, coupling circuits, and UCC wavepacket initialization."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Circuit, GateOp, StateVector, apply_circuit, circuit_diagonal,
    cnot, crz, gphase, mcx, ry, rz, x,
)
from .errors import ResourceLimitError
from .grid import GridSpec
from .optimize import OptimizerConfig, minimize


# ---------------------------------------------------------------------------
# Quadratic phase operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticPhases:
    """Coefficients of a quadratic phase over the basis index k = sum_j 2^j k_j.

    The realized diagonal is exp(i (phi1 + phi2 k + phi3 k^2)). For an evolution
    exp(-i tau (eta (x - x0)^2 + delta)) on a grid of spacing dx this requires
    phi1 = -tau (eta x0^2 + delta), phi2 = 2 tau eta x0 dx, phi3 = -tau eta dx^2
    (the linear coefficient carries the sign that reproduces the well at +x0).
    """

    phi1: float
    phi2: float
    phi3: float

    @classmethod
    def from_quadratic(cls, eta: float, x0: float, delta: float, tau: float, dx: float) -> "QuadraticPhases":
        return cls(
            phi1=-tau * (eta * x0 * x0 + delta),
            phi2=2.0 * tau * eta * x0 * dx,
            phi3=-tau * eta * dx * dx,
        )

    def phase_at(self, k):
        k = np.asarray(k, dtype=float)
        return self.phi1 + self.phi2 * k + self.phi3 * k * k

    def diagonal(self, n: int) -> np.ndarray:
        return np.exp(1j * self.phase_at(np.arange(1 << n)))


def explicit_quadratic_circuit(phases: QuadraticPhases, n: int, reduced: bool = True) -> Circuit:
    """Phase circuit for exp(i(phi1 + phi2 k + phi3 k^2)) built from Rz and CRz.

    reduced=True follows the commutativity-reduced layout with 2+n Rz and
    n(n-1)/2 CRz gates plus one global phase; reduced=False keeps the original
    ordered-pair layout with 2(1+n) Rz and n(n-1) CRz gates. (The single-qubit
    counts match the published formulas; the fully merged form would need only
    n Rz, so the two lowest qubits keep their linear and quadratic rotations as
    separate gates. All variants realize the identical diagonal.)
    """
    if n < 1:
        raise ValueError("need at least one qubit")
    phi1, phi2, phi3 = phases.phi1, phases.phi2, phases.phi3
    ops: list[GateOp] = [gphase(phi1)]
    if reduced:
        if n == 1:
            ops += [rz(0, phi2 / 2), rz(0, phi2 / 2), rz(0, phi3)]
        else:
            split = (0, 1)
            ops += [rz(j, phi2 * (1 << j)) for j in split]
            ops += [rz(j, phi2 * (1 << j) + phi3 * (1 << (2 * j))) for j in range(2, n)]
            ops += [rz(j, phi3 * (1 << (2 * j))) for j in split]
        for i in range(n):
            for j in range(i + 1, n):
                ops.append(crz(i, j, 2.0 * phi3 * (1 << (i + j))))
    else:
        halved = (0, 1) if n > 1 else (0,)
        for j in range(n):
            if j in halved:
                ops += [rz(j, phi2 * (1 << j) / 2)] * 2
            else:
                ops.append(rz(j, phi2 * (1 << j)))
        if n == 1:
            ops += [rz(0, phi3 / 2)] * 2
        else:
            ops += [rz(j, phi3 * (1 << (2 * j))) for j in range(n)]
        for i in range(n):
            for j in range(n):
                if i != j:
                    ops.append(crz(i, j, phi3 * (1 << (i + j))))
    return Circuit(n, tuple(ops))


# ---------------------------------------------------------------------------
# Centered QFT as gates
# ---------------------------------------------------------------------------

def _hadamard_ops(q: int) -> list[GateOp]:
    # H = X . Ry(pi/2)
    return [ry(q, math.pi / 2), x(q)]


def _swap_ops(a: int, b: int) -> list[GateOp]:
    return [cnot(a, b), cnot(b, a), cnot(a, b)]


def cqft_circuit(n: int) -> Circuit:
    """Gate-level centered QFT, equal to grid.centered_qft as a matrix.

    Built as a half-grid index shift (X on the top qubit), the standard QFT
    with negated phase kernel, the shift again, and an Rz(pi) parity fix on
    qubit 0 left over from conjugating the shift through the transform.
    """
    if n == 1:
        return Circuit(1, tuple(_hadamard_ops(0) + [x(0)]))
    ops: list[GateOp] = [x(n - 1)]
    for i in range(n - 1, -1, -1):
        ops += _hadamard_ops(i)
        for m in range(i - 1, -1, -1):
            ops.append(crz(m, i, -math.pi / (1 << (i - m))))
    for i in range(n // 2):
        ops += _swap_ops(i, n - 1 - i)
    ops += [x(n - 1), rz(0, math.pi)]
    return Circuit(n, tuple(ops))


def kinetic_circuit(grid: GridSpec, mu: float, tau: float, reduced: bool = True) -> Circuit:
    """exp(-i tau p^2 / 2 mu) as cQFT, quadratic momentum phases, inverse cQFT."""
    if mu <= 0:
        raise ValueError("mass must be positive")
    fwd = cqft_circuit(grid.n)
    phases = QuadraticPhases.from_quadratic(
        eta=1.0 / (2.0 * mu),
        x0=(grid.num_points >> 1) * grid.dp,
        delta=0.0,
        tau=tau,
        dx=grid.dp,
    )
    return fwd + explicit_quadratic_circuit(phases, grid.n, reduced) + fwd.inverse()


# ---------------------------------------------------------------------------
# Comparators
# ---------------------------------------------------------------------------

def ancilla_budget(n: int) -> int:
    """ceil(log2 n) ancilla for n > 3, minimum one."""
    return max(1, math.ceil(math.log2(n))) if n > 3 else 1


@dataclass(frozen=True)
class ComparatorLayout:
    """Wire assignment for comparator circuits over an n-qubit position register."""

    n: int
    position_wires: tuple[int, ...]
    ancilla_wires: tuple[int, ...]
    comparator_wires: tuple[int, ...]

    def __post_init__(self):
        if len(self.position_wires) != self.n:
            raise ValueError("need one wire per position qubit")
        wires = self.position_wires + self.ancilla_wires + self.comparator_wires
        if len(set(wires)) != len(wires):
            raise ValueError("overlapping wire assignment")

    @classmethod
    def standard(cls, n: int, num_comparators: int, num_ancilla: int | None = None,
                 offset: int = 0) -> "ComparatorLayout":
        """Wires packed as [position][ancilla][comparators]; `offset` shifts the
        ancilla/comparator block upward (used when an objective qubit sits at n)."""
        anc = ancilla_budget(n) if num_ancilla is None else num_ancilla
        a0 = n + offset
        return cls(
            n=n,
            position_wires=tuple(range(n)),
            ancilla_wires=tuple(range(a0, a0 + anc)),
            comparator_wires=tuple(range(a0 + anc, a0 + anc + num_comparators)),
        )

    @property
    def num_ancilla(self) -> int:
        return len(self.ancilla_wires)

    @property
    def num_comparators(self) -> int:
        return len(self.comparator_wires)

    @property
    def width(self) -> int:
        wires = self.position_wires + self.ancilla_wires + self.comparator_wires
        return max(wires) + 1


class _AncillaPool:
    def __init__(self, wires):
        self._free = list(wires)

    def acquire(self) -> int:
        if not self._free:
            raise ResourceLimitError("comparator ancilla budget exhausted")
        return self._free.pop()

    def release(self, wire: int) -> None:
        self._free.append(wire)


def _threshold_fold(n: int, threshold: int, relation: str):
    """Reduce 'k relation threshold' to a start literal plus AND/OR fold steps.

    Folding runs from the low bit upward: an AND for a threshold 1-bit, an OR
    for a 0-bit. Leading ANDs on an empty accumulator vanish. 'less' is the
    one's-complement image of 'greater': negated literals against the
    complemented threshold. A literal is (bit_index, active_bit_value).
    """
    if relation == "greater":
        t, pol = threshold, 1
    elif relation == "less":
        t, pol = (~threshold) & ((1 << n) - 1), 0
    else:
        raise ValueError(f"relation must be 'greater' or 'less', got {relation!r}")
    start = None
    steps: list[tuple[str, tuple[int, int]]] = []
    for i in range(n):
        is_and = (t >> i) & 1
        lit = (i, pol)
        if start is None:
            if not is_and:
                start = lit
        else:
            steps.append(("and" if is_and else "or", lit))
    return start, steps


def _emit_step(op: str, lit, prev, out_wire: int, pos_wire_of) -> list[GateOp]:
    """out ^= (lit OP prev); OR via De Morgan with inverted controls and an X."""
    lw, lp = pos_wire_of(lit[0]), lit[1]
    pw, pp = prev
    if op == "and":
        return [mcx(out_wire, (lw, pw), (lp, pp))]
    return [mcx(out_wire, (lw, pw), (1 - lp, 1 - pp)), x(out_wire)]


def _emit_chain(steps, prev, out_wire: int, pool: _AncillaPool, pos_wire_of) -> list[GateOp]:
    """Write the folded chain value to out_wire, ancilla restored on return.

    Balanced splitting keeps the live-ancilla count at ceil(log2(#steps)):
    compute the first half into a scratch wire, chain the second half off it,
    then replay the first half in reverse (every op is an involution).
    """
    if len(steps) == 1:
        op, lit = steps[0]
        return _emit_step(op, lit, prev, out_wire, pos_wire_of)
    mid = len(steps) // 2
    a = pool.acquire()
    head = _emit_chain(steps[:mid], prev, a, pool, pos_wire_of)
    tail = _emit_chain(steps[mid:], (a, 1), out_wire, pool, pos_wire_of)
    pool.release(a)
    return head + tail + head[::-1]


def comparator_circuit(layout: ComparatorLayout, threshold: int, relation: str,
                       target: int) -> Circuit:
    """Flip `target` (a comparator wire) iff the position register satisfies the
    relation against the threshold; ancilla wires return to |0> within the block.

    Composed of two-control Toffoli-class ops (ANDs, and ORs as polarity-inverted
    ANDs) chained through the log-size ancilla pool. The running intermediates
    are uncomputed eagerly as part of the balanced chain, so there is no dirty
    deferred mode; pairing the block with its inverse restores the target too.
    """
    n = layout.n
    if not 0 <= threshold < (1 << n):
        raise ValueError(f"threshold {threshold} outside [0, 2^{n})")
    if relation == "greater" and threshold == (1 << n) - 1:
        raise ValueError("'greater than the top basis state' is meaningless in this basis")
    if target not in layout.comparator_wires:
        raise ValueError(f"wire {target} is not a comparator wire")

    start, steps = _threshold_fold(n, threshold, relation)
    pos = lambda i: layout.position_wires[i]
    if start is None:
        ops: list[GateOp] = []
    elif not steps:
        ops = [mcx(target, (pos(start[0]),), (start[1],))]
    else:
        pool = _AncillaPool(layout.ancilla_wires)
        ops = _emit_chain(steps, (pos(start[0]), start[1]), target, pool, pos)
    return Circuit(layout.width, tuple(ops))


# ---------------------------------------------------------------------------
# Coupling circuits
# ---------------------------------------------------------------------------

def gaussian_area(c0: float, beta: float) -> float:
    """Integral of c0 exp(-beta (x-a)^2) over the line."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return c0 * math.sqrt(math.pi / beta)


def step_height(c0: float, beta: float, span_size: int, dx: float) -> float:
    """Constant coupling over span_size grid cells preserving the Gaussian area."""
    return gaussian_area(c0, beta) / (span_size * dx)


def step_coupling_circuit(grid: GridSpec, c0: float, beta: float, a: float,
                          span: tuple[int, ...], tau: float, objective: int,
                          layout: ComparatorLayout) -> Circuit:
    """Rx(2 h tau) on the objective exactly when the position index lies in `span`.

    The window test uses up to two 'less-than' comparators (lower and upper
    edge); comparator wires are computed, used as controls, then uncomputed by
    the mirrored inverse blocks. `a` is the center of the source Gaussian and
    only documents provenance; the step is placed by `span`.
    """
    span = tuple(int(s) for s in span)
    if list(span) != list(range(span[0], span[0] + len(span))):
        raise ValueError("span must be a contiguous index window")
    if span[0] < 0 or span[-1] >= grid.num_points:
        raise ValueError("span outside the grid")
    if objective in layout.position_wires + layout.ancilla_wires + layout.comparator_wires:
        raise ValueError("objective wire collides with the comparator layout")

    h = step_height(c0, beta, len(span), grid.dx)
    blocks: list[Circuit] = []
    controls: list[int] = []
    polarities: list[int] = []
    lo, hi = span[0], span[-1]
    wires = list(layout.comparator_wires)
    if lo > 0:
        w = wires.pop(0)
        blocks.append(comparator_circuit(layout, lo, "less", w))
        controls.append(w)
        polarities.append(0)  # in-window requires NOT(k < lo)
    if hi < grid.num_points - 1:
        w = wires.pop(0)
        blocks.append(comparator_circuit(layout, hi + 1, "less", w))
        controls.append(w)
        polarities.append(1)  # and (k < hi + 1)

    width = max(layout.width, objective + 1)
    rot = GateOp("rx", (objective,), 2.0 * h * tau, tuple(controls), tuple(polarities))
    ops: list[GateOp] = []
    for b in blocks:
        ops += list(b.ops)
    ops.append(rot)
    for b in reversed(blocks):
        ops += list(b.inverse().ops)
    return Circuit(width, tuple(ops))


@dataclass(frozen=True)
class PiecewiseCoupling:
    """Piecewise-linear coupling f(x) = alpha_i x + beta_i on the active piece.

    Piece i is active for breakpoints[i-1] <= k < breakpoints[i] (in basis
    indices); the optional Gaussian fields record the area-preserving source.
    """

    pieces: tuple[tuple[float, float], ...]
    breakpoints: tuple[int, ...]
    gauss_c0: float | None = None
    gauss_beta: float | None = None
    gauss_center: float | None = None

    def __post_init__(self):
        if len(self.breakpoints) != len(self.pieces) - 1:
            raise ValueError("need P-1 breakpoints for P pieces")
        if any(b >= c for b, c in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if any(b < 0 for b in self.breakpoints):
            raise ValueError("breakpoints must be nonnegative")

    def values(self, grid: GridSpec) -> np.ndarray:
        """Sampled coupling over the grid (for dense oracles)."""
        ks = np.arange(grid.num_points)
        piece_of = np.searchsorted(np.asarray(self.breakpoints), ks, side="right")
        alphas = np.asarray([p[0] for p in self.pieces])
        betas = np.asarray([p[1] for p in self.pieces])
        return alphas[piece_of] * (ks * grid.dx) + betas[piece_of]


def piecewise_coupling_circuit(coupling: PiecewiseCoupling, layout: ComparatorLayout,
                               grid: GridSpec, tau: float, objective: int) -> Circuit:
    """Telescoped piece switching: apply piece 0 unconditionally, then on each
    comparator c_i = [k >= breakpoint_i] rotate by the (alpha, beta) increments.

    All rotations are Rx-type on the objective and commute, so the net angle on
    piece m is 2 tau (alpha_m x + beta_m). Position-dependent parts enter as one
    controlled rotation per position bit (angle scaled by 2^j dx).
    """
    if len(coupling.breakpoints) > layout.num_comparators:
        raise ValueError("not enough comparator wires for the breakpoint count")
    if any(not 1 <= b < grid.num_points for b in coupling.breakpoints):
        raise ValueError("breakpoints must lie in [1, 2^n) for circuit synthesis")

    def rotations(alpha: float, beta: float, extra_controls, extra_pols) -> list[GateOp]:
        ops = []
        if beta != 0.0:
            ops.append(GateOp("rx", (objective,), 2.0 * tau * beta,
                              tuple(extra_controls), tuple(extra_pols)))
        if alpha != 0.0:
            for j, w in enumerate(layout.position_wires):
                angle = 2.0 * tau * alpha * grid.dx * (1 << j)
                ops.append(GateOp("rx", (objective,), angle,
                                  (w,) + tuple(extra_controls), (1,) + tuple(extra_pols)))
        return ops

    blocks = [
        comparator_circuit(layout, bp - 1, "greater", layout.comparator_wires[i])
        for i, bp in enumerate(coupling.breakpoints)
    ]
    width = max(layout.width, objective + 1)
    ops: list[GateOp] = []
    for b in blocks:
        ops += list(b.ops)
    a0, b0 = coupling.pieces[0]
    ops += rotations(a0, b0, (), ())
    for i in range(1, len(coupling.pieces)):
        da = coupling.pieces[i][0] - coupling.pieces[i - 1][0]
        db = coupling.pieces[i][1] - coupling.pieces[i - 1][1]
        cw = layout.comparator_wires[i - 1]
        ops += rotations(da, db, (cw,), (1,))
    for b in reversed(blocks):
        ops += list(b.inverse().ops)
    return Circuit(width, tuple(ops))


# ---------------------------------------------------------------------------
# UCC wavepacket initialization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UccParams:
    """Angles for the alternating Ry / CNOT-ladder initialization ansatz."""

    n: int
    layers: int
    thetas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        expected = self.n * (self.layers + 1)
        if len(self.thetas) != expected:
            raise ValueError(f"expected {expected} angles for n={self.n}, layers={self.layers}")


def ucc_circuit(params: UccParams) -> Circuit:
    """X on the top qubit, then Ry sublayers separated by ascending CNOT ladders."""
    n = params.n
    ops: list[GateOp] = [x(n - 1)]
    thetas = iter(params.thetas)
    for layer in range(params.layers + 1):
        ops += [ry(q, next(thetas)) for q in range(n)]
        if layer < params.layers:
            ops += [cnot(q, q + 1) for q in range(n - 1)]
    return Circuit(n, tuple(ops))


def fit_wavepacket(target, layers: int, opt: OptimizerConfig) -> tuple[UccParams, float]:
    """Maximize |<target|ucc(thetas)|0>|^2 over the Ry angles; returns (params, fidelity).

    The target must be a normalized nonnegative-real amplitude vector (a ground
    state of a quadratic well). Gradients use the two-term parameter-shift rule;
    the run is deterministic for a fixed opt.seed.
    """
    tgt = np.asarray(target, dtype=float)
    n = int(round(math.log2(tgt.size)))
    if 1 << n != tgt.size:
        raise ValueError("target length must be a power of two")
    if abs(np.linalg.norm(tgt) - 1.0) > 1e-8:
        raise ValueError("target must be normalized")
    if np.any(tgt < -1e-12):
        raise ValueError("target must be nonnegative-real")

    zero = StateVector.basis_state(n, 0)

    def fidelity(thetas: np.ndarray) -> float:
        state = apply_circuit(zero, ucc_circuit(UccParams(n, layers, tuple(thetas))))
        return float(abs(np.vdot(tgt, state.amplitudes)) ** 2)

    def cost(thetas: np.ndarray) -> float:
        return 1.0 - fidelity(thetas)

    def grad(thetas: np.ndarray) -> np.ndarray:
        g = np.empty_like(thetas)
        for k in range(thetas.size):
            shifted = thetas.copy()
            shifted[k] += math.pi / 2
            plus = cost(shifted)
            shifted[k] -= math.pi
            minus = cost(shifted)
            g[k] = 0.5 * (plus - minus)
        return g

    rng = np.random.default_rng(opt.seed)
    x0 = rng.uniform(-opt.init_scale, opt.init_scale, size=n * (layers + 1))
    best, best_cost, _, _ = minimize(cost, grad, x0, opt)
    return UccParams(n, layers, tuple(best)), 1.0 - best_cost
