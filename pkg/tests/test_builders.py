"""Explicit Trotter-term circuits, comparators, couplings, UCC initialization."""
import math

import numpy as np
import pytest

from walshpress.builders import (
    ComparatorLayout, PiecewiseCoupling, QuadraticPhases, UccParams,
    ancilla_budget, comparator_circuit, cqft_circuit, explicit_quadratic_circuit,
    fit_wavepacket, gaussian_area, kinetic_circuit, piecewise_coupling_circuit,
    step_coupling_circuit, step_height, ucc_circuit,
)
from walshpress.core import (
    Circuit, StateVector, apply_circuit, circuit_diagonal, circuit_unitary, classical_map,
)
from walshpress.grid import GridSpec, centered_qft, momenta, positions
from walshpress.optimize import OptimizerConfig

from conftest import oracle_centered_dft, random_state


def _gate_counts(circ):
    out = {}
    for op in circ.ops:
        out[op.kind] = out.get(op.kind, 0) + 1
    return out


# ---------------------------------------------------------------------------
# Explicit quadratic circuits
# ---------------------------------------------------------------------------

def test_quadratic_phase_reconstruction():
    g = GridSpec(5, 20.0)
    eta, x0, delta, tau = 0.015, 11.5, 0.2, 1.0
    ph = QuadraticPhases.from_quadratic(eta, x0, delta, tau, g.dx)
    xs = positions(g)
    want = np.exp(-1j * tau * (eta * (xs - x0) ** 2 + delta))
    got = ph.diagonal(5)
    assert np.max(np.abs(got - want)) < 1e-10


def test_zero_quadratic_gives_identity_diagonal():
    ph = QuadraticPhases.from_quadratic(0.0, 0.0, 0.0, 1.0, 0.1)
    circ = explicit_quadratic_circuit(ph, 3, reduced=True)
    assert np.max(np.abs(circuit_diagonal(circ) - 1.0)) < 1e-14


def test_reduced_census_n3():
    ph = QuadraticPhases.from_quadratic(0.3, 1.0, 0.1, 0.7, 0.5)
    counts = _gate_counts(explicit_quadratic_circuit(ph, 3, reduced=True))
    assert counts.get("rz", 0) == 5          # 2 + n
    assert counts.get("crz", 0) == 3         # n(n-1)/2
    assert counts.get("gphase", 0) == 1


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_gate_count_formulas(n):
    ph = QuadraticPhases.from_quadratic(0.2, 0.5, 0.0, 1.0, 0.25)
    red = _gate_counts(explicit_quadratic_circuit(ph, n, reduced=True))
    assert red.get("rz", 0) == 2 + n
    assert red.get("crz", 0) == n * (n - 1) // 2
    full = _gate_counts(explicit_quadratic_circuit(ph, n, reduced=False))
    assert full.get("rz", 0) == 2 * (1 + n)
    assert full.get("crz", 0) == n * (n - 1)


def test_explicit_vs_elementwise_oracle(rng):
    # 200 random draws across sizes, both variants
    for _ in range(200):
        n = int(rng.integers(2, 7))
        g = GridSpec(n, float(rng.uniform(5, 30)))
        eta = float(rng.uniform(0.001, 2.0))
        x0 = float(rng.uniform(-g.L, 2 * g.L))
        delta = float(rng.uniform(-2, 2))
        tau = float(rng.uniform(0.05, 3.0))
        ph = QuadraticPhases.from_quadratic(eta, x0, delta, tau, g.dx)
        want = np.exp(-1j * tau * (eta * (positions(g) - x0) ** 2 + delta))
        for reduced in (True, False):
            diag = circuit_diagonal(explicit_quadratic_circuit(ph, n, reduced))
            assert np.max(np.abs(diag - want)) < 1e-9


def test_reduced_and_unreduced_identical(rng):
    ph = QuadraticPhases.from_quadratic(0.7, 2.2, -0.4, 0.9, 0.3)
    a = circuit_diagonal(explicit_quadratic_circuit(ph, 4, True))
    b = circuit_diagonal(explicit_quadratic_circuit(ph, 4, False))
    assert np.max(np.abs(a - b)) < 1e-12


def test_explicit_quadratic_n4_production_values():
    g = GridSpec(4, 20.0)
    ph = QuadraticPhases.from_quadratic(0.015, 10.0, 0.0, 1.0, g.dx)
    diag = circuit_diagonal(explicit_quadratic_circuit(ph, 4, reduced=True))
    want = np.exp(-1j * (0.015 * (positions(g) - 10.0) ** 2))
    assert np.max(np.abs(diag - want)) < 1e-10


# ---------------------------------------------------------------------------
# Centered QFT and the kinetic sandwich
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_cqft_circuit_matches_bruteforce(n):
    got = circuit_unitary(cqft_circuit(n)).entries
    assert np.max(np.abs(got - oracle_centered_dft(n))) < 1e-9


def test_cqft_circuit_matches_fft_path(rng):
    n = 4
    psi = random_state(n, rng)
    via_gates = apply_circuit(StateVector(n, psi), cqft_circuit(n)).amplitudes
    via_fft = centered_qft(StateVector(n, psi)).amplitudes
    assert np.max(np.abs(via_gates - via_fft)) < 1e-10


def test_kinetic_on_zero_momentum_is_phase_only():
    g = GridSpec(4, 20.0)
    uniform = StateVector(4, np.full(16, 0.25, dtype=complex))
    out = apply_circuit(uniform, kinetic_circuit(g, mu=1.0, tau=0.8))
    overlap = np.vdot(uniform.amplitudes, out.amplitudes)
    assert abs(abs(overlap) - 1.0) < 1e-10


def test_kinetic_matches_dense_oracle():
    g = GridSpec(3, 12.0)
    mu, tau = 1.0, 0.3
    c = oracle_centered_dft(3)
    kmat = c.conj().T @ np.diag(np.exp(-1j * tau * momenta(g) ** 2 / (2 * mu))) @ c
    got = circuit_unitary(kinetic_circuit(g, mu, tau)).entries
    assert np.max(np.abs(got - kmat)) < 1e-8


def test_kinetic_doubles(rng):
    g = GridSpec(3, 12.0)
    once = circuit_unitary(kinetic_circuit(g, 1.0, 0.4)).entries
    twice = circuit_unitary(kinetic_circuit(g, 1.0, 0.8)).entries
    assert np.max(np.abs(once @ once - twice)) < 1e-9


# ---------------------------------------------------------------------------
# Comparators
# ---------------------------------------------------------------------------

def _basis_inputs(width, n):
    dim = 1 << n
    inputs = np.zeros((dim, width), dtype=np.uint8)
    for k in range(dim):
        for q in range(n):
            inputs[k, q] = (k >> q) & 1
    return inputs


@pytest.mark.parametrize("n", range(1, 9))
def test_comparator_exhaustive(n):
    layout = ComparatorLayout.standard(n, 1)
    wire = layout.comparator_wires[0]
    inputs = _basis_inputs(layout.width, n)
    ks = np.arange(1 << n)
    for relation in ("greater", "less"):
        thresholds = range((1 << n) - 1) if relation == "greater" else range(1 << n)
        for t in thresholds:
            circ = comparator_circuit(layout, t, relation, wire)
            out = classical_map(circ, inputs)
            want = (ks > t) if relation == "greater" else (ks < t)
            assert np.array_equal(out[:, wire].astype(bool), want)
            assert np.array_equal(out[:, :n], inputs[:, :n])
            for a in layout.ancilla_wires:
                assert not out[:, a].any()
            touched = {w for op in circ.ops for w in op.qubits if w in layout.ancilla_wires}
            assert len(touched) <= ancilla_budget(n)


def test_comparator_n3_threshold3_single_cnot():
    layout = ComparatorLayout.standard(3, 1)
    circ = comparator_circuit(layout, 3, "greater", layout.comparator_wires[0])
    assert len(circ.ops) == 1
    op = circ.ops[0]
    assert op.kind == "x" and op.controls == (2,) and op.polarities == (1,)


def test_comparator_forbidden_threshold():
    layout = ComparatorLayout.standard(3, 1)
    with pytest.raises(ValueError):
        comparator_circuit(layout, 7, "greater", layout.comparator_wires[0])
    with pytest.raises(ValueError):
        comparator_circuit(layout, 8, "less", layout.comparator_wires[0])


def test_comparator_plus_inverse_is_identity(rng):
    layout = ComparatorLayout.standard(4, 1)
    circ = comparator_circuit(layout, 9, "less", layout.comparator_wires[0])
    full = circ + circ.inverse()
    u = circuit_unitary(full).entries
    assert np.max(np.abs(u - np.eye(u.shape[0]))) < 1e-10


def test_comparator_restores_ancilla_on_superpositions(rng):
    # amplitude on nonzero ancilla states below 1e-12 for a random register state
    n = 5
    layout = ComparatorLayout.standard(n, 1)
    width = layout.width
    amps = np.zeros(1 << width, dtype=complex)
    amps[: 1 << n] = random_state(n, rng)
    state = StateVector(width, amps)
    out = apply_circuit(state, comparator_circuit(layout, 17, "less", layout.comparator_wires[0]))
    idx = np.arange(1 << width)
    dirty = np.zeros(1 << width, dtype=bool)
    for a in layout.ancilla_wires:
        dirty |= ((idx >> a) & 1) == 1
    assert np.sum(np.abs(out.amplitudes[dirty]) ** 2) < 1e-12


# ---------------------------------------------------------------------------
# Step and piecewise couplings
# ---------------------------------------------------------------------------

def test_gaussian_area_production_value():
    assert gaussian_area(0.01, 5.0) == pytest.approx(0.00793, abs=5e-6)


def test_step_height_production_value():
    g = GridSpec(8, 20.0)
    assert step_height(0.01, 5.0, 3, g.dx) == pytest.approx(0.03383, abs=5e-5)


def _coupling_oracle(grid, coupling_values, tau, dim_obj=2):
    """Dense exp(-i tau Vc x sigma_x) on position (low bits) + objective."""
    n = grid.n
    dim = 1 << n
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    h = np.kron(sx, np.diag(coupling_values))  # objective is the high bit
    vals, vecs = np.linalg.eigh(h)
    return vecs @ np.diag(np.exp(-1j * tau * vals)) @ vecs.conj().T


def test_step_coupling_matches_dense_oracle(rng):
    g = GridSpec(4, 20.0)
    layout = ComparatorLayout.standard(4, 2, offset=1)
    objective = 4
    span = (7, 8, 9)
    tau, c0, beta = 0.9, 0.01, 5.0
    circ = step_coupling_circuit(g, c0, beta, 10.0, span, tau, objective, layout)
    u = circuit_unitary(circ).entries
    # restrict to ancilla/comparator = 0 block: those are the high wires
    keep = [k for k in range(u.shape[0]) if k < (1 << 5)]
    block = u[np.ix_(keep, keep)]
    values = np.zeros(16)
    values[list(span)] = step_height(c0, beta, 3, g.dx)
    want = _coupling_oracle(g, values, tau)
    assert np.max(np.abs(block - want)) < 1e-9


def test_step_coupling_outside_window_untouched():
    g = GridSpec(4, 20.0)
    layout = ComparatorLayout.standard(4, 2, offset=1)
    circ = step_coupling_circuit(g, 0.01, 5.0, 10.0, (7, 8, 9), 1.0, 4, layout)
    width = circ.num_qubits
    for k in (0, 5, 12):  # positions outside the window, objective 0
        out = apply_circuit(StateVector.basis_state(width, k), circ)
        assert abs(out.amplitudes[k] - 1.0) < 1e-12
    # and on the production grid: basis state 50 sits outside {127, 128, 129}
    g8 = GridSpec(8, 20.0)
    layout8 = ComparatorLayout.standard(8, 2, offset=1)
    circ8 = step_coupling_circuit(g8, 0.01, 5.0, 10.0, (127, 128, 129), 1.0, 8, layout8)
    out = apply_circuit(StateVector.basis_state(circ8.num_qubits, 50), circ8)
    assert abs(out.amplitudes[50] - 1.0) < 1e-12


def test_step_coupling_window_subspace_rotation():
    g = GridSpec(4, 20.0)
    layout = ComparatorLayout.standard(4, 2, offset=1)
    tau = 1.3
    h = step_height(0.01, 5.0, 3, g.dx)
    circ = step_coupling_circuit(g, 0.01, 5.0, 10.0, (7, 8, 9), tau, 4, layout)
    width = circ.num_qubits
    amps = np.zeros(1 << width, dtype=complex)
    amps[8] = 1.0  # in-window position, objective 0
    out = apply_circuit(StateVector(width, amps), circ).amplitudes
    assert abs(out[8] - math.cos(h * tau)) < 1e-12
    assert abs(out[8 + 16] - (-1j * math.sin(h * tau))) < 1e-12


def test_piecewise_single_uniform_piece():
    g = GridSpec(3, 8.0)
    layout = ComparatorLayout.standard(3, 0, offset=1)
    pw = PiecewiseCoupling(pieces=((0.0, 0.05),), breakpoints=())
    circ = piecewise_coupling_circuit(pw, layout, g, 1.0, 3)
    assert len(circ.ops) == 1
    op = circ.ops[0]
    assert op.kind == "rx" and op.angle == pytest.approx(0.1) and not op.controls


def test_piecewise_two_piece_step_matches_oracle():
    g = GridSpec(4, 20.0)
    layout = ComparatorLayout.standard(4, 1, offset=1)
    h = 0.04
    pw = PiecewiseCoupling(pieces=((0.0, 0.0), (0.0, h)), breakpoints=(6,))
    tau = 0.7
    circ = piecewise_coupling_circuit(pw, layout, g, tau, 4)
    u = circuit_unitary(circ).entries
    keep = list(range(1 << 5))
    block = u[np.ix_(keep, keep)]
    want = _coupling_oracle(g, pw.values(g), tau)
    assert np.max(np.abs(block - want)) < 1e-9


def test_piecewise_linear_matches_oracle():
    g = GridSpec(3, 8.0)
    layout = ComparatorLayout.standard(3, 2, offset=1)
    pw = PiecewiseCoupling(pieces=((0.01, 0.0), (-0.005, 0.08), (0.0, 0.02)),
                           breakpoints=(3, 6))
    tau = 1.1
    circ = piecewise_coupling_circuit(pw, layout, g, tau, 3)
    u = circuit_unitary(circ).entries
    keep = list(range(1 << 4))
    block = u[np.ix_(keep, keep)]
    want = _coupling_oracle(g, pw.values(g), tau)
    assert np.max(np.abs(block - want)) < 1e-9


def test_piecewise_four_piece_structure():
    g = GridSpec(4, 16.0)
    layout = ComparatorLayout.standard(4, 3, offset=1)
    pw = PiecewiseCoupling(pieces=((0.0, 0.0), (0.01, -0.05), (0.0, 0.06), (0.0, 0.0)),
                           breakpoints=(4, 8, 12))
    circ = piecewise_coupling_circuit(pw, layout, g, 1.0, 4)
    # P-1 = 3 comparator computations up front, mirrored by their inverses at the end
    blocks = [comparator_circuit(layout, bp - 1, "greater", layout.comparator_wires[i])
              for i, bp in enumerate(pw.breakpoints)]
    forward = tuple(op for b in blocks for op in b.ops)
    mirrored = tuple(op for b in reversed(blocks) for op in b.inverse().ops)
    assert circ.ops[: len(forward)] == forward
    assert circ.ops[len(circ.ops) - len(mirrored):] == mirrored
    u = circuit_unitary(circ).entries
    keep = list(range(1 << 5))
    block = u[np.ix_(keep, keep)]
    want = _coupling_oracle(g, pw.values(g), 1.0)
    assert np.max(np.abs(block - want)) < 1e-9


def test_piecewise_validation():
    with pytest.raises(ValueError):
        PiecewiseCoupling(pieces=((0.0, 0.0), (0.0, 1.0)), breakpoints=(5, 6))
    with pytest.raises(ValueError):
        PiecewiseCoupling(pieces=((0.0, 0.0), (0.0, 1.0), (0.0, 0.0)), breakpoints=(6, 6))


# ---------------------------------------------------------------------------
# UCC initialization
# ---------------------------------------------------------------------------

def test_ucc_zero_angles_gives_100():
    params = UccParams(3, 2, (0.0,) * 9)
    out = apply_circuit(StateVector.basis_state(3, 0), ucc_circuit(params))
    assert abs(out.amplitudes[0b100] - 1.0) < 1e-12


def test_ucc_angle_count():
    assert len(UccParams(3, 2, (0.1,) * 9).thetas) == 9
    with pytest.raises(ValueError):
        UccParams(3, 2, (0.1,) * 8)


def test_ucc_structure_n3():
    circ = ucc_circuit(UccParams(3, 2, tuple(0.1 * i for i in range(9))))
    kinds = [op.kind for op in circ.ops]
    assert kinds == ["x"] + ["ry"] * 3 + ["cnot"] * 2 + ["ry"] * 3 + ["cnot"] * 2 + ["ry"] * 3
    ladders = [op.targets for op in circ.ops if op.kind == "cnot"]
    assert ladders == [(0, 1), (1, 2), (0, 1), (1, 2)]


def test_ucc_real_normalized_property(rng):
    for _ in range(100):
        params = UccParams(3, 2, tuple(rng.uniform(-np.pi, np.pi, size=9)))
        out = apply_circuit(StateVector.basis_state(3, 0), ucc_circuit(params))
        assert abs(out.norm() - 1.0) < 1e-12
        assert np.max(np.abs(out.amplitudes.imag)) < 1e-12


def _gaussian_target(n, L, a, c):
    xs = positions(GridSpec(n, L))
    psi = np.exp(-math.sqrt(2 * a) * (xs - c) ** 2 / 2)
    return psi / np.linalg.norm(psi)


def test_fit_wavepacket_trivial_target():
    # |100> is hit exactly at all-zero angles: start there and stay
    target = np.zeros(8)
    target[0b100] = 1.0
    params, fid = fit_wavepacket(
        target, 2, OptimizerConfig(seed=3, max_iters=50, cost_tolerance=1e-12, init_scale=0.0))
    assert fid > 1.0 - 1e-12
    assert np.allclose(params.thetas, 0.0)


def test_fit_wavepacket_gaussian_n3():
    target = _gaussian_target(3, 8.0, 0.5, 4.0)
    params, fid = fit_wavepacket(
        target, 2, OptimizerConfig(seed=7, max_iters=800, learning_rate=0.1, cost_tolerance=5e-4))
    assert fid >= 0.999


@pytest.mark.slow
def test_fit_wavepacket_gaussian_n6():
    target = _gaussian_target(6, 20.0, 0.03, 10.0)
    params, fid = fit_wavepacket(
        target, 3, OptimizerConfig(seed=7, max_iters=1500, learning_rate=0.1, cost_tolerance=5e-3))
    assert fid >= 0.99


def test_fit_wavepacket_rejects_bad_targets():
    with pytest.raises(ValueError):
        fit_wavepacket(np.ones(8), 1, OptimizerConfig())
    with pytest.raises(ValueError):
        fit_wavepacket(-_gaussian_target(3, 8.0, 0.5, 4.0), 1, OptimizerConfig())
