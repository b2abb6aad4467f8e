"""Marcus-model nonadiabatic dynamics: Hamiltonian targets, second-order Trotter
stepping with explicit or compressed operators, population traces, rate
extraction, and the theoretical rate curves.

Register layout: position qubits 0..n-1, the objective qubit at n (storing the
diabatic populations), then ancilla and comparator wires for the coupling.
Surface 0 sits at L/2 + A0, surface 1 at L/2 - A0 with energy offset dg; a
positive driving force corresponds to dg = -driving_force.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .builders import (
    ComparatorLayout, QuadraticPhases, ancilla_budget, cqft_circuit,
    explicit_quadratic_circuit, step_coupling_circuit, step_height,
)
from .core import Circuit, StateVector, _apply_op, expectation_z
from .errors import NumericIntegrityError
from .grid import GridSpec, centered_dft_matrix, momenta, positions
from .optimize import OptimizerConfig
from .vff import VffAnsatz, build_d, build_w, compress
from .walsh import LINEAR


@dataclass(frozen=True)
class StepCouplingSpec:
    """Area-preserving constant coupling over a contiguous basis-state window.

    span=None resolves to the three states centered at the register midpoint
    ((127, 128, 129) for n=8), matching the production coupling placement.
    """

    c0: float = 0.01
    beta: float = 5.0
    center: float | None = None
    span: tuple[int, ...] | None = None

    def resolved_span(self, grid: GridSpec) -> tuple[int, ...]:
        if self.span is not None:
            return tuple(int(s) for s in self.span)
        mid = grid.num_points >> 1
        return (mid - 1, mid, mid + 1)

    def resolved_center(self, grid: GridSpec) -> float:
        return grid.L / 2.0 if self.center is None else self.center

    def height(self, grid: GridSpec) -> float:
        return step_height(self.c0, self.beta, len(self.resolved_span(grid)), grid.dx)

    def values(self, grid: GridSpec) -> np.ndarray:
        out = np.zeros(grid.num_points)
        out[list(self.resolved_span(grid))] = self.height(grid)
        return out


@dataclass(frozen=True)
class CompressedMode:
    """l-local compression settings substituted into the Trotter step."""

    l_kinetic: int = 4
    l_potential: int = 6
    topology: str = LINEAR
    layers_w: int = 1


EXPLICIT = "explicit"


@dataclass(frozen=True)
class MarcusConfig:
    grid: GridSpec = GridSpec(8, 20.0)
    mu: float = 1.0
    a1: float = 0.015
    a0: float = 1.5
    dg: float = 0.0
    coupling: StepCouplingSpec = StepCouplingSpec()
    tau: float = 1.0
    p0: float = 0.0
    x0_packet: float = 0.0
    operator_mode: object = EXPLICIT  # EXPLICIT or a CompressedMode

    def __post_init__(self):
        if self.a1 <= 0:
            raise ValueError("curvature A1 must be positive")
        if self.mu <= 0:
            raise ValueError("mass must be positive")
        if self.grid.n < 3:
            raise ValueError("need at least three position qubits")

    @property
    def v0_center(self) -> float:
        return self.grid.L / 2.0 + self.a0

    @property
    def v1_center(self) -> float:
        return self.grid.L / 2.0 - self.a0

    @property
    def omega(self) -> float:
        return math.sqrt(2.0 * self.a1 / self.mu)

    def v0_values(self) -> np.ndarray:
        xs = positions(self.grid)
        return self.a1 * (xs - self.v0_center) ** 2

    def v1_values(self) -> np.ndarray:
        xs = positions(self.grid)
        return self.a1 * (xs - self.v1_center) ** 2 + self.dg


def reorganization_energy(config: MarcusConfig) -> float:
    """lambda = A1 (2 A0)^2: surface 1 evaluated at surface 0's minimum (dg=0)."""
    return config.a1 * (2.0 * config.a0) ** 2


# ---------------------------------------------------------------------------
# Compression targets
# ---------------------------------------------------------------------------

def kinetic_target_diagonal(grid: GridSpec, mu: float, tau: float) -> np.ndarray:
    """Momentum-space diagonal exp(-i tau p^2 / 2 mu) on the centered grid."""
    p = momenta(grid)
    return np.exp(-1j * tau * p**2 / (2.0 * mu))


def potential_target_diagonal(grid: GridSpec, a1: float, center: float,
                              offset: float, tau: float) -> np.ndarray:
    xs = positions(grid)
    return np.exp(-1j * tau * (a1 * (xs - center) ** 2 + offset))


@dataclass(frozen=True)
class CompressedOperators:
    kinetic: VffAnsatz
    v0: VffAnsatz
    v1: VffAnsatz


def align_global_phase(ansatz: VffAnsatz, target_diagonal: np.ndarray) -> VffAnsatz:
    """Shift the mask-0 angle so the ansatz diagonal matches the target's phase.

    The LHST cost is global-phase invariant, but the potentials enter the
    dynamics as controlled operators where the phase is physical.
    """
    from .core import circuit_diagonal
    w = circuit_diagonal(build_w(ansatz))
    d = circuit_diagonal(build_d(ansatz))
    a = w * d * np.conj(w)
    gauge = np.angle(np.sum(np.conj(a) * target_diagonal))
    thetas = list(ansatz.thetas)
    thetas[ansatz.theta_masks.index(0)] += float(gauge)
    return replace(ansatz, thetas=tuple(thetas))


def shift_constant_term(ansatz: VffAnsatz, offset: float, tau: float) -> VffAnsatz:
    """Fold an additive energy offset into the compressed diagonal (exact: the
    offset only multiplies the target by exp(-i tau offset))."""
    thetas = list(ansatz.thetas)
    thetas[ansatz.theta_masks.index(0)] += -tau * offset
    return replace(ansatz, thetas=tuple(thetas))


def compress_operators(config: MarcusConfig, mode: CompressedMode,
                       opt: OptimizerConfig = OptimizerConfig(max_iters=1500)) -> CompressedOperators:
    """Variationally compress T, V0, V1 for half-step substitution (tau/2 each);
    V1 is compressed at dg=0 and its offset folded in exactly afterwards."""
    half = config.tau / 2.0
    t_diag = kinetic_target_diagonal(config.grid, config.mu, half)
    v0_diag = potential_target_diagonal(config.grid, config.a1, config.v0_center, 0.0, half)
    v1_diag = potential_target_diagonal(config.grid, config.a1, config.v1_center, 0.0, half)
    results = {}
    for name, diag, l, seed_shift in (("t", t_diag, mode.l_kinetic, 0),
                                      ("v0", v0_diag, mode.l_potential, 1),
                                      ("v1", v1_diag, mode.l_potential, 2)):
        cfg = replace(opt, seed=opt.seed + seed_shift)
        res = compress(diag, config.grid.n, l, mode.topology, mode.layers_w, cfg, tau=half)
        results[name] = align_global_phase(res.ansatz, diag)
    v1 = shift_constant_term(results["v1"], config.dg, half)
    return CompressedOperators(kinetic=results["t"], v0=results["v0"], v1=v1)


# ---------------------------------------------------------------------------
# Trotter step assembly
# ---------------------------------------------------------------------------

def register_layout(config: MarcusConfig) -> tuple[ComparatorLayout, int, int]:
    """(comparator layout, objective wire, total width) for the coupling window."""
    n = config.grid.n
    span = config.coupling.resolved_span(config.grid)
    ncomp = int(span[0] > 0) + int(span[-1] < config.grid.num_points - 1)
    layout = ComparatorLayout.standard(n, ncomp, offset=1)
    return layout, n, n + 1 + ancilla_budget(n) + ncomp


def _kinetic_half_ops(config: MarcusConfig, width: int,
                      compressed: CompressedOperators | None) -> Circuit:
    grid = config.grid
    if compressed is None:
        phases = QuadraticPhases.from_quadratic(
            eta=1.0 / (2.0 * config.mu), x0=(grid.num_points >> 1) * grid.dp,
            delta=0.0, tau=config.tau / 2.0, dx=grid.dp)
        return explicit_quadratic_circuit(phases, grid.n).widened(width)
    a = compressed.kinetic
    w = build_w(a).widened(width)
    return w + build_d(a).widened(width) + w.inverse()


def _controlled_potential_ops(config: MarcusConfig, which: int, width: int, objective: int,
                              compressed: CompressedOperators | None) -> Circuit:
    """V0 applied when the objective is |0>, V1 when it is |1>; for compressed
    operators only the diagonal layer is promoted, W stays unconditional."""
    polarity = which
    if compressed is None:
        center = config.v0_center if which == 0 else config.v1_center
        delta = 0.0 if which == 0 else config.dg
        phases = QuadraticPhases.from_quadratic(config.a1, center, delta,
                                                config.tau / 2.0, config.grid.dx)
        circ = explicit_quadratic_circuit(phases, config.grid.n).widened(width)
        return circ.controlled(objective, polarity)
    a = compressed.v0 if which == 0 else compressed.v1
    w = build_w(a).widened(width)
    d = build_d(a).widened(width).controlled(objective, polarity)
    return w + d + w.inverse()


def build_trotter_step(config: MarcusConfig,
                       compressed: CompressedOperators | None = None) -> Circuit:
    """Symmetric splitting exp(-iK t/2) exp(-iVd t/2) exp(-iVc t) exp(-iVd t/2) exp(-iK t/2),
    the kinetic halves sandwiched between centered QFTs."""
    if config.operator_mode == EXPLICIT:
        compressed = None
    elif compressed is None:
        compressed = compress_operators(config, config.operator_mode)
    if compressed is not None:
        for a in (compressed.kinetic, compressed.v0, compressed.v1):
            if a.n != config.grid.n:
                raise ValueError("compressed operator register size mismatch")
            if abs(a.tau - config.tau / 2.0) > 1e-12:
                raise ValueError("compressed operators must be optimized for tau/2")

    layout, objective, width = register_layout(config)
    grid = config.grid
    fwd = cqft_circuit(grid.n).widened(width)
    kinetic = fwd + _kinetic_half_ops(config, width, compressed) + fwd.inverse()
    cv0 = _controlled_potential_ops(config, 0, width, objective, compressed)
    cv1 = _controlled_potential_ops(config, 1, width, objective, compressed)
    coupling = step_coupling_circuit(
        grid, config.coupling.c0, config.coupling.beta,
        config.coupling.resolved_center(grid), config.coupling.resolved_span(grid),
        config.tau, objective, layout,
    ).widened(width)
    return kinetic + cv0 + cv1 + coupling + cv0 + cv1 + kinetic


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

def initial_wavepacket(config: MarcusConfig) -> np.ndarray:
    """Ground-state-width Gaussian of the V0 well at v0_center + x0_packet,
    boosted by exp(i p0 x); returned over the position register only."""
    xs = positions(config.grid)
    center = config.v0_center + config.x0_packet
    psi = np.exp(-config.mu * config.omega * (xs - center) ** 2 / 2.0)
    psi = psi.astype(complex) * np.exp(1j * config.p0 * xs)
    return psi / np.linalg.norm(psi)


def initial_state(config: MarcusConfig) -> StateVector:
    """Wavepacket on the position register, objective/ancilla/comparators |0>."""
    _, _, width = register_layout(config)
    amps = np.zeros(1 << width, dtype=complex)
    amps[: config.grid.num_points] = initial_wavepacket(config)
    return StateVector(width, amps)


@dataclass(frozen=True)
class PopulationTrace:
    times: np.ndarray
    p0_values: np.ndarray
    norm_values: np.ndarray


def simulate(config: MarcusConfig, steps: int,
             compressed: CompressedOperators | None = None) -> PopulationTrace:
    """Apply the Trotter step `steps` times, recording P0 = (<Z_obj>+1)/2 and the
    norm; aborts on norm drift or ancilla leakage beyond 1e-6."""
    circ = build_trotter_step(config, compressed)
    layout, objective, width = register_layout(config)
    scratch = [w for w in layout.ancilla_wires + layout.comparator_wires]
    idx = np.arange(1 << width)
    clean = np.ones(1 << width, dtype=bool)
    for w in scratch:
        clean &= ((idx >> w) & 1) == 0

    state = initial_state(config)
    amps = state.amplitudes
    times, p0s, norms = [0.0], [], []

    def record(a):
        sv = StateVector(width, a)
        p0s.append((expectation_z(sv, objective) + 1.0) / 2.0)
        norms.append(float(np.linalg.norm(a)))

    record(amps)
    for step in range(1, steps + 1):
        for op in circ.ops:
            amps = _apply_op(amps, op, width)
        nrm = float(np.linalg.norm(amps))
        if abs(nrm - 1.0) > 1e-6:
            raise NumericIntegrityError(f"norm drifted to {nrm} at step {step}")
        leak = 1.0 - float(np.sum(np.abs(amps[clean]) ** 2))
        if leak > 1e-6:
            raise NumericIntegrityError(f"ancilla/comparator leakage {leak} at step {step}")
        times.append(step * config.tau)
        record(amps)
    return PopulationTrace(np.asarray(times), np.asarray(p0s), np.asarray(norms))


# ---------------------------------------------------------------------------
# Rates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateResult:
    k: float
    fit_window: tuple[float, float]
    residual: float
    dG: float | None = None


def extract_rate(trace: PopulationTrace, t_max: float = 100.0,
                 dg: float | None = None) -> RateResult:
    """Ordinary least squares of P0 against t on [0, t_max]; k is minus the slope."""
    sel = trace.times <= t_max
    ts, ps = trace.times[sel], trace.p0_values[sel]
    if ts.size < 3:
        raise ValueError(f"need at least 3 samples within t <= {t_max}, have {ts.size}")
    slope, intercept = np.polyfit(ts, ps, 1)
    resid = float(np.sqrt(np.mean((ps - (slope * ts + intercept)) ** 2)))
    return RateResult(k=-float(slope), fit_window=(float(ts[0]), float(ts[-1])),
                      residual=resid, dG=dg)


@dataclass(frozen=True)
class ScanRow:
    dG: float
    k: float
    residual: float
    mode: str
    tau: float


def _scan_point(args) -> ScanRow:
    config, mode_name, compressed, steps, t_max, dg = args
    trace = simulate(config, steps, compressed)
    rate = extract_rate(trace, t_max, dg)
    return ScanRow(dG=dg, k=rate.k, residual=rate.residual, mode=mode_name, tau=config.tau)


def rate_scan(config: MarcusConfig, dG_values, modes=(EXPLICIT,), tau_values=None,
              t_max: float = 100.0, workers: int = 1,
              opt: OptimizerConfig = OptimizerConfig(max_iters=1500)) -> list[ScanRow]:
    """Rates over the driving-force grid for each mode and step size.

    dG_values are driving forces (they lower surface 1: dg = -value). Compressed
    operators are optimized once per (mode, tau) at dg=0 and the offsets folded
    in exactly per point.
    """
    if tau_values is None:
        tau_values = (config.tau,)
    jobs = []
    for tau in tau_values:
        steps = int(round(t_max / tau))
        for mode in modes:
            if mode == EXPLICIT:
                base = replace(config, tau=tau, operator_mode=EXPLICIT)
                ops_base = None
            else:
                mode_spec = mode if isinstance(mode, CompressedMode) else CompressedMode()
                base = replace(config, tau=tau, dg=0.0, operator_mode=mode_spec)
                ops_base = compress_operators(base, mode_spec, opt)
            for dg_drive in dG_values:
                cfg = replace(base, dg=-float(dg_drive))
                ops = ops_base
                if ops_base is not None:
                    ops = CompressedOperators(
                        kinetic=ops_base.kinetic, v0=ops_base.v0,
                        v1=shift_constant_term(ops_base.v1, cfg.dg, tau / 2.0))
                name = EXPLICIT if mode == EXPLICIT else "compressed"
                jobs.append((cfg, name, ops, steps, t_max, float(dg_drive)))
    if workers > 1:
        import multiprocessing
        with multiprocessing.Pool(workers) as pool:
            return pool.map(_scan_point, jobs)
    return [_scan_point(j) for j in jobs]


@dataclass(frozen=True)
class MarcusRateParams:
    v_coup_sq: float
    lam: float
    kT: float
    hbar: float = 1.0

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("reorganization energy must be positive")


def marcus_rate_theory(params: MarcusRateParams, dG: float) -> float:
    """k = (2 pi / hbar) |V|^2 (4 pi lambda kT)^{-1/2} exp(-(dG + lambda)^2 / 4 lambda kT).

    Maximal at dG = -lambda; diverges as T -> 0 (the T=0 wavepacket regime lives
    in fc_rate_low_temperature instead).
    """
    if params.kT <= 0:
        raise ValueError("kT must be positive (use fc_rate_low_temperature for T -> 0)")
    pref = 2.0 * math.pi / params.hbar * params.v_coup_sq
    act = math.exp(-((dG + params.lam) ** 2) / (4.0 * params.lam * params.kT))
    return pref * act / math.sqrt(4.0 * math.pi * params.lam * params.kT)


# ---------------------------------------------------------------------------
# Franck-Condon (low-temperature) reference curve
# ---------------------------------------------------------------------------

def _surface_eigensystem(config: MarcusConfig, values: np.ndarray):
    grid = config.grid
    f = centered_dft_matrix(grid.n)
    kin = f.conj().T @ (momenta(grid)[:, None] ** 2 / (2.0 * config.mu) * f)
    h = kin + np.diag(values)
    h = (h + h.conj().T) / 2.0
    return np.linalg.eigh(h)


def franck_condon_factors(config: MarcusConfig):
    """(E_init, surface-1 eigenvalues at dg=0, squared overlaps with the V0 ground state).

    Raises when either well holds fewer than three grid-bound states.
    """
    xs = positions(config.grid)
    v0 = config.a1 * (xs - config.v0_center) ** 2
    v1 = config.a1 * (xs - config.v1_center) ** 2
    e0, c0 = _surface_eigensystem(config, v0)
    e1, c1 = _surface_eigensystem(config, v1)
    for name, e, v in (("V0", e0, v0), ("V1", e1, v1)):
        rim = min(v[0], v[-1])
        if int(np.sum(e < rim)) < 3:
            raise ValueError(f"{name} well unresolved: fewer than 3 bound states on this grid")
    ground = c0[:, 0]
    overlaps = np.abs(c1.conj().T @ ground) ** 2
    return float(e0[0]), e1, overlaps


def fc_rate_low_temperature(config: MarcusConfig, dG: float) -> float:
    """Golden-rule rate in the nuclear-tunneling limit: squared Franck-Condon
    overlaps of the V0 ground state with V1 vibronic states, collected through a
    Gaussian energy-matching window one local level spacing wide. dG is the
    driving force (it lowers surface 1). Shape-accurate; absolute scale is not
    calibrated against the emulated dynamics.
    """
    e_init, e1, overlaps = franck_condon_factors(config)
    detune = (e1 - dG) - e_init
    v_star = int(np.argmin(np.abs(detune)))
    nbr = slice(max(0, v_star - 1), min(len(e1), v_star + 2))
    spacing = float(np.mean(np.diff(e1[nbr]))) if e1[nbr].size > 1 else float(np.diff(e1[:2])[0])
    sigma = max(spacing, 1e-12)
    window = np.exp(-(detune**2) / (2.0 * sigma**2)) / (sigma * math.sqrt(2.0 * math.pi))
    h = config.coupling.height(config.grid)
    return float(2.0 * math.pi * h**2 * np.sum(overlaps * window))


def fc_rate_curve(config: MarcusConfig, dG_values) -> np.ndarray:
    """fc_rate_low_temperature over a grid of driving forces (one diagonalization)."""
    e_init, e1, overlaps = franck_condon_factors(config)
    h = config.coupling.height(config.grid)
    out = np.empty(len(dG_values))
    for i, dg in enumerate(dG_values):
        detune = (e1 - dg) - e_init
        v_star = int(np.argmin(np.abs(detune)))
        nbr = slice(max(0, v_star - 1), min(len(e1), v_star + 2))
        spacing = float(np.mean(np.diff(e1[nbr]))) if e1[nbr].size > 1 else float(np.diff(e1[:2])[0])
        sigma = max(spacing, 1e-12)
        window = np.exp(-(detune**2) / (2.0 * sigma**2)) / (sigma * math.sqrt(2.0 * math.pi))
        out[i] = 2.0 * math.pi * h**2 * np.sum(overlaps * window)
    return out
