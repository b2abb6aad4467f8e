"""walshpress: variational compression of Trotterized quadratic operators on
binary-encoded registers, validated on Marcus-model nonadiabatic dynamics."""

from .core import (
    Circuit, GateOp, StateVector, Unitary,
    apply_circuit, apply_gate, circuit_diagonal, circuit_unitary,
    expectation_z, state_fidelity,
)
from .grid import GridSpec, centered_qft, inverse_centered_qft, position_of_index, sample_diagonal
from .walsh import (
    DiagonalSpec, WalshTerm, admitted_masks, diagonal_circuit,
    term_locality, term_order, truncate, walsh_transform, inverse_walsh_transform,
)
from .builders import (
    ComparatorLayout, PiecewiseCoupling, QuadraticPhases, UccParams,
    comparator_circuit, cqft_circuit, explicit_quadratic_circuit, fit_wavepacket,
    kinetic_circuit, piecewise_coupling_circuit, step_coupling_circuit, ucc_circuit,
)
from .optimize import OptimizerConfig, OptimizerState, adam_step
from .vff import (
    CompressResult, CostReport, VffAnsatz, ansatz_unitary, build_d, build_w,
    compress, fast_forward, lhst_cost, parameter_shift_gradient, verify_global_minimum,
)
from .marcus import (
    CompressedMode, CompressedOperators, MarcusConfig, MarcusRateParams,
    PopulationTrace, RateResult, StepCouplingSpec, build_trotter_step,
    compress_operators, extract_rate, fc_rate_low_temperature, marcus_rate_theory,
    rate_scan, reorganization_energy, simulate,
)
from .resources import GateCensus, census_table, count_gates, swap_overhead, total_qubits

__version__ = "0.1.0"
