"""Binary position grid, centered momentum grid, and grid sampling.

A register of n qubits encodes 2^n positions x_k = k * dx on [0, L), with
qubit j weighted by 2^j. The centered Fourier transform moves to a momentum
grid p_m = (m - 2^{n-1}) * dp stored at basis index m, so zero momentum sits
at the register midpoint.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import StateVector


@dataclass(frozen=True)
class GridSpec:
    """n qubits spanning a box of length L (atomic units)."""

    n: int
    L: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one qubit")
        if self.L <= 0:
            raise ValueError("box length must be positive")

    @property
    def num_points(self) -> int:
        return 1 << self.n

    @property
    def dx(self) -> float:
        return self.L / self.num_points

    @property
    def dp(self) -> float:
        return 2.0 * np.pi / self.L

    @property
    def nyquist(self) -> float:
        return np.pi / self.dx


def position_of_index(grid: GridSpec, k: int) -> float:
    """x_k = dx * k for basis index k."""
    if not 0 <= k < grid.num_points:
        raise ValueError(f"basis index {k} outside [0, {grid.num_points})")
    return grid.dx * k


def positions(grid: GridSpec) -> np.ndarray:
    return grid.dx * np.arange(grid.num_points)


def momentum_of_index(grid: GridSpec, m: int) -> float:
    """p_m = (m - 2^{n-1}) * dp for momentum-register index m."""
    if not 0 <= m < grid.num_points:
        raise ValueError(f"basis index {m} outside [0, {grid.num_points})")
    return (m - (grid.num_points >> 1)) * grid.dp


def momenta(grid: GridSpec) -> np.ndarray:
    return (np.arange(grid.num_points) - (grid.num_points >> 1)) * grid.dp


def centered_dft_matrix(n: int) -> np.ndarray:
    """Brute-force centered-DFT matrix C[m, k] = exp(-2 pi i (m - N/2) k / N) / sqrt(N)."""
    dim = 1 << n
    m = np.arange(dim)[:, None] - (dim >> 1)
    k = np.arange(dim)[None, :]
    return np.exp(-2j * np.pi * m * k / dim) / np.sqrt(dim)


def _alternating(dim: int) -> np.ndarray:
    signs = np.ones(dim)
    signs[1::2] = -1.0
    return signs


def centered_qft(state: StateVector) -> StateVector:
    """Position representation -> momentum representation (zero momentum at index N/2)."""
    amps = state.amplitudes
    out = np.fft.fft(amps * _alternating(amps.size), norm="ortho")
    return StateVector(state.num_qubits, out)


def inverse_centered_qft(state: StateVector) -> StateVector:
    amps = state.amplitudes
    out = np.fft.ifft(amps, norm="ortho") * _alternating(amps.size)
    return StateVector(state.num_qubits, out)


def sample_diagonal(grid: GridSpec, f) -> np.ndarray:
    """Entry k is f(x_k). Raises on non-finite samples."""
    values = np.asarray([float(f(xk)) for xk in positions(grid)])
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise ValueError(f"f is not finite at grid point {bad} (x={position_of_index(grid, bad)})")
    return values
