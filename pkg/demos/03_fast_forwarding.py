"""Fast-forwarding: N evolution steps by rescaling the diagonal parameters.

The W D W^dag structure evolves N steps as W D(N theta) W^dag with no
reoptimization. For the exactly-compressed free-particle step the noiseless
fidelity against the dense N-step propagator stays at 1.
"""
import numpy as np

from walshpress import GridSpec, StateVector, VffAnsatz, apply_circuit, fast_forward
from walshpress.grid import centered_dft_matrix, momenta, positions
from walshpress.vff import exact_thetas_for_phase, gamma_count
from walshpress.walsh import admitted_masks

n, L, mu, tau = 3, 20.0, 1.0, 1.0
grid = GridSpec(n, L)
masks = admitted_masks(n, n, "linear")
phase = -tau * momenta(grid) ** 2 / (2.0 * mu)
ansatz = VffAnsatz(n, 1, (0.0,) * gamma_count(n),
                   tuple(exact_thetas_for_phase(phase, masks)), tau, n, "linear")

xs = positions(grid)
psi = np.exp(-((xs - L / 2) ** 2) / (2.0 * (L / 8) ** 2)).astype(complex)
psi /= np.linalg.norm(psi)
cmat = centered_dft_matrix(n)

print(f"free-particle step on {n} qubits, exactly compressed (analytic thetas)")
print(f"{'N':>3} {'fidelity vs dense e^(-iNtK)':>28}")
for steps in range(11):
    evolved = apply_circuit(StateVector(n, cmat @ psi), fast_forward(ansatz, steps))
    want = np.exp(1j * steps * phase) * (cmat @ psi)
    fidelity = abs(np.vdot(want, evolved.amplitudes)) ** 2
    print(f"{steps:>3} {fidelity:>28.15f}")
