"""Local unitaries, correlation matrices and the largest CHSH value.

A two-qubit state's nonlocal content sits in its 3x3 correlation matrix T.
Local unitaries rotate T on each side, so only its singular values matter.
This script scrambles a noisy Bell state with random local unitaries, brings
it back to canonical form, and checks the CHSH maximum three ways.
"""

import numpy as np

from nlocality.closedform import max_chsh
from nlocality.linalg import kron
from nlocality.networks import strategy_score
from nlocality.observables import chsh_strategy
from nlocality.optimizer import OptimizerConfig, grid_oracle, optimize
from nlocality.states import canonical_form, correlation_matrix, singular_triple, werner
from nlocality.topology import Topology


def random_unitary(rng):
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


rng = np.random.default_rng(2)
w = kron(random_unitary(rng), random_unitary(rng))
rho = w @ werner(0.8) @ w.conj().T

np.set_printoptions(precision=4, suppress=True)
print("scrambled correlation matrix:\n", correlation_matrix(rho))
rho_c, va, vb = canonical_form(rho)
print("canonical correlation matrix:\n", correlation_matrix(rho_c))

tau = singular_triple(rho)
print("singular triple (tau0, tau1, tau2):", np.round(tau, 6))

closed = max_chsh(tau)
named = strategy_score([rho], chsh_strategy(rho))
searched = optimize(Topology.chsh(), [rho], OptimizerConfig(restarts=8)).best_score
grid = grid_oracle(Topology.chsh(), [rho_c], 360)
print(f"closed form 2 sqrt(tau0^2 + tau1^2) = {closed:.6f}")
print(f"named optimal observables           = {named:.6f}")
print(f"Nelder-Mead search                  = {searched:.6f}")
print(f"x-z grid, 1 degree steps            = {grid:.6f}")
