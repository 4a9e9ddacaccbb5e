"""Two-qubit sources: density matrices, correlation matrices, canonical form.

States are plain 4x4 complex ndarrays in the basis |00>, |01>, |10>, |11>.
Constructors return validated arrays; :func:`validate_state` is the single
gate that rejects non-physical input.
"""

from __future__ import annotations

import json
from typing import NamedTuple

import numpy as np

from .linalg import PAULI, kron, signed_svd3, so3_to_su2

STATE_TOL = 1e-10
PSD_TOL = 1e-12


class SingularTriple(NamedTuple):
    """Ordered correlation singular values; ``tau2`` carries the determinant sign."""

    tau0: float
    tau1: float
    tau2: float


class InvalidStateError(ValueError):
    pass


PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def validate_state(rho, tol=STATE_TOL):
    """Return ``rho`` as a complex 4x4 array, raising if it is not a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidStateError(f"two-qubit state must be 4x4, got {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise InvalidStateError(f"state not Hermitian (residual {herm:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise InvalidStateError(f"state trace is {tr!r}, expected 1")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lo < -tol:
        raise InvalidStateError(f"state has negative eigenvalue {lo:.3e}")
    return rho


def pure(psi):
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def bell_state():
    """|Phi+><Phi+|."""
    return pure(PHI_PLUS)


def maximally_mixed():
    return np.eye(4, dtype=complex) / 4


def correlation_matrix(rho):
    """3x3 real matrix with entries ``tr(sigma_k (x) sigma_l rho)``."""
    rho = validate_state(rho)
    t = np.empty((3, 3))
    for k, sk in enumerate(PAULI):
        for l, sl in enumerate(PAULI):
            t[k, l] = np.sum(kron(sk, sl) * rho.T).real
    return t


def local_frames(rho):
    """Signed SVD of the correlation matrix: ``(ra, triple, rb)``."""
    ra, tau, rb = signed_svd3(correlation_matrix(rho))
    return ra, SingularTriple(*tau), rb


def singular_triple(rho):
    return local_frames(rho)[1]


def triples(ensemble):
    return [singular_triple(rho) for rho in ensemble]


def as_triples(sources):
    """Accept states or ready-made triples; return a list of :class:`SingularTriple`."""
    out = []
    for src in sources:
        if isinstance(src, SingularTriple) or np.shape(src) == (3,):
            out.append(SingularTriple(*(float(v) for v in src)))
        else:
            out.append(singular_triple(src))
    return out


def canonical_form(rho):
    """Rotate ``rho`` by local unitaries so its correlation matrix is diagonal.

    Returns ``(rho_c, va, vb)`` with ``rho_c = (va (x) vb) rho (va (x) vb)^dag``
    and ``correlation_matrix(rho_c) == diag(tau1, tau2, tau0)``.
    """
    rho = validate_state(rho)
    ra, _, rb = local_frames(rho)
    va = so3_to_su2(ra)
    vb = so3_to_su2(rb)
    w = kron(va, vb)
    rho_c = w @ rho @ w.conj().T
    return 0.5 * (rho_c + rho_c.conj().T), va, vb


# Bell basis correlation signs on (xx, yy, zz): Phi+, Phi-, Psi+, Psi-
_BELL_SIGNS = np.array([[1, -1, 1], [-1, 1, 1], [1, 1, -1], [-1, -1, -1]], dtype=float)


def bell_diagonal(t):
    """State ``(I + sum_k t_k sigma_k (x) sigma_k) / 4`` for axis values ``t = (tx, ty, tz)``."""
    t = np.asarray(t, dtype=float)
    if t.shape != (3,):
        raise ValueError("expected three correlation values (tx, ty, tz)")
    eig = 0.25 * (1.0 + _BELL_SIGNS @ t)
    if eig.min() < -PSD_TOL:
        raise InvalidStateError(
            f"correlations {tuple(t)} are unphysical: Bell-basis eigenvalue {eig.min():.6g} < 0"
        )
    rho = np.eye(4, dtype=complex)
    for tk, sk in zip(t, PAULI):
        rho = rho + tk * kron(sk, sk)
    return rho / 4


def _check_unit_interval(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


def werner(v):
    """``v |Phi+><Phi+| + (1 - v) I/4``."""
    _check_unit_interval("visibility", v)
    return v * bell_state() + (1 - v) * maximally_mixed()


def colored(t1):
    """Colored noise: ``tau0 = 1`` kept, ``tau1 = t1`` damped."""
    _check_unit_interval("t1", t1)
    return bell_diagonal((t1, -t1, 1.0))


def classical_gamma():
    """Shared coin flip ``(|00><00| + |11><11|) / 2``."""
    return bell_diagonal((0.0, 0.0, 1.0))


def from_triple(tau):
    """Bell-diagonal state in canonical layout for ``(tau0, tau1, tau2)``."""
    tau0, tau1, tau2 = tau
    return bell_diagonal((tau1, tau2, tau0))


def random_state(seed):
    """Hilbert-Schmidt random mixed state, deterministic per seed."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return 0.5 * (rho + rho.conj().T)


def random_diagonal_state(seed):
    """Random classical state, diagonal in the computational basis."""
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(4))
    return np.diag(p).astype(complex)


def state_to_json(rho):
    rho = np.asarray(rho, dtype=complex)
    return {"re": rho.real.tolist(), "im": rho.imag.tolist()}


def state_from_json(obj):
    try:
        rho = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise InvalidStateError(f"malformed state object: {exc}") from exc
    return validate_state(rho)


def dump_ensemble(ensemble, fp):
    json.dump([state_to_json(rho) for rho in ensemble], fp, indent=2)


def load_ensemble(fp):
    data = json.load(fp)
    if not isinstance(data, list) or not data:
        raise InvalidStateError("ensemble must be a non-empty JSON list of states")
    return [state_from_json(obj) for obj in data]
