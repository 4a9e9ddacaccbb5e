"""Qubit observables and the named optimal measurement families.

Bloch vectors are ``(x, y, z)`` float arrays. A dichotomic observable is an
array of shape ``(2, 3)``: one Bloch vector per input bit.

The named constructors work in each source's canonical frame, where the
correlation matrix is ``diag(tau1, tau2, tau0)``; the strategy builders rotate
them back to the frame of the given states.
"""

from __future__ import annotations

import warnings

import numpy as np

from .linalg import PAULI
from .states import SingularTriple, as_triples, local_frames
from .topology import NetworkStrategy, Topology

XHAT = np.array([1.0, 0.0, 0.0])
YHAT = np.array([0.0, 1.0, 0.0])
ZHAT = np.array([0.0, 0.0, 1.0])

UNIT_TOL = 1e-12


class DegenerateWeightsWarning(UserWarning):
    """Both weights of an x-z plane observable vanish; z is used instead."""


def observable(alpha):
    """``alpha . sigma`` for a unit Bloch vector."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (3,) or abs(np.linalg.norm(alpha) - 1.0) > UNIT_TOL:
        raise ValueError(f"observable needs a unit Bloch vector, got {alpha}")
    return sum(a * s for a, s in zip(alpha, PAULI))


def xz_vector(wz, wx):
    """Unit vector along ``wz z + wx x``; falls back to z when both weights vanish."""
    norm = np.hypot(wz, wx)
    if norm == 0.0:
        warnings.warn("zero weights for an x-z observable, using z", DegenerateWeightsWarning, stacklevel=3)
        return ZHAT.copy()
    return (wz * ZHAT + wx * XHAT) / norm


def mub_pair():
    """``sigma_z`` on input 0, ``sigma_x`` on input 1."""
    return np.array([ZHAT, XHAT])


def tilted_pair(tau0, tau1):
    """``(tau0 sigma_z + (-1)^b tau1 sigma_x) / sqrt(tau0^2 + tau1^2)`` for b = 0, 1."""
    return np.array([xz_vector(tau0, tau1), xz_vector(tau0, -tau1)])


def chsh_optimal_pair(tau, variant="mub_on_A"):
    """Optimal CHSH observables ``(a_obs, b_obs)`` for a canonical state with triple ``tau``.

    ``mub_on_A`` puts the sigma_z / sigma_x pair on the first qubit and the
    tilted pair on the second; ``mub_on_B`` swaps the roles.
    """
    tau0, tau1 = float(tau[0]), float(tau[1])
    if variant == "mub_on_A":
        return mub_pair(), tilted_pair(tau0, tau1)
    if variant == "mub_on_B":
        return tilted_pair(tau0, tau1), mub_pair()
    raise ValueError(f"unknown variant {variant!r}")


def _frames(ensemble):
    """Per-source ``(ra, triple, rb)``; bare triples get identity frames."""
    out = []
    for src in ensemble:
        if isinstance(src, SingularTriple) or np.shape(src) == (3,):
            out.append((np.eye(3), SingularTriple(*map(float, src)), np.eye(3)))
        else:
            out.append(local_frames(src))
    return out


def mub_star_external(ensemble, x):
    """External observable maximizing the star score when the centre measures z / x."""
    taus = np.array(as_triples(ensemble))
    n = len(taus)
    w0 = np.prod(taus[:, 0]) ** (1.0 / n)
    w1 = np.prod(taus[:, 1]) ** (1.0 / n)
    return xz_vector(w0, (-1) ** x * w1)


def mub_central_star(n, z):
    if n < 1:
        raise ValueError("n must be positive")
    v = XHAT if z else ZHAT
    return [v.copy() for _ in range(n)]


def mub_chain_external(ensemble, x):
    taus = np.array(as_triples(ensemble))
    w0 = np.prod(np.sqrt(taus[:, 0]))
    w1 = np.prod(np.sqrt(taus[:, 1]))
    return xz_vector(w0, (-1) ** x * w1)


def mub_chain_central(z):
    v = XHAT if z else ZHAT
    return v.copy(), v.copy()


def _to_lab(topology, frames, canonical):
    """Rotate canonical-frame vectors ``(n, 2, 2, 3)`` into each source's lab frame."""
    lab = np.empty_like(canonical)
    for i, (ra, _, rb) in enumerate(frames):
        # alpha . T beta = (ra alpha) . D (rb beta)
        lab[i, 0] = canonical[i, 0] @ ra
        lab[i, 1] = canonical[i, 1] @ rb
    return NetworkStrategy(topology, lab)


def chsh_strategy(rho, variant="mub_on_A"):
    frames = _frames([rho])
    a, b = chsh_optimal_pair(frames[0][1], variant)
    return _to_lab(Topology.chsh(), frames, np.array([[a, b]]))


def theorem1_star_strategy(ensemble):
    """Per-source optimal CHSH observables with sigma_z / sigma_x on the external side."""
    frames = _frames(ensemble)
    canonical = np.array([chsh_optimal_pair(t, "mub_on_A") for _, t, _ in frames])
    return _to_lab(Topology.star(len(frames)), frames, canonical)


def mub_star_strategy(ensemble):
    """Centre fixed to z / x, externals tilted by the geometric-mean weights."""
    frames = _frames(ensemble)
    n = len(frames)
    ext = np.array([mub_star_external(ensemble, 0), mub_star_external(ensemble, 1)])
    central = np.array([mub_central_star(n, 0), mub_central_star(n, 1)])  # (2, n, 3)
    canonical = np.empty((n, 2, 2, 3))
    for i in range(n):
        canonical[i, 0] = ext
        canonical[i, 1] = central[:, i]
    return _to_lab(Topology.star(n), frames, canonical)


def theorem2_chain_strategy(ensemble):
    """Middle sources read sigma_z (x) sigma_z; the end sources play optimal CHSH."""
    frames = _frames(ensemble)
    n = len(frames)
    if n < 2:
        raise ValueError("a chain needs at least two sources")
    canonical = np.empty((n, 2, 2, 3))
    first, last = frames[0][1], frames[-1][1]
    canonical[0] = chsh_optimal_pair(first, "mub_on_A")
    canonical[-1] = chsh_optimal_pair(last, "mub_on_B")
    for i in range(1, n - 1):
        canonical[i] = ZHAT
    return _to_lab(Topology.chain(n), frames, canonical)


def mub_chain_strategy(ensemble):
    """Central parties measure z(x)z or x(x)x; the two ends use the product weights."""
    frames = _frames(ensemble)
    n = len(frames)
    if n < 2:
        raise ValueError("a chain needs at least two sources")
    ext = np.array([mub_chain_external(ensemble, 0), mub_chain_external(ensemble, 1)])
    central = np.array([mub_chain_central(0)[0], mub_chain_central(1)[0]])
    canonical = np.empty((n, 2, 2, 3))
    canonical[:] = central[None, None]
    canonical[0, 0] = ext
    canonical[-1, 1] = ext
    return _to_lab(Topology.chain(n), frames, canonical)
