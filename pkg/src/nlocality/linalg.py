"""Small fixed-size matrix kernel.

Pauli matrices, Kronecker products of qubit operators, Hermitian
expectations, a signed 3x3 SVD by two-sided Jacobi rotations, and the
lift of a proper rotation to a qubit unitary.
"""

from __future__ import annotations

import itertools

import numpy as np

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SX, SY, SZ)

HERMITIAN_TOL = 1e-10
IMAG_TOL = 1e-10
ROTATION_TOL = 1e-12


def kron(a, b):
    """Kronecker product of two 2x2 operators, row-major block order."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError(f"kron expects two 2x2 matrices, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def is_hermitian(m, tol=HERMITIAN_TOL):
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T)) <= tol


def expectation(obs, rho):
    """Real expectation value ``tr(obs @ rho)`` of a Hermitian observable."""
    obs = np.asarray(obs)
    rho = np.asarray(rho)
    if obs.shape != rho.shape:
        raise ValueError(f"shape mismatch: observable {obs.shape}, state {rho.shape}")
    if not is_hermitian(obs):
        raise ValueError("observable is not Hermitian")
    # tr(AB) = sum_ij A_ij B_ji
    value = np.sum(obs * rho.T)
    if abs(value.imag) > IMAG_TOL:
        raise ValueError(f"expectation has imaginary residual {value.imag:.3e}")
    return float(value.real)


def is_rotation(r, tol=ROTATION_TOL):
    r = np.asarray(r, dtype=float)
    return (
        r.shape == (3, 3)
        and np.max(np.abs(r.T @ r - np.eye(3))) <= tol
        and abs(np.linalg.det(r) - 1.0) <= tol
    )


def _jacobi_pair(m, p, q):
    """Left and right plane rotations that diagonalize the (p, q) block of ``m``.

    Returns 2x2 matrices ``left``, ``right`` with ``left @ B @ right`` diagonal,
    where ``B`` is the 2x2 sub-block on rows/columns (p, q).
    """
    a, b = m[p, p], m[p, q]
    c, d = m[q, p], m[q, q]
    # left rotation symmetrizes the block
    t1 = np.arctan2(c - b, a + d)
    c1, s1 = np.cos(t1), np.sin(t1)
    g1 = np.array([[c1, s1], [-s1, c1]])
    sym = g1 @ np.array([[a, b], [c, d]])
    # symmetric Jacobi step
    t2 = 0.5 * np.arctan2(sym[0, 1] + sym[1, 0], sym[0, 0] - sym[1, 1])
    c2, s2 = np.cos(t2), np.sin(t2)
    r = np.array([[c2, -s2], [s2, c2]])
    return r.T @ g1, r


def _embed(block, p, q):
    g = np.eye(3)
    g[np.ix_((p, q), (p, q))] = block
    return g


def jacobi_diagonalize3(m, tol=1e-15, max_sweeps=64):
    """Two-sided Jacobi: proper rotations ``u``, ``v`` with ``u @ m @ v`` diagonal.

    Returns ``(u, d, v)`` with ``d`` the (signed) diagonal.
    """
    work = np.array(m, dtype=float)
    if work.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got {work.shape}")
    u = np.eye(3)
    v = np.eye(3)
    scale = max(np.max(np.abs(work)), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = max(abs(work[i, j]) for i in range(3) for j in range(3) if i != j)
        if off <= tol * scale:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            if abs(work[p, q]) <= tol * scale and abs(work[q, p]) <= tol * scale:
                continue
            left, right = _jacobi_pair(work, p, q)
            gl = _embed(left, p, q)
            gr = _embed(right, p, q)
            work = gl @ work @ gr
            u = gl @ u
            v = v @ gr
    return u, np.diag(work).copy(), v


def _signed_permutations():
    # Every signed permutation with det +1, as (matrix, source index per slot).
    out = []
    for perm in itertools.permutations(range(3)):
        p = np.zeros((3, 3))
        for slot, src in enumerate(perm):
            p[slot, src] = 1.0
        if np.linalg.det(p) < 0:
            p[2] *= -1.0
        out.append((p, perm))
    return out


_SIGNED_PERMUTATIONS = _signed_permutations()
# slot order of the canonical diagonal: (tau1, tau2, tau0) on (x, y, z)
_SIGN_FLIPS = [np.diag(s) for s in ((1, 1, 1), (-1, -1, 1), (1, -1, -1), (-1, 1, -1))]


def signed_svd3(m, tie_tol=1e-12):
    """Signed singular value decomposition of a real 3x3 matrix.

    Returns ``(ra, tau, rb)`` with ``ra``, ``rb`` proper rotations and
    ``ra @ m @ rb.T == diag(tau1, tau2, tau0)``. ``tau = (tau0, tau1, tau2)``
    is ordered ``tau0 >= tau1 >= |tau2|`` with ``tau0, tau1 >= 0``; the sign of
    ``det(m)`` is carried by ``tau2`` alone.

    Among decompositions satisfying these constraints the one whose ``ra`` is
    closest to the identity (Frobenius norm) is returned.
    """
    m = np.asarray(m, dtype=float)
    u, d, v = jacobi_diagonalize3(m)
    scale = max(1.0, float(np.max(np.abs(d))))
    best = None
    for p, perm in _SIGNED_PERMUTATIONS:
        dd = d[list(perm)]
        mag = np.abs(dd)
        # slots: x -> tau1, y -> tau2, z -> tau0
        if mag[2] + tie_tol * scale < mag[0] or mag[0] + tie_tol * scale < mag[1]:
            continue
        for s in _SIGN_FLIPS:
            signed = np.diag(s) * dd
            if signed[0] < 0 or signed[2] < 0:
                continue
            ra = s @ p @ u
            dist = np.linalg.norm(ra - np.eye(3))
            if best is None or dist < best[0] - 1e-12:
                best = (dist, ra, p @ v.T, signed)
    _, ra, rb, signed = best
    tau = (float(signed[2]), float(signed[0]), float(signed[1]) + 0.0)
    return ra, tau, rb


def so3_to_su2(r):
    """Qubit unitary ``U`` with ``U (a . sigma) U^dag = (r a) . sigma``.

    The global phase is fixed so that the first nonzero entry, in reading
    order, is real and nonnegative.
    """
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3) or np.max(np.abs(r.T @ r - np.eye(3))) > 1e-10:
        raise ValueError("not an orthogonal 3x3 matrix")
    if np.linalg.det(r) < 0:
        raise ValueError("improper rotation (det = -1) has no SU(2) lift")
    # quaternion by Shepperd's method, largest-component branch
    tr = np.trace(r)
    cands = np.array([tr, r[0, 0], r[1, 1], r[2, 2]])
    k = int(np.argmax(cands))
    if k == 0:
        w = 0.5 * np.sqrt(1.0 + tr)
        x = (r[2, 1] - r[1, 2]) / (4 * w)
        y = (r[0, 2] - r[2, 0]) / (4 * w)
        z = (r[1, 0] - r[0, 1]) / (4 * w)
    elif k == 1:
        x = 0.5 * np.sqrt(1.0 + 2 * r[0, 0] - tr)
        w = (r[2, 1] - r[1, 2]) / (4 * x)
        y = (r[0, 1] + r[1, 0]) / (4 * x)
        z = (r[0, 2] + r[2, 0]) / (4 * x)
    elif k == 2:
        y = 0.5 * np.sqrt(1.0 + 2 * r[1, 1] - tr)
        w = (r[0, 2] - r[2, 0]) / (4 * y)
        x = (r[0, 1] + r[1, 0]) / (4 * y)
        z = (r[1, 2] + r[2, 1]) / (4 * y)
    else:
        z = 0.5 * np.sqrt(1.0 + 2 * r[2, 2] - tr)
        w = (r[1, 0] - r[0, 1]) / (4 * z)
        x = (r[0, 2] + r[2, 0]) / (4 * z)
        y = (r[1, 2] + r[2, 1]) / (4 * z)
    u = w * I2 - 1j * (x * SX + y * SY + z * SZ)
    return fix_phase(u)


def fix_phase(u, tol=1e-12):
    """Multiply by a global phase so the first nonzero entry is real and >= 0."""
    u = np.asarray(u, dtype=complex)
    for entry in u.ravel():
        if abs(entry) > tol:
            return u * (abs(entry) / entry)
    return u


def bloch_rotation(u):
    """Rotation matrix ``R`` induced by conjugation with the qubit unitary ``u``."""
    u = np.asarray(u, dtype=complex)
    r = np.empty((3, 3))
    for j, sj in enumerate(PAULI):
        conj = u @ sj @ u.conj().T
        for i, si in enumerate(PAULI):
            r[i, j] = 0.5 * np.real(np.trace(si @ conj))
    return r
