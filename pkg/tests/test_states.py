import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeds
from nlocality.closedform import max_chsh
from nlocality.linalg import kron
from nlocality.states import (
    InvalidStateError,
    bell_diagonal,
    bell_state,
    canonical_form,
    classical_gamma,
    colored,
    correlation_matrix,
    dump_ensemble,
    from_triple,
    load_ensemble,
    maximally_mixed,
    random_state,
    singular_triple,
    state_from_json,
    state_to_json,
    validate_state,
    werner,
)


def random_unitary(rng):
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_correlation_matrix_examples():
    assert np.allclose(correlation_matrix(bell_state()), np.diag([1, -1, 1]))
    gamma = np.diag([0.5, 0, 0, 0.5]).astype(complex)
    assert np.allclose(correlation_matrix(gamma), np.diag([0, 0, 1]))
    assert np.allclose(correlation_matrix(maximally_mixed()), 0)


def test_singular_triple_examples():
    assert np.allclose(singular_triple(bell_state()), (1, 1, -1))
    assert np.allclose(singular_triple(classical_gamma()), (1, 0, 0))
    for v in (0.0, 0.3, 0.9):
        assert np.allclose(singular_triple(werner(v)), (v, v, -v))


def test_validate_rejects_bad_states():
    with pytest.raises(InvalidStateError):
        validate_state(np.eye(4))  # trace 4
    with pytest.raises(InvalidStateError):
        validate_state(np.diag([1.5, -0.5, 0, 0]))
    with pytest.raises(InvalidStateError):
        validate_state(np.eye(2) / 2)
    m = maximally_mixed().copy()
    m[0, 1] = 0.1
    with pytest.raises(InvalidStateError):
        validate_state(m)


def test_bell_diagonal_examples():
    assert np.allclose(bell_diagonal((1, -1, 1)), bell_state())
    assert np.allclose(bell_diagonal((0, 0, 0)), maximally_mixed())
    assert np.allclose(bell_diagonal((0, 0, 1)), np.diag([0.5, 0, 0, 0.5]))


def test_bell_diagonal_reports_unphysical():
    with pytest.raises(InvalidStateError, match="eigenvalue"):
        bell_diagonal((1, 1, 1))


def test_noise_constructors():
    assert np.allclose(werner(1), bell_state())
    assert np.allclose(colored(0), classical_gamma())
    assert np.allclose(singular_triple(colored(0)), (1, 0, 0))
    assert np.allclose(colored(1), bell_state())
    assert np.allclose(singular_triple(colored(1)), (1, 1, -1))
    with pytest.raises(ValueError):
        werner(1.2)
    with pytest.raises(ValueError):
        colored(-0.1)


def test_random_state_examples():
    a, b = random_state(7), random_state(8)
    assert abs(np.trace(a).real - 1) < 1e-12
    assert np.linalg.norm(a - b) > 0
    assert np.linalg.eigvalsh(a).min() >= -1e-12
    assert np.array_equal(random_state(7), a)


def test_triple_ordering_on_random_states():
    for s in range(1000):
        t0, t1, t2 = singular_triple(random_state(s))
        assert 1 + 1e-12 >= t0 >= t1 >= abs(t2) >= 0
        assert t0**2 + t1**2 + t2**2 <= 3


def test_canonical_form_of_bell_diagonal_is_identity():
    for rho in (bell_diagonal((0.2, -0.1, 0.6)), classical_gamma(), bell_state()):
        rho_c, va, vb = canonical_form(rho)
        assert np.allclose(va, np.eye(2)) and np.allclose(vb, np.eye(2))
        assert np.allclose(rho_c, rho)


def test_canonical_form_of_rotated_bell_state():
    rng = np.random.default_rng(1)
    w = kron(random_unitary(rng), random_unitary(rng))
    rho = w @ bell_state() @ w.conj().T
    rho_c, va, vb = canonical_form(rho)
    t = correlation_matrix(rho_c)
    assert np.max(np.abs(t - np.diag(np.diag(t)))) < 1e-9
    assert np.allclose(np.diag(t), (1, -1, 1), atol=1e-9)


@given(seeds)
def test_canonical_form_preserves_triple(seed):
    rho = random_state(seed)
    rho_c, va, vb = canonical_form(rho)
    w = kron(va, vb)
    assert np.allclose(rho_c, w @ rho @ w.conj().T, atol=1e-12)
    tau = singular_triple(rho)
    t = correlation_matrix(rho_c)
    assert np.max(np.abs(t - np.diag([tau[1], tau[2], tau[0]]))) < 1e-9
    assert np.allclose(singular_triple(rho_c), tau, atol=1e-10)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(-1, 1))
def test_bell_diagonal_round_trip(a, b, c):
    t = np.array([a, b, c])
    eig = 0.25 * (1 + np.array([[1, -1, 1], [-1, 1, 1], [1, 1, -1], [-1, -1, -1]]) @ t)
    if eig.min() < 0:
        with pytest.raises(InvalidStateError):
            bell_diagonal(t)
        return
    assert np.max(np.abs(np.diag(correlation_matrix(bell_diagonal(t))) - t)) < 1e-12


def test_chsh_threshold_matches_tau_criterion():
    states = [random_state(s) for s in range(300)] + [werner(v) for v in np.linspace(0, 1, 41)]
    states += [from_triple((1.0, t, -t)) for t in np.linspace(0, 1, 11)]
    for rho in states:
        tau = singular_triple(rho)
        s = tau[0] ** 2 + tau[1] ** 2
        if abs(s - 1) > 1e-9:
            assert (max_chsh(tau) > 2) == (s > 1)


def test_json_round_trip():
    rho = random_state(4)
    assert np.array_equal(state_from_json(state_to_json(rho)), rho)
    buf = io.StringIO()
    dump_ensemble([rho, bell_state()], buf)
    buf.seek(0)
    out = load_ensemble(buf)
    assert len(out) == 2 and np.allclose(out[0], rho)


def test_json_loader_validates():
    with pytest.raises(InvalidStateError):
        state_from_json({"re": np.eye(4).tolist(), "im": np.zeros((4, 4)).tolist()})
    with pytest.raises(InvalidStateError):
        state_from_json({"re": []})
    with pytest.raises(InvalidStateError):
        load_ensemble(io.StringIO("[]"))
