"""Correlators and n-local scores for CHSH, star and chain networks.

A correlation table is a dict from the full input bit tuple (ordered as
``Topology.input_names``) to the expected output parity.
"""

from __future__ import annotations

import csv
import io
from functools import reduce

import numpy as np

from .linalg import expectation, kron
from .observables import observable
from .states import correlation_matrix, validate_state
from .topology import NetworkStrategy, Topology

DIRECT_MAX_SOURCES = 4


def pair_correlator(rho, a, b):
    """``<(a . sigma) (x) (b . sigma)>_rho``."""
    return expectation(kron(observable(a), observable(b)), validate_state(rho))


def _check_shapes(ensemble, strategy):
    if len(ensemble) != strategy.topology.n:
        raise ValueError(f"{strategy.topology} needs {strategy.topology.n} sources, got {len(ensemble)}")


def network_correlator(ensemble, strategy, inputs):
    """Product over sources of the two-qubit correlators picked out by ``inputs``."""
    _check_shapes(ensemble, strategy)
    chosen = strategy.select(tuple(inputs))
    return float(np.prod([pair_correlator(rho, a, b) for rho, (a, b) in zip(ensemble, chosen)]))


def direct_correlator(ensemble, strategy, inputs):
    """Single trace of the full network observable against the full network state."""
    _check_shapes(ensemble, strategy)
    n = len(ensemble)
    if n > DIRECT_MAX_SOURCES:
        raise ValueError(f"direct evaluation is limited to {DIRECT_MAX_SOURCES} sources, got {n}")
    chosen = strategy.select(tuple(inputs))
    state = reduce(np.kron, [validate_state(rho) for rho in ensemble])
    obs = reduce(np.kron, [observable(v) for pair in chosen for v in pair])
    return expectation(obs, state)


def correlation_table(ensemble, strategy, method="factored"):
    corr = {"factored": network_correlator, "direct": direct_correlator}[method]
    return {bits: corr(ensemble, strategy, bits) for bits in strategy.topology.input_domain}


def _lookup(table, bits):
    try:
        return table[bits]
    except KeyError:
        raise ValueError(f"correlation table is missing input {''.join(map(str, bits))}") from None


def root(value, n):
    """``|value|^(1/n)`` with ``0^(1/n) = 0``."""
    return abs(value) ** (1.0 / n)


def chsh_score(table):
    """``sum_{x,y} (-1)^(x y) <A_x B_y>``."""
    return sum((-1) ** (x * y) * _lookup(table, (x, y)) for x in (0, 1) for y in (0, 1))


def star_I(table, n, z):
    """``2^-n sum_x (-1)^(z parity(x)) <O_{x,z}>`` over the n external inputs."""
    total = 0.0
    for bits in np.ndindex(*(2,) * n):
        sign = -1 if z and sum(bits) % 2 else 1
        total += sign * _lookup(table, tuple(bits) + (z,))
    return total / 2**n


def star_score(table, n):
    return sum(root(star_I(table, n, z), n) for z in (0, 1))


def chain_J(table, n, z):
    """``(1/4) sum_{x,y} (-1)^(z(x+y)) <O_{x,y,z}>``."""
    return 0.25 * sum((-1) ** (z * (x + y)) * _lookup(table, (x, y, z)) for x in (0, 1) for y in (0, 1))


def chain_score(table, n):
    return sum(root(chain_J(table, n, z), 2) for z in (0, 1))


def score(topology, table):
    if topology.kind == "chsh":
        return chsh_score(table)
    if topology.kind == "star":
        return star_score(table, topology.n)
    return chain_score(table, topology.n)


# factored evaluation straight from correlation matrices


def pair_correlators(tmats, vectors):
    """``corr[..., i, a, b] = alpha_{i,a} . T_i beta_{i,b}`` for vectors ``(..., n, 2, 2, 3)``."""
    return vectors[..., 0, :, :] @ tmats @ np.swapaxes(vectors[..., 1, :, :], -1, -2)


_ALT = np.array([1.0, -1.0])


def chsh_terms(corr):
    """``<(A_0 + (-1)^b A_1) (x) B_b>`` for b = 0, 1 from 2x2 correlator block(s) ``(..., 2, 2)``."""
    return corr[..., 0, :] + _ALT * corr[..., 1, :]


def factored_components(kind, corr):
    """Per-z values ``(..., 2)`` whose roots sum to the score: ``I_z`` (star) or ``J_z`` (chain)."""
    if kind == "chain":
        first = 0.5 * chsh_terms(corr[..., 0, :, :])
        last = 0.5 * chsh_terms(np.swapaxes(corr[..., -1, :, :], -1, -2))
        mid = np.stack(
            [np.prod(corr[..., 1:-1, 0, 0], axis=-1), np.prod(corr[..., 1:-1, 1, 1], axis=-1)], axis=-1
        )
        return first * last * mid
    return np.prod(0.5 * chsh_terms(corr), axis=-2)


def factored_score(kind, corr):
    """Score from per-source correlators ``(..., n, 2, 2)``; batched over leading axes."""
    n = corr.shape[-3]
    comps = factored_components(kind, corr)
    if kind == "chsh":
        # CHSH is linear in the table: no absolute values
        out = 2 * np.sum(comps, axis=-1)
    elif kind == "chain":
        out = np.sum(np.sqrt(np.abs(comps)), axis=-1)
    else:
        out = np.sum(np.abs(comps) ** (1.0 / n), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def strategy_score(ensemble, strategy, method="factored"):
    """Score of a strategy on an ensemble via correlation matrices or an explicit table."""
    _check_shapes(ensemble, strategy)
    topo = strategy.topology
    if method == "factored":
        tmats = np.array([correlation_matrix(rho) for rho in ensemble])
        return factored_score(topo.kind, pair_correlators(tmats, strategy.vectors))
    return score(topo, correlation_table(ensemble, strategy, method))


def table_to_csv(table, std_errors=None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["input_bits", "value"] + (["std_error"] if std_errors is not None else []))
    for bits, value in table.items():
        row = ["".join(map(str, bits)), f"{value:.17g}"]
        if std_errors is not None:
            row.append(f"{std_errors[bits]:.17g}")
        writer.writerow(row)
    return buf.getvalue()


def table_from_csv(text):
    table = {}
    for row in csv.DictReader(io.StringIO(text)):
        table[tuple(int(c) for c in row["input_bits"])] = float(row["value"])
    return table

