"""Finite-shot simulation of network measurements.

Each input point of a network gets its own random stream derived from the
user seed and the point's index, so estimates are reproducible and do not
depend on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import kron
from .networks import score, table_to_csv
from .observables import observable
from .states import validate_state

BOOTSTRAP_RESAMPLES = 200


@dataclass(frozen=True)
class ShotEstimate:
    mean: float
    std_error: float
    shots: int


def _check_shots(shots):
    if int(shots) < 1:
        raise ValueError("need at least one shot")
    return int(shots)


def plus_probability(rho, a, b):
    """Probability of parity +1 when measuring ``(a . sigma) (x) (b . sigma)`` on ``rho``."""
    obs = kron(observable(a), observable(b))
    vals, vecs = np.linalg.eigh(obs)
    plus = vecs[:, vals > 0]
    if plus.shape[1] != 2 or not np.allclose(vals[vals > 0], 1.0, atol=1e-10):
        raise AssertionError(f"product observable has unexpected spectrum {vals}")
    proj = plus @ plus.conj().T
    p = float(np.real(np.trace(proj @ validate_state(rho))))
    return min(max(p, 0.0), 1.0)


def _estimate(parities):
    n = len(parities)
    mean = float(parities.mean())
    sd = float(parities.std(ddof=1)) if n > 1 else 0.0
    return ShotEstimate(mean, sd / np.sqrt(n), n)


def sample_pair(rho, a, b, shots, seed):
    """Estimate a two-qubit correlator from ``shots`` simulated parity outcomes."""
    shots = _check_shots(shots)
    p = plus_probability(rho, a, b)
    rng = np.random.default_rng(seed)
    parities = np.where(rng.random(shots) < p, 1, -1)
    return _estimate(parities)


def point_rng(seed, index):
    """Independent generator for input point ``index``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def sample_network_parities(ensemble, strategy, inputs, shots, rng):
    """Per-shot network parities: the product of every source's sampled parity."""
    chosen = strategy.select(tuple(inputs))
    parity = np.ones(shots, dtype=np.int8)
    for rho, (a, b) in zip(ensemble, chosen):
        p = plus_probability(rho, a, b)
        parity *= np.where(rng.random(shots) < p, 1, -1).astype(np.int8)
    return parity


@dataclass
class SampledScores:
    score: ShotEstimate
    table: dict
    std_errors: dict

    def to_csv(self):
        return table_to_csv(self.table, self.std_errors)


def estimate_scores(topology, ensemble, strategy, shots, seed, resamples=BOOTSTRAP_RESAMPLES):
    """Estimate the correlation table and the topology's score from finite shots.

    The score's standard error comes from a nonparametric bootstrap over the
    per-shot parities of every input point. For +-1 data a resample is fully
    described by its count of +1 outcomes, which is drawn directly.
    """
    shots = _check_shots(shots)
    if len(ensemble) != topology.n or strategy.topology != topology:
        raise ValueError("ensemble and strategy must match the topology")
    domain = topology.input_domain
    table, errors, plus_counts = {}, {}, {}
    for index, bits in enumerate(domain):
        parities = sample_network_parities(ensemble, strategy, bits, shots, point_rng(seed, index))
        est = _estimate(parities.astype(float))
        table[bits] = est.mean
        errors[bits] = est.std_error
        plus_counts[bits] = int(np.count_nonzero(parities > 0))

    boot_rng = point_rng(seed, len(domain))
    counts = np.array([plus_counts[bits] for bits in domain])
    draws = boot_rng.binomial(shots, counts / shots, size=(resamples, len(domain)))
    means = 2.0 * draws / shots - 1.0
    boot = np.array([score(topology, dict(zip(domain, row))) for row in means])
    value = float(score(topology, table))
    std = float(boot.std(ddof=1)) if resamples > 1 else 0.0
    return SampledScores(ShotEstimate(value, std, shots), table, errors)
