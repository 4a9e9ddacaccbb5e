"""Noise sweeps comparing the local-observable and MUB-restricted maxima.

Each sweep builds per-source singular triples from one scalar parameter and
evaluates both closed forms. Triples use the colored-noise layout
``(tau0, tau1, -tau1)``, which is physical whenever ``tau1 <= tau0 <= 1``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np

from . import closedform as cf
from .states import SingularTriple

FIGURES = ("star_colored", "star_constant_chsh", "chain_colored", "chain_white")
CHAIN_ENDS = ("noisy", "bell")

BELL = SingularTriple(1.0, 1.0, -1.0)


@dataclass(frozen=True)
class SweepConfig:
    figure: str
    n: int = 12
    k: int | None = None
    grid_points: int = 51
    ends: str = "noisy"
    out: str | None = None

    def __post_init__(self):
        if self.figure not in FIGURES:
            raise ValueError(f"unknown figure {self.figure!r}; choose from {FIGURES}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.figure.startswith("chain") and self.n < 2:
            raise ValueError("chain sweeps need n >= 2")
        if self.grid_points < 2:
            raise ValueError("grid_points must be at least 2")
        if self.figure == "star_colored":
            k = self.n if self.k is None else self.k
            if not 0 <= k <= self.n:
                raise ValueError(f"k must lie in [0, n={self.n}], got {k}")
        elif self.k is not None:
            raise ValueError("k only applies to star_colored")
        if self.ends not in CHAIN_ENDS:
            raise ValueError(f"ends must be one of {CHAIN_ENDS}")

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown sweep config keys: {sorted(extra)}")
        return cls(**data)

    def digest(self):
        """Short stable hash of the config, recorded in CSV headers."""
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def colored_triple(tau1):
    return SingularTriple(1.0, float(tau1), -float(tau1))


def star_colored_sources(n, k, tau1):
    """``k`` colored-noise sources followed by ``n - k`` noiseless ones."""
    return [colored_triple(tau1)] * k + [BELL] * (n - k)


def constant_chsh_sources(n, beta):
    """Sources sharing ``CHSH/2 = beta`` with ``tau0^2`` evenly spread.

    ``tau0^2`` runs over ``[beta^2 / 2, min(1, beta^2)]``, the range where
    ``tau0 >= tau1`` and both stay at most one.
    """
    b2 = beta * beta
    if not 0.0 < b2 <= 2.0:
        raise ValueError(f"beta must lie in (0, sqrt 2], got {beta}")
    t0sq = np.linspace(0.5 * b2, min(1.0, b2), n)
    t1 = np.sqrt(np.clip(b2 - t0sq, 0.0, None))
    return [SingularTriple(float(np.sqrt(a)), float(b), -float(b)) for a, b in zip(t0sq, t1)]


def white_triple(tau1_sq):
    tau0 = np.sqrt(0.75 + 0.25 * tau1_sq)
    tau1 = np.sqrt(tau1_sq)
    return SingularTriple(float(tau0), float(tau1), -float(tau1))


def chain_sources(n, middle, ends="noisy"):
    if ends == "bell":
        return [BELL] + [middle] * (n - 2) + [BELL]
    return [middle] * n


def sweep_rows(config):
    """Rows ``(parameter, s_local_max, s_mub_max)`` in parameter order."""
    c = config
    if c.figure == "star_colored":
        k = c.n if c.k is None else c.k
        name = "tau1"
        grid = np.linspace(0.0, 1.0, c.grid_points)
        ensembles = [star_colored_sources(c.n, k, t) for t in grid]
        local, mub = cf.max_star_local, cf.max_star_mub
    elif c.figure == "star_constant_chsh":
        name = "beta"
        grid = np.linspace(1.0, 1.1, c.grid_points)
        ensembles = [constant_chsh_sources(c.n, b) for b in grid]
        local, mub = cf.max_star_local, cf.max_star_mub
    else:
        name = "tau1_sq"
        grid = np.linspace(0.0, 1.0, c.grid_points)
        make = (lambda s: colored_triple(np.sqrt(s))) if c.figure == "chain_colored" else white_triple
        ensembles = [chain_sources(c.n, make(s), c.ends) for s in grid]
        local, mub = cf.max_chain_local, cf.max_chain_mub
    rows = [(float(p), local(e), mub(e)) for p, e in zip(grid, ensembles)]
    return name, rows


def write_csv(fp, config, seed=None):
    """Write the sweep as CSV, headed by a comment with the config hash and seed."""
    name, rows = sweep_rows(config)
    fp.write(f"# figure={config.figure} config_sha256={config.digest()} seed={seed}\n")
    fp.write(f"{name},s_local_max,s_mub_max\n")
    for p, s_local, s_mub in rows:
        fp.write(f"{p!r},{s_local!r},{s_mub!r}\n")
    return rows
