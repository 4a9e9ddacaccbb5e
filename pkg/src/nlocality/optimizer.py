"""Variational oracle for maximal network scores over local qubit observables.

Every observable is a Bloch vector given by a polar and an azimuthal angle.
Scores are maximized by multi-start Nelder-Mead over the angle vector; a
brute-force grid over x-z plane observables gives an independent lower bound.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import observables
from .networks import factored_score, pair_correlators
from .states import correlation_matrix, local_frames
from .topology import NetworkStrategy, Topology

RESTRICTIONS = ("free", "mub_central")
GRID_BUDGET = 10**8
INITIAL_STEP = 0.3
RESEED_STEP = 0.05


def encode(v):
    """Bloch vector(s) ``(..., 3)`` to angles ``(..., 2)``: polar in [0, pi], azimuth in [0, 2 pi)."""
    v = np.asarray(v, dtype=float)
    theta = np.arccos(np.clip(v[..., 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(v[..., 1], v[..., 0]), 2 * np.pi)
    return np.stack([theta, phi], axis=-1)


def decode(angles):
    angles = np.asarray(angles, dtype=float)
    s = np.sin(angles)
    c = np.cos(angles)
    out = np.empty(angles.shape[:-1] + (3,))
    out[..., 0] = s[..., 0] * c[..., 1]
    out[..., 1] = s[..., 0] * s[..., 1]
    out[..., 2] = c[..., 0]
    return out


@dataclass
class OptimizerConfig:
    restarts: int = 32
    max_iterations: int = 2000
    tolerance: float = 1e-9
    seed: int = 0
    restriction: str = "free"
    warm_start: bool = True

    def __post_init__(self):
        if self.restarts < 1 or self.max_iterations < 1:
            raise ValueError("restarts and max_iterations must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.restriction not in RESTRICTIONS:
            raise ValueError(f"restriction must be one of {RESTRICTIONS}")


@dataclass
class OptimizationResult:
    best_score: float
    best_strategy: NetworkStrategy
    restart_scores: list
    iterations: int
    best_restart: int
    warm_started: bool = False
    trace: list = field(default_factory=list, repr=False)

    @property
    def random_best(self):
        """Best score among the randomly started restarts."""
        scores = self.restart_scores[1:] if self.warm_started else self.restart_scores
        return max(scores) if scores else float("nan")

    def write_trace(self, fp):
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(["restart", "iteration", "score"])
        for restart, iteration, value in self.trace:
            writer.writerow([restart, iteration, f"{value:.17g}"])


def free_slots(topology, restriction):
    """Boolean mask ``(n, 2)`` of qubit slots the search may move."""
    free = np.ones((topology.n, 2), dtype=bool)
    if restriction == "mub_central":
        if topology.kind == "chsh":
            raise ValueError("the CHSH scenario has no central party to restrict")
        for i, side in topology.slots:
            free[i, side] = topology.is_external(i, side)
    return free


def frozen_vectors(topology, ensemble, free):
    """Lab-frame z / x observables (canonical frame) on every non-free slot."""
    fixed = np.zeros((topology.n, 2, 2, 3))
    canonical = np.array([observables.ZHAT, observables.XHAT])
    for i, rho in enumerate(ensemble):
        if free[i].all():
            continue
        ra, _, rb = local_frames(rho)
        for side, r in ((0, ra), (1, rb)):
            if not free[i, side]:
                fixed[i, side] = canonical @ r
    return fixed


class _Problem:
    """Scores of many ensembles as functions of their free angle vectors.

    Rows of a batch are addressed by ensemble index; frozen slots hold fixed
    vectors per ensemble.
    """

    def __init__(self, topology, ensembles, restriction):
        self.topology = topology
        self.kind = topology.kind
        self.free = free_slots(topology, restriction)
        self.tmats = np.array([[correlation_matrix(rho) for rho in ens] for ens in ensembles])
        self.fixed = np.array([frozen_vectors(topology, ens, self.free) for ens in ensembles])
        self.size = int(self.free.sum()) * 4

    def vectors(self, x, which):
        """Strategy vectors ``(k, ..., n, 2, 2, 3)`` for angles ``(k, ..., size)`` of ensembles ``which``."""
        x = np.asarray(x, dtype=float)
        fixed = self.fixed[which]
        extra = x.ndim - 2
        fixed = fixed.reshape(fixed.shape[:1] + (1,) * extra + fixed.shape[1:])
        vecs = np.broadcast_to(fixed, x.shape[:-1] + fixed.shape[-4:]).copy()
        vecs[..., self.free, :, :] = decode(x.reshape(x.shape[:-1] + (-1, 2, 2)))
        return vecs

    def score(self, x, which):
        x = np.asarray(x, dtype=float)
        tm = self.tmats[which]
        tm = tm.reshape(tm.shape[:1] + (1,) * (x.ndim - 2) + tm.shape[1:])
        return factored_score(self.kind, pair_correlators(tm, self.vectors(x, which)))

    def angles(self, vectors):
        return encode(vectors[self.free]).ravel()

    def random_start(self, rng):
        k = self.size // 2
        theta = np.arccos(rng.uniform(-1.0, 1.0, size=k))
        phi = rng.uniform(0.0, 2 * np.pi, size=k)
        return np.stack([theta, phi], axis=-1).ravel()


def warm_start_strategy(topology, ensemble, restriction="free"):
    """The closed-form optimal strategy for the topology and restriction."""
    if topology.kind == "chsh":
        return observables.chsh_strategy(ensemble[0])
    if topology.kind == "star":
        build = observables.theorem1_star_strategy if restriction == "free" else observables.mub_star_strategy
    else:
        build = observables.theorem2_chain_strategy if restriction == "free" else observables.mub_chain_strategy
    return build(ensemble)


def batch_nelder_mead(f, x0, step, max_iterations, xatol, fatol, on_iteration=None):
    """Nelder-Mead run independently on every row of ``x0``, advanced in lockstep.

    ``f(points, rows)`` maps points ``(k, m, d)`` belonging to rows ``rows`` to
    values ``(k, m)`` to be minimized. Uses the dimension-adapted coefficients
    of Gao and Han. A row stops once both its simplex diameter and the spread
    of its values are within tolerance, or after ``max_iterations``.
    Returns ``(x, fx, iterations)`` per row.
    """
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    r, d = x0.shape
    rho, chi = 1.0, 1.0 + 2.0 / d
    psi, sigma = 0.75 - 1.0 / (2.0 * d), 1.0 - 1.0 / d
    rows = np.arange(r)
    sim = np.repeat(x0[:, None, :], d + 1, axis=1)
    sim[:, 1:, :] += step * np.eye(d)
    fsim = f(sim, rows)
    nit = np.zeros(r, dtype=int)
    while True:
        order = np.argsort(fsim, axis=1, kind="stable")
        sim = sim[rows[:, None], order]
        fsim = fsim[rows[:, None], order]
        done = (np.max(np.abs(sim[:, 1:] - sim[:, :1]), axis=(1, 2)) <= xatol) & (
            np.max(fsim[:, 1:] - fsim[:, :1], axis=1) <= fatol
        )
        active = ~done & (nit < max_iterations)
        if not active.any():
            break
        xbar = sim[:, :-1].mean(axis=1)
        worst = sim[:, -1]
        cand = np.stack(
            [
                (1 + rho) * xbar - rho * worst,
                (1 + rho * chi) * xbar - rho * chi * worst,
                (1 + psi * rho) * xbar - psi * rho * worst,
                (1 - psi) * xbar + psi * worst,
            ],
            axis=1,
        )
        fc = f(cand, rows)
        fr, fe, fco, fci = fc.T
        reflect_best = fr < fsim[:, 0]
        reflect_mid = ~reflect_best & (fr < fsim[:, -2])
        outside = ~reflect_best & ~reflect_mid & (fr < fsim[:, -1])
        inside = ~reflect_best & ~reflect_mid & ~outside
        take = np.select(
            [reflect_best & (fe < fr), reflect_best | reflect_mid, outside & (fco <= fr), inside & (fci < fsim[:, -1])],
            [1, 0, 2, 3],
            default=-1,
        )
        accept = active & (take >= 0)
        k = np.maximum(take, 0)
        sim[accept, -1] = cand[rows, k][accept]
        fsim[accept, -1] = fc[rows, k][accept]
        shrink = active & (take < 0)
        if shrink.any():
            ss = sim[shrink]
            ss[:, 1:] = ss[:, :1] + sigma * (ss[:, 1:] - ss[:, :1])
            sim[shrink] = ss
            fsim[shrink, 1:] = f(ss[:, 1:], rows[shrink])
        nit[active] += 1
        if on_iteration is not None:
            idx = np.flatnonzero(active)
            on_iteration(idx, nit[idx], fsim[idx, 0])
    return sim[:, 0], fsim[:, 0], nit


def optimize_many(topology, ensembles, config=None, record_trace=False):
    """Run :func:`optimize` on several ensembles at once, one result per ensemble.

    All restarts of all ensembles advance together, which amortizes the
    per-iteration overhead. Each ensemble draws its random starts from its
    own generator seeded with ``config.seed``.
    """
    config = config or OptimizerConfig()
    for ens in ensembles:
        if len(ens) != topology.n:
            raise ValueError(f"{topology} needs {topology.n} sources, got {len(ens)}")
    problem = _Problem(topology, ensembles, config.restriction)
    n_ens, n_rest = len(ensembles), config.restarts

    starts = np.empty((n_ens, n_rest, problem.size))
    for e, ens in enumerate(ensembles):
        rng = np.random.default_rng(config.seed)
        first = 0
        if config.warm_start:
            starts[e, 0] = problem.angles(warm_start_strategy(topology, ens, config.restriction).vectors)
            first = 1
        for r in range(first, n_rest):
            starts[e, r] = problem.random_start(rng)
    x = starts.reshape(n_ens * n_rest, -1)
    owner = np.repeat(np.arange(n_ens), n_rest)

    def neg_score(points, rows, sub):
        return -problem.score(points, owner[sub[rows]])

    traces = [[] for _ in range(n_ens)] if record_trace else None
    fx = neg_score(x[:, None, :], np.arange(len(x)), np.arange(len(x)))[:, 0]
    used = np.zeros(len(x), dtype=int)
    pending = np.ones(len(x), dtype=bool)
    step = INITIAL_STEP
    # re-seed a small simplex at each optimum until it stops paying off
    while pending.any():
        sub = np.flatnonzero(pending)
        offset = used[sub].copy()

        def on_iteration(idx, it, fbest, sub=sub, offset=offset):
            if traces is not None:
                for j, i, v in zip(idx, it, fbest):
                    row = sub[j]
                    traces[owner[row]].append((int(row % n_rest), int(offset[j] + i), float(-v)))

        xn, fn, nit = batch_nelder_mead(
            lambda p, rows, sub=sub: neg_score(p, rows, sub),
            x[sub],
            step,
            config.max_iterations - int(used[sub].min()),
            config.tolerance,
            config.tolerance,
            on_iteration,
        )
        nit = np.minimum(nit, config.max_iterations - used[sub])
        used[sub] += nit
        gain = fx[sub] - fn
        better = fn < fx[sub]
        x[sub[better]] = xn[better]
        fx[sub[better]] = fn[better]
        pending[:] = False
        pending[sub] = (gain > config.tolerance) & (used[sub] < config.max_iterations)
        step = RESEED_STEP

    results = []
    for e in range(n_ens):
        rows = slice(e * n_rest, (e + 1) * n_rest)
        scores = [float(v) for v in -fx[rows]]
        best = max(range(n_rest), key=lambda r: (scores[r], -r))
        xb = x[rows][best]
        vectors = problem.vectors(xb[None], np.array([e]))[0]
        results.append(
            OptimizationResult(
                best_score=scores[best],
                best_strategy=NetworkStrategy(topology, vectors),
                restart_scores=scores,
                iterations=int(used[rows].sum()),
                best_restart=best,
                warm_started=config.warm_start,
                trace=traces[e] if traces is not None else [],
            )
        )
    return results


def optimize(topology, ensemble, config=None, record_trace=False):
    """Maximize the topology's score over local qubit observables.

    Restart 0 is the closed-form strategy when ``config.warm_start`` is set;
    the others start from uniformly random Bloch vectors. Each restart runs a
    Nelder-Mead search that is re-seeded with a fresh small simplex at its
    optimum until re-seeding stops helping or the iteration budget is spent.
    With ``restriction="mub_central"`` every central slot is frozen to z on
    input 0 and x on input 1 in its source's canonical frame.
    """
    return optimize_many(topology, [ensemble], config, record_trace)[0]


# brute-force grid over x-z plane observables


def _grid_vectors(resolution):
    angles = 2 * np.pi * np.arange(resolution) / resolution
    return np.stack([np.sin(angles), np.zeros_like(angles), np.cos(angles)], axis=-1)


def _canonical_tmats(ensemble):
    return [np.diag([t.tau1, t.tau2, t.tau0]) for _, t, _ in (local_frames(rho) for rho in ensemble)]


def _pair_terms(tmat, grid, transpose=False):
    """For every external pair on the grid, the best ``|CHSH term|`` at each central input.

    Returns an array ``(res^2, 2)``. The central observable of each term is
    maximized over the same grid, which is exact because each term depends on
    its own central observable only.
    """
    t = tmat.T if transpose else tmat
    g = grid @ t @ grid.T  # g[a, b] = a . T b
    res = len(grid)
    plus = g[:, None, :] + g[None, :, :]  # external (a0, a1), central b
    minus = g[:, None, :] - g[None, :, :]
    best0 = np.abs(plus).max(axis=-1).reshape(res * res)
    best1 = np.abs(minus).max(axis=-1).reshape(res * res)
    return np.stack([best0, best1], axis=-1)


def _pareto(points):
    """Rows not dominated in both coordinates (maximization)."""
    order = np.lexsort((-points[:, 1], -points[:, 0]))
    keep, best1 = [], -np.inf
    for idx in order:
        if points[idx, 1] > best1:
            keep.append(idx)
            best1 = points[idx, 1]
    return points[keep]


def grid_evaluations(topology, resolution):
    """Nominal number of score evaluations for a grid search."""
    external = 2 if topology.kind == "chain" else topology.n
    return resolution ** (2 * external)


def grid_oracle(topology, ensemble, resolution):
    """Maximum score over an angle grid of x-z plane observables in canonical frames.

    Each external party's pair of observables ranges over the full
    ``resolution x resolution`` grid; central observables are maximized over
    the same grid term by term. The result is a certified lower bound on the
    maximal score. Terms enter through their absolute value, i.e. a central
    observable may also be negated; with an even resolution the grid is
    closed under negation and this is exactly the grid maximum.
    """
    if resolution < 1:
        raise ValueError("resolution must be positive")
    if grid_evaluations(topology, resolution) > GRID_BUDGET:
        raise ValueError(
            f"grid of {grid_evaluations(topology, resolution):.3g} evaluations exceeds budget {GRID_BUDGET:.0e}"
        )
    grid = _grid_vectors(resolution)
    tmats = _canonical_tmats(ensemble)
    if topology.kind == "chsh":
        terms = _pair_terms(tmats[0], grid)
        return float(np.max(terms.sum(axis=1)))
    if topology.kind == "star":
        n = topology.n
        fronts = [_pareto(0.5 * _pair_terms(t, grid)) for t in tmats]
        return _combine(fronts, lambda prod: np.sum(prod ** (1.0 / n), axis=-1))
    # chain: middle sources contribute their best |a . T b| at each z independently
    first = _pareto(0.5 * _pair_terms(tmats[0], grid))
    last = _pareto(0.5 * _pair_terms(tmats[-1], grid, transpose=True))
    mid = np.ones(2)
    for t in tmats[1:-1]:
        g = np.abs(grid @ t @ grid.T).max()
        mid = mid * g
    return _combine([first, last], lambda prod: np.sum(np.sqrt(prod * mid), axis=-1))


def _combine(fronts, reduce_fn, chunk=4096):
    """Exhaustive max over one front point per source of ``reduce_fn(product)``."""
    best = -np.inf
    head, rest = fronts[0], fronts[1:]
    for combo in itertools.product(*[range(len(f)) for f in rest]):
        tail = np.ones(2)
        for f, idx in zip(rest, combo):
            tail = tail * f[idx]
        for start in range(0, len(head), chunk):
            block = head[start : start + chunk] * tail
            best = max(best, float(np.max(reduce_fn(block))))
    return best
