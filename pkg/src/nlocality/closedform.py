"""Closed-form maximal scores, bounds and equality conditions.

Everything here is a function of the sources' singular triples only; pass
either :class:`~nlocality.states.SingularTriple` values or states (which are
reduced to their triples first).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import observables
from .states import as_triples
from .topology import Topology

EQ_TOL = 1e-10
GAMMA_TOL = 1e-9


def max_chsh(tau):
    """Largest CHSH value of a two-qubit state: ``2 sqrt(tau0^2 + tau1^2)``."""
    return 2.0 * float(np.hypot(tau[0], tau[1]))


def _pairs(sources):
    taus = np.array(as_triples(sources), dtype=float).reshape(-1, 3)
    if len(taus) == 0:
        raise ValueError("empty ensemble")
    return taus


def star_upper_bound(sources):
    """Half the geometric mean of the per-source CHSH maxima."""
    taus = _pairs(sources)
    n = len(taus)
    return 0.5 * float(np.prod([max_chsh(t) ** (1.0 / n) for t in taus]))


def max_star_local(sources):
    """Maximal star score over local qubit observables (it saturates the upper bound)."""
    return star_upper_bound(sources)


def max_star_mub(sources):
    """Maximal star score when the central party measures z...z / x...x."""
    taus = _pairs(sources)
    n = len(taus)
    g0 = np.prod(taus[:, 0] ** (2.0 / n))
    g1 = np.prod(taus[:, 1] ** (2.0 / n))
    return float(np.sqrt(g0 + g1))


def lemma1_conditions(values, tol=EQ_TOL):
    """Equality conditions of the geometric-mean bound.

    ``values[i, z]`` is the CHSH-observable expectation of source ``i`` at
    central input ``z``.
    """
    v = np.asarray(values, dtype=float).reshape(-1, 2)
    return {
        "condition1": bool(np.all(np.abs(v[:, 0] - v[:, 1]) <= tol)),
        "condition2": bool(np.all(np.ptp(v, axis=0) <= tol)),
        "condition3": bool(np.any(np.all(np.abs(v) <= tol, axis=1))),
    }


def corollary1_conditions(sources, tol=EQ_TOL):
    taus = _pairs(sources)[:, :2]
    return {
        "tau0_eq_tau1": bool(np.all(np.abs(taus[:, 0] - taus[:, 1]) <= tol)),
        "identical_sources": bool(np.all(np.ptp(taus, axis=0) <= tol)),
        "zero_source": bool(np.any(np.all(np.abs(taus) <= tol, axis=1))),
    }


def corollary1_equality(sources, tol=EQ_TOL):
    """True when one of the sufficient conditions for ``max_star_mub == max_star_local`` holds."""
    return any(corollary1_conditions(sources, tol).values())


def star_gap_vanishes(sources, tol=EQ_TOL):
    """Exact equality test: the pairs ``(tau0^2, tau1^2)`` are proportional, or one vanishes.

    Superadditivity of the geometric mean is tight exactly in this case, which
    is broader than the three sufficient conditions of
    :func:`corollary1_conditions`.
    """
    taus = _pairs(sources)[:, :2]
    if np.any(np.all(np.abs(taus) <= tol, axis=1)):
        return True
    sq = taus**2
    ref = sq[0] / np.linalg.norm(sq[0])
    return bool(np.all(np.abs(sq[:, 0] * ref[1] - sq[:, 1] * ref[0]) <= tol * np.linalg.norm(sq, axis=1)))


def _check_gamma_prefix(taus, k):
    if not 0 <= k <= len(taus):
        raise ValueError(f"k must lie in [0, {len(taus)}], got {k}")
    bad = [i for i in range(k) if np.max(np.abs(taus[i] - (1.0, 0.0, 0.0))) > GAMMA_TOL]
    if bad:
        raise ValueError(f"sources {bad} do not have classical triple (1, 0, 0)")


def corollary2_values(k, sources):
    """Star maximum with ``k`` leading classical sources, and the MUB-restricted cap of 1.

    Returns ``(s_star, s_mub_bound)`` where ``s_star`` is the maximal star score
    of the remaining ``n - k`` sources raised to ``(n - k)/n``.
    """
    taus = _pairs(sources)
    _check_gamma_prefix(taus, k)
    n = len(taus)
    rest = taus[k:]
    s_star = 1.0 if len(rest) == 0 else max_star_local(rest) ** ((n - k) / n)
    return s_star, 1.0


def full_nonlocality_threshold(n):
    """Star score above which no source can be classical: ``2^((n-1)/2n)``."""
    return 2.0 ** ((n - 1) / (2.0 * n))


def _check_chain(taus):
    if len(taus) < 2:
        raise ValueError("a chain needs at least two sources")


def chain_upper_bound(sources):
    """Two-star maximum of the end sources times the root of each middle ``tau0``."""
    taus = _pairs(sources)
    _check_chain(taus)
    ends = max_star_local([taus[0], taus[-1]])
    return ends * float(np.prod(np.sqrt(taus[1:-1, 0])))


def max_chain_local(sources):
    return chain_upper_bound(sources)


def max_chain_mub(sources):
    """Maximal chain score when every central party measures z(x)z / x(x)x."""
    taus = _pairs(sources)
    _check_chain(taus)
    return float(np.sqrt(np.prod(taus[:, 0]) + np.prod(taus[:, 1])))


def corollary3_conditions(sources, tol=EQ_TOL):
    taus = _pairs(sources)
    _check_chain(taus)
    mid = taus[1:-1]
    return {
        "middle_tau0_eq_tau1": bool(np.all(np.abs(mid[:, 0] - mid[:, 1]) <= tol)),
        "ends_star_equality": corollary1_equality([taus[0], taus[-1]], tol),
    }


def corollary3_equality(sources, tol=EQ_TOL):
    return all(corollary3_conditions(sources, tol).values())


def chain_gap_vanishes(sources, tol=EQ_TOL):
    """Exact equality test for the chain maxima (see :func:`star_gap_vanishes`)."""
    return abs(max_chain_local(sources) - max_chain_mub(sources)) <= tol


@dataclass
class ScoreReport:
    topology: str
    n: int
    s_local_max: float
    s_mub_max: float
    upper_bound: float
    equality_flags: dict = field(default_factory=dict)
    local_strategy: list | None = None
    mub_strategy: list | None = None

    def to_json(self):
        return json.dumps(asdict(self), indent=2)


def report(topology, ensemble, strategies=True):
    """Closed-form maxima, bound and equality flags, plus witnessing strategies.

    Strategies are built in each state's own frame and therefore need states,
    not bare triples.
    """
    if isinstance(topology, str):
        topology = Topology(topology, len(ensemble))
    taus = as_triples(ensemble)
    if topology.kind == "chsh":
        value = max_chsh(taus[0])
        rep = ScoreReport("chsh", 1, value, value, 2 * np.sqrt(2))
        if strategies:
            rep.local_strategy = observables.chsh_strategy(ensemble[0]).to_json()
            rep.mub_strategy = observables.chsh_strategy(ensemble[0], "mub_on_B").to_json()
        return rep
    if topology.kind == "star":
        flags = corollary1_conditions(taus)
        flags["corollary1"] = any(flags.values())
        flags["gap_vanishes"] = star_gap_vanishes(taus)
        rep = ScoreReport("star", len(taus), max_star_local(taus), max_star_mub(taus), star_upper_bound(taus), flags)
        if strategies:
            rep.local_strategy = observables.theorem1_star_strategy(ensemble).to_json()
            rep.mub_strategy = observables.mub_star_strategy(ensemble).to_json()
        return rep
    flags = corollary3_conditions(taus)
    flags["corollary3"] = all(flags.values())
    flags["gap_vanishes"] = chain_gap_vanishes(taus)
    rep = ScoreReport("chain", len(taus), max_chain_local(taus), max_chain_mub(taus), chain_upper_bound(taus), flags)
    if strategies:
        rep.local_strategy = observables.theorem2_chain_strategy(ensemble).to_json()
        rep.mub_strategy = observables.mub_chain_strategy(ensemble).to_json()
    return rep
