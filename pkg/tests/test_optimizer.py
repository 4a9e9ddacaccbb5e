import io

import numpy as np
import pytest
from hypothesis import given

from conftest import random_unit, seeds
from nlocality import closedform as cf
from nlocality.networks import strategy_score
from nlocality.optimizer import (
    GRID_BUDGET,
    OptimizerConfig,
    decode,
    encode,
    free_slots,
    frozen_vectors,
    grid_evaluations,
    grid_oracle,
    optimize,
    optimize_many,
)
from nlocality.states import bell_state, classical_gamma, random_state, werner
from nlocality.topology import Topology

FAST = dict(restarts=8, seed=1)


@given(seeds)
def test_angles_round_trip(seed):
    v = random_unit(np.random.default_rng(seed), (5,))
    a = encode(v)
    assert np.all((a[:, 0] >= 0) & (a[:, 0] <= np.pi))
    assert np.all((a[:, 1] >= 0) & (a[:, 1] < 2 * np.pi))
    assert np.max(np.abs(decode(a) - v)) < 1e-12


def test_config_validation():
    for bad in (dict(restarts=0), dict(max_iterations=0), dict(tolerance=0.0), dict(restriction="partial")):
        with pytest.raises(ValueError):
            OptimizerConfig(**bad)


def test_ensemble_length_checked():
    with pytest.raises(ValueError):
        optimize(Topology.star(2), [bell_state()])


def test_chsh_has_no_central_restriction():
    with pytest.raises(ValueError):
        optimize(Topology.chsh(), [bell_state()], OptimizerConfig(restriction="mub_central"))


def test_chsh_on_werner():
    res = optimize(Topology.chsh(), [werner(0.9)], OptimizerConfig(**FAST))
    assert abs(res.best_score - 1.8 * np.sqrt(2)) < 1e-3


def test_bell_gamma_star_free_and_mub():
    ens = [bell_state(), classical_gamma()]
    free = optimize(Topology.star(2), ens, OptimizerConfig(**FAST))
    mub = optimize(Topology.star(2), ens, OptimizerConfig(restriction="mub_central", **FAST))
    assert abs(free.best_score - 2**0.25) < 1e-3
    assert abs(mub.best_score - 1.0) < 1e-3


def test_random_restarts_alone_find_the_optimum():
    ens = [random_state(21), random_state(22)]
    cfg = OptimizerConfig(warm_start=False, **FAST)
    for kind in ("star", "chain"):
        res = optimize(Topology(kind, 2), ens, cfg)
        target = cf.max_star_local(ens) if kind == "star" else cf.max_chain_local(ens)
        assert abs(res.best_score - target) < 1e-3
        assert res.best_score <= target + 1e-9


def test_result_is_consistent_and_deterministic():
    topo = Topology.star(3)
    ens = [random_state(s) for s in (31, 32, 33)]
    cfg = OptimizerConfig(**FAST)
    a, b = optimize(topo, ens, cfg), optimize(topo, ens, cfg)
    assert a.best_score == b.best_score and a.restart_scores == b.restart_scores
    assert np.array_equal(a.best_strategy.vectors, b.best_strategy.vectors)
    assert abs(strategy_score(ens, a.best_strategy) - a.best_score) < 1e-12
    assert len(a.restart_scores) == 8 and a.best_score == max(a.restart_scores)
    assert a.iterations > 0


def test_batched_matches_single():
    topo = Topology.chain(3)
    ensembles = [[random_state(10 * t + i) for i in range(3)] for t in range(3)]
    cfg = OptimizerConfig(**FAST)
    many = optimize_many(topo, ensembles, cfg)
    for ens, res in zip(ensembles, many):
        assert res.best_score == optimize(topo, ens, cfg).best_score


def test_mub_restriction_freezes_central_slots():
    topo = Topology.chain(3)
    ens = [random_state(s) for s in (41, 42, 43)]
    res = optimize(topo, ens, OptimizerConfig(restriction="mub_central", **FAST))
    free = free_slots(topo, "mub_central")
    assert free.sum() == 2
    fixed = frozen_vectors(topo, ens, free)
    assert np.array_equal(res.best_strategy.vectors[~free], fixed[~free])
    assert abs(res.best_score - cf.max_chain_mub(ens)) < 1e-3
    free_res = optimize(topo, ens, OptimizerConfig(**FAST))
    assert res.best_score <= free_res.best_score + 1e-9


def test_corollary2_composition_against_optimizer():
    ens = [classical_gamma(), random_state(51), random_state(52)]
    s, _ = cf.corollary2_values(1, ens)
    res = optimize(Topology.star(3), ens, OptimizerConfig(**FAST))
    assert abs(res.best_score - s) < 1e-3 and res.best_score <= s + 1e-9


def test_trace_csv():
    res = optimize(Topology.chsh(), [random_state(3)], OptimizerConfig(restarts=2), record_trace=True)
    buf = io.StringIO()
    res.write_trace(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "restart,iteration,score"
    assert len(lines) > 2
    assert {int(l.split(",")[0]) for l in lines[1:]} <= {0, 1}


def test_grid_oracle_examples():
    assert grid_oracle(Topology.chsh(), [bell_state()], 360) >= 2 * np.sqrt(2) - 5e-4
    for res in (3, 8, 90):
        assert grid_oracle(Topology.chsh(), [classical_gamma()], res) <= 2 + 1e-12
    value = grid_oracle(Topology.star(2), [werner(0.85)] * 2, 90)
    assert abs(value - 0.85 * np.sqrt(2)) < 2e-3


def test_grid_oracle_budget():
    assert grid_evaluations(Topology.star(3), 100) > GRID_BUDGET
    with pytest.raises(ValueError, match="budget"):
        grid_oracle(Topology.star(3), [bell_state()] * 3, 100)


@pytest.mark.parametrize("kind,n", [("chsh", 1), ("star", 2), ("chain", 3)])
def test_grid_oracle_nested_monotone_and_sound(kind, n):
    ens = [random_state(60 + i) for i in range(n)]
    topo = Topology(kind, n)
    values = [grid_oracle(topo, ens, r) for r in (4, 8, 16, 32)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    target = {"chsh": lambda e: cf.max_chsh(cf.as_triples(e)[0]), "star": cf.max_star_local,
              "chain": cf.max_chain_local}[kind](ens)
    assert values[-1] <= target + 1e-9
    assert values[-1] > target - 0.02
