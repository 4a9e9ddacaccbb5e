"""Command-line front end: ``score``, ``certify``, ``sweep`` and ``sample``.

Exit codes: 0 success, 1 usage error, 2 certification failure, 3 invalid input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import closedform as cf
from . import observables, sweeps
from .networks import DIRECT_MAX_SOURCES, chsh_terms, pair_correlators, strategy_score
from .optimizer import OptimizerConfig, optimize_many
from .sampling import estimate_scores
from .states import InvalidStateError, as_triples, correlation_matrix, random_state, state_from_json
from .topology import NetworkStrategy, Topology

EXIT_OK, EXIT_USAGE, EXIT_CERT_FAIL, EXIT_INVALID = 0, 1, 2, 3
ATTAIN_TOL = 1e-3
SOUND_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- config


def _load_json(path):
    with open(path) as fp:
        return json.load(fp)


def _resolve(value, base):
    """Inline JSON value, or a path (relative to the config file) to a JSON file."""
    if isinstance(value, str):
        return _load_json(Path(base) / value)
    return value


def load_run_config(path):
    """Read ``{"topology", "ensemble", "strategy"?}`` into (topology, ensemble, strategy)."""
    cfg = _load_json(path)
    base = Path(path).parent
    if not isinstance(cfg, dict) or "ensemble" not in cfg:
        raise InvalidStateError("config must be a JSON object with an 'ensemble' entry")
    ensemble = [state_from_json(obj) for obj in _resolve(cfg["ensemble"], base)]
    if not ensemble:
        raise InvalidStateError("ensemble is empty")
    kind = cfg.get("topology", "chsh" if len(ensemble) == 1 else "star")
    topology = Topology(kind, len(ensemble))
    strategy = build_strategy(topology, ensemble, cfg.get("strategy", "theorem"), base)
    return cfg, topology, ensemble, strategy


def build_strategy(topology, ensemble, spec, base="."):
    """``"theorem"`` / ``"mub"`` name a closed-form strategy; anything else is slot records."""
    if spec == "theorem":
        return {
            "chsh": lambda: observables.chsh_strategy(ensemble[0]),
            "star": lambda: observables.theorem1_star_strategy(ensemble),
            "chain": lambda: observables.theorem2_chain_strategy(ensemble),
        }[topology.kind]()
    if spec == "mub":
        if topology.kind == "chsh":
            return observables.chsh_strategy(ensemble[0], "mub_on_B")
        builder = observables.mub_star_strategy if topology.kind == "star" else observables.mub_chain_strategy
        return builder(ensemble)
    records = _resolve(spec, base) if isinstance(spec, str) else spec
    if isinstance(records, dict):
        records = records["slots"]
    return NetworkStrategy.from_json(topology, records)


@contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w") as fp:
            yield fp


def _config_hash(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:12]


# ---------------------------------------------------------------- score


def lemma_values(topology, ensemble, strategy):
    """Per-source, per-z CHSH-observable expectations ``(n, 2)`` of a star strategy."""
    tmats = np.array([correlation_matrix(rho) for rho in ensemble])
    return 0.5 * chsh_terms(pair_correlators(tmats, strategy.vectors))


def score_report(topology, ensemble, strategy):
    out = {"topology": topology.kind, "n": topology.n}
    out["score_factored"] = strategy_score(ensemble, strategy, "factored")
    if topology.n <= DIRECT_MAX_SOURCES:
        out["score_direct"] = strategy_score(ensemble, strategy, "direct")
    rep = cf.report(topology, ensemble, strategies=False)
    out.update(s_local_max=rep.s_local_max, s_mub_max=rep.s_mub_max, upper_bound=rep.upper_bound)
    flags = dict(rep.equality_flags)
    if topology.kind == "star":
        flags.update(cf.lemma1_conditions(lemma_values(topology, ensemble, strategy)))
    out["flags"] = flags
    return out


def _print_report(rep, fp, as_json):
    if as_json:
        json.dump(rep, fp, indent=2)
        fp.write("\n")
        return
    for key, value in rep.items():
        if isinstance(value, dict):
            for k, v in value.items():
                fp.write(f"{key}.{k}: {str(v).lower() if isinstance(v, bool) else v}\n")
        elif isinstance(value, float):
            fp.write(f"{key}: {value:.12g}\n")
        else:
            fp.write(f"{key}: {value}\n")


def cmd_score(args):
    _, topology, ensemble, strategy = load_run_config(args.config)
    rep = score_report(topology, ensemble, strategy)
    with _output(args.out) as fp:
        _print_report(rep, fp, args.json)
    return EXIT_OK


# ---------------------------------------------------------------- certify

CLOSED_FORMS = {
    ("chsh", "free"): lambda e: cf.max_chsh(as_triples(e)[0]),
    ("star", "free"): cf.max_star_local,
    ("star", "mub_central"): cf.max_star_mub,
    ("chain", "free"): cf.max_chain_local,
    ("chain", "mub_central"): cf.max_chain_mub,
}


def random_ensembles(n, trials, seed):
    seeds = np.random.default_rng(seed).integers(2**32, size=(trials, n))
    return [[random_state(int(s)) for s in row] for row in seeds]


def certify(n, trials, seed, restarts=32):
    """Optimizer-vs-closed-form gaps for every applicable topology and restriction."""
    if not 1 <= n <= 3:
        raise UsageError(f"certify supports n in [1, 3], got {n}")
    if trials < 1:
        raise UsageError("trials must be positive")
    ensembles = random_ensembles(n, trials, seed)
    cases = [("chsh", "free")] if n == 1 else [(k, r) for k in ("star", "chain") for r in ("free", "mub_central")]
    rows, free_best = [], {}
    for kind, restriction in cases:
        topology = Topology(kind, n)
        config = OptimizerConfig(restarts=restarts, seed=seed, restriction=restriction)
        results = optimize_many(topology, ensembles, config)
        best = np.array([r.best_score for r in results])
        target = np.array([CLOSED_FORMS[kind, restriction](e) for e in ensembles])
        row = {
            "topology": kind,
            "restriction": restriction,
            "trials": trials,
            "max_shortfall": float(np.max(target - best)),
            "max_excess": float(np.max(best - target)),
        }
        if restriction == "free":
            free_best[kind] = best
        else:
            row["max_excess_over_free"] = float(np.max(best - free_best[kind]))
        row["passed"] = bool(
            row["max_shortfall"] <= ATTAIN_TOL
            and row["max_excess"] <= SOUND_TOL
            and row.get("max_excess_over_free", 0.0) <= SOUND_TOL
        )
        rows.append(row)
    return rows


def cmd_certify(args):
    rows = certify(args.n, args.trials, args.seed, args.restarts)
    ok = all(r["passed"] for r in rows)
    with _output(args.out) as fp:
        if args.json:
            json.dump({"n": args.n, "seed": args.seed, "passed": ok, "cases": rows}, fp, indent=2)
            fp.write("\n")
        else:
            for r in rows:
                fp.write(
                    f"{r['topology']:<5} {r['restriction']:<11} trials={r['trials']} "
                    f"shortfall={r['max_shortfall']:.3e} excess={r['max_excess']:.3e} "
                    f"{'PASS' if r['passed'] else 'FAIL'}\n"
                )
    return EXIT_OK if ok else EXIT_CERT_FAIL


# ---------------------------------------------------------------- sweep


def cmd_sweep(args):
    data = _load_json(args.config) if args.config else {}
    for key in ("figure", "n", "k", "grid_points", "ends"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if "figure" not in data:
        raise UsageError("sweep needs a figure (via --figure or the config file)")
    config = sweeps.SweepConfig.from_dict(data)
    out = args.out or config.out
    with _output(out) as fp:
        if args.json:
            name, rows = sweeps.sweep_rows(config)
            json.dump(
                {"config": data, "config_sha256": config.digest(), "seed": args.seed,
                 "columns": [name, "s_local_max", "s_mub_max"], "rows": rows},
                fp, indent=2,
            )
            fp.write("\n")
        else:
            sweeps.write_csv(fp, config, seed=args.seed)
    return EXIT_OK


# ---------------------------------------------------------------- sample


def cmd_sample(args):
    cfg, topology, ensemble, strategy = load_run_config(args.config)
    shots = args.shots if args.shots is not None else int(cfg.get("shots", 100_000))
    est = estimate_scores(topology, ensemble, strategy, shots, args.seed)
    with _output(args.out) as fp:
        if args.json:
            json.dump(
                {"score": est.score.mean, "std_error": est.score.std_error, "shots": shots, "seed": args.seed,
                 "table": {"".join(map(str, k)): v for k, v in est.table.items()},
                 "table_std_error": {"".join(map(str, k)): v for k, v in est.std_errors.items()}},
                fp, indent=2,
            )
            fp.write("\n")
        else:
            fp.write(f"# config_sha256={_config_hash(cfg)} seed={args.seed} shots={shots} "
                     f"score={est.score.mean:.17g} score_std_error={est.score.std_error:.17g}\n")
            fp.write(est.to_csv())
    return EXIT_OK


# ---------------------------------------------------------------- entry


def build_parser():
    parser = _Parser(prog="nlocality", description="n-local star and chain network scores for two-qubit sources")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, config_required):
        p.add_argument("--config", required=config_required, help="JSON config file")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("score", help="scores, closed-form maxima and equality flags")
    common(p, True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("certify", help="optimizer vs closed forms on random ensembles")
    common(p, False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--restarts", type=int, default=32)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("sweep", help="noise sweep as CSV")
    common(p, False)
    p.add_argument("--figure", choices=sweeps.FIGURES)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--grid-points", dest="grid_points", type=int)
    p.add_argument("--ends", choices=sweeps.CHAIN_ENDS)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sample", help="finite-shot estimate of a strategy's table and score")
    common(p, True)
    p.add_argument("--shots", type=int)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"nlocality: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidStateError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"nlocality: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
