"""Command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 numeric failure, 3 non-convergence
under ``--strict``.
"""

from __future__ import annotations

import argparse
import datetime
import os
import sys

import numpy as np

from . import __version__
from . import io as wio
from .exceptions import GenerationFailureError, InvalidArgumentError, NumericFailureError
from .lab import ExperimentConfig, median_by_variable, run_experiment
from .ot import OtConfig, medoid_centroid, multistart_spread, pairwise_sinkhorn, sinkhorn_distance
from .ot.centroids import barycenter_objective
from .ot.distances import exact_wasserstein, pairwise_distance_matrix
from .rewards import compute_reward_variance, phi_embed
from .selftest import run_selftest

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_NOT_CONVERGED = 0, 1, 2, 3
RECORD_FILES = {"converge": "converge.csv", "noise": "noise.csv",
                "dim_sweep": "dim_sweep.csv", "centroid": "centroid.csv"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def _solver_options(p):
    p.add_argument("--p", type=float, default=None, help="Wasserstein order (default 2)")
    p.add_argument("--solver", choices=("exact", "sinkhorn"), default=None, help="default exact")
    p.add_argument("--reg", type=float, default=None, help="Sinkhorn/barycenter regularization")
    p.add_argument("--strict", action="store_true", help="exit 3 if any solve did not converge")


def _file_defaults(args):
    """Fill unset solver flags for commands that read measures from files."""
    args.p = 2.0 if args.p is None else args.p
    args.solver = args.solver or "exact"
    args.temperature = 1.0 if getattr(args, "temperature", None) is None else args.temperature


def build_parser():
    parser = _Parser(prog="wassreward", description="Wasserstein analysis of reward ambiguity.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("distance", help="W_p between two measures")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--metric", required=True, help="ground metric CSV (row,col,value)")
    _solver_options(p)

    p = sub.add_parser("centroid", help="medoid and barycenter of a reward set, or a centroid experiment")
    p.add_argument("reward_set", nargs="?")
    p.add_argument("--metric", help="ground metric CSV (row,col,value)")
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--starts", type=int, default=5, help="barycenter multi-start count")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--config", default=None, help="run a centroid experiment from this JSON config")
    _solver_options(p)

    p = sub.add_parser("ambiguity", help="average pairwise distance and reward variance of a set")
    p.add_argument("reward_set")
    p.add_argument("--metric", required=True)
    p.add_argument("--temperature", type=float, default=None)
    _solver_options(p)

    for name in ("converge", "noise", "dim-sweep"):
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", default=None, help="experiment JSON config (defaults if omitted)")
        p.add_argument("--out-dir", default=".")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--temperature", type=float, default=None)
        _solver_options(p)

    p = sub.add_parser("selftest", help="run the oracle self-test suite")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _ot_config(args):
    config = OtConfig(order_p=args.p)
    return config if args.reg is None else config.replace(reg_epsilon=args.reg)


def _check_metric(metric, size):
    if metric.size != size:
        raise InvalidArgumentError(f"metric has {metric.size} points, measures have {size}")


def cmd_distance(args):
    _file_defaults(args)
    mu, nu = wio.read_measure(args.first), wio.read_measure(args.second)
    metric = wio.read_metric(args.metric)
    _check_metric(metric, mu.size)
    if args.solver == "exact":
        value, converged = exact_wasserstein(mu, nu, metric, args.p)[0], True
    else:
        result = sinkhorn_distance(mu, nu, metric, _ot_config(args))
        value, converged = result.value, result.converged
    print(repr(float(value)))
    return converged


def _load_set(args):
    rewards = wio.read_reward_set(args.reward_set)
    metric = wio.read_metric(args.metric)
    measures = [phi_embed(r, args.temperature) for r in rewards]
    _check_metric(metric, measures[0].size)
    return rewards, measures, metric


def cmd_ambiguity(args):
    _file_defaults(args)
    rewards, measures, metric = _load_set(args)
    if len(measures) < 2:
        raise InvalidArgumentError("a reward set needs at least two rewards")
    if args.solver == "exact":
        matrix, converged = pairwise_distance_matrix(measures, metric, args.p), True
    else:
        matrix, converged = pairwise_sinkhorn(measures, metric, _ot_config(args))
    print(f"delta_d {float(matrix[np.triu_indices(len(measures), 1)].mean())!r}")
    print(f"variance_d {float(compute_reward_variance(rewards))!r}")
    return converged


def cmd_centroid(args):
    if args.config is not None or args.reward_set is None:
        if args.reward_set is not None:
            raise InvalidArgumentError("give either a reward set or --config, not both")
        return _run_experiment("centroid", args)
    if args.metric is None:
        raise InvalidArgumentError("--metric is required with a reward set")
    _file_defaults(args)
    _, measures, metric = _load_set(args)
    config = _ot_config(args)
    weights = np.full(len(measures), 1.0 / len(measures))
    index, sum_wp = medoid_centroid(measures, metric, args.p)
    spread, bary, converged = multistart_spread(measures, weights, metric, config, args.starts,
                                                args.seed or 0)
    print(f"medoid_index {index}")
    print(f"medoid_sum_wp {float(sum_wp)!r}")
    print(f"medoid_objective {float(barycenter_objective(measures[index], measures, weights, metric, args.p))!r}")
    print(f"barycenter_objective {float(barycenter_objective(bary.measure, measures, weights, metric, args.p))!r}")
    print(f"multistart_spread {float(spread)!r}")
    print(f"barycenter_converged {str(converged).lower()}")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        wio.write_measure(bary.measure, os.path.join(args.out_dir, "barycenter.csv"))
    return converged


def _load_config(kind, args):
    if args.config is None:
        config = ExperimentConfig.preset(kind)
    else:
        data = wio.read_json(args.config)
        if isinstance(data, dict):
            data.setdefault("kind", kind)
        config = ExperimentConfig.from_dict(data)
        if config.kind != kind:
            raise InvalidArgumentError(f"config key 'kind' is {config.kind!r}, expected {kind!r}")
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.temperature is not None:
        changes["temperature"] = args.temperature
    if args.solver is not None:
        changes["solver"] = args.solver
    ot_changes = {k: v for k, v in (("order_p", args.p), ("reg_epsilon", args.reg)) if v is not None}
    if ot_changes:
        changes["ot"] = config.ot.replace(**ot_changes)
    return config.replace(**changes) if changes else config


def _timestamp():
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _run_experiment(kind, args):
    config = _load_config(kind, args)
    started = _timestamp()
    records = run_experiment(config)
    out_dir = args.out_dir or "."
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise InvalidArgumentError(f"cannot create {out_dir}: {exc.strerror}") from None
    name = RECORD_FILES[kind]
    path = os.path.join(out_dir, name)
    wio.write_records(records, path)
    manifest = wio.RunManifest(config.to_dict(), config.master_seed, __version__, started,
                               _timestamp(), {name: wio.records_digest(path)})
    wio.write_manifest(manifest, out_dir)
    for metric in sorted({r.metric for r in records}):
        medians = median_by_variable(records, metric) or \
            {r.variable: r.value for r in records if r.metric == metric}
        print(metric, " ".join(f"{v:g}:{m:.6g}" for v, m in medians.items()))
    print(f"wrote {path}")
    return all(r.converged for r in records)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    try:
        if args.command == "selftest":
            return EXIT_OK if run_selftest(args.seed) else EXIT_NUMERIC
        handler = {"distance": cmd_distance, "ambiguity": cmd_ambiguity, "centroid": cmd_centroid}.get(
            args.command)
        converged = handler(args) if handler else _run_experiment(args.command.replace("-", "_"), args)
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericFailureError, GenerationFailureError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.strict and not converged:
        print("error: at least one solve did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
