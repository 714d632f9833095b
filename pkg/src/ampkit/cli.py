"""Command-line interface.

Subcommands: amplify, verify, game, tv, demo, calibrate. Results are
emitted as JSON or CSV with the config hash and seed, and identical
invocations produce byte-identical output.

Exit codes: 0 success, 2 configuration/input error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import gaussian_amp, discrete_amp, verifiers
from .core import (DiscreteDist, GaussianSpec, SampleSet, SeedStream,
                   VecSampleSet, whiten)
from .harness import (ConfigError, GameConfig, RegressionDemoResult,
                      estimate_tv_counts, exact_tv_decorrelate, regression_demo,
                      run_game)
from .statmath import gaussian_tv_upper, tv_binomial_vs_compound

CSV_HEADER = "config_hash,seed,trials,accept_rate,ci_lo,ci_hi"


class InputError(ValueError):
    """Malformed input file; message carries the offending line number."""


# ---------------------------------------------------------------------------
# Sample file I/O: header line "d=<dim>" or "k=<bound>", one sample per line
# (integer label, or comma-separated reals for vectors).
# ---------------------------------------------------------------------------

def read_samples(path: str):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise InputError(f"{path}:1: empty sample file (missing header)")
    header = lines[0].strip()
    if "=" not in header:
        raise InputError(f"{path}:1: header must be 'd=<dim>' or 'k=<bound>'")
    key, _, raw = header.partition("=")
    key = key.strip()
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{path}:1: header value {raw!r} is not an integer")
    rows = [(i + 2, ln.strip()) for i, ln in enumerate(lines[1:]) if ln.strip()]
    if key == "k":
        labels = np.empty(len(rows), dtype=np.int64)
        for j, (lineno, ln) in enumerate(rows):
            try:
                labels[j] = int(ln)
            except ValueError:
                raise InputError(f"{path}:{lineno}: expected an integer label")
        return "discrete", SampleSet(labels), value
    if key == "d":
        vecs = np.empty((len(rows), value))
        for j, (lineno, ln) in enumerate(rows):
            parts = ln.split(",")
            if len(parts) != value:
                raise InputError(
                    f"{path}:{lineno}: expected {value} comma-separated reals")
            try:
                vecs[j] = [float(p) for p in parts]
            except ValueError:
                raise InputError(f"{path}:{lineno}: malformed real number")
        return "gaussian", VecSampleSet(vecs), value
    raise InputError(f"{path}:1: unknown header key {key!r}")


def write_samples(path: str, samples, header_value: int) -> None:
    with open(path, "w") as fh:
        if isinstance(samples, SampleSet):
            fh.write(f"k={header_value}\n")
            for v in samples.items:
                fh.write(f"{v}\n")
        else:
            fh.write(f"d={header_value}\n")
            for row in samples.items:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_dist_spec(path: str):
    with open(path) as fh:
        spec = json.load(fh)
    family = spec.get("family")
    if family == "gaussian":
        mu = np.asarray(spec["mu"], dtype=np.float64)
        if "cov_factor" in spec:
            return GaussianSpec(mu, np.asarray(spec["cov_factor"]))
        return GaussianSpec.identity_cov(mu)
    if family == "discrete":
        return DiscreteDist(np.asarray(spec["probs"], dtype=np.float64),
                            np.asarray(spec["labels"], dtype=np.int64),
                            int(spec.get("k", len(spec["labels"]))))
    raise InputError(f"{path}: family must be 'gaussian' or 'discrete'")


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_amplify(args) -> int:
    family, samples, bound = read_samples(args.input)
    rng = SeedStream(args.seed)
    method = args.method
    if method in ("discrete", "bernoulli"):
        if family != "discrete":
            raise ConfigError(f"{method} amplifier needs a discrete sample file")
        if method == "discrete":
            k = args.k if args.k is not None else bound
            out = discrete_amp.amplify_discrete(samples, k, args.eps, rng)
        else:
            out = discrete_amp.amplify_bernoulli(samples, args.c, rng)
        write_samples(args.output, out, bound)
        return 0
    if family != "gaussian":
        raise ConfigError(f"{method} amplifier needs a vector sample file")
    m = args.m if args.m is not None else len(samples)
    if method == "decorrelate":
        spec = GaussianSpec.standard(bound)
        out = gaussian_amp.amplify_decorrelate(samples, m, spec, rng).samples
    elif method == "superset-mixture":
        r = args.r if args.r is not None else m - len(samples)
        out = gaussian_amp.amplify_superset_mixture(samples, r, rng)
    elif method == "naive-superset":
        out = gaussian_amp.amplify_naive_superset(samples, m, rng)
    else:
        out = gaussian_amp.amplify_discard_resample(samples, m, rng)
    write_samples(args.output, out, bound)
    return 0


def _report_dict(report) -> dict:
    return {
        "verdict": report.verdict,
        "tests": [
            {"name": t.name, "statistic": t.statistic,
             "threshold": t.threshold, "passed": t.passed}
            for t in report.tests
        ],
    }


def _cmd_verify(args) -> int:
    family, samples, _ = read_samples(args.input)
    dist = read_dist_spec(args.dist)
    if family == "gaussian":
        if not isinstance(dist, GaussianSpec):
            raise ConfigError("vector samples need a gaussian dist spec")
        z = whiten(samples, dist)
        if args.verifier == "mean-distance":
            report = verifiers.verify_gaussian_mean_distance(
                z, dist.mu, drop_last=args.drop_last)
        elif args.verifier == "three-test":
            report = verifiers.verify_gaussian_three_test(
                z, dist.mu, sweep_all_positions=args.sweep)
        elif args.verifier == "superset-inner-product":
            report = verifiers.verify_superset_inner_product(z, dist.mu)
        else:
            raise ConfigError(f"{args.verifier!r} is not a gaussian verifier")
    else:
        if not isinstance(dist, DiscreteDist):
            raise ConfigError("discrete samples need a discrete dist spec")
        if args.verifier != "unique-count":
            raise ConfigError(f"{args.verifier!r} is not a discrete verifier")
        if args.n_claimed is None:
            raise ConfigError("--n-claimed is required for unique-count")
        report = verifiers.verify_discrete_unique_count(
            samples, dist, args.n_claimed, rng=SeedStream(args.seed))
    _emit(_dump(_report_dict(report)), args.output)
    return 0


def _load_game_config(args) -> GameConfig:
    with open(args.config) as fh:
        raw = json.load(fh)
    if args.trials is not None:
        raw["trials"] = args.trials
    if args.seed is not None:
        raw["root_seed"] = args.seed
    try:
        return GameConfig(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad game config: {exc}")


def _result_lines(result, fmt: str) -> str:
    if fmt == "csv":
        d = result.as_dict()
        row = (f"{d['config_hash']},{d['seed']},{d['trials']},"
               f"{d['accept_rate']!r},{d['ci_lo']!r},{d['ci_hi']!r}")
        return CSV_HEADER + "\n" + row + "\n"
    return _dump(result.as_dict())


def _cmd_game(args) -> int:
    cfg = _load_game_config(args)
    result = run_game(cfg)
    _emit(_result_lines(result, args.format), args.output)
    return 0


def _cmd_tv(args) -> int:
    mode = args.mode
    if mode == "gaussian-exact":
        value = exact_tv_decorrelate(args.n, args.m, args.d)
        payload = {"mode": mode, "n": args.n, "m": args.m, "d": args.d,
                   "tv": value}
    elif mode == "gaussian-bound":
        value = gaussian_tv_upper(args.n, args.m, args.d)
        payload = {"mode": mode, "n": args.n, "m": args.m, "d": args.d,
                   "tv_bound": value}
    elif mode == "bernoulli-exact":
        value = tv_binomial_vs_compound(args.n, args.extra, args.p)
        payload = {"mode": mode, "n": args.n, "extra": args.extra, "p": args.p,
                   "tv": value}
    else:  # counts-mc
        if args.p is None:
            raise ConfigError("counts-mc currently supports the bernoulli "
                              "instance: provide --p and --c")
        dist = DiscreteDist.bernoulli(args.p)
        n, c = args.n, args.c
        extra = int(c * n)
        gen = SeedStream(args.seed).generator()

        def amp(g):
            x = SampleSet((g.random(n) < args.p).astype(np.int64))
            return discrete_amp.amplify_bernoulli(x, c, g)

        est = estimate_tv_counts(amp, dist, n + extra, args.trials, gen)
        payload = {"mode": mode, "n": n, "c": c, "p": args.p,
                   "trials": args.trials, "seed": args.seed,
                   "tv_estimate": est.estimate, "bias_bound": est.bias_bound,
                   "distinct_stats": est.distinct_stats}
    _emit(_dump(payload), args.output)
    return 0


def _demo_csv(rows: list[RegressionDemoResult]) -> str:
    out = ["n,d,trials,truth,mse_raw,se_raw,mse_amp,se_amp"]
    for r in rows:
        d = r.as_dict()
        out.append(f"{d['n']},{d['d']},{d['trials']},{d['truth']!r},"
                   f"{d['mse_raw']!r},{d['se_raw']!r},"
                   f"{d['mse_amp']!r},{d['se_amp']!r}")
    return "\n".join(out) + "\n"


def _cmd_demo(args) -> int:
    if args.what != "regression":
        raise ConfigError(f"unknown demo {args.what!r}")
    rows = []
    for i, n in enumerate(args.n):
        rng = SeedStream(args.seed).child(i)
        rows.append(regression_demo(n, args.d, args.trials, rng))
    _emit(_demo_csv(rows), args.output)
    return 0


def _cmd_calibrate(args) -> int:
    with open(args.config) as fh:
        raw = json.load(fh)
    raw["amplifier"] = "iid"  # truth mode
    if args.seed is not None:
        raw["root_seed"] = args.seed
    if args.trials is not None:
        raw["trials"] = args.trials
    grid = [int(v) for v in args.m_grid.split(",")] if args.m_grid else [raw["m"]]
    lines = [CSV_HEADER + ",m"]
    for m in grid:
        raw["m"] = m
        raw["n"] = min(raw.get("n", m), m)
        cfg = GameConfig(**raw)
        d = run_game(cfg).as_dict()
        lines.append(f"{d['config_hash']},{d['seed']},{d['trials']},"
                     f"{d['accept_rate']!r},{d['ci_lo']!r},{d['ci_hi']!r},{m}")
    _emit("\n".join(lines) + "\n", args.output)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ampkit",
        description="Sample amplification experiments: amplifiers, verifiers, games.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("amplify", help="amplify a sample file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--method", required=True,
                   choices=["discrete", "bernoulli", "decorrelate",
                            "superset-mixture", "naive-superset",
                            "discard-resample"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int)
    p.add_argument("--eps", type=float, default=discrete_amp.DEFAULT_EPS)
    p.add_argument("--c", type=float, default=0.1)
    p.add_argument("--m", type=int)
    p.add_argument("--r", type=int)
    p.set_defaults(func=_cmd_amplify)

    p = sub.add_parser("verify", help="run a verifier against a sample file")
    p.add_argument("--input", required=True)
    p.add_argument("--dist", required=True, help="true-distribution JSON spec")
    p.add_argument("--verifier", required=True,
                   choices=["mean-distance", "three-test",
                            "superset-inner-product", "unique-count"])
    p.add_argument("--n-claimed", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--drop-last", action="store_true")
    p.add_argument("--sweep", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("game", help="run a configured amplifier-vs-verifier game")
    p.add_argument("--config", required=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.add_argument("--format", choices=["csv", "jsonl"], default="jsonl")
    p.set_defaults(func=_cmd_game)

    p = sub.add_parser("tv", help="TV distances: exact oracles and MC estimators")
    p.add_argument("--mode", required=True,
                   choices=["gaussian-exact", "gaussian-bound",
                            "bernoulli-exact", "counts-mc"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--extra", type=int, default=0)
    p.add_argument("--p", type=float)
    p.add_argument("--c", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=10 ** 4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_tv)

    p = sub.add_parser("demo", help="run a demo experiment")
    p.add_argument("what", choices=["regression"])
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_demo)

    p = sub.add_parser("calibrate", help="truth-mode acceptance sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--m-grid")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_calibrate)

    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InputError, ValueError, KeyError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
