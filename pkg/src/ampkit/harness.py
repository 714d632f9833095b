"""Amplifier-vs-verifier game runner, TV estimators, and the regression demo.

Trials are embarrassingly parallel: the trial index space is cut into
fixed-size chunks, each chunk gets its own forked seed stream, and results
are reduced in chunk order, so single-threaded and multi-threaded runs
(``AMPKIT_THREADS``) produce identical output.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from . import discrete_amp, gaussian_amp, verifiers
from .core import (DiscreteDist, GaussianSpec, RngLike, SampleSet, SeedStream,
                   VecSampleSet, as_generator, sample_discrete)
from .statmath import analytic_output_cov, gaussian_tv_upper

__all__ = [
    "GameConfig",
    "GameResult",
    "TVEstimate",
    "RegressionDemoResult",
    "wilson_interval",
    "run_game",
    "estimate_tv_counts",
    "exact_tv_decorrelate",
    "regression_demo",
]

CHUNK = 64
_Z95 = 1.959963984540054

GAUSSIAN_AMPLIFIERS = ("iid", "identity", "decorrelate", "naive_superset",
                       "discard_resample", "superset_mixture")
DISCRETE_AMPLIFIERS = ("iid", "identity", "discrete", "bernoulli")
GAUSSIAN_VERIFIERS = ("mean_distance", "three_test", "superset_inner_product")
DISCRETE_VERIFIERS = ("unique_count",)
GAUSSIAN_PRIORS = ("fixed", "gaussian")
DISCRETE_PRIORS = ("uniform_support", "composite", "fixed")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be positive")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # the score interval always contains p; enforce it under float rounding
    return min(p, max(0.0, center - half)), max(p, min(1.0, center + half))


@dataclass(frozen=True)
class GameConfig:
    """One amplifier-vs-verifier experiment.

    ``d`` is set for the Gaussian family, ``k`` for the discrete family.
    The amplifier name "iid" is truth mode: the verifier receives m genuine
    i.i.d. draws, which measures its calibration baseline.
    """

    family: str
    amplifier: str
    verifier: str
    prior: str
    n: int
    m: int
    trials: int
    root_seed: int
    d: int | None = None
    k: int | None = None
    amplifier_params: dict = field(default_factory=dict)
    verifier_params: dict = field(default_factory=dict)
    prior_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family == "gaussian":
            if self.d is None or self.k is not None:
                raise ConfigError("gaussian family sets d and leaves k unset")
            if self.amplifier not in GAUSSIAN_AMPLIFIERS:
                raise ConfigError(f"unknown gaussian amplifier {self.amplifier!r}")
            if self.verifier not in GAUSSIAN_VERIFIERS:
                raise ConfigError(f"unknown gaussian verifier {self.verifier!r}")
            if self.prior not in GAUSSIAN_PRIORS:
                raise ConfigError(f"unknown gaussian prior {self.prior!r}")
        elif self.family == "discrete":
            if self.k is None or self.d is not None:
                raise ConfigError("discrete family sets k and leaves d unset")
            if self.amplifier not in DISCRETE_AMPLIFIERS:
                raise ConfigError(f"unknown discrete amplifier {self.amplifier!r}")
            if self.verifier not in DISCRETE_VERIFIERS:
                raise ConfigError(f"unknown discrete verifier {self.verifier!r}")
            if self.prior not in DISCRETE_PRIORS:
                raise ConfigError(f"unknown discrete prior {self.prior!r}")
            if self.amplifier == "discrete" and self.n % 4 != 0:
                raise ConfigError("the discrete amplifier needs n divisible by 4")
        else:
            raise ConfigError(f"unknown family {self.family!r}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.n < 1 or self.m < self.n:
            raise ConfigError("need m >= n >= 1")
        if self.amplifier == "identity" and self.m != self.n:
            raise ConfigError("identity amplifier requires m == n")

    def canonical_dict(self) -> dict:
        return {
            "family": self.family,
            "amplifier": self.amplifier,
            "amplifier_params": dict(sorted(self.amplifier_params.items())),
            "verifier": self.verifier,
            "verifier_params": dict(sorted(self.verifier_params.items())),
            "prior": self.prior,
            "prior_params": dict(sorted(self.prior_params.items())),
            "n": self.n,
            "m": self.m,
            "d": self.d,
            "k": self.k,
            "trials": self.trials,
            "root_seed": self.root_seed,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class GameResult:
    accept_rate: float
    wilson_ci_95: tuple[float, float]
    trials: int
    config_hash: str
    seed: int

    def __post_init__(self):
        lo, hi = self.wilson_ci_95
        if not lo <= self.accept_rate <= hi:
            raise ValueError("accept_rate must lie inside its interval")

    def as_dict(self) -> dict:
        return {
            "accept_rate": self.accept_rate,
            "ci_lo": self.wilson_ci_95[0],
            "ci_hi": self.wilson_ci_95[1],
            "trials": self.trials,
            "config_hash": self.config_hash,
            "seed": self.seed,
        }


# ---------------------------------------------------------------------------
# Game internals
# ---------------------------------------------------------------------------

def _gaussian_verifier(cfg: GameConfig):
    p = cfg.verifier_params
    params = verifiers.GaussianVerifierParams(
        c_norm=p.get("c_norm", 15.0),
        c_dev=p.get("c_dev", 10.0),
        c_ip=p.get("c_ip", 4.0),
    )
    name = cfg.verifier
    if name == "mean_distance":
        drop_last = bool(p.get("drop_last", False))
        return lambda z, mu: verifiers.verify_gaussian_mean_distance(
            z, mu, params, drop_last=drop_last)
    if name == "three_test":
        sweep = bool(p.get("sweep_all_positions", False))
        return lambda z, mu: verifiers.verify_gaussian_three_test(
            z, mu, params, sweep_all_positions=sweep)
    return lambda z, mu: verifiers.verify_superset_inner_product(z, mu, params)


def _gaussian_trial_runner(cfg: GameConfig):
    d, n, m = cfg.d, cfg.n, cfg.m
    spec = GaussianSpec.standard(d)
    verify = _gaussian_verifier(cfg)
    amp = cfg.amplifier
    ap = cfg.amplifier_params
    prior_mu = None
    if cfg.prior == "fixed":
        prior_mu = np.asarray(cfg.prior_params.get("mu", np.zeros(d)), dtype=np.float64)
        if prior_mu.shape != (d,):
            raise ConfigError("fixed prior mu must have length d")
    scale = d ** 0.25  # N(0, sqrt(d) I) has std d^(1/4) per coordinate

    def one(gen: np.random.Generator) -> bool:
        mu = prior_mu if prior_mu is not None else scale * gen.standard_normal(d)
        if amp == "iid":
            z = VecSampleSet(mu + gen.standard_normal((m, d)))
        else:
            x = VecSampleSet(mu + gen.standard_normal((n, d)))
            if amp == "identity":
                z = x
            elif amp == "decorrelate":
                z = gaussian_amp.amplify_decorrelate(x, m, spec, gen).samples
            elif amp == "naive_superset":
                z = gaussian_amp.amplify_naive_superset(x, m, gen)
            elif amp == "discard_resample":
                z = gaussian_amp.amplify_discard_resample(x, m, gen)
            else:
                r = int(ap.get("r", m - n))
                z = gaussian_amp.amplify_superset_mixture(x, r, gen)
        return verify(z, mu).accepted

    return one


def _discrete_prior_draw(cfg: GameConfig, gen: np.random.Generator) -> DiscreteDist:
    k = cfg.k
    if cfg.prior == "fixed":
        spec = cfg.prior_params["dist"]
        return DiscreteDist(np.asarray(spec["probs"], dtype=np.float64),
                            np.asarray(spec["labels"], dtype=np.int64),
                            spec.get("k", k))
    domain = 8 * k + 1  # supports live inside {0, ..., 8k}
    if cfg.prior == "uniform_support":
        labels = np.sort(gen.choice(domain, size=k, replace=False, shuffle=False))
        return DiscreteDist.uniform(labels, k)
    # composite: one heavy element, mass k/(4n) spread over k-1 light labels
    light_mass = k / (4.0 * cfg.n)
    if not 0.0 < light_mass < 1.0:
        raise ConfigError("composite prior needs n > k/4")
    labels = gen.choice(domain, size=k, replace=False, shuffle=False)
    return DiscreteDist.with_heavy_element(int(labels[0]), 1.0 - light_mass,
                                           labels[1:], k)


def _discrete_trial_runner(cfg: GameConfig):
    n, m, k = cfg.n, cfg.m, cfg.k
    p = cfg.verifier_params
    params = verifiers.DiscreteVerifierParams(
        unique_slack=p.get("unique_slack", 7.0))
    amp = cfg.amplifier
    ap = cfg.amplifier_params

    def one(gen: np.random.Generator) -> bool:
        dist = _discrete_prior_draw(cfg, gen)
        if amp == "iid":
            z = sample_discrete(dist, m, gen)
        else:
            x = sample_discrete(dist, n, gen)
            if amp == "identity":
                z = x
            elif amp == "discrete":
                eps = float(ap.get("eps", discrete_amp.DEFAULT_EPS))
                z = discrete_amp.amplify_discrete(x, k, eps, gen)
            else:
                c = float(ap.get("c", (m - n) / n))
                z = discrete_amp.amplify_bernoulli(x, c, gen)
        rep = verifiers.verify_discrete_unique_count(z, dist, n, params, rng=gen)
        return rep.accepted

    return one


def _thread_count() -> int:
    raw = os.environ.get("AMPKIT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_game(cfg: GameConfig) -> GameResult:
    """Run the configured game and return the acceptance rate with its CI."""
    runner = (_gaussian_trial_runner(cfg) if cfg.family == "gaussian"
              else _discrete_trial_runner(cfg))
    root = SeedStream(cfg.root_seed)
    n_chunks = (cfg.trials + CHUNK - 1) // CHUNK

    def run_chunk(ci: int) -> int:
        gen = root.child(ci).generator()
        count = min(CHUNK, cfg.trials - ci * CHUNK)
        return sum(runner(gen) for _ in range(count))

    threads = _thread_count()
    if threads > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            accepts = sum(pool.map(run_chunk, range(n_chunks)))
    else:
        accepts = sum(run_chunk(ci) for ci in range(n_chunks))

    rate = accepts / cfg.trials
    return GameResult(rate, wilson_interval(accepts, cfg.trials), cfg.trials,
                      cfg.config_hash(), cfg.root_seed)


# ---------------------------------------------------------------------------
# TV estimators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TVEstimate:
    """Plug-in TV estimate on the count statistic, with its additive bias bound."""

    estimate: float
    bias_bound: float
    distinct_stats: int
    trials: int


def _count_key(z: SampleSet, labels: np.ndarray) -> bytes:
    idx = np.searchsorted(labels, z.items)
    return np.bincount(idx, minlength=labels.size).tobytes()


def estimate_tv_counts(amplifier: Callable[[np.random.Generator], SampleSet],
                       dist: DiscreteDist, m: int, trials: int,
                       rng: RngLike) -> TVEstimate:
    """Plug-in TV between the amplifier's count-vector law and the i.i.d. law.

    ``amplifier`` maps a generator to one output SampleSet (closing over its
    own input-size convention). The statistic is the vector of per-label
    counts in the canonical label order, estimated from ``trials`` runs of
    each arm. ``bias_bound`` is sqrt(#distinct statistics / trials), the
    Cauchy-Schwarz bound on the expected L1 sampling error of the plug-in
    estimate (for identical laws the estimate itself stays below it).
    """
    if trials < 10 ** 4:
        raise ValueError("need at least 1e4 trials for a usable plug-in estimate")
    gen = as_generator(rng)
    labels = dist.labels
    amp_counts: Counter = Counter()
    ref_counts: Counter = Counter()
    for _ in range(trials):
        amp_counts[_count_key(amplifier(gen), labels)] += 1
    for _ in range(trials):
        ref_counts[_count_key(sample_discrete(dist, m, gen), labels)] += 1
    keys = set(amp_counts) | set(ref_counts)
    distinct = len(keys)
    if distinct > trials / 10:
        raise ValueError(
            f"{distinct} distinct statistics for {trials} trials: state space "
            "too large for a plug-in estimate; use a smaller instance")
    tv = 0.5 * sum(abs(amp_counts[key] - ref_counts[key]) for key in keys) / trials
    return TVEstimate(float(tv), math.sqrt(distinct / trials), distinct, trials)


def exact_tv_decorrelate(n: int, m: int, d: int) -> float:
    """Exact TV of the decorrelating amplifier's output from m i.i.d. draws.

    Both laws are centered Gaussians per coordinate (block cov vs identity),
    so the TV reduces to the probability that the log-likelihood ratio is
    positive under each law. Eigendecomposing the analytic covariance shows
    exactly two non-unit eigenvalues (both m/n), each repeated d times
    across coordinates, which collapses the ratio to a chi-square threshold
    crossing with 2d degrees of freedom.
    """
    if not m >= n >= 1:
        raise ValueError("need m >= n >= 1")
    if d < 1:
        raise ValueError("d must be positive")
    if m > 50:
        raise ValueError("m > 50 not supported (dense eigensolve)")
    if m == n:
        return 0.0
    ev = np.linalg.eigvalsh(analytic_output_cov(n, m))
    nonunit = ev[np.abs(ev - 1.0) > 1e-9]
    if not np.allclose(nonunit, m / n, atol=1e-8, rtol=0.0):
        raise ArithmeticError("unexpected spectrum of the output covariance")
    dof = nonunit.size * d
    lam = m / n
    s_star = dof * math.log(lam) * lam / (lam - 1.0)
    tv = stats.chi2.cdf(s_star, dof) - stats.chi2.cdf(s_star / lam, dof)
    result = float(tv)
    if result > gaussian_tv_upper(n, m, d) + 1e-12:
        raise ArithmeticError("exact TV exceeded its closed-form upper bound")
    return result


# ---------------------------------------------------------------------------
# Regression-augmentation demo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegressionDemoResult:
    n: int
    d: int
    trials: int
    truth: float
    mse_raw: float
    se_raw: float
    mse_amp: float
    se_amp: float

    def as_dict(self) -> dict:
        return {
            "n": self.n, "d": self.d, "trials": self.trials,
            "truth": self.truth,
            "mse_raw": self.mse_raw, "se_raw": self.se_raw,
            "mse_amp": self.mse_amp, "se_amp": self.se_amp,
        }


def regression_demo(n: int, d: int, trials: int, rng: RngLike,
                    noise_sd: float = 0.5, n_extra: int = 2,
                    noise_factor: float = 5.0) -> RegressionDemoResult:
    """Unexplained-variance estimation on raw vs amplified regression data.

    Each trial draws (x_i, y_i) with x ~ N(0, I_d), y = theta^T x + eta,
    ||theta|| = 1, eta ~ N(0, noise_sd^2); the target quantity is
    noise_sd^2. The raw estimator is RSS/(n-d). The amplified estimator
    adds ``n_extra`` points: x from N(x_bar, I), labeled by the fitted
    model plus noise of variance (noise_factor/n) * raw estimate, then
    rescales by 1/(n + n_extra - d).
    """
    if n <= d + 2:
        raise ValueError("need n > d + 2 for the scaled estimator")
    if trials < 1:
        raise ValueError("trials must be positive")
    gen = as_generator(rng)
    truth = noise_sd ** 2
    sq_raw = np.empty(trials)
    sq_amp = np.empty(trials)
    for t in range(trials):
        theta = gen.standard_normal(d)
        theta /= np.linalg.norm(theta)
        x = gen.standard_normal((n, d))
        y = x @ theta + noise_sd * gen.standard_normal(n)
        theta_hat = np.linalg.solve(x.T @ x, x.T @ y)
        rss = float(((y - x @ theta_hat) ** 2).sum())
        est_raw = rss / (n - d)

        x_new = x.mean(axis=0) + gen.standard_normal((n_extra, d))
        label_sd = math.sqrt(noise_factor / n * est_raw)
        y_new = x_new @ theta_hat + label_sd * gen.standard_normal(n_extra)
        x2 = np.concatenate([x, x_new], axis=0)
        y2 = np.concatenate([y, y_new])
        theta2 = np.linalg.solve(x2.T @ x2, x2.T @ y2)
        rss2 = float(((y2 - x2 @ theta2) ** 2).sum())
        est_amp = rss2 / (n + n_extra - d)

        sq_raw[t] = (est_raw - truth) ** 2
        sq_amp[t] = (est_amp - truth) ** 2
    return RegressionDemoResult(
        n=n, d=d, trials=trials, truth=truth,
        mse_raw=float(sq_raw.mean()),
        se_raw=float(sq_raw.std(ddof=1) / math.sqrt(trials)),
        mse_amp=float(sq_amp.mean()),
        se_amp=float(sq_amp.std(ddof=1) / math.sqrt(trials)),
    )
