"""Adversarial verifiers from the impossibility arguments.

Each verifier knows the true distribution, runs one or more scalar tests
on the submitted sample set, and returns a :class:`VerifierReport` whose
verdict is the conjunction of the individual tests. Gaussian verifiers
expect samples already in the identity-covariance frame (whiten first for
general covariance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (CheckResult, DiscreteDist, RngLike, SampleSet,
                   VecSampleSet, VerifierReport, as_generator)

__all__ = [
    "GaussianVerifierParams",
    "DiscreteVerifierParams",
    "expected_unique",
    "verify_gaussian_mean_distance",
    "verify_gaussian_three_test",
    "verify_superset_inner_product",
    "verify_discrete_unique_count",
]


@dataclass(frozen=True)
class GaussianVerifierParams:
    """Test thresholds: ||x - mu||^2 <= c_norm * d, deviation band
    c_dev * sqrt(d)/m, inner-product floor d / (c_ip * n)."""

    c_norm: float = 15.0
    c_dev: float = 10.0
    c_ip: float = 4.0

    def __post_init__(self):
        if min(self.c_norm, self.c_dev, self.c_ip) <= 0:
            raise ValueError("all coefficients must be positive")


@dataclass(frozen=True)
class DiscreteVerifierParams:
    """Unique-count margin (the 7n/sqrt(k) slack) and the small-n rule."""

    unique_slack: float = 7.0

    def __post_init__(self):
        if self.unique_slack <= 0:
            raise ValueError("unique_slack must be positive")

    @staticmethod
    def small_n_cutoff(support: int) -> float:
        return math.sqrt(support) / 2.0


DEFAULT_GAUSSIAN = GaussianVerifierParams()
DEFAULT_DISCRETE = DiscreteVerifierParams()


def _in_sorted(values: np.ndarray, sorted_labels: np.ndarray) -> np.ndarray:
    """Membership of ``values`` in a strictly increasing label array."""
    idx = np.searchsorted(sorted_labels, values)
    idx_c = np.minimum(idx, sorted_labels.size - 1)
    return (idx < sorted_labels.size) & (sorted_labels[idx_c] == values)


def expected_unique(n: float, support: int) -> float:
    """E[number of distinct labels] in n uniform draws over ``support`` elements."""
    if support < 1:
        raise ValueError("support must be positive")
    return support * (1.0 - (1.0 - 1.0 / support) ** n)


def _check_mu(z: VecSampleSet, mu: np.ndarray) -> np.ndarray:
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (z.d,):
        raise ValueError("mu dimension does not match the samples")
    return mu


def verify_gaussian_mean_distance(z: VecSampleSet, mu: np.ndarray,
                                  params: GaussianVerifierParams = DEFAULT_GAUSSIAN,
                                  drop_last: bool = False) -> VerifierReport:
    """Single deviation-band test on the empirical mean of the whole set.

    Accepts iff | ||mu_hat - mu||^2 - d/m | <= c_dev * sqrt(d)/m. With
    ``drop_last`` the mean is taken over the first m-1 samples instead
    (the older variant of the same test).
    """
    mu = _check_mu(z, mu)
    m = len(z)
    if m < 1 or (drop_last and m < 2):
        raise ValueError("not enough samples")
    use = m - 1 if drop_last else m
    mu_hat = z.items[:use].mean(axis=0)
    d = z.d
    stat = abs(float(((mu_hat - mu) ** 2).sum()) - d / use)
    thr = params.c_dev * math.sqrt(d) / use
    return VerifierReport.from_tests(
        [CheckResult("mean_sq_deviation", stat, thr, stat <= thr)])


def verify_gaussian_three_test(z: VecSampleSet, mu: np.ndarray,
                               params: GaussianVerifierParams = DEFAULT_GAUSSIAN,
                               sweep_all_positions: bool = False) -> VerifierReport:
    """Three tests against a designated extra sample (the last position).

    1. ||x_extra - mu||^2 <= c_norm * d
    2. | ||mu_hat_n - mu||^2 - d/n | <= c_dev * sqrt(d)/n  (mean of the rest)
    3. <x_extra - mu_hat_n, mu - mu_hat_n> >= d / (c_ip * n)

    Amplifiers that shuffle make the designated position meaningless, so
    ``sweep_all_positions`` reruns the trio for every index with the
    leave-one-out mean taking the role of mu_hat_n.
    """
    mu = _check_mu(z, mu)
    if len(z) < 2:
        raise ValueError("need at least two samples")
    n = len(z) - 1
    d = z.d
    x = z.items
    norm_thr = params.c_norm * d
    dev_thr = params.c_dev * math.sqrt(d) / n
    ip_thr = d / (params.c_ip * n)

    positions = range(len(z)) if sweep_all_positions else (n,)
    total = x.sum(axis=0)
    tests = []
    for i in positions:
        xi = x[i]
        mu_hat = (total - xi) / n
        sq = float(((xi - mu) ** 2).sum())
        dev = abs(float(((mu_hat - mu) ** 2).sum()) - d / n)
        ip = float(((xi - mu_hat) * (mu - mu_hat)).sum())
        tag = f"[{i}]" if sweep_all_positions else ""
        tests.append(CheckResult(f"extra_norm{tag}", sq, norm_thr, sq <= norm_thr))
        tests.append(CheckResult(f"mean_band{tag}", dev, dev_thr, dev <= dev_thr))
        tests.append(CheckResult(f"inner_product{tag}", ip, ip_thr, ip >= ip_thr))
    return VerifierReport.from_tests(tests)


def verify_superset_inner_product(z: VecSampleSet, mu: np.ndarray,
                                  params: GaussianVerifierParams = DEFAULT_GAUSSIAN
                                  ) -> VerifierReport:
    """Leave-one-out verifier: both tests must hold at every index i.

    ||x_i - mu||^2 <= c_norm * d and
    <x_i - mu_hat_{-i}, mu - mu_hat_{-i}> >= d / (c_ip * n), with
    mu_hat_{-i} computed from the total sum in O(1) per index.
    """
    mu = _check_mu(z, mu)
    if len(z) < 2:
        raise ValueError("need at least two samples")
    n = len(z) - 1
    d = z.d
    x = z.items
    loo = (x.sum(axis=0) - x) / n  # row i: mean of all but x_i
    norms = ((x - mu) ** 2).sum(axis=1)
    ips = ((x - loo) * (mu - loo)).sum(axis=1)
    norm_thr = params.c_norm * d
    ip_thr = d / (params.c_ip * n)
    tests = []
    for i in range(len(z)):
        tests.append(CheckResult(f"norm[{i}]", float(norms[i]), norm_thr,
                                 bool(norms[i] <= norm_thr)))
    for i in range(len(z)):
        tests.append(CheckResult(f"inner_product[{i}]", float(ips[i]), ip_thr,
                                 bool(ips[i] >= ip_thr)))
    return VerifierReport.from_tests(tests)


def _verify_uniform_unique(z_items: np.ndarray, labels: np.ndarray,
                           n_claimed: float, params: DiscreteVerifierParams,
                           rng: RngLike | None, prefix: str = "") -> list[CheckResult]:
    support = labels.size
    in_support = _in_sorted(z_items, labels)
    tests = [CheckResult(prefix + "support", float(in_support.sum()),
                         float(z_items.size), bool(in_support.all()))]
    if not in_support.all():
        return tests

    if n_claimed <= params.small_n_cutoff(support):
        take = int(math.sqrt(support) / 2) + 1
        take = min(take, z_items.size)
        if take < z_items.size:
            if rng is None:
                raise ValueError("small-n rule needs rng for the random subsample")
            sub = as_generator(rng).choice(z_items, size=take, replace=False)
        else:
            sub = z_items
        dup = take - np.unique(sub).size
        tests.append(CheckResult(prefix + "no_repeats", float(dup), 0.0,
                                 dup == 0))
        return tests

    uniq = float(np.unique(z_items).size)
    thr = expected_unique(n_claimed, support) \
        + params.unique_slack * n_claimed / math.sqrt(support)
    tests.append(CheckResult(prefix + "unique_count", uniq, thr, uniq > thr))
    return tests


def verify_discrete_unique_count(z: SampleSet, dist: DiscreteDist,
                                 n_claimed: int,
                                 params: DiscreteVerifierParams = DEFAULT_DISCRETE,
                                 rng: RngLike | None = None) -> VerifierReport:
    """Unique-count verifier for uniform and one-heavy-element distributions.

    Uniform: reject out-of-support labels; for n_claimed <= sqrt(k)/2
    subsample sqrt(k)/2 + 1 entries and reject on any repeat; otherwise
    accept iff #unique > E[U^n] + slack * n / sqrt(k).

    Composite (heavy element + uniform region): additionally gate on the
    number of samples landing in the uniform region, then recurse on that
    region with the expected region load as the claimed size.
    """
    if n_claimed < 1:
        raise ValueError("n_claimed must be positive")
    kind = dist.shape_kind()  # raises for unsupported shapes
    if kind == "uniform":
        tests = _verify_uniform_unique(z.items, dist.labels, n_claimed,
                                       params, rng)
        return VerifierReport.from_tests(tests)

    heavy, light, light_mass = dist.heavy_split()
    in_support = _in_sorted(z.items, dist.labels)
    tests = [CheckResult("support", float(in_support.sum()), float(len(z)),
                         bool(in_support.all()))]
    if in_support.all():
        region = z.items[_in_sorted(z.items, light)]
        n_eff = n_claimed * light_mass  # expected region load of the input
        gate = n_eff + params.unique_slack * n_eff / math.sqrt(light.size)
        tests.append(CheckResult("region_count", float(region.size), gate,
                                 region.size > gate))
        tests.extend(_verify_uniform_unique(region, light, n_eff, params,
                                            rng, prefix="region_"))
    return VerifierReport.from_tests(tests)
