"""Amplifiers for d-dimensional Gaussians with unknown mean, known covariance.

Three procedures with very different guarantees:

* :func:`amplify_decorrelate` -- shift the originals to cancel their
  correlation with fresh draws from N(mu_hat, Sigma); the optimal scheme.
* :func:`amplify_superset_mixture` -- keep the first half verbatim and fill
  the rest from a mixture of held-out samples and N(mu_tilde, I) draws;
  works only in the superset-friendly regime.
* :func:`amplify_naive_superset` / :func:`amplify_discard_resample` --
  baselines the adversarial verifiers are built to defeat.

General covariance is handled through the factor L: fresh noise is drawn
as L eps with eps ~ N(0, I), which conjugates the identity-frame algorithm
by the affine map (invariance to linear transformations).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GaussianSpec, RngLike, VecSampleSet, as_generator

__all__ = [
    "DecorrelatedOutput",
    "decorrelate_given_noise",
    "amplify_decorrelate",
    "amplify_superset_mixture",
    "amplify_naive_superset",
    "amplify_discard_resample",
]


@dataclass(frozen=True, eq=False)
class DecorrelatedOutput:
    """Decorrelated amplifier output with its diagnostic internals.

    ``samples[i] = input[i] - shift`` for i < n and ``mu_hat + fresh_noise[i-n]``
    for i >= n, where ``shift = sum(fresh_noise) / n``. The empirical mean of
    the output equals the empirical mean of the input exactly (the shift is
    constructed to cancel).
    """

    samples: VecSampleSet
    shift: np.ndarray
    fresh_noise: np.ndarray

    def __post_init__(self):
        self.shift.setflags(write=False)
        self.fresh_noise.setflags(write=False)


def decorrelate_given_noise(x: np.ndarray, fresh: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Core update for a fixed noise draw: returns (outputs, shift)."""
    n = x.shape[0]
    shift = fresh.sum(axis=0) / n
    mu_hat = x.mean(axis=0)
    return np.concatenate([x - shift, mu_hat + fresh], axis=0), shift


def amplify_decorrelate(x: VecSampleSet, m: int, spec: GaussianSpec,
                        rng: RngLike) -> DecorrelatedOutput:
    """Optimal Gaussian amplifier: n originals shifted, m-n fresh draws.

    Only ``spec.cov_factor`` is consumed (the covariance is known to the
    procedure; the mean is not).
    """
    n = len(x)
    if n < 1:
        raise ValueError("need at least one input sample")
    if m < n:
        raise ValueError("m must be at least n")
    if x.d != spec.d:
        raise ValueError("samples and spec have mismatched dimension")
    gen = as_generator(rng)
    eps = gen.standard_normal((m - n, x.d))
    if not spec.is_identity:
        eps = eps @ spec.cov_factor.T
    out, shift = decorrelate_given_noise(x.items, eps)
    return DecorrelatedOutput(VecSampleSet(out), shift, eps)


def amplify_superset_mixture(x: VecSampleSet, r: int, rng: RngLike) -> VecSampleSet:
    """Superset amplifier: first half kept verbatim, n/2 + r mixture slots.

    Each tail slot independently either consumes the next held-out
    second-half sample (a without-replacement random order) or, with
    probability 10r/(r + n/2), draws fresh from N(mu_tilde, I) where
    mu_tilde is the mean of the first half. If the held-out pool runs dry
    the slot falls back to a copy of the first input sample.
    """
    n = len(x)
    if n < 2 or n % 2 != 0:
        raise ValueError("n must be even and at least 2")
    if r < 0:
        raise ValueError("r must be non-negative")
    if 18 * r > n:
        raise ValueError("requires r <= n/18")
    gen = as_generator(rng)
    half = n // 2
    items = x.items
    mu_tilde = items[:half].mean(axis=0)
    w = 10.0 * r / (r + n / 2.0)

    pool = items[half:][gen.permutation(half)]
    slots = half + r
    take_fresh = gen.random(slots) < w
    n_fresh = int(take_fresh.sum())
    fresh = mu_tilde + gen.standard_normal((n_fresh, x.d))

    tail = np.empty((slots, x.d))
    tail[take_fresh] = fresh
    pool_idx = np.cumsum(~take_fresh) - 1  # index into pool for non-fresh slots
    not_fresh = ~take_fresh
    used = pool_idx[not_fresh]
    exhausted = used >= half
    src = np.where(exhausted[:, None], items[0], pool[np.minimum(used, half - 1)])
    tail[not_fresh] = src
    return VecSampleSet(np.concatenate([items[:half], tail], axis=0))


def amplify_naive_superset(x: VecSampleSet, m: int, rng: RngLike) -> VecSampleSet:
    """Sample-from-empirical baseline: shuffle input with m-n draws from N(mu_hat, I)."""
    n = len(x)
    if n < 1:
        raise ValueError("need at least one input sample")
    if m < n:
        raise ValueError("m must be at least n")
    gen = as_generator(rng)
    mu_hat = x.items.mean(axis=0)
    new = mu_hat + gen.standard_normal((m - n, x.d))
    merged = np.concatenate([x.items, new], axis=0)
    return VecSampleSet(merged[gen.permutation(m)])


def amplify_discard_resample(x: VecSampleSet, m: int, rng: RngLike) -> VecSampleSet:
    """Strawman: throw the input away and emit m draws from N(mu_hat, I)."""
    if len(x) < 1:
        raise ValueError("need at least one input sample")
    if m < 1:
        raise ValueError("m must be positive")
    gen = as_generator(rng)
    mu_hat = x.items.mean(axis=0)
    return VecSampleSet(mu_hat + gen.standard_normal((m, x.d)))
