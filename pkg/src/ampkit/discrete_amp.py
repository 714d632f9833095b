"""Amplifiers for bounded-support discrete distributions.

The main procedure Poissonizes its input, resamples from the empirical
frequencies of the first part, shuffles the new draws into the second
part, and then pads/trims back to a fixed output size. A Bernoulli
warm-up amplifier (add coin flips at the empirical bias, permute) is
included for exact cross-checks against the enumerated head-count law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RngLike, SampleSet, as_generator

__all__ = [
    "PoissonSplit",
    "AmplifyDetails",
    "choose_r",
    "poisson_split",
    "amplify_poissonized",
    "amplify_discrete",
    "amplify_bernoulli",
    "DEFAULT_EPS",
]

# final tuning constant of the analysis; exposed as a config default
DEFAULT_EPS = 2.0 / 15.0


@dataclass(frozen=True)
class PoissonSplit:
    """Two simulated Poisson(n) sample sets carved from a 4n input.

    ``overflow`` is set when the two Poisson sizes exceeded the 4n budget;
    both parts are then constant sequences of the first input sample.
    """

    part1: SampleSet
    part2: SampleSet
    overflow: bool


@dataclass(frozen=True)
class AmplifyDetails:
    """Diagnostics of one amplify_discrete run, for tests and debugging."""

    split: PoissonSplit
    r: int
    target_extra: int
    padded: int
    appended_true: int
    trimmed: int


def choose_r(n: int, k: int, eps: float) -> int:
    """Fresh-sample budget floor(n * eps^1.5 / (4 sqrt(k)))."""
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    return int(math.floor(n * eps ** 1.5 / (4.0 * math.sqrt(k))))


def poisson_split(x: SampleSet, n: int, rng: RngLike) -> PoissonSplit:
    """Simulate two Poisson(n) sample sets from a buffer of exactly 4n draws."""
    if len(x) != 4 * n:
        raise ValueError(f"input must hold exactly 4n = {4 * n} samples")
    gen = as_generator(rng)
    n1 = int(gen.poisson(n))
    n2 = int(gen.poisson(n))
    items = x.items
    if n1 + n2 <= 4 * n:
        return PoissonSplit(SampleSet(items[:n1]),
                            SampleSet(items[n1:n1 + n2]), False)
    fill = items[0]
    return PoissonSplit(SampleSet(np.full(n1, fill, dtype=np.int64)),
                        SampleSet(np.full(n2, fill, dtype=np.int64)), True)


def amplify_poissonized(part1: SampleSet, part2: SampleSet, n: int, r: int,
                        rng: RngLike) -> SampleSet:
    """Resample-from-empirical amplifier in the Poissonized setting.

    For each label i with count u_i in ``part1``, draws Poisson(r * u_i / n)
    new copies, shuffles them together with ``part2`` uniformly, and returns
    ``part1`` followed by the shuffled block. Every output label already
    appeared in the input, and the input is contained as a sub-multiset.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    if n < 1:
        raise ValueError("n must be positive")
    gen = as_generator(rng)
    if r > 0 and len(part1) > 0:
        labels, counts = np.unique(part1.items, return_counts=True)
        fresh_counts = gen.poisson(r * counts / n)
        new = np.repeat(labels, fresh_counts)
    else:
        new = np.empty(0, dtype=np.int64)
    tail = np.concatenate([part2.items, new])
    tail = tail[gen.permutation(tail.size)]
    return SampleSet(np.concatenate([part1.items, tail]))


def amplify_discrete(x: SampleSet, k: int, eps: float, rng: RngLike,
                     return_details: bool = False):
    """Full de-Poissonized amplifier: 4n input samples -> 4n + floor(r/8).

    Splits the input into two Poisson(n) parts, amplifies the Poissonized
    pair, then pads with copies of the first sample (if the fresh draws fell
    short of r/8), appends leftover true input samples up to the target
    size, and trims from the tail if the Poissonized stage overshot.
    """
    if len(x) == 0 or len(x) % 4 != 0:
        raise ValueError("input size must be a positive multiple of 4")
    n = len(x) // 4
    if k < np.unique(x.items).size:
        raise ValueError("k is smaller than the number of distinct labels seen")
    gen = as_generator(rng)
    r = choose_r(n, k, eps)
    target_extra = r // 8

    split = poisson_split(x, n, gen)
    out = amplify_poissonized(split.part1, split.part2, n, r, gen)
    n_prime = len(split.part1) + len(split.part2)

    buf = out.items
    padded = 0
    if buf.size < n_prime + target_extra:
        padded = n_prime + target_extra - buf.size
        buf = np.concatenate([buf, np.full(padded, x.items[0], dtype=np.int64)])

    target_total = 4 * n + target_extra
    q1 = target_total - buf.size
    appended, trimmed = 0, 0
    if q1 >= 0:
        # leftover true samples follow the first n_prime consumed ones
        appended = q1
        buf = np.concatenate([buf, x.items[n_prime:n_prime + q1]])
    else:
        trimmed = -q1
        buf = buf[:target_total]

    result = SampleSet(buf)
    if return_details:
        return result, AmplifyDetails(split, r, target_extra, padded,
                                      appended, trimmed)
    return result


def amplify_bernoulli(bits: SampleSet, c: float, rng: RngLike) -> SampleSet:
    """Example amplifier for coin flips: append floor(c*n) tosses at the
    empirical bias and return a uniformly random permutation of everything."""
    if c < 0.0:
        raise ValueError("c must be non-negative")
    n = len(bits)
    if n == 0:
        raise ValueError("need at least one input flip")
    items = bits.items
    if np.any((items != 0) & (items != 1)):
        raise ValueError("labels must all be 0 or 1")
    gen = as_generator(rng)
    extra = int(math.floor(c * n))
    p_hat = items.sum() / n
    new = (gen.random(extra) < p_hat).astype(np.int64)
    merged = np.concatenate([items, new])
    return SampleSet(merged[gen.permutation(merged.size)])
