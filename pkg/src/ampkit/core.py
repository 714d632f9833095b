"""Domain types, seeded random streams, and sampling primitives.

Everything here is immutable after construction: arrays are frozen
(``writeable=False``) in place, so instances are safe to share across
threads. Callers hand ownership of any array passed to a constructor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence, Union

import numpy as np
from scipy.linalg import solve_triangular

from . import _kernels

__all__ = [
    "SeedStream",
    "as_generator",
    "DiscreteDist",
    "GaussianSpec",
    "SampleSet",
    "VecSampleSet",
    "CheckResult",
    "VerifierReport",
    "sample_discrete",
    "sample_gaussian",
    "whiten",
    "unwhiten",
]

RngLike = Union["SeedStream", np.random.Generator]

PROB_SUM_TOL = 1e-12
ALIAS_CUTOFF = 64  # linear inverse-CDF at or below, alias method above


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeedStream:
    """Counter-based hierarchical random stream identified by (root_seed, path).

    The same (root_seed, path) always yields the same byte sequence, and
    streams with distinct paths are statistically independent, so Monte
    Carlo trials can fork children without sharing state.
    """

    root_seed: int
    path: tuple = ()

    def __post_init__(self):
        root = int(self.root_seed)
        if not 0 <= root < 2 ** 64:
            raise ValueError("root_seed must be a 64-bit unsigned integer")
        path = tuple(int(i) for i in self.path)
        if any(i < 0 for i in path):
            raise ValueError("path entries must be non-negative")
        object.__setattr__(self, "root_seed", root)
        object.__setattr__(self, "path", path)

    def child(self, *indices: int) -> "SeedStream":
        """Derive an independent sub-stream at the given path extension."""
        return SeedStream(self.root_seed, self.path + tuple(indices))

    def children(self, count: int) -> Iterator["SeedStream"]:
        for i in range(count):
            yield self.child(i)

    def generator(self) -> np.random.Generator:
        """Fresh numpy Generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(self.root_seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(seq))


def as_generator(rng: RngLike) -> np.random.Generator:
    """Accept either a SeedStream (pure, restartable) or a live Generator."""
    if isinstance(rng, SeedStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected SeedStream or numpy Generator, got {type(rng)!r}")


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiscreteDist:
    """Probability vector over distinct non-negative integer labels.

    ``k`` is the support-size bound of the distribution class the instance
    belongs to; ``len(labels) <= k``. Labels are strictly increasing
    (canonical order) so count vectors have a stable key order.
    """

    probs: np.ndarray
    labels: np.ndarray
    k: int

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if probs.ndim != 1 or labels.ndim != 1:
            raise ValueError("probs and labels must be 1-D")
        if probs.shape != labels.shape:
            raise ValueError("probs and labels must have equal length")
        if probs.size == 0:
            raise ValueError("empty support")
        if np.any(probs < 0):
            raise ValueError("negative probability mass")
        if abs(probs.sum() - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probs must sum to 1 within {PROB_SUM_TOL}")
        if np.any(labels < 0):
            raise ValueError("labels must be non-negative integers")
        if np.any(np.diff(labels) <= 0):
            raise ValueError("labels must be strictly increasing")
        if len(labels) > int(self.k):
            raise ValueError("support larger than the bound k")
        object.__setattr__(self, "probs", _freeze(probs))
        object.__setattr__(self, "labels", _freeze(labels))
        object.__setattr__(self, "k", int(self.k))

    @property
    def support_size(self) -> int:
        return int(self.labels.size)

    @classmethod
    def uniform(cls, labels: Sequence[int], k: int | None = None) -> "DiscreteDist":
        labels = np.sort(np.asarray(labels, dtype=np.int64))
        s = labels.size
        return cls(np.full(s, 1.0 / s), labels, s if k is None else k)

    @classmethod
    def uniform_range(cls, k: int) -> "DiscreteDist":
        return cls.uniform(np.arange(k, dtype=np.int64), k)

    @classmethod
    def point_mass(cls, label: int, k: int = 1) -> "DiscreteDist":
        return cls(np.array([1.0]), np.array([label], dtype=np.int64), k)

    @classmethod
    def bernoulli(cls, p: float) -> "DiscreteDist":
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must be in [0, 1]")
        return cls(np.array([1.0 - p, p]), np.array([0, 1], dtype=np.int64), 2)

    @classmethod
    def with_heavy_element(cls, heavy_label: int, heavy_mass: float,
                           light_labels: Sequence[int],
                           k: int | None = None) -> "DiscreteDist":
        """One element of mass ``heavy_mass``, uniform mass on the rest."""
        light = np.asarray(light_labels, dtype=np.int64)
        if heavy_label in light:
            raise ValueError("heavy label collides with light labels")
        if not 0.0 < heavy_mass < 1.0:
            raise ValueError("heavy_mass must be in (0, 1)")
        labels = np.sort(np.append(light, heavy_label))
        probs = np.full(labels.size, (1.0 - heavy_mass) / light.size)
        probs[np.searchsorted(labels, heavy_label)] = heavy_mass
        return cls(probs, labels, labels.size if k is None else k)

    def shape_kind(self) -> str:
        """Classify as "uniform" or "composite" (one heavy + uniform rest)."""
        p = self.probs
        if p.size == 1 or np.ptp(p) <= 1e-15:
            return "uniform"
        if p.size >= 3:
            top = int(np.argmax(p))
            rest = np.delete(p, top)
            if np.ptp(rest) <= 1e-15 and p[top] > rest[0]:
                return "composite"
        raise ValueError("distribution is neither uniform nor one-heavy-element")

    def heavy_split(self) -> tuple[int, np.ndarray, float]:
        """(heavy label, light labels, total light mass) of a composite dist."""
        if self.shape_kind() != "composite":
            raise ValueError("not a composite distribution")
        top = int(np.argmax(self.probs))
        light = np.delete(self.labels, top)
        return int(self.labels[top]), light, float(1.0 - self.probs[top])

    @cached_property
    def _cdf(self) -> np.ndarray:
        return _freeze(np.cumsum(self.probs))

    @cached_property
    def _alias_tables(self) -> tuple[np.ndarray, np.ndarray]:
        return _build_alias_tables(self.probs)


def _build_alias_tables(probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vose's alias method: O(k) setup, O(1) per draw.

    Entries with mass exactly 1/k never need pairing, so the Python loop
    only visits the off-uniform part of the support.
    """
    k = probs.size
    scaled = probs * k
    prob = np.ones(k)
    alias = np.arange(k, dtype=np.int64)
    small = list(np.flatnonzero(scaled < 1.0))
    large = list(np.flatnonzero(scaled > 1.0))
    scaled = scaled.copy()
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        (small if scaled[g] < 1.0 else large).append(g)
    for i in small:
        prob[i] = 1.0  # numerical residue only
    return _freeze(prob), _freeze(alias)


@dataclass(frozen=True, eq=False)
class GaussianSpec:
    """Mean vector and lower-triangular covariance factor L with Sigma = L L^T."""

    mu: np.ndarray
    cov_factor: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64)
        fac = np.asarray(self.cov_factor, dtype=np.float64)
        if mu.ndim != 1:
            raise ValueError("mu must be 1-D")
        d = mu.size
        if fac.shape != (d, d):
            raise ValueError("cov_factor must be d x d")
        if np.any(np.triu(fac, k=1) != 0.0):
            raise ValueError("cov_factor must be lower triangular")
        if np.any(np.diag(fac) <= 0.0):
            raise ValueError("cov_factor diagonal must be strictly positive")
        object.__setattr__(self, "mu", _freeze(mu))
        object.__setattr__(self, "cov_factor", _freeze(fac))

    @property
    def d(self) -> int:
        return int(self.mu.size)

    @cached_property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.cov_factor, np.eye(self.d)))

    @classmethod
    def standard(cls, d: int) -> "GaussianSpec":
        return cls(np.zeros(d), np.eye(d))

    @classmethod
    def identity_cov(cls, mu: Sequence[float]) -> "GaussianSpec":
        mu = np.asarray(mu, dtype=np.float64)
        return cls(mu, np.eye(mu.size))

    @classmethod
    def from_cov(cls, mu: Sequence[float], cov: np.ndarray) -> "GaussianSpec":
        return cls(np.asarray(mu, dtype=np.float64), np.linalg.cholesky(cov))


# ---------------------------------------------------------------------------
# Sample containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SampleSet:
    """Ordered multiset of integer labels; order is significant."""

    items: np.ndarray

    def __post_init__(self):
        items = np.asarray(self.items, dtype=np.int64)
        if items.ndim != 1:
            raise ValueError("items must be a 1-D label array")
        object.__setattr__(self, "items", _freeze(items))

    def __len__(self) -> int:
        return int(self.items.size)

    @classmethod
    def empty(cls) -> "SampleSet":
        return cls(np.empty(0, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class VecSampleSet:
    """Ordered sequence of d-dimensional real vectors, stored as an (n, d) array."""

    items: np.ndarray

    def __post_init__(self):
        items = np.asarray(self.items, dtype=np.float64)
        if items.ndim != 2:
            raise ValueError("items must be an (n, d) array")
        object.__setattr__(self, "items", _freeze(items))

    def __len__(self) -> int:
        return int(self.items.shape[0])

    @property
    def d(self) -> int:
        return int(self.items.shape[1])


# ---------------------------------------------------------------------------
# Verifier report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    statistic: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class VerifierReport:
    """Accept/reject verdict plus per-test diagnostics.

    The verdict is "accept" exactly when every individual test passed.
    """

    verdict: str
    tests: tuple

    def __post_init__(self):
        ok = all(t.passed for t in self.tests)
        if (self.verdict == "accept") != ok:
            raise ValueError("verdict must equal the conjunction of test flags")

    @property
    def accepted(self) -> bool:
        return self.verdict == "accept"

    @classmethod
    def from_tests(cls, tests: Sequence[CheckResult]) -> "VerifierReport":
        tests = tuple(tests)
        verdict = "accept" if all(t.passed for t in tests) else "reject"
        return cls(verdict, tests)


# ---------------------------------------------------------------------------
# Sampling operations
# ---------------------------------------------------------------------------

def sample_discrete(dist: DiscreteDist, n: int, rng: RngLike) -> SampleSet:
    """Draw n i.i.d. labels from ``dist``; deterministic given the stream."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return SampleSet.empty()
    gen = as_generator(rng)
    s = dist.support_size
    if s == 1:
        return SampleSet(np.full(n, dist.labels[0], dtype=np.int64))
    if s <= ALIAS_CUTOFF:
        idx = np.searchsorted(dist._cdf, gen.random(n), side="right")
        np.minimum(idx, s - 1, out=idx)
    else:
        prob, alias = dist._alias_tables
        idx = _kernels.alias_pick(prob, alias, gen.random(n), gen.random(n))
    return SampleSet(dist.labels[idx])


def sample_gaussian(spec: GaussianSpec, n: int, rng: RngLike) -> VecSampleSet:
    """Draw n i.i.d. vectors from N(mu, L L^T)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    gen = as_generator(rng)
    z = gen.standard_normal((n, spec.d))
    if spec.is_identity:
        x = z + spec.mu
    else:
        x = z @ spec.cov_factor.T + spec.mu
    return VecSampleSet(x)


def whiten(samples: VecSampleSet, spec: GaussianSpec) -> VecSampleSet:
    """Map N(mu, Sigma)-distributed samples into the N(mu, I) frame."""
    if samples.d != spec.d:
        raise ValueError("samples and spec have mismatched dimension")
    if spec.is_identity:
        return samples
    centered = samples.items - spec.mu
    w = solve_triangular(spec.cov_factor, centered.T, lower=True).T
    return VecSampleSet(w + spec.mu)


def unwhiten(samples: VecSampleSet, spec: GaussianSpec) -> VecSampleSet:
    """Inverse of :func:`whiten`."""
    if samples.d != spec.d:
        raise ValueError("samples and spec have mismatched dimension")
    if spec.is_identity:
        return samples
    x = (samples.items - spec.mu) @ spec.cov_factor.T
    return VecSampleSet(x + spec.mu)
