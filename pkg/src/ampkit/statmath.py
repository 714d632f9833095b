"""Closed-form tail bounds, divergences, and posterior formulas.

These are the small analytic pieces the amplifiers and verifiers lean on.
Bounds that are probabilities are clamped into [0, 1].
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, stats

from . import _kernels

__all__ = [
    "kl_poisson",
    "chisq_tail_upper",
    "chisq_tail_threshold",
    "chisq_twosided_upper",
    "poisson_tail_upper",
    "martingale_tail_upper",
    "birthday_collision_upper",
    "gaussian_tv_upper",
    "analytic_output_cov",
    "posterior_mean_var",
    "hellinger_sq_gaussian_mixture",
    "tv_binomial_vs_compound",
]

_SQRT2PI = math.sqrt(2.0 * math.pi)


def kl_poisson(lambda1: float, lambda2: float) -> float:
    """KL(Poisson(lambda1) || Poisson(lambda2)) = l1*log(l1/l2) + l2 - l1."""
    if lambda1 <= 0.0 or lambda2 <= 0.0:
        raise ValueError("rates must be positive")
    return lambda1 * math.log(lambda1 / lambda2) + lambda2 - lambda1


def chisq_tail_upper(d: int, t: float) -> float:
    """Bound on Pr[Z - d >= 2*sqrt(d*t) + 2*t] for Z ~ chi-square(d): e^{-t}."""
    if t <= 0.0:
        raise ValueError("t must be positive")
    if d <= 0:
        raise ValueError("d must be positive")
    return min(1.0, math.exp(-t))


def chisq_tail_threshold(d: int, t: float) -> float:
    """The deviation point the e^{-t} bound refers to: d + 2*sqrt(d*t) + 2*t."""
    if t <= 0.0:
        raise ValueError("t must be positive")
    return d + 2.0 * math.sqrt(d * t) + 2.0 * t


def chisq_twosided_upper(d: int, t: float) -> float:
    """Bound on Pr[|Z - d| >= d*t] for Z ~ chi-square(d): 2*e^{-d*t^2/8}."""
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie in (0, 1)")
    if d <= 0:
        raise ValueError("d must be positive")
    return min(1.0, 2.0 * math.exp(-d * t * t / 8.0))


def poisson_tail_upper(lam: float, x: float) -> float:
    """Tail bound e^{-x^2/(lam+x)} for a deviation of x from the mean lam.

    Valid for the lower tail Pr[X <= lam - x] throughout; for the upper
    tail it only dominates when the deviation is large relative to the
    rate (roughly x >= lam), so calibration checks should stay in that
    regime.
    """
    if lam <= 0.0 or x <= 0.0:
        raise ValueError("lam and x must be positive")
    return min(1.0, math.exp(-x * x / (lam + x)))


def martingale_tail_upper(lam: float, var_sum: float) -> float:
    """Freedman-style bound e^{-lam^2 / (2*(var_sum + lam/3))}."""
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    if var_sum < 0.0:
        raise ValueError("var_sum must be non-negative")
    return min(1.0, math.exp(-lam * lam / (2.0 * (var_sum + lam / 3.0))))


def birthday_collision_upper(n: int, k: int) -> float:
    """Duplicate probability for n uniform draws over k elements: n^2/(2k)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if n < 0:
        raise ValueError("n must be non-negative")
    return min(1.0, n * n / (2.0 * k))


def gaussian_tv_upper(n: int, m: int, d: int) -> float:
    """TV bound sqrt(3d)*(m-n)/n for the decorrelating amplifier, clamped to 1."""
    if n < 1 or m < n:
        raise ValueError("need m >= n >= 1")
    if d < 1:
        raise ValueError("d must be positive")
    return min(1.0, math.sqrt(3.0 * d) * (m - n) / n)


def analytic_output_cov(n: int, m: int) -> np.ndarray:
    """Covariance of the decorrelating amplifier's m outputs per coordinate.

    First n entries: variance 1 + (m-n)/n^2, pairwise covariance (m-n)/n^2.
    Last m-n entries: variance 1 + 1/n, pairwise covariance 1/n.
    Cross-block covariance is exactly 0 (that is the decorrelation).
    """
    if not m > n >= 1:
        raise ValueError("need m > n >= 1")
    cov = np.zeros((m, m))
    cov[:n, :n] = (m - n) / n ** 2
    cov[n:, n:] = 1.0 / n
    cov += np.eye(m)
    return cov


def posterior_mean_var(mu0: np.ndarray, n: int, d: int) -> tuple[np.ndarray, float]:
    """Posterior of the unknown mean given n samples under the N(0, sqrt(d) I) prior.

    Returns (mu_bar, sigma_bar^2) with mu_bar = n/(n + 1/sqrt(d)) * mu0 and
    sigma_bar^2 = 1/(n + 1/sqrt(d)); mu0 is the empirical mean of the samples.
    """
    mu0 = np.asarray(mu0, dtype=np.float64)
    if n < 1:
        raise ValueError("n must be at least 1")
    if mu0.shape != (d,):
        raise ValueError("mu0 must have length d")
    denom = n + 1.0 / math.sqrt(d)
    return (n / denom) * mu0, 1.0 / denom


def _hellinger_integrand(x: float, mu_norm: float, w: float) -> float:
    # (sqrt p - sqrt q)^2 written with non-positive exponents only
    sp = math.exp(-x * x / 4.0)
    qu = (1.0 - w) * math.exp(-x * x / 2.0) \
        + w * math.exp(-(x - mu_norm) ** 2 / 2.0)
    return (sp - math.sqrt(qu)) ** 2 / _SQRT2PI


def hellinger_sq_gaussian_mixture(mu_norm: float, r: int, n: int) -> tuple[float, float]:
    """Squared Hellinger distance between N(0,1) and a contaminated copy.

    The second distribution is (1-w) N(0,1) + w N(mu_norm, 1) with mixture
    weight w = 10r/(r + n/2). Returns ``(numeric, bound)`` where ``numeric``
    is adaptive quadrature of the distance (absolute error < 1e-10, split at
    mu_norm/2 where the integrand changes character) and ``bound`` is the
    closed form (576 r^2 / n^2) e^{3 mu_norm^2}, valid for r <= n/18.
    """
    if mu_norm < 0.0:
        raise ValueError("mu_norm must be non-negative")
    if n < 1 or r < 0:
        raise ValueError("need n >= 1 and r >= 0")
    if 18 * r > n:
        raise ValueError("requires r <= n/18")
    bound = 576.0 * r * r / (n * n) * math.exp(3.0 * mu_norm * mu_norm)
    if mu_norm == 0.0 or r == 0:
        return 0.0, bound
    w = 10.0 * r / (r + n / 2.0)
    left, el = integrate.quad(_hellinger_integrand, -np.inf, mu_norm / 2.0,
                              args=(mu_norm, w), epsabs=1e-12, epsrel=1e-12,
                              limit=200)
    right, er = integrate.quad(_hellinger_integrand, mu_norm / 2.0, np.inf,
                               args=(mu_norm, w), epsabs=1e-12, epsrel=1e-12,
                               limit=200)
    numeric = left + right
    if el + er > 1e-10:
        raise ArithmeticError("quadrature did not reach 1e-10 absolute error")
    if numeric > bound:
        raise ArithmeticError("numeric Hellinger exceeded its closed-form bound")
    return numeric, bound


def tv_binomial_vs_compound(n: int, extra: int, p: float) -> float:
    """Exact TV between Binomial(n+extra, p) and the plug-in two-stage law.

    The second law first draws h ~ Binomial(n, p) and returns
    h + Binomial(extra, h/n): the head-count distribution of the empirical
    Bernoulli amplifier. Computed by full enumeration over h; only float
    rounding error remains.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if extra < 0:
        raise ValueError("extra must be non-negative")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if extra == 0 or p in (0.0, 1.0):
        return 0.0
    total = n + extra
    law1 = stats.binom.pmf(np.arange(total + 1), total, p)
    law2 = _kernels.compound_law(n, extra, p)
    return float(0.5 * np.abs(law1 - law2).sum())
