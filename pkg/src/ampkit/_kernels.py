"""Hot numeric kernels with numba-jitted and pure-numpy implementations.

Every kernel has two interchangeable implementations. The jitted path is
used when numba imports cleanly; setting the environment variable
``AMPKIT_NO_NUMBA=1`` forces the numpy fallback (useful on platforms
without a working LLVM toolchain, and for benchmarking the two paths
against each other with ``benchmarks/bench_kernels.py``).

Integer-valued kernels produce bit-identical results on both paths;
float-valued kernels agree to rounding error.
"""

from __future__ import annotations

import math
import os

import numpy as np

_flag = os.environ.get("AMPKIT_NO_NUMBA", "0").strip().lower()
NUMBA_DISABLED = _flag in ("1", "true", "yes", "on")

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled via AMPKIT_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# Alias-method draws: map pre-drawn uniforms to table indices.
# ---------------------------------------------------------------------------

def _alias_pick_np(prob: np.ndarray, alias: np.ndarray,
                   u_slot: np.ndarray, u_flip: np.ndarray) -> np.ndarray:
    slot = np.minimum((u_slot * prob.shape[0]).astype(np.int64),
                      prob.shape[0] - 1)
    return np.where(u_flip < prob[slot], slot, alias[slot])


if HAVE_NUMBA:

    @njit(cache=True)
    def _alias_pick_jit(prob, alias, u_slot, u_flip):  # pragma: no cover
        k = prob.shape[0]
        n = u_slot.shape[0]
        out = np.empty(n, dtype=np.int64)
        for i in range(n):
            s = int(u_slot[i] * k)
            if s >= k:
                s = k - 1
            out[i] = s if u_flip[i] < prob[s] else alias[s]
        return out

    alias_pick = _alias_pick_jit
else:
    alias_pick = _alias_pick_np


# ---------------------------------------------------------------------------
# Per-row unique counts over batches of integer samples.
# ---------------------------------------------------------------------------

def _unique_count_rows_np(labels: np.ndarray, domain: int) -> np.ndarray:
    if labels.shape[1] == 0:
        return np.zeros(labels.shape[0], dtype=np.int64)
    srt = np.sort(labels, axis=1)
    return 1 + (np.diff(srt, axis=1) != 0).sum(axis=1)


if HAVE_NUMBA:

    @njit(cache=True)
    def _unique_count_rows_jit(labels, domain):  # pragma: no cover
        rows, n = labels.shape
        out = np.zeros(rows, dtype=np.int64)
        if n == 0:
            return out
        # timestamp marking: one scratch array, no per-row clearing
        seen = np.zeros(domain, dtype=np.int64)
        for r in range(rows):
            stamp = r + 1
            c = 0
            for j in range(n):
                lab = labels[r, j]
                if seen[lab] != stamp:
                    seen[lab] = stamp
                    c += 1
            out[r] = c
        return out

    unique_count_rows = _unique_count_rows_jit
else:
    unique_count_rows = _unique_count_rows_np


# ---------------------------------------------------------------------------
# Per-row duplicate flags (birthday-style collision detection).
# ---------------------------------------------------------------------------

def _has_duplicate_rows_np(labels: np.ndarray, domain: int) -> np.ndarray:
    n = labels.shape[1]
    return _unique_count_rows_np(labels, domain) < n


if HAVE_NUMBA:

    @njit(cache=True)
    def _has_duplicate_rows_jit(labels, domain):  # pragma: no cover
        rows, n = labels.shape
        out = np.zeros(rows, dtype=np.bool_)
        seen = np.zeros(domain, dtype=np.int64)
        for r in range(rows):
            stamp = r + 1
            for j in range(n):
                lab = labels[r, j]
                if seen[lab] == stamp:
                    out[r] = True
                    break
                seen[lab] = stamp
        return out

    has_duplicate_rows = _has_duplicate_rows_jit
else:
    has_duplicate_rows = _has_duplicate_rows_np


# ---------------------------------------------------------------------------
# Law of h + Binomial(extra, h/n), h ~ Binomial(n, p), on {0, ..., n+extra}.
# Log-space binomial pmf so n + extra up to 1e4 stays finite.
# ---------------------------------------------------------------------------

def _binom_pmf_row_np(extra: int, q: float, lgam: np.ndarray) -> np.ndarray:
    j = np.arange(extra + 1)
    if q <= 0.0:
        row = np.zeros(extra + 1)
        row[0] = 1.0
        return row
    if q >= 1.0:
        row = np.zeros(extra + 1)
        row[extra] = 1.0
        return row
    logc = lgam[extra] - lgam[j] - lgam[extra - j]
    return np.exp(logc + j * math.log(q) + (extra - j) * math.log1p(-q))


def _compound_law_np(n: int, extra: int, p: float) -> np.ndarray:
    lgam = np.array([math.lgamma(i + 1) for i in range(max(n, extra) + 1)])
    h = np.arange(n + 1)
    if p <= 0.0:
        ph = np.zeros(n + 1)
        ph[0] = 1.0
    elif p >= 1.0:
        ph = np.zeros(n + 1)
        ph[n] = 1.0
    else:
        logc = lgam[n] - lgam[h] - lgam[n - h]
        ph = np.exp(logc + h * math.log(p) + (n - h) * math.log1p(-p))
    law = np.zeros(n + extra + 1)
    for hh in range(n + 1):
        if ph[hh] == 0.0:
            continue
        law[hh:hh + extra + 1] += ph[hh] * _binom_pmf_row_np(extra, hh / n, lgam)
    return law


if HAVE_NUMBA:

    @njit(cache=True)
    def _compound_law_jit(n, extra, p):  # pragma: no cover
        lgam = np.empty(max(n, extra) + 1)
        for i in range(lgam.shape[0]):
            lgam[i] = math.lgamma(i + 1.0)
        ph = np.zeros(n + 1)
        if p <= 0.0:
            ph[0] = 1.0
        elif p >= 1.0:
            ph[n] = 1.0
        else:
            for h in range(n + 1):
                logc = lgam[n] - lgam[h] - lgam[n - h]
                ph[h] = math.exp(logc + h * math.log(p)
                                 + (n - h) * math.log1p(-p))
        law = np.zeros(n + extra + 1)
        for h in range(n + 1):
            w = ph[h]
            if w == 0.0:
                continue
            q = h / n
            if q <= 0.0:
                law[h] += w
            elif q >= 1.0:
                law[h + extra] += w
            else:
                lq = math.log(q)
                l1q = math.log1p(-q)
                for j in range(extra + 1):
                    logc = lgam[extra] - lgam[j] - lgam[extra - j]
                    law[h + j] += w * math.exp(logc + j * lq
                                               + (extra - j) * l1q)
        return law

    compound_law = _compound_law_jit
else:
    compound_law = _compound_law_np


IMPLEMENTATION = "numba" if HAVE_NUMBA else "numpy"
