import math

import numpy as np
import pytest
from scipy import stats

from ampkit.core import GaussianSpec, SeedStream, VecSampleSet
from ampkit.gaussian_amp import (amplify_decorrelate, amplify_discard_resample,
                                 amplify_naive_superset,
                                 amplify_superset_mixture,
                                 decorrelate_given_noise)
from ampkit.statmath import analytic_output_cov
from ampkit.verifiers import verify_gaussian_mean_distance


def rows_as_set(items):
    return {tuple(row) for row in items}


class TestDecorrelate:
    def test_m_equals_n_is_verbatim(self):
        x = VecSampleSet(np.array([[1.0, 2.0], [3.0, 4.0]]))
        out = amplify_decorrelate(x, 2, GaussianSpec.standard(2), SeedStream(0))
        assert np.array_equal(out.samples.items, x.items)
        assert np.all(out.shift == 0.0)

    def test_hand_arithmetic(self):
        # n=2, m=3, x=[0,2], eps=[1]: mu_hat=1, shift=0.5
        out, shift = decorrelate_given_noise(np.array([[0.0], [2.0]]),
                                             np.array([[1.0]]))
        assert np.allclose(out.ravel(), [-0.5, 1.5, 2.0])
        assert shift[0] == pytest.approx(0.5)

    def test_mean_preserved_exactly(self):
        gen = SeedStream(1).generator()
        spec = GaussianSpec.standard(5)
        for _ in range(50):
            x = VecSampleSet(10.0 * gen.standard_normal((7, 5)))
            out = amplify_decorrelate(x, 12, spec, gen)
            gap = np.abs(out.samples.items.mean(0) - x.items.mean(0)).max()
            assert gap < 1e-10

    def test_diagnostics_reconstruct_output(self):
        gen = SeedStream(2).generator()
        x = VecSampleSet(gen.standard_normal((4, 3)))
        out = amplify_decorrelate(x, 9, GaussianSpec.standard(3), gen)
        rebuilt, shift = decorrelate_given_noise(x.items, out.fresh_noise)
        assert np.array_equal(out.samples.items, rebuilt)
        assert np.array_equal(out.shift, shift)

    def test_moment_sanity_small(self):
        # quick 5-sigma version of the covariance identity; the acceptance
        # suite runs the full-resolution check
        n, m, trials = 5, 7, 20000
        gen = SeedStream(3).generator()
        spec = GaussianSpec.standard(1)
        outs = np.empty((trials, m))
        for t in range(trials):
            x = VecSampleSet(gen.standard_normal((n, 1)))
            outs[t] = amplify_decorrelate(x, m, spec, gen).samples.items[:, 0]
        emp = (outs[:, :, None] * outs[:, None, :]).mean(0)
        target = analytic_output_cov(n, m)
        se = np.sqrt((np.outer(np.diag(target), np.diag(target))
                      + target ** 2) / trials)
        assert np.all(np.abs(emp - target) < 5 * se)

    def test_linear_invariance_exact(self):
        # conjugating by an affine map with the same noise stream gives
        # exactly the identity-frame output
        gen = np.random.default_rng(9)
        d = 4
        lower = np.tril(gen.standard_normal((d, d)) * 0.3) + np.diag(np.full(d, 2.0))
        b = gen.standard_normal(d)
        spec = GaussianSpec(b, lower)
        x = gen.standard_normal((6, d))
        y = x @ lower.T + b
        out_id = amplify_decorrelate(VecSampleSet(x), 9,
                                     GaussianSpec.standard(d), SeedStream(44))
        out_gen = amplify_decorrelate(VecSampleSet(y), 9, spec, SeedStream(44))
        mapped = np.linalg.solve(lower, (out_gen.samples.items - b).T).T
        assert np.allclose(mapped, out_id.samples.items, atol=1e-9)

    def test_validation(self):
        x = VecSampleSet(np.zeros((3, 2)))
        spec = GaussianSpec.standard(2)
        with pytest.raises(ValueError):
            amplify_decorrelate(x, 2, spec, SeedStream(0))  # m < n
        with pytest.raises(ValueError):
            amplify_decorrelate(VecSampleSet(np.zeros((0, 2))), 2, spec,
                                SeedStream(0))


class TestSupersetMixture:
    def test_first_half_verbatim_and_length(self):
        gen = SeedStream(5).generator()
        x = VecSampleSet(gen.standard_normal((36, 2)))
        out = amplify_superset_mixture(x, 2, gen)
        assert len(out) == 38
        assert np.array_equal(out.items[:18], x.items[:18])

    def test_r_zero_preserves_multiset(self):
        gen = SeedStream(6).generator()
        x = VecSampleSet(gen.standard_normal((10, 3)))
        out = amplify_superset_mixture(x, 0, gen)
        assert rows_as_set(out.items) == rows_as_set(x.items)

    def test_fresh_draw_count_mean(self):
        # fresh draws per run ~ Binomial(n/2 + r, 10r/(r + n/2)), mean 10r
        n, r, trials = 720, 10, 10 ** 4
        gen = SeedStream(7).generator()
        w = 10.0 * r / (r + n / 2)
        counts = np.empty(trials)
        for t in range(trials):
            x = VecSampleSet(gen.standard_normal((n, 1)))
            out = amplify_superset_mixture(x, r, gen)
            # fresh rows are the tail rows not among the held-out half
            held = rows_as_set(x.items[n // 2:])
            counts[t] = sum(tuple(row) not in held
                            for row in out.items[n // 2:])
        mean = counts.mean()
        sd = math.sqrt((n / 2 + r) * w * (1 - w))
        assert abs(mean - 10 * r) < 3 * sd / math.sqrt(trials)

    def test_no_exhaustion_at_moderate_r(self):
        # Pr[exhaustion] <= exp(-81 r / 26): never seen at n=1000, r=10.
        # Exhaustion would surface as a tail row equal to x[0] (the fallback),
        # and a held-out sample appearing twice would break without-replacement.
        n, r = 1000, 10
        gen = SeedStream(8).generator()
        for _ in range(10 ** 4):
            x = VecSampleSet(gen.standard_normal((n, 1)))
            out = amplify_superset_mixture(x, r, gen)
            held = rows_as_set(x.items[n // 2:])
            tail = [tuple(row) for row in out.items[n // 2:]]
            used = [row for row in tail if row in held]
            assert len(used) == len(set(used))
            assert tuple(x.items[0]) not in tail

    def test_validation(self):
        gen = SeedStream(0)
        with pytest.raises(ValueError):
            amplify_superset_mixture(VecSampleSet(np.zeros((5, 1))), 0, gen)
        with pytest.raises(ValueError):
            amplify_superset_mixture(VecSampleSet(np.zeros((36, 1))), 3, gen)


class TestNaiveSuperset:
    def test_m_equals_n_is_shuffle(self):
        gen = SeedStream(9).generator()
        x = VecSampleSet(gen.standard_normal((8, 2)))
        out = amplify_naive_superset(x, 8, gen)
        assert rows_as_set(out.items) == rows_as_set(x.items)

    def test_contains_input_as_submultiset(self):
        gen = SeedStream(10).generator()
        for _ in range(1000):
            x = VecSampleSet(gen.standard_normal((6, 2)))
            out = amplify_naive_superset(x, 9, gen)
            assert rows_as_set(x.items) <= rows_as_set(out.items)


class TestDiscardResample:
    def test_outputs_are_all_fresh(self):
        gen = SeedStream(11).generator()
        x = VecSampleSet(gen.standard_normal((5, 3)))
        out = amplify_discard_resample(x, 7, gen)
        assert len(out) == 7
        assert not (rows_as_set(out.items) & rows_as_set(x.items))

    def test_bias_matches_empirical_mean_offset(self):
        # output mean centers on mu_hat, not mu: over many outputs from one
        # input, the bias norm approaches ||mu_hat - mu||
        d, n, m, reps = 10, 8, 40, 4000
        gen = SeedStream(12).generator()
        mu = gen.standard_normal(d)
        x = VecSampleSet(mu + gen.standard_normal((n, d)))
        mu_hat = x.items.mean(0)
        means = np.empty((reps, d))
        for t in range(reps):
            means[t] = amplify_discard_resample(x, m, gen).items.mean(0)
        grand = means.mean(0)
        se = 1.0 / math.sqrt(m * reps)
        assert np.all(np.abs(grand - mu_hat) < 4 * se)
        assert abs(np.linalg.norm(grand - mu) - np.linalg.norm(mu_hat - mu)) < 0.2

    def test_rejection_rates_against_mean_distance(self):
        # at d=100, n=m=50 the output mean statistic is (1/n + 1/m) chi2_d,
        # whose band-exceedance probability is ~0.48, already far above the
        # 1/3 failure budget a valid amplifier is allowed; at d=400 the
        # rejection is near-certain
        gen = SeedStream(13).generator()
        for d, trials, lo, hi in ((100, 4000, 0.40, 0.56), (400, 800, 0.99, 1.0)):
            rejects = 0
            for _ in range(trials):
                mu = d ** 0.25 * gen.standard_normal(d)
                x = VecSampleSet(mu + gen.standard_normal((50, d)))
                out = amplify_discard_resample(x, 50, gen)
                rejects += not verify_gaussian_mean_distance(out, mu).accepted
            rate = rejects / trials
            assert lo <= rate <= hi

    def test_validation(self):
        with pytest.raises(ValueError):
            amplify_discard_resample(VecSampleSet(np.zeros((0, 2))), 3,
                                     SeedStream(0))
        with pytest.raises(ValueError):
            amplify_discard_resample(VecSampleSet(np.zeros((2, 2))), 0,
                                     SeedStream(0))
