import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ampkit.core import (DiscreteDist, GaussianSpec, SampleSet, SeedStream,
                         CheckResult, VecSampleSet, VerifierReport, as_generator,
                         sample_discrete, sample_gaussian, unwhiten, whiten)


def test_point_mass_samples():
    dist = DiscreteDist.point_mass(3)
    out = sample_discrete(dist, 5, SeedStream(0))
    assert np.array_equal(out.items, [3, 3, 3, 3, 3])


def test_empty_draw():
    dist = DiscreteDist.uniform([0, 1])
    assert len(sample_discrete(dist, 0, SeedStream(0))) == 0
    with pytest.raises(ValueError):
        sample_discrete(dist, -1, SeedStream(0))


def test_uniform_frequencies_clt_band():
    # 3 sigma with sigma = sqrt(0.1 * 0.9 / 1e6)
    dist = DiscreteDist.uniform_range(10)
    out = sample_discrete(dist, 10 ** 6, SeedStream(101))
    freqs = np.bincount(out.items, minlength=10) / 10 ** 6
    assert np.all(np.abs(freqs - 0.1) < 0.001)


def test_alias_path_matches_probabilities():
    # support size 500 forces the alias path; compare against a skewed pmf
    gen = np.random.default_rng(4)
    raw = gen.random(500) ** 2
    probs = raw / raw.sum()
    probs[-1] += 1.0 - probs.sum()
    dist = DiscreteDist(probs, np.arange(500), 500)
    out = sample_discrete(dist, 4 * 10 ** 5, SeedStream(77))
    freqs = np.bincount(out.items, minlength=500) / 4e5
    se = np.sqrt(probs * (1 - probs) / 4e5)
    assert np.all(np.abs(freqs - probs) < 5 * se + 1e-4)


def test_discrete_dist_validation():
    with pytest.raises(ValueError):
        DiscreteDist(np.array([0.5, 0.4]), np.array([0, 1]), 2)  # sums to 0.9
    with pytest.raises(ValueError):
        DiscreteDist(np.array([0.5, 0.5]), np.array([1, 0]), 2)  # not increasing
    with pytest.raises(ValueError):
        DiscreteDist(np.array([0.5, 0.5]), np.array([0, 1]), 1)  # support > k
    with pytest.raises(ValueError):
        DiscreteDist(np.array([1.5, -0.5]), np.array([0, 1]), 2)
    with pytest.raises(ValueError):
        DiscreteDist(np.array([0.5, 0.5]), np.array([-1, 1]), 2)


def test_shape_kind():
    assert DiscreteDist.uniform_range(5).shape_kind() == "uniform"
    comp = DiscreteDist.with_heavy_element(9, 0.75, [0, 1, 2, 3])
    assert comp.shape_kind() == "composite"
    heavy, light, mass = comp.heavy_split()
    assert heavy == 9 and np.array_equal(light, [0, 1, 2, 3])
    assert mass == pytest.approx(0.25)
    irregular = DiscreteDist(np.array([0.5, 0.3, 0.2]), np.arange(3), 3)
    with pytest.raises(ValueError):
        irregular.shape_kind()


def test_gaussian_examples():
    spec = GaussianSpec.standard(8)
    assert spec.is_identity
    assert len(sample_gaussian(spec, 0, SeedStream(0))) == 0
    # per-coordinate mean within 3 sigma = 3 / sqrt(1e5)
    out = sample_gaussian(spec, 10 ** 5, SeedStream(8))
    assert np.all(np.abs(out.items.mean(axis=0)) < 0.01)


def test_gaussian_scalar_variance():
    # d=1, mu=2, L=[3]: sample variance of 1e5 draws concentrates near 9
    spec = GaussianSpec(np.array([2.0]), np.array([[3.0]]))
    out = sample_gaussian(spec, 10 ** 5, SeedStream(9))
    assert abs(out.items.var(ddof=1) - 9.0) < 0.15
    assert abs(out.items.mean() - 2.0) < 0.05


def test_whiten_identity_is_noop():
    spec = GaussianSpec.standard(3)
    x = VecSampleSet(np.arange(6, dtype=float).reshape(2, 3))
    assert whiten(x, spec) is x


def test_whiten_scalar_example():
    spec = GaussianSpec(np.array([0.0]), np.array([[2.0]]))
    out = whiten(VecSampleSet(np.array([[4.0]])), spec)
    assert out.items[0, 0] == pytest.approx(2.0)


def test_whiten_roundtrip_conditioned():
    # random PD covariance with condition number <= 1e4
    gen = np.random.default_rng(15)
    d = 6
    q, _ = np.linalg.qr(gen.standard_normal((d, d)))
    eig = np.geomspace(1.0, 1e4, d)
    spec = GaussianSpec.from_cov(gen.standard_normal(d), (q * eig) @ q.T)
    x = VecSampleSet(gen.standard_normal((100, d)) * 10)
    back = unwhiten(whiten(x, spec), spec)
    assert np.abs(back.items - x.items).max() < 1e-10


def test_whiten_dimension_mismatch():
    with pytest.raises(ValueError):
        whiten(VecSampleSet(np.zeros((2, 3))), GaussianSpec.standard(2))


def test_gaussian_spec_validation():
    with pytest.raises(ValueError):
        GaussianSpec(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]))  # upper tri
    with pytest.raises(ValueError):
        GaussianSpec(np.zeros(2), np.array([[1.0, 0.0], [0.0, -1.0]]))  # diag <= 0


def test_seedstream_reproducible():
    a = SeedStream(123, (4, 5)).generator().standard_normal(10)
    b = SeedStream(123, (4, 5)).generator().standard_normal(10)
    assert np.array_equal(a, b)


def test_seedstream_children_are_independent():
    root = SeedStream(2024)
    x = root.child(0).generator().standard_normal(10 ** 5)
    y = root.child(1).generator().standard_normal(10 ** 5)
    rho = np.corrcoef(x, y)[0, 1]
    assert abs(rho) < 0.01


def test_seedstream_validation():
    with pytest.raises(ValueError):
        SeedStream(-1)
    with pytest.raises(ValueError):
        SeedStream(0, (-3,))
    with pytest.raises(TypeError):
        as_generator("not an rng")


@given(st.integers(0, 2 ** 63), st.lists(st.integers(0, 2 ** 31), max_size=4))
@settings(max_examples=25, deadline=None)
def test_seedstream_child_extends_path(seed, path):
    s = SeedStream(seed, tuple(path))
    assert s.child(7).path == tuple(path) + (7,)


def test_sample_containers_frozen():
    s = SampleSet(np.array([1, 2, 3]))
    with pytest.raises(ValueError):
        s.items[0] = 5
    v = VecSampleSet(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        v.items[0, 0] = 1.0
    with pytest.raises(ValueError):
        VecSampleSet(np.zeros(3))  # needs (n, d)


def test_verifier_report_conjunction():
    good = CheckResult("a", 0.0, 1.0, True)
    bad = CheckResult("b", 2.0, 1.0, False)
    assert VerifierReport.from_tests([good, good]).accepted
    assert not VerifierReport.from_tests([good, bad]).accepted
    with pytest.raises(ValueError):
        VerifierReport("accept", (bad,))
