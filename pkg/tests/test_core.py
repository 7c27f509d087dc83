import itertools
import math
import random

import pytest

from pmllab import (
    Distribution,
    Profile,
    Sample,
    lp_distance,
    profile_of,
    remd_truncated,
    sorted_l1,
    truncate_profile,
    wasserstein1_multiset,
)


def random_distribution(rng, k):
    w = [rng.random() + 1e-3 for _ in range(k)]
    t = sum(w)
    return Distribution([v / t for v in w])


def brute_sorted_l1(p, q):
    """Independent oracle: minimum over all permutations of p, zero-padded."""
    size = max(p.k, q.k)
    a = list(p.probs) + [0.0] * (size - p.k)
    b = list(q.probs) + [0.0] * (size - q.k)
    return min(
        sum(abs(x - y) for x, y in zip(perm, b))
        for perm in itertools.permutations(a)
    )


class TestDistribution:
    def test_renormalizes_small_deviation(self):
        d = Distribution([0.5 + 2e-10, 0.5])
        assert math.fsum(d.probs) == pytest.approx(1.0, abs=1e-15)

    def test_rejects_large_deviation(self):
        with pytest.raises(ValueError):
            Distribution([0.6, 0.6])

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            Distribution([1.1, -0.1])

    def test_immutable(self):
        d = Distribution([1.0])
        with pytest.raises(AttributeError):
            d.probs = (0.5, 0.5)

    def test_k(self):
        assert Distribution([0.25] * 4).k == 4

    def test_min_prob_floor(self):
        Distribution([0.5, 0.5, 0.0], min_prob=0.4)
        with pytest.raises(ValueError):
            Distribution([0.9, 0.1], min_prob=0.2)


class TestSampleAndProfile:
    def test_profile_of_repeated_letters(self):
        # the multiset {a:3, l:2, f:2} has two doubletons and one tripleton
        prof = profile_of(Sample({0: 3, 1: 2, 2: 2}))
        assert prof.dense(7) == (0, 2, 1, 0, 0, 0, 0)
        assert prof.n == 7

    def test_profile_single_symbol(self):
        prof = profile_of(Sample({5: 5}))
        assert dict(prof.prevalences) == {5: 1}

    def test_profile_mixed(self):
        prof = profile_of(Sample({0: 1, 1: 1, 2: 2}))
        assert dict(prof.prevalences) == {1: 2, 2: 1}

    def test_mass_identity_random(self):
        rng = random.Random(7)
        for _ in range(50):
            counts = {s: rng.randint(1, 9) for s in range(rng.randint(1, 12))}
            sample = Sample(counts)
            prof = profile_of(sample)
            assert sum(i * c for i, c in prof.prevalences.items()) == sample.n

    def test_sample_rejects_zero_multiplicity(self):
        with pytest.raises(ValueError):
            Sample({0: 0})

    def test_profile_rejects_inconsistent_n(self):
        with pytest.raises(ValueError):
            Profile({1: 2}, n=3)

    def test_profile_hash_eq(self):
        assert Profile({1: 2, 2: 1}) == Profile({2: 1, 1: 2})
        assert hash(Profile({1: 2})) == hash(Profile({1: 2, 3: 0}))


class TestTruncateProfile:
    def test_prefix(self):
        t = truncate_profile(Profile.from_dense((0, 2, 1)), 2)
        assert t.prevalences == (0, 2)
        assert t.n == 7

    def test_zero_padded(self):
        t = truncate_profile(Profile.from_dense((3,)), 5)
        assert t.prevalences == (3, 0, 0, 0, 0)

    def test_identity_when_t_covers_all(self):
        t = truncate_profile(Profile.from_dense((0, 2, 1)), 3)
        assert t.prevalences == (0, 2, 1)

    def test_rejects_bad_t(self):
        with pytest.raises(ValueError):
            truncate_profile(Profile.from_dense((1,)), 0)


class TestLpDistance:
    def test_identity(self):
        p = Distribution([0.3, 0.7])
        assert lp_distance(p, p, 1) == 0.0

    def test_disjoint_support(self):
        p, q = Distribution([1.0, 0.0]), Distribution([0.0, 1.0])
        assert lp_distance(p, q, 1) == pytest.approx(2.0)
        assert lp_distance(p, q, 2) == pytest.approx(math.sqrt(2))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            lp_distance(Distribution([1.0]), Distribution([0.5, 0.5]), 1)

    def test_bad_order(self):
        p = Distribution([1.0])
        with pytest.raises(ValueError):
            lp_distance(p, p, 3)


class TestSortedL1:
    def test_same_multiset(self):
        assert sorted_l1(Distribution([0.7, 0.3]), Distribution([0.3, 0.7])) == 0.0

    def test_frozen_examples(self):
        assert sorted_l1(Distribution([0.6, 0.4]), Distribution([0.5, 0.5])) == pytest.approx(0.2)
        assert sorted_l1(Distribution([1.0]), Distribution([0.5, 0.5])) == pytest.approx(1.0)

    def test_matches_bruteforce(self):
        rng = random.Random(3)
        for _ in range(30):
            p = random_distribution(rng, rng.randint(1, 4))
            q = random_distribution(rng, rng.randint(1, 4))
            assert sorted_l1(p, q) == pytest.approx(brute_sorted_l1(p, q), abs=1e-12)

    def test_pseudometric(self):
        rng = random.Random(11)
        for _ in range(30):
            k = rng.randint(2, 6)
            p, q, r = (random_distribution(rng, k) for _ in range(3))
            assert sorted_l1(p, q) == pytest.approx(sorted_l1(q, p), abs=1e-12)
            assert sorted_l1(p, r) <= sorted_l1(p, q) + sorted_l1(q, r) + 1e-9
        p = Distribution([0.2, 0.8])
        assert sorted_l1(p, Distribution([0.8, 0.2])) == 0.0
        assert sorted_l1(p, Distribution([0.7, 0.3])) > 0.0

    def test_at_most_plain_l1(self):
        rng = random.Random(13)
        for _ in range(30):
            k = rng.randint(2, 8)
            p, q = random_distribution(rng, k), random_distribution(rng, k)
            assert sorted_l1(p, q) <= lp_distance(p, q, 1) + 1e-12


class TestWasserstein:
    def test_identity(self):
        p = Distribution([0.3, 0.7])
        assert wasserstein1_multiset(p, p) == 0.0

    def test_frozen_example(self):
        assert wasserstein1_multiset(
            Distribution([0.6, 0.4]), Distribution([0.5, 0.5])
        ) == pytest.approx(0.1)

    def test_duality_with_sorted_l1(self):
        rng = random.Random(5)
        for _ in range(50):
            k = rng.randint(2, 12)
            p, q = random_distribution(rng, k), random_distribution(rng, k)
            assert k * wasserstein1_multiset(p, q) == pytest.approx(sorted_l1(p, q), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            wasserstein1_multiset(Distribution([1.0]), Distribution([0.5, 0.5]))


class TestRemdTruncated:
    def test_identity(self):
        p = Distribution([0.4, 0.6])
        for tau in (0.0, 1e-6, 0.5, 1.0):
            assert remd_truncated(p, p, tau) == 0.0

    def test_full_floor_kills_cost(self):
        assert remd_truncated(Distribution([1.0]), Distribution([0.5, 0.5]), 1.0) == 0.0

    def test_halving_example(self):
        got = remd_truncated(Distribution([0.5, 0.5]), Distribution([0.25] * 4), 1e-6)
        assert got == pytest.approx(math.log(2), abs=1e-12)

    def test_non_increasing_in_tau(self):
        rng = random.Random(17)
        for _ in range(20):
            p = random_distribution(rng, rng.randint(2, 8))
            q = random_distribution(rng, rng.randint(2, 8))
            taus = [0.0, 1e-4, 1e-2, 0.1, 0.5, 1.0]
            vals = [remd_truncated(p, q, t) for t in taus]
            for a, b in zip(vals, vals[1:]):
                assert b <= a + 1e-12

    def test_rejects_bad_tau(self):
        p = Distribution([1.0])
        with pytest.raises(ValueError):
            remd_truncated(p, p, 1.5)
