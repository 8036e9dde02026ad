import math
import random

import numpy as np
import pytest
from scipy import stats as scipy_stats

from umlclue.stats import DegenerateInputError, mean_stderr, pearson, spearman, zscore

from oracles import textbook_pearson, textbook_spearman


class TestPearson:
    def test_perfect_linear(self):
        assert pearson([1, 2, 3], [2, 4, 6]).coefficient == 1.0

    def test_perfect_negative(self):
        assert pearson([1, 2, 3], [6, 4, 2]).coefficient == -1.0

    def test_matches_textbook_formula(self):
        rng = random.Random(1)
        x = [rng.random() for _ in range(10)]
        y = [rng.random() for _ in range(10)]
        assert pearson(x, y).coefficient == pytest.approx(
            textbook_pearson(x, y), abs=1e-12
        )

    def test_constant_vector_rejected(self):
        with pytest.raises(DegenerateInputError):
            pearson([1, 1, 1], [1, 2, 3])

    def test_too_short_rejected(self):
        with pytest.raises(DegenerateInputError):
            pearson([1, 2], [3, 4])

    def test_symmetry(self):
        rng = random.Random(2)
        x = [rng.random() for _ in range(8)]
        y = [rng.random() for _ in range(8)]
        assert pearson(x, y).coefficient == pearson(y, x).coefficient

    def test_scale_invariance_and_sign_flip(self):
        rng = random.Random(3)
        x = [rng.random() for _ in range(9)]
        y = [rng.random() for _ in range(9)]
        base = pearson(x, y).coefficient
        scaled = pearson([3.5 * v + 2 for v in x], y).coefficient
        flipped = pearson([-2 * v + 1 for v in x], y).coefficient
        assert scaled == pytest.approx(base, abs=1e-12)
        assert flipped == pytest.approx(-base, abs=1e-12)

    def test_p_value_against_scipy(self):
        rng = random.Random(4)
        for n in (5, 10, 40):
            x = [rng.random() for _ in range(n)]
            y = [rng.random() for _ in range(n)]
            ours = pearson(x, y)
            reference = scipy_stats.pearsonr(x, y)
            assert ours.coefficient == pytest.approx(reference.statistic, abs=1e-12)
            assert ours.p_value == pytest.approx(reference.pvalue, abs=1e-9)
            assert ours.n == n

    def test_p_value_zero_for_perfect(self):
        assert pearson([1, 2, 3, 4], [2, 4, 6, 8]).p_value == 0.0


class TestSpearman:
    def test_monotone_transform_gives_one(self):
        x = [1.0, 2.0, 5.0, 9.0]
        y = [math.exp(v) for v in x]
        assert spearman(x, y).coefficient == 1.0

    def test_reversed_order(self):
        assert spearman([1, 2, 3, 4], [9, 7, 5, 1]).coefficient == -1.0

    def test_tie_handling_average_ranks(self):
        from scipy.stats import rankdata

        assert list(rankdata([1, 2, 2, 3])) == [1.0, 2.5, 2.5, 4.0]
        ours = spearman([1, 2, 2, 3], [1, 2, 3, 4]).coefficient
        assert ours == pytest.approx(textbook_spearman([1, 2, 2, 3], [1, 2, 3, 4]), abs=1e-12)

    def test_matches_textbook_on_random(self):
        rng = random.Random(5)
        for _ in range(20):
            n = rng.randint(3, 15)
            x = [rng.randint(0, 8) for _ in range(n)]
            y = [rng.randint(0, 8) for _ in range(n)]
            if len(set(x)) == 1 or len(set(y)) == 1:
                continue
            assert spearman(x, y).coefficient == pytest.approx(
                textbook_spearman(x, y), abs=1e-12
            )

    def test_invariant_under_monotone_transform(self):
        rng = random.Random(6)
        x = [rng.random() for _ in range(12)]
        y = [rng.random() for _ in range(12)]
        base = spearman(x, y).coefficient
        transformed = spearman([v**3 + v for v in x], y).coefficient
        assert transformed == pytest.approx(base, abs=1e-12)

    def test_p_value_against_scipy(self):
        rng = random.Random(7)
        for n in (8, 20, 50):
            x = [rng.random() for _ in range(n)]
            y = [rng.random() for _ in range(n)]
            ours = spearman(x, y)
            reference = scipy_stats.spearmanr(x, y)
            assert ours.coefficient == pytest.approx(reference.statistic, abs=1e-12)
            assert ours.p_value == pytest.approx(reference.pvalue, abs=1e-9)


class TestZscore:
    def test_simple(self):
        assert list(zscore([1, 2, 3])) == [-1.0, 0.0, 1.0]

    def test_mean_zero_std_one(self):
        rng = random.Random(7)
        values = [rng.random() * 10 for _ in range(50)]
        z = zscore(values)
        assert z.mean() == pytest.approx(0.0, abs=1e-12)
        assert z.std(ddof=1) == pytest.approx(1.0, abs=1e-12)

    def test_affine_invariance(self):
        rng = random.Random(8)
        values = [rng.random() for _ in range(20)]
        base = zscore(values)
        shifted = zscore([4.2 * v + 13 for v in values])
        assert np.allclose(base, shifted, atol=1e-10)

    def test_constant_rejected(self):
        with pytest.raises(DegenerateInputError):
            zscore([2, 2, 2])


class TestMeanStderr:
    def test_constant_values(self):
        assert mean_stderr([0.5, 0.5, 0.5]) == (0.5, 0.0)

    def test_two_values_hand_arithmetic(self):
        # sample std of [0, 1] is sqrt(1/2)/... = 0.7071; stderr = 0.7071/sqrt(2)
        mean, stderr = mean_stderr([0, 1])
        assert mean == 0.5
        assert stderr == pytest.approx(math.sqrt(0.5) / math.sqrt(2), abs=1e-12)

    def test_stderr_shrinks_with_sqrt_n(self):
        # duplicating the sample k times scales the standard error by
        # sqrt((n-1)/(kn-1)), which tends to 1/sqrt(k)
        base = [0.1, 0.9, 0.4, 0.6]
        n, k = len(base), 4
        _, stderr1 = mean_stderr(base)
        _, stderr4 = mean_stderr(base * k)
        assert stderr4 == pytest.approx(stderr1 * math.sqrt((n - 1) / (k * n - 1)),
                                        abs=1e-12)
        assert stderr4 < stderr1 / math.sqrt(k) + 1e-9

    def test_single_value_rejected(self):
        with pytest.raises(DegenerateInputError):
            mean_stderr([1.0])
