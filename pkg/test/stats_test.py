# pylint: disable=missing-docstring, invalid-name
import unittest

import numpy as np
import scipy.stats

from frakpoisson.stats import (
    covariance_stderr,
    goodness_of_fit,
    jackknife_mean,
    ks_test,
    mean_stderr,
    two_sample_chi_square,
    within,
)


class MeanTest(unittest.TestCase):
    def test_mean_stderr(self):
        mean, stderr = mean_stderr([1.0, 2.0, 3.0, 4.0])
        self.assertEqual(2.5, mean)
        np.testing.assert_allclose(np.sqrt(5 / 3 / 4), stderr)

    def test_complex(self):
        values = np.array([1 + 1j, 1 - 1j, 3 + 1j, 3 - 1j])
        mean, stderr = mean_stderr(values)
        self.assertEqual(2, mean)
        np.testing.assert_allclose(np.sqrt((4 / 3 + 4 / 3) / 4), stderr)

    def test_too_few(self):
        with self.assertRaises(ValueError):
            mean_stderr([1.0])

    def test_jackknife_agrees_for_means(self):
        values = np.random.default_rng(0).normal(size=500)
        np.testing.assert_allclose(mean_stderr(values)[1], jackknife_mean(values)[1], rtol=1e-10)

    def test_covariance(self):
        a = np.array([1.0, 2.0, 3.0, 4.0])
        covariance, _ = covariance_stderr(a, 2 * a)
        np.testing.assert_allclose(np.cov(a, 2 * a)[0, 1], covariance)

    def test_within(self):
        self.assertTrue(within(1.0, 1.1, 0.2))
        self.assertFalse(within(1 + 1j, 1, 0.5))


class ChiSquareTest(unittest.TestCase):
    def test_same_law(self):
        rng = np.random.default_rng(1)
        result = two_sample_chi_square(rng.poisson(3, 20_000), rng.poisson(3, 20_000))
        self.assertTrue(result.passed(1e-3))
        self.assertGreater(result.dof, 3)

    def test_different_law(self):
        rng = np.random.default_rng(2)
        result = two_sample_chi_square(rng.poisson(3, 20_000), rng.poisson(3.3, 20_000))
        self.assertFalse(result.passed(1e-3))

    def test_single_bin(self):
        result = two_sample_chi_square(np.zeros(10), np.zeros(10))
        self.assertEqual(1.0, result.pvalue)
        self.assertEqual(0, result.dof)

    def test_pooled_expected_counts(self):
        rng = np.random.default_rng(3)
        result = two_sample_chi_square(rng.poisson(1, 200), rng.poisson(1, 200))
        self.assertLessEqual(result.bins, 6)

    def test_goodness_of_fit(self):
        rng = np.random.default_rng(4)
        probabilities = scipy.stats.poisson.pmf(np.arange(30), 2.0)
        self.assertTrue(goodness_of_fit(rng.poisson(2.0, 50_000), probabilities).passed(1e-3))
        self.assertFalse(goodness_of_fit(rng.poisson(2.3, 50_000), probabilities).passed(1e-3))


class KSTest(unittest.TestCase):
    def test_uniform(self):
        sample = np.random.default_rng(5).random(5000)
        statistic, pvalue = ks_test(sample, lambda x: np.clip(x, 0, 1))
        self.assertLess(statistic, 0.03)
        self.assertGreater(pvalue, 1e-3)
