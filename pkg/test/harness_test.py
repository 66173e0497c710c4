# pylint: disable=missing-docstring, invalid-name
import json
import math
import os
import tempfile
import unittest

import numpy as np

from frakpoisson.mittag_leffler import DomainError
from frakpoisson.stable_mixture import RngStream, StableParams, sample_nu
from frakpoisson.harness import (
    CheckRow,
    Experiment,
    ExperimentConfig,
    SUITES,
    _random_alpha,
    _random_angle,
    map_blocks,
    ml_rows,
)


class ExperimentConfigTest(unittest.TestCase):
    def test_seed_required(self):
        with self.assertRaises(DomainError):
            ExperimentConfig.load(experiment='norms')

    def test_defaults(self):
        config = ExperimentConfig.load(seed=3)
        self.assertEqual('all', config.experiment)
        self.assertEqual(1.0, config.tolerance_scale)
        self.assertEqual('mixture', config.method)

    def test_file_and_flags(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'experiment.ini')
            with open(path, 'w') as file:
                file.write('[experiment]\nname = norms\nseed = 11\nalpha = 0.4\n'
                           '[sampling]\nsamples = 5000\n[tolerances]\nscale = 2\n')
            config = ExperimentConfig.load(path, alpha=0.7, samples=None)
        self.assertEqual('norms', config.experiment)
        self.assertEqual(11, config.seed)
        self.assertEqual(0.7, config.alpha)
        self.assertEqual(5000, config.samples)
        self.assertEqual(2.0, config.tolerance_scale)

    def test_bad_values(self):
        for kwargs in ({'alpha': 1.5}, {'experiment': 'nope'}, {'samples': 1},
                       {'method': 'fast'}, {'tolerance_scale': 0}, {'mass': -1}):
            with self.assertRaises(DomainError):
                ExperimentConfig.load(seed=1, **kwargs)

    def test_bad_file_value(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'experiment.ini')
            with open(path, 'w') as file:
                file.write('[experiment]\nseed = eleven\n')
            with self.assertRaises(DomainError):
                ExperimentConfig.load(path)

    def test_missing_file(self):
        with self.assertRaises(DomainError):
            ExperimentConfig.load('/nonexistent/experiment.ini', seed=1)


class CheckRowTest(unittest.TestCase):
    def test_kinds(self):
        self.assertTrue(CheckRow('a', 1.0, 1.1, 0.2).passed)
        self.assertFalse(CheckRow('a', 1.0, 1.5, 0.2).passed)
        self.assertTrue(CheckRow('b', 0.5, 1.0, 0.0, kind='at_most').passed)
        self.assertFalse(CheckRow('b', 1.5, 1.0, 0.2, kind='at_most').passed)
        self.assertTrue(CheckRow('c', 0.01, 1e-3, 0.0, kind='at_least').passed)
        self.assertFalse(CheckRow('c', -1e-6, 0.0, 1e-8, kind='at_least').passed)

    def test_complex_row(self):
        row = CheckRow('z', 1 + 1j, 1 + 1.1j, 0.2, stderr=0.05)
        self.assertTrue(row.passed)
        data = row.to_dict()
        self.assertEqual([1.0, 1.0], data['estimate'])
        self.assertEqual(['name', 'kind', 'estimate', 'target', 'budget', 'passed', 'stderr'],
                         list(data))


class MapBlocksTest(unittest.TestCase):
    def test_worker_count_does_not_matter(self):
        p = StableParams(0.5)
        draw = lambda rng, n: sample_nu(p, rng, n)
        single = np.concatenate(map_blocks(draw, RngStream(4, 2), 10_000, 1000, 1))
        pooled = np.concatenate(map_blocks(draw, RngStream(4, 2), 10_000, 1000, 4))
        self.assertEqual(10_000, len(single))
        np.testing.assert_array_equal(single, pooled)

    def test_block_sizes(self):
        sizes = map_blocks(lambda rng, n: n, RngStream(0), 2500, 1000)
        self.assertEqual([1000, 1000, 500], sizes)

    def test_block_streams(self):
        keys = map_blocks(lambda rng, n: rng.key, RngStream(9, 3), 3, 1)
        self.assertEqual([(9, 3, 0), (9, 3, 1), (9, 3, 2)], keys)


class ExperimentTest(unittest.TestCase):
    def test_suites(self):
        self.assertEqual(['oracle', 'bridge', 'moments', 'equivalence', 'cf', 'psd',
                          'correlation', 'norms', 'operators', 'consistency', 'factorization',
                          'all'], list(SUITES))

    def test_norms_alpha_one(self):
        report = Experiment.load(experiment='norms', seed=1, alpha=1.0).call()
        self.assertEqual(20, len(report.rows))
        self.assertTrue(report.passed)

    def test_report_layout(self):
        report = Experiment.load(experiment='bridge', seed=5, alpha=0.5, samples=20_000,
                                 block_size=4096).call()
        self.assertEqual(7, len(report.rows))
        data = json.loads(report.to_json())
        self.assertEqual(['library', 'version', 'experiment', 'config', 'layout', 'checks',
                          'passed', 'environment'], list(data))
        streams = data['layout']['streams']
        self.assertEqual(5, streams[0]['blocks'])
        self.assertNotIn('environment', json.loads(report.canonical()))

    def test_reproducible(self):
        kwargs = dict(experiment='correlation', seed=42, alpha=0.5, samples=20_000,
                      block_size=5000)
        first = Experiment(ExperimentConfig.load(**kwargs), workers=1).call()
        second = Experiment(ExperimentConfig.load(**kwargs), workers=3).call()
        self.assertEqual(first.canonical(), second.canonical())
        self.assertTrue(first.passed, first.to_frame())

    def test_seed_changes_report(self):
        first = Experiment.load(experiment='moments', seed=1, alpha=0.8, samples=5000).call()
        second = Experiment.load(experiment='moments', seed=2, alpha=0.8, samples=5000).call()
        self.assertNotEqual(first.canonical(), second.canonical())

    def test_equivalence(self):
        report = Experiment.load(experiment='equivalence', seed=8, alpha=0.7, mass=2.0,
                                 samples=50_000).call()
        self.assertEqual(1, len(report.rows))
        self.assertTrue(report.passed, report.to_frame())

    def test_operators(self):
        report = Experiment.load(experiment='operators', seed=3, alpha=0.6).call()
        self.assertTrue(report.passed, report.to_frame())

    def test_psd(self):
        report = Experiment.load(experiment='psd', seed=3, alpha=0.6, nfuncs=10,
                                 samples=5).call()
        self.assertTrue(report.passed, report.to_frame())

    def test_factorization(self):
        report = Experiment.load(experiment='factorization', seed=6, samples=100_000).call()
        self.assertEqual(2, len(report.rows))
        self.assertTrue(report.passed, report.to_frame())

    def test_oracle_over_full_alpha_range(self):
        report = Experiment.load(experiment='oracle', seed=4, samples=30).call()
        self.assertTrue(report.passed, report.to_frame())

    def test_psd_over_full_alpha_range(self):
        report = Experiment.load(experiment='psd', seed=4, nfuncs=6, samples=8).call()
        self.assertTrue(report.passed, report.to_frame())

    def test_random_draws(self):
        rng = RngStream(9)
        alphas = [_random_alpha(rng) for _ in range(2000)]
        self.assertTrue(all(0 < a <= 1 for a in alphas))
        self.assertLess(min(alphas), 0.01)
        for alpha in (0.05, 0.3, 0.49):
            for _ in range(200):
                angle = _random_angle(alpha, rng)
                self.assertLessEqual(math.cos(angle), 1e-15)

    def test_tolerance_scale_widens_budgets(self):
        narrow = Experiment.load(experiment='norms', seed=1, alpha=0.7).call()
        wide = Experiment.load(experiment='norms', seed=1, alpha=0.7, tolerance_scale=10).call()
        self.assertEqual(10 * narrow.rows[0].budget, wide.rows[0].budget)


class MLRowsTest(unittest.TestCase):
    def test_values(self):
        rows = ml_rows(1.0, arguments=[1.0])
        np.testing.assert_allclose(np.e, rows[0].estimate, rtol=1e-14)
        self.assertTrue(rows[0].passed)
        rows = ml_rows(0.5, arguments=[-1.0, 1j], derivatives=[(2, 0.0), (1, -1.0)])
        self.assertEqual(4, len(rows))
        self.assertTrue(all(row.passed for row in rows))
        np.testing.assert_allclose(2.0, rows[2].estimate, rtol=1e-13)
