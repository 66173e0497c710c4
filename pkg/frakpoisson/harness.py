"""
Reproducible verification experiments.  An experiment names a suite of
checks, a seed and sampling options; running it produces a report of check
rows, each with an estimate, a target and a budget.

Monte Carlo draws are made in fixed-size blocks, one random stream per block,
and mapped over a thread pool.  Blocks are reduced in order, so a report does
not depend on the number of worker threads.
"""
# pylint: disable=invalid-name, too-few-public-methods, too-many-instance-attributes
import configparser
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np
import pandas as pd

from . import __version__
from .config_algebra import BaseOperator, ConfigFunction, DiscreteBaseSpace, \
    DiscreteConfiguration, DiscreteField, annihilation_alpha, annihilation_lp, \
    creation_alpha, creation_lp, exact_coherent_gram, \
    coherent_gram, i_alpha, i_alpha_inv, inner_product, k_indicator, frac_lp_integral, \
    lp_weight_bruteforce, level_factors, norm_identity_check, sample_multiplicities, \
    second_quantization_alpha, totality_witness
from .constants import BLOCK_SIZE, SIGMA_BUDGET, SIGNIFICANCE, THREADS_ENV
from .fpp_sampler import ConfigurationBatch, IntensityMeasure, StepFunction, Window, \
    analytic_cf, consistency_check, empirical_cf, factorial_moment, psd_check, \
    sample_configurations, sample_count_direct, sample_count_mixture, count_covariance
from .mittag_leffler import DomainError, MLParams, ml_deriv, ml_eval, ml_oracle
from .stable_mixture import RngStream, StableParams, nu_moment, sample_nu, sample_stable, \
    stable_cdf
from .stats import mean_stderr, ks_test, two_sample_chi_square, within


logger = logging.getLogger(__name__)

DEFAULT_MASSES = '0.5,1.0,0.8,0.3,0.6,0.4'
ORACLE_DIGITS = 30
KS_SIGNIFICANCE = 0.01


class ExperimentConfig:
    """Everything that determines an experiment.  Values come from an INI file
    and are overridden by whatever was given on the command line.
    """

    # (section, key, attribute, converter)
    _fields = [
        ('experiment', 'name', 'experiment', str),
        ('experiment', 'seed', 'seed', int),
        ('experiment', 'alpha', 'alpha', float),
        ('experiment', 'mass', 'mass', float),
        ('experiment', 'nfuncs', 'nfuncs', int),
        ('sampling', 'samples', 'samples', int),
        ('sampling', 'method', 'method', str),
        ('sampling', 'block_size', 'block_size', int),
        ('window', 'bounds', 'window', str),
        ('base', 'masses', 'masses', str),
        ('tolerances', 'scale', 'tolerance_scale', float),
        ('output', 'out', 'out', str),
    ]

    _defaults = {
        'experiment': 'all',
        'seed': None,
        'alpha': None,
        'mass': None,
        'nfuncs': 20,
        'samples': None,
        'method': 'mixture',
        'block_size': BLOCK_SIZE,
        'window': None,
        'masses': DEFAULT_MASSES,
        'tolerance_scale': 1.0,
        'out': None,
    }

    @classmethod
    def read(cls, path):
        """Values found in the file at path, keyed by attribute name."""
        parser = configparser.ConfigParser()
        if not parser.read(path):
            raise DomainError('cannot read config file {}'.format(path))
        values = {}
        for section, key, attribute, convert in cls._fields:
            if parser.has_option(section, key):
                raw = parser.get(section, key)
                try:
                    values[attribute] = convert(raw)
                except ValueError as err:
                    raise DomainError('bad value for [{}] {}: {!r}'.format(
                        section, key, raw)) from err
        return values

    @classmethod
    def load(cls, path=None, **overrides):
        """Factory method: defaults, then the file, then the overrides that
        are not None.
        """
        values = dict(cls._defaults)
        if path:
            values.update(cls.read(path))
        values.update({k: v for k, v in overrides.items() if k in values and v is not None})
        return cls(**values)

    def __init__(self, **values):
        for key, default in self._defaults.items():
            setattr(self, key, values.get(key, default))
        if self.seed is None:
            raise DomainError('a seed is required (--seed or [experiment] seed)')
        if self.seed < 0:
            raise DomainError('seed must be non-negative: {}'.format(self.seed))
        if self.experiment not in SUITES:
            raise DomainError('unknown experiment {!r}; expected one of {}'.format(
                self.experiment, ', '.join(SUITES)))
        if self.alpha is not None:
            MLParams(self.alpha)
        if self.mass is not None and self.mass < 0:
            raise DomainError('mass must be non-negative: {}'.format(self.mass))
        if self.samples is not None and self.samples < 2:
            raise DomainError('need at least two samples: {}'.format(self.samples))
        if self.method not in ('direct', 'mixture'):
            raise DomainError('unknown method {!r}'.format(self.method))
        if self.tolerance_scale <= 0:
            raise DomainError('tolerance scale must be positive: {}'.format(
                self.tolerance_scale))
        if self.block_size < 1:
            raise DomainError('block size must be positive: {}'.format(self.block_size))

    def alphas(self, defaults):
        return [self.alpha] if self.alpha is not None else list(defaults)

    def samples_or(self, default):
        return self.samples if self.samples is not None else default

    def base(self):
        return DiscreteBaseSpace.load(masses=self.masses)

    def to_dict(self):
        return {key: getattr(self, key) for key in self._defaults if key != 'out'}


def _number(value):
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if value is None:
        return None
    return float(value)


class CheckRow:
    """One verified quantity.  kind says how the budget is applied:
    'equal' for |estimate - target| <= budget, 'at_most' for
    estimate <= target + budget and 'at_least' for estimate >= target - budget.
    """

    def __init__(self, name, estimate, target, budget, kind='equal', **extra):
        self.name = name
        self.estimate = estimate
        self.target = target
        self.budget = float(budget)
        self.kind = kind
        self.extra = extra

    @property
    def passed(self):
        if self.kind == 'equal':
            return within(self.estimate, self.target, self.budget)
        if self.kind == 'at_most':
            return bool(self.estimate <= self.target + self.budget)
        if self.kind == 'at_least':
            return bool(self.estimate >= self.target - self.budget)
        raise DomainError('unknown check kind {!r}'.format(self.kind))

    def to_dict(self):
        row = {
            'name': self.name,
            'kind': self.kind,
            'estimate': _number(self.estimate),
            'target': _number(self.target),
            'budget': self.budget,
            'passed': self.passed,
        }
        row.update({k: _number(v) for k, v in sorted(self.extra.items())})
        return row


class ExperimentReport:
    """The outcome of an experiment.  Everything outside the 'environment'
    section is a function of the configuration alone.
    """

    def __init__(self, config, rows, streams, environment):
        self.config = config
        self.rows = list(rows)
        self.streams = streams
        self.environment = environment

    @property
    def passed(self):
        return all(row.passed for row in self.rows)

    def to_dict(self):
        return {
            'library': 'frakpoisson',
            'version': __version__,
            'experiment': self.config.experiment,
            'config': self.config.to_dict(),
            'layout': {'block_size': self.config.block_size, 'streams': self.streams},
            'checks': [row.to_dict() for row in self.rows],
            'passed': self.passed,
            'environment': self.environment,
        }

    def canonical(self):
        """JSON without the environment section, for reproducibility checks."""
        data = self.to_dict()
        del data['environment']
        return json.dumps(data, indent=2)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_frame(self):
        return pd.DataFrame([row.to_dict() for row in self.rows],
                            columns=['name', 'kind', 'estimate', 'target', 'budget', 'passed'])

    def write(self, path):
        with open(path, 'w') as file:
            file.write(self.to_json() + '\n')


def worker_count():
    """Worker threads allowed by the environment, defaulting to the CPU count."""
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError as err:
            raise DomainError('{} must be an integer: {!r}'.format(THREADS_ENV, value)) from err
    return os.cpu_count() or 1


def map_blocks(func, rng, samples, block_size=BLOCK_SIZE, workers=1):
    """Call func(stream, size) on consecutive blocks of `samples` draws, block b
    drawing from rng.child(b), and return the results in block order.
    """
    sizes = [min(block_size, samples - start) for start in range(0, samples, block_size)]
    streams = [rng.child(i) for i in range(len(sizes))]
    if workers == 1 or len(sizes) <= 1:
        return [func(s, n) for s, n in zip(streams, sizes)]
    with ThreadPoolExecutor(max_workers=min(workers, len(sizes))) as pool:
        return list(pool.map(func, streams, sizes))


class Run:
    """State shared by the checks of one experiment: configuration, worker
    pool size and the record of which streams were used.
    """

    def __init__(self, config, workers=None):
        self.config = config
        self.workers = workers or worker_count()
        self.scale = config.tolerance_scale
        self.sigmas = SIGMA_BUDGET * config.tolerance_scale
        self.streams = []

    def stream(self, suite_index, *path):
        return RngStream(self.config.seed, suite_index, path)

    def record(self, name, rng, blocks=1):
        self.streams.append({'check': name, 'stream': list(rng.key), 'blocks': blocks})
        logger.info('%s: stream %s, %s blocks', name, rng.key, blocks)

    def draw(self, name, rng, samples, func):
        block = self.config.block_size
        self.record(name, rng, -(-samples // block))
        return map_blocks(func, rng, samples, block, self.workers)

    def draw_array(self, name, rng, samples, func):
        return np.concatenate(self.draw(name, rng, samples, func))

    def sigma_row(self, name, estimate, stderr, target, floor=1e-12):
        budget = max(self.sigmas * stderr, floor * max(abs(target), 1.0))
        return CheckRow(name, estimate, target, budget, stderr=stderr)


def _fmt(value):
    if isinstance(value, complex):
        return '{:g}{:+g}i'.format(value.real, value.imag)
    return '{:g}'.format(value)


def _random_alpha(rng):
    """Uniform on (0, 1]."""
    return 1.0 - float(rng.random())


def _random_angle(alpha, rng):
    """Any direction for alpha >= 1/2; the closed left half-plane otherwise,
    since E_a grows like exp(|z|^(1/a)) along the positive axis.
    """
    if alpha >= 0.5:
        return rng.uniform(0.0, 2 * math.pi)
    return rng.uniform(0.5 * math.pi, 1.5 * math.pi)


def oracle_suite(run, index):
    """Mittag-Leffler values and derivatives against certified enclosures."""
    rng = run.stream(index)
    cases = run.config.samples_or(500)
    rows = []
    worst = 0.0
    failures = []
    for case in range(cases):
        alpha = run.config.alpha or _random_alpha(rng)
        ml = MLParams(alpha)
        kind = int(rng.random() * 3)
        if kind == 0:
            z, order = -float(rng.uniform(0.0, 5.0)), 0
            value = ml_eval(ml, z)
        elif kind == 1:
            radius, angle = rng.uniform(0.0, 3.0), _random_angle(alpha, rng)
            z, order = complex(radius * math.cos(angle), radius * math.sin(angle)), 0
            value = ml_eval(ml, z)
        else:
            z, order = -float(rng.uniform(0.0, 5.0)), int(1 + rng.random() * 5)
            value = ml_deriv(ml, order, z)
        enclosure = ml_oracle(alpha, z, ORACLE_DIGITS, order=order)
        widen = 1e-12 * run.scale
        if not enclosure.contains(value, widen):
            failures.append('E_{:.4f}^({})({})'.format(alpha, order, _fmt(z)))
        center = enclosure.value
        worst = max(worst, abs(value - center) / max(abs(center), 1e-300))
        if case < 10 or not enclosure.contains(value, widen):
            rows.append(CheckRow('E_{:.4f}^({})({})'.format(alpha, order, _fmt(z)), value, center,
                                 float(enclosure.radius) + widen * abs(center)))
    rows.append(CheckRow('oracle cases outside enclosure ({} cases)'.format(cases),
                         len(failures), 0, 0, kind='at_most'))
    rows.append(CheckRow('largest relative deviation from oracle', worst, 0.0, 1e-12 * run.scale,
                         kind='at_most'))
    return rows


BRIDGE_ARGUMENTS = [0.5, 1.0, 2.0, 1 + 1j, 2j, 0.5 + 0.5j]


def bridge_suite(run, index):
    """E[exp(-z tau)] for tau from the mixing law against E_a(-z), and the
    stable sampler against the quadrature CDF.
    """
    rows = []
    samples = run.config.samples_or(1_000_000)
    for j, alpha in enumerate(run.config.alphas([0.3, 0.5, 0.8])):
        stable = StableParams(alpha)
        ml = MLParams(alpha)
        tau = run.draw_array('bridge alpha={}'.format(alpha), run.stream(index, j), samples,
                             lambda rng, n, p=stable: sample_nu(p, rng, n))
        for z in BRIDGE_ARGUMENTS:
            estimate, stderr = mean_stderr(np.exp(-complex(z) * tau))
            target = ml_eval(ml, -complex(z))
            rows.append(run.sigma_row('E[exp(-{} tau)] alpha={}'.format(_fmt(z), alpha),
                                      complex(estimate), stderr, target))
        if stable.degenerate:
            continue
        draws = run.draw_array('stable alpha={}'.format(alpha), run.stream(index, j, 1),
                               min(samples, 100_000),
                               lambda rng, n, p=stable: sample_stable(p, rng, n))
        statistic, pvalue = ks_test(draws, lambda x, p=stable: stable_cdf(p, x))
        rows.append(CheckRow('KS stable sampler vs CDF alpha={}'.format(alpha), pvalue,
                             KS_SIGNIFICANCE, 0.0, kind='at_least', statistic=statistic))
    return rows


def moments_suite(run, index):
    """Moments of the mixing law and factorial moments of window counts."""
    rows = []
    samples = run.config.samples_or(1_000_000)
    mass = run.config.mass if run.config.mass is not None else 1.0
    for j, alpha in enumerate(run.config.alphas([0.3, 0.5, 0.8])):
        stable = StableParams(alpha)
        tau = run.draw_array('moments alpha={}'.format(alpha), run.stream(index, j), samples,
                             lambda rng, n, p=stable: sample_nu(p, rng, n))
        for n in range(1, 5):
            estimate, stderr = mean_stderr(tau ** n)
            rows.append(run.sigma_row('E[tau^{}] alpha={}'.format(n, alpha), estimate, stderr,
                                      nu_moment(alpha, n)))
        ml = MLParams(alpha)
        counts = run.draw_array('counts alpha={}'.format(alpha), run.stream(index, j, 1),
                                samples,
                                lambda rng, n, p=ml: sample_count_direct(p, mass, rng, n))
        for k in (1, 2):
            estimate, stderr = factorial_moment(counts, k)
            rows.append(run.sigma_row('E[N_({})] alpha={} mass={}'.format(k, alpha, mass),
                                      estimate, stderr, nu_moment(alpha, k) * mass ** k))
    return rows


def _chi_square_row(name, test):
    return CheckRow(name, test.pvalue, SIGNIFICANCE, 0.0, kind='at_least',
                    statistic=test.statistic, dof=test.dof)


def equivalence_suite(run, index):
    """Direct against mixture count samplers."""
    rows = []
    samples = run.config.samples_or(1_000_000)
    masses = [run.config.mass] if run.config.mass is not None else [0.5, 2.0, 5.0]
    pairs = [(a, m) for a in run.config.alphas([0.4, 0.7, 1.0]) for m in masses]
    for j, (alpha, mass) in enumerate(pairs):
        ml = MLParams(alpha)
        stable = StableParams(alpha)
        direct = run.draw_array('direct alpha={} mass={}'.format(alpha, mass),
                                run.stream(index, j, 0), samples,
                                lambda rng, n, p=ml, m=mass: sample_count_direct(p, m, rng, n))
        mixture = run.draw_array('mixture alpha={} mass={}'.format(alpha, mass),
                                 run.stream(index, j, 1), samples,
                                 lambda rng, n, p=stable, m=mass:
                                 sample_count_mixture(p, m, rng, n))
        rows.append(_chi_square_row('direct vs mixture alpha={} mass={}'.format(alpha, mass),
                                    two_sample_chi_square(direct, mixture)))
    return rows


def _window(run, default):
    return Window.parse(run.config.window) if run.config.window else default


def cf_suite(run, index):
    """Empirical against analytic characteristic functionals of step functions."""
    rows = []
    samples = run.config.samples_or(100_000)
    window = _window(run, Window.unit(2))
    mass = run.config.mass if run.config.mass is not None else 2.0
    mu = IntensityMeasure.constant(mass / window.volume)
    phis = [StepFunction.random(window, 3, run.stream(index, 0, k)) for k in range(10)]
    for j, alpha in enumerate(run.config.alphas([0.5, 0.8])):
        ml = MLParams(alpha)
        batches = run.draw('configurations alpha={}'.format(alpha), run.stream(index, j + 1),
                           samples,
                           lambda rng, n, p=ml: sample_configurations(
                               p, window, mu, rng, n, run.config.method))
        batch = ConfigurationBatch.concatenate(batches)
        for k, phi in enumerate(phis):
            estimate = empirical_cf(batch, phi)
            rows.append(run.sigma_row('CF step function {} alpha={}'.format(k, alpha),
                                      estimate.value, estimate.stderr, analytic_cf(ml, phi, mu)))
    return rows


def psd_suite(run, index):
    """Smallest eigenvalues of characteristic-functional Gram matrices."""
    rng = run.stream(index)
    matrices = run.config.samples_or(100)
    window = _window(run, Window.unit(1))
    mass = run.config.mass if run.config.mass is not None else 1.0
    mu = IntensityMeasure.constant(mass / window.volume)
    rows = []
    smallest = math.inf
    for _ in range(matrices):
        alpha = run.config.alpha or _random_alpha(rng)
        size = 1 + int(rng.random() * run.config.nfuncs)
        phis = [StepFunction.random(window, 8, rng) for _ in range(size)]
        smallest = min(smallest, psd_check(MLParams(alpha), phis, mu))
    rows.append(CheckRow('smallest Gram eigenvalue over {} matrices'.format(matrices), smallest,
                         0.0, 1e-8 * run.scale, kind='at_least'))
    return rows


def _random_sets(base, rng, count):
    sets = [[base.empty()], [base.point(0)], [base.point(0).add(1)]]
    while len(sets) < count:
        size = 1 + int(rng.random() * 3)
        members = set()
        for _ in range(size):
            n = 1 + int(rng.random() * 3)
            indices = [int(rng.random() * base.size) for _ in range(n)]
            members.add(DiscreteConfiguration.from_indices(indices, base.size))
        sets.append(sorted(members))
    return sets


def correlation_suite(run, index):
    """Monte Carlo K 1_A against the fractional Lebesgue-Poisson measure of A."""
    rows = []
    samples = run.config.samples_or(1_000_000)
    base = run.config.base()
    sets = _random_sets(base, run.stream(index, 0), 10)
    for j, alpha in enumerate(run.config.alphas([0.5, 1.0])):
        ml = MLParams(alpha)
        multiplicities = np.vstack(run.draw(
            'multiplicities alpha={}'.format(alpha), run.stream(index, j + 1), samples,
            lambda rng, n, p=ml: sample_multiplicities(p, base, rng, n, run.config.method)))
        factors = level_factors(alpha, max(eta.size for A in sets for eta in A))
        for A in sets:
            label = ' '.join(repr(eta) for eta in A)
            n_cap = max(eta.size for eta in A)
            exact = frac_lp_integral(ml, base, ConfigFunction.indicator(base, A, n_cap),
                                     n_cap).real
            bruteforce = sum(factors[eta.size] * lp_weight_bruteforce(base, eta) for eta in A)
            estimate, stderr = mean_stderr(k_indicator(A, multiplicities))
            rows.append(run.sigma_row('E[K1_A] A={} alpha={}'.format(label, alpha), estimate,
                                      stderr, exact))
            rows.append(CheckRow('exact side by tuples A={} alpha={}'.format(label, alpha),
                                 bruteforce, exact, 1e-12 * max(abs(exact), 1.0)))
    return rows


def norms_suite(run, index):
    """Enumerated norms of coherent states against E_a of the field norm."""
    rng = run.stream(index)
    base = DiscreteBaseSpace(run.config.base().masses[:4])
    rows = []
    for alpha in run.config.alphas([0.4, 0.7, 1.0]):
        ml = MLParams(alpha)
        for k in range(20):
            f = DiscreteField.random(base, rng)
            target = float(rng.uniform(0.1, 1.0))
            f = DiscreteField(f.values * math.sqrt(target / base.norm_p(f, 2)))
            result = norm_identity_check(ml, base, f, 2)
            rows.append(CheckRow('norm identity field {} alpha={}'.format(k, alpha), result.lhs,
                                 result.rhs, 1e-9 * run.scale, tail=result.tail))
    return rows


def operators_suite(run, index):
    """Operator identities on all configurations of small base spaces."""
    rng = run.stream(index)
    base = DiscreteBaseSpace(run.config.base().masses[:5])
    small = DiscreteBaseSpace(run.config.base().masses[:4])
    rows = []
    for alpha in run.config.alphas([0.5, 1.0]):
        ml = MLParams(alpha)
        ccr = ancr = quantization = unitarity = adjoint = 0.0
        for _ in range(5):
            G = ConfigFunction.random(base, rng, 3)
            phi = DiscreteField.random(base, rng)
            psi = DiscreteField.random(base, rng)
            left = annihilation_lp(base, phi, creation_lp(base, psi, G))
            right = creation_lp(base, psi, annihilation_lp(base, phi, G))
            ccr = max(ccr, (left - right).max_abs_diff(base.pairing(psi, phi) * G))
            lifted = i_alpha(ml, G)
            image = i_alpha_inv(ml, annihilation_lp(base, phi, creation_lp(base, psi, lifted)) -
                                creation_lp(base, psi, annihilation_lp(base, phi, lifted)))
            ccr = max(ccr, image.max_abs_diff(base.pairing(psi, phi) * G))
        for _ in range(100):
            G = ConfigFunction.random(small, rng, 3)
            H = ConfigFunction.random(small, rng, 4)
            phi = DiscreteField.random(small, rng)
            for op in (annihilation_alpha, creation_alpha):
                formula = op(ml, small, phi, G)
                conjugated = op(ml, small, phi, G, route='conjugation')
                ancr = max(ancr, formula.max_abs_diff(conjugated))
            unitarity = max(unitarity, abs(
                inner_product(small, i_alpha(ml, G), i_alpha(ml, H)) -
                inner_product(small, G, H, ml)))
            adjoint = max(adjoint, abs(
                inner_product(small, creation_alpha(ml, small, phi, G), H, ml) -
                inner_product(small, G, annihilation_alpha(ml, small, phi.conj(), H), ml)))
            A = BaseOperator.random(small.size, rng)
            f = DiscreteField.random(small, rng, scale=0.5)
            eta = DiscreteConfiguration.from_indices(
                [int(rng.random() * small.size) for _ in range(int(rng.random() * 5))],
                small.size)
            quantization = max(quantization, abs(
                second_quantization_alpha(ml, small, A, f, eta) -
                second_quantization_alpha(ml, small, A, f, eta, route='conjugation')))
        fields = [DiscreteField.random(small, rng, scale=0.25) for _ in range(5)]
        gram = coherent_gram(small, fields, 8, ml)
        exact = exact_coherent_gram(small, fields)
        tol = 1e-10 * run.scale
        rows.extend([
            CheckRow('CCR lambda-level and conjugated alpha={}'.format(alpha), ccr, 0.0, tol,
                     kind='at_most'),
            CheckRow('annihilation/creation formula vs conjugation alpha={}'.format(alpha), ancr,
                     0.0, 1e-12 * run.scale, kind='at_most'),
            CheckRow('second quantization formula vs conjugation alpha={}'.format(alpha),
                     quantization, 0.0, 1e-12 * run.scale, kind='at_most'),
            CheckRow('I_alpha unitarity alpha={}'.format(alpha), unitarity, 0.0, tol,
                     kind='at_most'),
            CheckRow('creation adjoint to annihilation alpha={}'.format(alpha), adjoint, 0.0, tol,
                     kind='at_most'),
            CheckRow('coherent Gram matrix vs exp(<f, g>) alpha={}'.format(alpha),
                     float(np.abs(gram - exact).max()), 0.0, 1e-3 * run.scale, kind='at_most'),
            CheckRow('coherent states total alpha={}'.format(alpha),
                     totality_witness(ml, small, fields, 8), 1e-12, 0.0, kind='at_least'),
        ])
    return rows


def consistency_suite(run, index):
    """Counts restricted from an outer box against direct counts on the inner box."""
    rows = []
    samples = run.config.samples_or(100_000)
    if run.config.window:
        inner = Window.parse(run.config.window)
        outer = Window(inner.lower, 2 * inner.upper - inner.lower)
    else:
        inner, outer = Window.unit(2), Window([0.0, 0.0], [2.0, 1.0])
    mass = run.config.mass if run.config.mass is not None else 1.0
    mu = IntensityMeasure.constant(mass / inner.volume)
    for j, alpha in enumerate(run.config.alphas([0.5, 1.0])):
        ml = MLParams(alpha)
        for k, window in enumerate((outer, inner)):
            rng = run.stream(index, j, k)
            run.record('consistency alpha={} window={}'.format(alpha, window), rng)
            report = consistency_check(ml, inner, window, mu, samples, rng, run.config.method)
            rows.append(_chi_square_row('restricted vs direct counts {} in {} alpha={}'.format(
                inner, window, alpha), report.test))
    return rows


def factorization_suite(run, index):
    """Covariance of counts in disjoint windows: positive unless alpha = 1.
    For alpha < 1 the estimate is the covariance in units of its standard error.
    """
    rows = []
    samples = run.config.samples_or(1_000_000)
    window = Window([0.0], [2.0])
    first, second = window.split()
    mass = run.config.mass if run.config.mass is not None else 2.0
    mu = IntensityMeasure.constant(mass / window.volume)
    for j, alpha in enumerate(run.config.alphas([0.5, 1.0])):
        ml = MLParams(alpha)
        batch = ConfigurationBatch.concatenate(run.draw(
            'factorization alpha={}'.format(alpha), run.stream(index, j), samples,
            lambda rng, n, p=ml: sample_configurations(p, window, mu, rng, n,
                                                       run.config.method)))
        covariance, stderr = count_covariance(batch, first, second)
        if alpha < 1:
            rows.append(CheckRow('Cov(N_A, N_B) / stderr, disjoint halves alpha={}'.format(alpha),
                                 covariance / stderr, run.sigmas, 0.0, kind='at_least',
                                 covariance=covariance))
        else:
            rows.append(run.sigma_row('Cov(N_A, N_B) disjoint halves alpha={}'.format(alpha),
                                      covariance, stderr, 0.0))
    return rows


SUITES = {
    'oracle':        oracle_suite,
    'bridge':        bridge_suite,
    'moments':       moments_suite,
    'equivalence':   equivalence_suite,
    'cf':            cf_suite,
    'psd':           psd_suite,
    'correlation':   correlation_suite,
    'norms':         norms_suite,
    'operators':     operators_suite,
    'consistency':   consistency_suite,
    'factorization': factorization_suite,
    'all':           None,
}


class Experiment:
    """Runs the suite an ExperimentConfig names."""

    @classmethod
    def load(cls, path=None, **kwargs):
        return cls(ExperimentConfig.load(path, **kwargs))

    def __init__(self, config, workers=None):
        self.config = config
        self.workers = workers

    def suites(self):
        names = [n for n in SUITES if n != 'all']
        if self.config.experiment != 'all':
            names = [self.config.experiment]
        return [(list(SUITES).index(n), n) for n in names]

    def call(self):
        started = time.monotonic()
        run = Run(self.config, self.workers)
        rows = []
        for index, name in self.suites():
            suite_rows = SUITES[name](run, index)
            failed = sum(not row.passed for row in suite_rows)
            logger.info('%s: %s checks, %s failed', name, len(suite_rows), failed)
            rows.extend(suite_rows)
        environment = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'wall_clock_seconds': round(time.monotonic() - started, 3),
            'workers': run.workers,
        }
        return ExperimentReport(self.config, rows, run.streams, environment)


def ml_rows(alpha, arguments=(), derivatives=(), digits=ORACLE_DIGITS):
    """E_a at complex arguments and E_a^(n) at real points, each against the
    oracle enclosure.
    """
    ml = MLParams(alpha)
    rows = []
    for z in arguments:
        value = ml_eval(ml, z)
        enclosure = ml_oracle(alpha, z, digits)
        rows.append(CheckRow('E_{}({})'.format(alpha, _fmt(z)), value, enclosure.value,
                             float(enclosure.radius) + ml.rel_tol * abs(enclosure.value)))
    for n, x in derivatives:
        value = ml_deriv(ml, n, x)
        enclosure = ml_oracle(alpha, x, digits, order=n)
        rows.append(CheckRow('E_{}^({})({})'.format(alpha, n, _fmt(x)), value, enclosure.value,
                             float(enclosure.radius) + ml.rel_tol * abs(enclosure.value)))
    return rows
