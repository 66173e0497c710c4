"""
Fractional Poisson counts and point configurations on bounded boxes, and the
characteristic-functional checks built on them.

A configuration on a window of mass m has N points with
P(N = n) = m^n E_a^(n)(-m) / n!, placed i.i.d. according to the normalized
intensity.  The same law arises by drawing tau from the mixing law and then a
Poisson configuration of intensity tau * mu, so both samplers are provided.
"""
# pylint: disable=invalid-name, too-few-public-methods, too-many-arguments
import logging
import math
from functools import lru_cache

import numpy as np
import pandas as pd

from .constants import COUNT_TAIL, MASS_RTOL, N_MAX, SIGNIFICANCE
from .mittag_leffler import ConvergenceError, DomainError, count_weights, ml_eval
from .stable_mixture import QuadratureError, StableParams, sample_nu
from .stats import covariance_stderr, jackknife_mean, mean_stderr, two_sample_chi_square


logger = logging.getLogger(__name__)

METHODS = ('direct', 'mixture')
# Largest number of density evaluations in a midpoint rule
MAX_CELLS = 2 ** 22
MAX_FUNCTIONS = 50


class RejectionBoundError(RuntimeError):
    """Raised when an intensity density exceeds the supremum it declared."""


class Window:
    """An axis-aligned box lower < x < upper in d dimensions."""

    @classmethod
    def parse(cls, string):
        """Parse 'l1,l2,...:u1,u2,...', e.g. '0,0:1,2'."""
        try:
            lower, upper = string.split(':')
            return cls([float(v) for v in lower.split(',')], [float(v) for v in upper.split(',')])
        except ValueError as err:
            raise DomainError('bad window {!r}: {}'.format(string, err)) from err

    @classmethod
    def unit(cls, dim=1):
        return cls(np.zeros(dim), np.ones(dim))

    def __init__(self, lower, upper):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1 or len(lower) == 0:
            raise DomainError('window bounds must be vectors of one length: {} {}'.format(
                lower, upper))
        if not np.all(lower < upper):
            raise DomainError('window needs lower < upper: {} {}'.format(lower, upper))
        self.lower = lower
        self.upper = upper
        lower.setflags(write=False)
        upper.setflags(write=False)

    @property
    def dim(self):
        return len(self.lower)

    @property
    def volume(self):
        return float(np.prod(self.upper - self.lower))

    def contains(self, points):
        """Boolean mask of the points (rows) lying inside the window."""
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        return np.all((points >= self.lower) & (points < self.upper), axis=1)

    def issubset(self, other):
        return self.dim == other.dim and bool(
            np.all(self.lower >= other.lower) and np.all(self.upper <= other.upper))

    def disjoint(self, other):
        return bool(np.any(self.upper <= other.lower) or np.any(other.upper <= self.lower))

    def split(self, axis=0, at=None):
        """Two windows sharing a face, cut across the given axis."""
        if at is None:
            at = 0.5 * (self.lower[axis] + self.upper[axis])
        upper = self.upper.copy()
        upper[axis] = at
        lower = self.lower.copy()
        lower[axis] = at
        return Window(self.lower, upper), Window(lower, self.upper)

    def grid(self, cells):
        """Partition into cells**dim equal boxes."""
        edges = [np.linspace(l, u, cells + 1) for l, u in zip(self.lower, self.upper)]
        boxes = []
        for index in np.ndindex(*([cells] * self.dim)):
            lower = [edges[d][i] for d, i in enumerate(index)]
            upper = [edges[d][i + 1] for d, i in enumerate(index)]
            boxes.append(Window(lower, upper))
        return boxes

    def hull(self, other):
        return Window(np.minimum(self.lower, other.lower), np.maximum(self.upper, other.upper))

    def uniform(self, rng, count):
        return self.lower + (self.upper - self.lower) * rng.random((count, self.dim))

    def midpoints(self, cells):
        """Midpoints of a regular grid with `cells` cells per axis, and the
        volume of one cell.
        """
        axes = [l + (np.arange(cells) + 0.5) * (u - l) / cells
                for l, u in zip(self.lower, self.upper)]
        mesh = np.meshgrid(*axes, indexing='ij')
        return np.stack([m.ravel() for m in mesh], axis=1), self.volume / cells ** self.dim

    @property
    def signature(self):
        return tuple(self.lower), tuple(self.upper)

    def __eq__(self, other):
        return isinstance(other, Window) and self.signature == other.signature

    def __hash__(self):
        return hash(self.signature)

    def __repr__(self):
        return 'Window({}, {})'.format(list(self.lower), list(self.upper))


def midpoint_integral(func, window, rtol=MASS_RTOL):
    """Integral of a vectorized function over the window by midpoint rules,
    doubling the cells per axis and extrapolating the O(h^2) error away, until
    the relative change drops below rtol.
    """
    cells = 4
    points, cell = window.midpoints(cells)
    coarse = np.sum(func(points)) * cell
    previous = None
    while True:
        cells *= 2
        if cells ** window.dim > MAX_CELLS:
            raise QuadratureError('midpoint rule on {} did not settle to {}'.format(window, rtol))
        points, cell = window.midpoints(cells)
        fine = np.sum(func(points)) * cell
        current = (4 * fine - coarse) / 3
        if fine == coarse:
            return fine
        if previous is not None and abs(current - previous) <= rtol * abs(current):
            return current
        previous, coarse = current, fine


class IntensityMeasure:
    """An intensity with a non-negative density bounded by a declared sup.
    A constant intensity is integrated in closed form and sampled uniformly.
    """

    @classmethod
    def constant(cls, rate):
        if rate < 0:
            raise DomainError('rate must be non-negative: {}'.format(rate))
        return cls(None, rate, rate=rate)

    def __init__(self, density, sup, rate=None):
        self.density = density
        self.sup = float(sup)
        self.rate = rate
        self._masses = {}

    @property
    def is_constant(self):
        return self.rate is not None

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        if self.is_constant:
            return np.full(len(points), float(self.rate))
        values = np.asarray(self.density(points), dtype=float)
        if np.any(values < 0):
            raise DomainError('intensity density is negative somewhere')
        return values

    def total_mass_of(self, window):
        """mu(window)."""
        if self.is_constant:
            return self.rate * window.volume
        if window not in self._masses:
            self._masses[window] = float(midpoint_integral(self, window))
        return self._masses[window]

    def integrate(self, func, window):
        """Integral of func against mu over the window."""
        if self.is_constant:
            return complex(midpoint_integral(func, window)) * self.rate
        return midpoint_integral(lambda x: func(x) * self(x), window)


class Configuration:
    """A finite set of points in a window, as an (n, d) array."""

    def __init__(self, points, window):
        self.points = np.asarray(points, dtype=float).reshape(-1, window.dim)
        self.window = window

    def __len__(self):
        return len(self.points)

    def count_in(self, window):
        return int(window.contains(self.points).sum())

    def restrict(self, window):
        """The part of the configuration inside a sub-window."""
        return Configuration(self.points[window.contains(self.points)], window)

    def pairing(self, phi):
        """<gamma, phi> = sum of phi over the points."""
        if not len(self):
            return 0.0
        return float(np.sum(phi(self.points)))

    def has_duplicates(self):
        return len(np.unique(self.points, axis=0)) < len(self.points)


class ConfigurationBatch:
    """Many configurations on one window stored together: all points in one
    array and, for every point, the index of the configuration it belongs to.
    """

    def __init__(self, points, sample_ids, n_samples, window):
        self.points = np.asarray(points, dtype=float).reshape(-1, window.dim)
        self.sample_ids = np.asarray(sample_ids, dtype=np.int64)
        self.n_samples = int(n_samples)
        self.window = window

    @classmethod
    def concatenate(cls, batches):
        batches = list(batches)
        offsets = np.cumsum([0] + [b.n_samples for b in batches])
        points = np.concatenate([b.points for b in batches])
        ids = np.concatenate([b.sample_ids + o for b, o in zip(batches, offsets)])
        return cls(points, ids, offsets[-1], batches[0].window)

    def __len__(self):
        return self.n_samples

    def __getitem__(self, index):
        return Configuration(self.points[self.sample_ids == index], self.window)

    def __iter__(self):
        order = np.argsort(self.sample_ids, kind='stable')
        bounds = np.searchsorted(self.sample_ids[order], np.arange(self.n_samples + 1))
        for i in range(self.n_samples):
            yield Configuration(self.points[order[bounds[i]:bounds[i + 1]]], self.window)

    def counts(self):
        return np.bincount(self.sample_ids, minlength=self.n_samples)

    def counts_in(self, window):
        mask = window.contains(self.points)
        return np.bincount(self.sample_ids[mask], minlength=self.n_samples)

    def restrict(self, window):
        mask = window.contains(self.points)
        return ConfigurationBatch(self.points[mask], self.sample_ids[mask], self.n_samples, window)

    def pairings(self, phi):
        """<gamma, phi> for every configuration."""
        if not len(self.points):
            return np.zeros(self.n_samples)
        return np.bincount(self.sample_ids, weights=phi(self.points), minlength=self.n_samples)

    def to_frame(self):
        """Points as rows of sample_id, point_index, x1..xd."""
        order = np.argsort(self.sample_ids, kind='stable')
        ids = self.sample_ids[order]
        starts = np.searchsorted(ids, ids)
        frame = pd.DataFrame({'sample_id': ids, 'point_index': np.arange(len(ids)) - starts})
        for d in range(self.window.dim):
            frame['x{}'.format(d + 1)] = self.points[order, d]
        return frame

    def counts_frame(self):
        return pd.DataFrame({'sample_id': np.arange(self.n_samples), 'count': self.counts()})

    def to_csv(self, io):
        self.to_frame().to_csv(io, index=False)


class TestFunction:
    """A real function on points, vanishing outside its support window."""

    __test__ = False

    @classmethod
    def zero(cls, window):
        return cls(lambda x: np.zeros(len(x)), window)

    def __init__(self, func, support):
        self.func = func
        self.support = support

    def __call__(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, self.support.dim)
        values = np.zeros(len(points))
        mask = self.support.contains(points)
        if mask.any():
            values[mask] = self.func(points[mask])
        return values

    def cf_argument(self, mu):
        """The integral of (exp(i phi) - 1) against mu over the support."""
        return complex(mu.integrate(lambda x: np.exp(1j * self(x)) - 1, self.support))

    def __sub__(self, other):
        return TestFunction(lambda x: self(x) - other(x), self.support.hull(other.support))

    def __neg__(self):
        return TestFunction(lambda x: -self(x), self.support)


class StepFunction(TestFunction):
    """A finite sum of constants times indicators of disjoint boxes."""

    __test__ = False

    @classmethod
    def random(cls, window, cells, rng, scale=1.0):
        """Normal values scaled by `scale` on a regular grid of the window."""
        boxes = window.grid(cells)
        return cls(boxes, scale * rng.normal(len(boxes)), window)

    def __init__(self, cells, values, support=None):
        self.cells = list(cells)
        self.values = np.asarray(values, dtype=float)
        if len(self.cells) != len(self.values):
            raise DomainError('one value per cell is required')
        if support is None:
            support = self.cells[0]
            for cell in self.cells[1:]:
                support = support.hull(cell)
        super().__init__(self._evaluate, support)

    def _evaluate(self, points):
        values = np.zeros(len(points))
        for cell, value in zip(self.cells, self.values):
            values[cell.contains(points)] += value
        return values

    def cf_argument(self, mu):
        """sum_k (exp(i c_k) - 1) mu(A_k)."""
        masses = np.array([mu.total_mass_of(cell) for cell in self.cells])
        return complex(np.sum((np.exp(1j * self.values) - 1) * masses))

    def __sub__(self, other):
        if isinstance(other, StepFunction) and other.cells == self.cells:
            return StepFunction(self.cells, self.values - other.values, self.support)
        return super().__sub__(other)

    def __neg__(self):
        return StepFunction(self.cells, -self.values, self.support)


class CFEstimate:
    """A Monte Carlo estimate of a characteristic functional."""

    def __init__(self, value, stderr):
        self.value = complex(value)
        self.stderr = float(stderr)

    def agrees(self, target, sigmas):
        return abs(self.value - target) <= sigmas * self.stderr

    def __repr__(self):
        return 'CFEstimate({:.6f} ± {:.2e})'.format(self.value, self.stderr)


@lru_cache(maxsize=256)
def adaptive_count_weights(ml, mass, tail=COUNT_TAIL):
    """Count weights with n_max doubled until the truncated mass is below tail."""
    n_max = max(16, int(math.ceil(4 * mass)) + 8)
    while True:
        weights = count_weights(ml, mass, n_max)
        if weights.tail_bound < tail:
            logger.debug('count weights for alpha=%s mass=%s truncated at %s', ml.alpha, mass,
                         n_max)
            return weights
        if n_max >= N_MAX:
            raise ConvergenceError('count weights for mass {} need more than {} terms'.format(
                mass, N_MAX))
        n_max = min(2 * n_max, N_MAX)


def sample_count_direct(ml, mass, rng, size=None):
    """Counts drawn by inverting the cumulative count weights."""
    if mass < 0:
        raise DomainError('mass must be non-negative: {}'.format(mass))
    if mass == 0:
        return 0 if size is None else np.zeros(size, dtype=np.int64)
    weights = adaptive_count_weights(ml, float(mass))
    cdf = weights.cdf()
    counts = np.minimum(np.searchsorted(cdf, rng.random(size), side='right'), weights.n_max)
    return int(counts) if size is None else counts.astype(np.int64)


def sample_count_mixture(stable, mass, rng, size=None):
    """Counts drawn as Poisson(tau * mass) with tau from the mixing law."""
    if mass < 0:
        raise DomainError('mass must be non-negative: {}'.format(mass))
    if mass == 0:
        return 0 if size is None else np.zeros(size, dtype=np.int64)
    tau = sample_nu(stable, rng, size)
    counts = rng.poisson(tau * mass)
    return int(counts) if size is None else counts.astype(np.int64)


def sample_counts(ml, mass, rng, size, method='direct'):
    if method == 'direct':
        return sample_count_direct(ml, mass, rng, size)
    if method == 'mixture':
        return sample_count_mixture(StableParams(ml.alpha), mass, rng, size)
    raise DomainError('unknown method {!r}; expected one of {}'.format(method, METHODS))


def place_points(window, mu, rng, count):
    """`count` i.i.d. points with density proportional to mu on the window."""
    if mu.is_constant:
        return window.uniform(rng, count)
    accepted = []
    remaining = count
    while remaining > 0:
        proposals = window.uniform(rng, max(2 * remaining, 64))
        values = mu(proposals)
        if np.any(values > mu.sup * (1 + 1e-12)):
            raise RejectionBoundError('density reached {} above its declared sup {}'.format(
                values.max(), mu.sup))
        keep = proposals[rng.random(len(proposals)) * mu.sup < values][:remaining]
        accepted.append(keep)
        remaining -= len(keep)
    return np.concatenate(accepted) if accepted else np.zeros((0, window.dim))


def sample_configurations(ml, window, mu, rng, n_samples, method='direct'):
    """n_samples independent configurations on the window."""
    mass = mu.total_mass_of(window)
    counts = sample_counts(ml, mass, rng, n_samples, method)
    total = int(counts.sum())
    points = place_points(window, mu, rng, total)
    sample_ids = np.repeat(np.arange(n_samples), counts)
    return ConfigurationBatch(points, sample_ids, n_samples, window)


def sample_configuration(ml, window, mu, rng, method='direct'):
    """A single configuration on the window."""
    return sample_configurations(ml, window, mu, rng, 1, method)[0]


def empirical_cf(samples, phi):
    """Mean of exp(i <gamma, phi>) over the samples with a jackknife error."""
    if isinstance(samples, ConfigurationBatch):
        pairings = samples.pairings(phi)
    else:
        pairings = np.array([c.pairing(phi) for c in samples])
    if len(pairings) < 2:
        raise DomainError('need at least two configurations: {}'.format(len(pairings)))
    value, stderr = jackknife_mean(np.exp(1j * pairings))
    return CFEstimate(value, stderr)


def analytic_cf(ml, phi, mu):
    """E_a(integral of (exp(i phi) - 1) d mu)."""
    argument = phi.cf_argument(mu)
    if argument == 0:
        return complex(1.0)
    return complex(ml_eval(ml, argument))


def poisson_cf(phi, mu):
    """Characteristic functional of the Poisson measure with intensity mu."""
    return complex(np.exp(phi.cf_argument(mu)))


def cf_gram(ml, functions, mu):
    """The Hermitian matrix [C(phi_a - phi_b)]."""
    size = len(functions)
    gram = np.eye(size, dtype=complex)
    for a in range(size):
        for b in range(a + 1, size):
            value = analytic_cf(ml, functions[a] - functions[b], mu)
            gram[a, b] = value
            gram[b, a] = np.conj(value)
    return gram


def psd_check(ml, functions, mu):
    """Smallest eigenvalue of the characteristic-functional Gram matrix."""
    if not 1 <= len(functions) <= MAX_FUNCTIONS:
        raise DomainError('psd_check takes 1 to {} functions: {}'.format(
            MAX_FUNCTIONS, len(functions)))
    return float(np.linalg.eigvalsh(cf_gram(ml, functions, mu)).min())


class ConsistencyReport:
    """Restricted counts from the outer window against direct counts on the
    inner window.
    """

    def __init__(self, inner_mass, restricted, direct, test, significance):
        self.inner_mass = inner_mass
        self.restricted_mean = float(np.mean(restricted))
        self.direct_mean = float(np.mean(direct))
        self.test = test
        self.significance = significance

    @property
    def passed(self):
        return self.test.passed(self.significance)


def consistency_check(ml, inner, outer, mu, n_samples, rng, method='direct',
                      significance=SIGNIFICANCE):
    """Compare the counts in `inner` of configurations sampled on `outer` with
    counts sampled directly on `inner`.
    """
    if not inner.issubset(outer):
        raise DomainError('{} is not contained in {}'.format(inner, outer))
    outer_rng, inner_rng = rng.split(2)
    batch = sample_configurations(ml, outer, mu, outer_rng, n_samples, method)
    restricted = batch.counts_in(inner)
    inner_mass = mu.total_mass_of(inner)
    direct = sample_count_direct(ml, inner_mass, inner_rng, n_samples)
    test = two_sample_chi_square(restricted, direct)
    return ConsistencyReport(inner_mass, restricted, direct, test, significance)


def count_covariance(batch, first, second):
    """Cov(N_first, N_second) across the batch with its standard error."""
    return covariance_stderr(batch.counts_in(first), batch.counts_in(second))


def factorial_moment(counts, k):
    """Mean of N (N - 1) ... (N - k + 1) with its standard error."""
    counts = np.asarray(counts, dtype=float)
    product = np.ones_like(counts)
    for j in range(k):
        product *= counts - j
    return mean_stderr(product)


def sampler_equivalence(ml, mass, rng, n_samples, significance=SIGNIFICANCE):
    """Two-sample chi-square between the direct and the mixture count samplers."""
    direct_rng, mixture_rng = rng.split(2)
    direct = sample_count_direct(ml, mass, direct_rng, n_samples)
    mixture = sample_count_mixture(StableParams(ml.alpha), mass, mixture_rng, n_samples)
    test = two_sample_chi_square(direct, mixture)
    return test, test.passed(significance)
