"""
The one-sided alpha-stable law with Laplace transform exp(-t^a) and the
mixing law of tau = S^-a, under which E_a(-z) = E[exp(-z tau)].

Draws use Kanter's representation: with U uniform on (0, pi) and E a unit
exponential, S = (A(U) / E)^((1 - a) / a) where

    A(u) = [sin(a u)^a sin((1 - a) u)^(1 - a) / sin(u)]^(1 / (1 - a)).

The same representation gives the distribution function as a finite integral
over u, which is what the density and CDF routines integrate.
"""
# pylint: disable=invalid-name, too-few-public-methods
import math
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, roots_legendre

from .constants import QUAD_POINTS, QUAD_TOL
from .mittag_leffler import DomainError, zero_derivative
from .stats import mean_stderr


# Points at which the CDF and density are evaluated together
CHUNK = 256


class QuadratureError(RuntimeError):
    """Raised when a quadrature error estimate exceeds its tolerance."""


class StableParams:
    """Index of the one-sided stable law.  alpha = 1 is the point mass at 1."""

    @classmethod
    def load(cls, **kwargs):
        return cls(kwargs['alpha'], quad_points=kwargs.get('quad_points') or QUAD_POINTS)

    def __init__(self, alpha, quad_points=QUAD_POINTS):
        alpha = float(alpha)
        if not 0 < alpha <= 1:
            raise DomainError('alpha must lie in (0, 1]: {}'.format(alpha))
        if int(quad_points) < 2:
            raise DomainError('quad_points must be at least 2: {}'.format(quad_points))
        self.alpha = alpha
        self.quad_points = int(quad_points)

    @property
    def degenerate(self):
        return self.alpha == 1.0

    def __eq__(self, other):
        return isinstance(other, StableParams) and \
            (self.alpha, self.quad_points) == (other.alpha, other.quad_points)

    def __hash__(self):
        return hash((self.alpha, self.quad_points))

    def __repr__(self):
        return 'StableParams(alpha={}, quad_points={})'.format(self.alpha, self.quad_points)


class RngStream:
    """A reproducible random stream keyed by (seed, stream_id).  Streams with
    different ids, or different child paths, are independent; the same key
    reproduces the same draws.
    """

    def __init__(self, seed, stream_id=0, path=()):
        seed, stream_id = int(seed), int(stream_id)
        if seed < 0 or stream_id < 0:
            raise ValueError('seed and stream_id must be non-negative: {}, {}'.format(
                seed, stream_id))
        self.seed = seed
        self.stream_id = stream_id
        self.path = tuple(int(p) for p in path)
        sequence = np.random.SeedSequence(seed, spawn_key=(stream_id,) + self.path)
        self.generator = np.random.Generator(np.random.Philox(sequence))

    def child(self, index):
        """An independent stream derived from this one."""
        return RngStream(self.seed, self.stream_id, self.path + (index,))

    def split(self, count):
        return [self.child(i) for i in range(count)]

    def random(self, size=None):
        return self.generator.random(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def exponential(self, size=None):
        return self.generator.standard_exponential(size)

    def poisson(self, lam, size=None):
        return self.generator.poisson(lam, size)

    def multinomial(self, n, pvals):
        return self.generator.multinomial(n, pvals)

    def normal(self, size=None):
        return self.generator.standard_normal(size)

    @property
    def key(self):
        return (self.seed, self.stream_id) + self.path

    def __repr__(self):
        return 'RngStream(seed={}, stream_id={}, path={})'.format(
            self.seed, self.stream_id, self.path)


def log_kanter(alpha, u):
    """log A(u) for u in (0, pi)."""
    with np.errstate(divide='ignore'):
        numerator = alpha * np.log(np.sin(alpha * u)) + \
            (1 - alpha) * np.log(np.sin((1 - alpha) * u)) - np.log(np.sin(u))
    return numerator / (1 - alpha)


def sample_stable(params, rng, size=None):
    """Draws of S with E[exp(-t S)] = exp(-t^a)."""
    if params.degenerate:
        return 1.0 if size is None else np.ones(size)
    alpha = params.alpha
    u = math.pi * (1.0 - rng.random(size))
    e = rng.exponential(size)
    return np.exp((1 - alpha) / alpha * (log_kanter(alpha, u) - np.log(e)))


def sample_nu(params, rng, size=None):
    """Draws of tau = S^-a = (E / A(U))^(1 - a), the mixing variable of the
    fractional Poisson measure.
    """
    if params.degenerate:
        return 1.0 if size is None else np.ones(size)
    alpha = params.alpha
    u = math.pi * (1.0 - rng.random(size))
    e = rng.exponential(size)
    return np.exp((1 - alpha) * (np.log(e) - log_kanter(alpha, u)))


def nu_moment(alpha, n):
    """n-th moment n! / Gamma(a n + 1) of the mixing law."""
    if n < 0:
        raise DomainError('moment order must be non-negative: {}'.format(n))
    return zero_derivative(alpha, n)


def log_nu_moment(alpha, n):
    return float(gammaln(n + 1) - gammaln(alpha * n + 1))


def _exponent(alpha, s):
    # s^(-a / (1 - a))
    return np.exp(-alpha / (1 - alpha) * np.log(s))


def stable_density(params, s):
    """Density of S at s > 0 by adaptive quadrature of the integral
    representation.
    """
    if s <= 0:
        raise DomainError('density is defined for s > 0: {}'.format(s))
    if params.degenerate:
        raise DomainError('the alpha = 1 law is a point mass and has no density')
    alpha = params.alpha
    y = _exponent(alpha, s)

    def integrand(u):
        log_a = log_kanter(alpha, u)
        with np.errstate(over='ignore'):
            return float(np.exp(log_a - np.exp(log_a) * y))

    value, error = quad(integrand, 0.0, math.pi, epsabs=0.0, epsrel=QUAD_TOL, limit=400)
    if error > QUAD_TOL * abs(value) + 1e-14:
        raise QuadratureError('density quadrature at s={} has error {:.2e}'.format(s, error))
    prefactor = alpha / (1 - alpha) * math.exp(-math.log(s) / (1 - alpha)) / math.pi
    return prefactor * value


@lru_cache(maxsize=16)
def _legendre_rule(points):
    nodes, weights = roots_legendre(points)
    nodes = 0.5 * math.pi * (nodes + 1)
    weights = 0.5 * weights
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _grid(params, s, density):
    alpha = params.alpha
    s = np.atleast_1d(np.asarray(s, dtype=float))
    nodes, weights = _legendre_rule(params.quad_points)
    log_a = log_kanter(alpha, nodes)
    with np.errstate(over='ignore'):
        a = np.exp(log_a)
    result = np.zeros_like(s)
    positive = s > 0
    values = s[positive]
    out = np.empty_like(values)
    for start in range(0, len(values), CHUNK):
        y = _exponent(alpha, values[start:start + CHUNK])
        exponent = -np.outer(y, a)
        if density:
            exponent = exponent + log_a
        out[start:start + CHUNK] = np.exp(exponent) @ weights
    if density:
        out *= alpha / (1 - alpha) * np.exp(-np.log(values) / (1 - alpha))
    result[positive] = out
    return result


def stable_cdf(params, x):
    """P(S <= x), vectorized over x, by fixed Gauss-Legendre quadrature."""
    x = np.asarray(x, dtype=float)
    if params.degenerate:
        return (x >= 1).astype(float)
    result = _grid(params, x, density=False)
    return result if x.ndim else float(result[0])


def stable_density_grid(params, s):
    """The density of S on an array of points, on the same fixed rule."""
    s = np.asarray(s, dtype=float)
    if params.degenerate:
        raise DomainError('the alpha = 1 law is a point mass and has no density')
    result = _grid(params, s, density=True)
    return result if s.ndim else float(result[0])


def stable_laplace(params, t):
    """E[exp(-t S)] = exp(-t^a)."""
    return math.exp(-t ** params.alpha)


def mixture_laplace(params, z, rng, samples):
    """Monte Carlo estimate of E[exp(-z tau)] and its standard error."""
    tau = sample_nu(params, rng, samples)
    return mean_stderr(np.exp(-complex(z) * tau))


def nu_moment_estimate(params, n, rng, samples):
    """Monte Carlo estimate of E[tau^n] and its standard error."""
    tau = sample_nu(params, rng, samples)
    return mean_stderr(tau ** n)
