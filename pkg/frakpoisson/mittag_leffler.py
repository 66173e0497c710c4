"""
The one-parameter Mittag-Leffler function E_a(z) = sum z^k / Gamma(a k + 1),
its derivatives on the non-positive axis, and the fractional Poisson count
weights built from them.

The Taylor series is summed in multiprecision arithmetic.  Before summing,
the magnitude of every term is computed in double precision in log space,
which fixes both the number of terms that can be needed and the working
precision that keeps cancellation on the negative axis harmless.

For small a, or far out on the negative axis, the series needs more terms
or digits than is sensible.  There, in the sector |arg z| > a pi, E_a and its
derivatives come from an integral over the positive axis instead.
"""
# pylint: disable=invalid-name, too-few-public-methods, too-many-arguments
import cmath
import logging
import math
import threading
from contextlib import contextmanager
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import gammaln, logsumexp

from .constants import REL_TOL, MAX_TERMS, Z_MAX, N_MAX


logger = logging.getLogger(__name__)

LN2 = math.log(2)
LN10 = math.log(10)
# Upper limit on the working precision, in decimal digits
MAX_DIGITS = 4000
ATTEMPTS = 4
# Digits the series may cancel away before the integral takes over
MAX_LOST_DIGITS = 40
# Distance in argument kept from the edge of the integral's sector
ARG_MARGIN = 0.05 * math.pi
ROUTES = ('auto', 'series', 'integral')
NORMALIZATION_TOL = 1e-10
ORACLE_TERMS = 5000
ORACLE_LOST_DIGITS = 120


class DomainError(ValueError):
    """Raised when an argument lies outside the domain a routine supports."""


class ConvergenceError(RuntimeError):
    """Sentinel exception raised when a series cannot be summed to the
    requested accuracy within the allowed number of terms.
    """


class EnclosureError(RuntimeError):
    """Raised when the oracle cannot certify an enclosure of the requested
    width.
    """


class MLParams:
    """The order alpha of the Mittag-Leffler function together with the knobs
    that control its evaluation.
    """

    @classmethod
    def load(cls, **kwargs):
        """Factory method that picks the relevant options out of a larger set."""
        return cls(
            kwargs['alpha'],
            rel_tol=kwargs.get('rel_tol') or REL_TOL,
            max_terms=kwargs.get('max_terms') or MAX_TERMS,
        )

    def __init__(self, alpha, rel_tol=REL_TOL, max_terms=MAX_TERMS):
        alpha = float(alpha)
        if not 0 < alpha <= 1:
            raise DomainError('alpha must lie in (0, 1]: {}'.format(alpha))
        if not 0 < rel_tol < 1e-6:
            raise DomainError('rel_tol must lie in (0, 1e-6): {}'.format(rel_tol))
        if int(max_terms) < 2:
            raise DomainError('max_terms must be at least 2: {}'.format(max_terms))
        self.alpha = alpha
        self.rel_tol = float(rel_tol)
        self.max_terms = int(max_terms)

    @property
    def signature(self):
        return self.alpha, self.rel_tol, self.max_terms

    def __eq__(self, other):
        return isinstance(other, MLParams) and self.signature == other.signature

    def __hash__(self):
        return hash(self.signature)

    def __repr__(self):
        return 'MLParams(alpha={}, rel_tol={}, max_terms={})'.format(*self.signature)


class CountWeights:
    """Probabilities w_n = mass^n E_a^(n)(-mass) / n! of n points in a window of
    the given mass, truncated at len(weights) - 1.
    """

    def __init__(self, alpha, mass, weights, tail_bound):
        self.alpha = alpha
        self.mass = mass
        self.weights = np.asarray(weights, dtype=float)
        self.tail_bound = tail_bound

    @property
    def n_max(self):
        return len(self.weights) - 1

    def cdf(self):
        """Cumulative sums of the weights."""
        return np.cumsum(self.weights)

    def total(self):
        return float(self.weights.sum())

    def __repr__(self):
        return 'CountWeights(alpha={}, mass={}, n_max={}, tail_bound={:.2e})'.format(
            self.alpha, self.mass, self.n_max, self.tail_bound)


class Enclosure:
    """A ball [center - radius, center + radius] in the real line or the
    complex plane.  The center is kept at the precision it was computed at.
    """

    def __init__(self, center, radius, digits):
        self.center = center
        self.radius = radius
        self.digits = digits

    @property
    def width(self):
        return 2 * float(self.radius)

    @property
    def value(self):
        """The center rounded to a Python float or complex."""
        if hasattr(self.center, '_mpc_'):
            return complex(self.center)
        return float(self.center)

    def contains(self, value, rel_widen=0.0):
        """Whether the value lies inside the ball widened by rel_widen relative
        to the magnitude of its center.
        """
        with _precision(self.digits + 5) as ctx:
            center = ctx.convert(self.center)
            distance = abs(ctx.convert(value) - center)
            return bool(distance <= ctx.convert(self.radius) + rel_widen * abs(center))

    def __repr__(self):
        return 'Enclosure({} ± {})'.format(
            mpmath.nstr(self.center, self.digits), mpmath.nstr(self.radius, 3))


_local = threading.local()


def _context():
    ctx = getattr(_local, 'ctx', None)
    if ctx is None:
        ctx = _local.ctx = mpmath.MPContext()
    return ctx


@contextmanager
def _precision(digits):
    ctx = _context()
    saved = ctx.prec
    ctx.dps = digits
    try:
        yield ctx
    finally:
        ctx.prec = saved


def zero_derivative(alpha, n):
    """E_a^(n)(0) = n! / Gamma(a n + 1), computed in log space."""
    return math.exp(gammaln(n + 1) - gammaln(alpha * n + 1))


class _Plan:
    """Double-precision survey of the term magnitudes of the n-times
    differentiated series at |z| = modulus.
    """

    def __init__(self, alpha, n, modulus, max_terms):
        k = np.arange(max_terms, dtype=float)
        logs = gammaln(k + n + 1) - gammaln(k + 1) - gammaln(alpha * (k + n) + 1)
        logs = logs + k * math.log(modulus)
        self.log_terms = logs
        self.log_ratios = np.diff(logs)
        self.log_mass = float(logsumexp(logs))

    def feasible(self, tol):
        """The tail after the last allowed term has to fall below tol times the
        sum of all term magnitudes at the very least.
        """
        return self.log_ratios[-1] < 0 and \
            self.log_terms[-1] <= math.log(tol) + self.log_mass

    @property
    def lost_digits(self):
        return max(self.log_mass, 0.0) / LN10

    def digits(self, tol, extra):
        return int(math.ceil(15 + self.lost_digits - math.log10(tol) + extra))


class _Partial:
    """Result of summing a series: value, certified truncation bound, and the
    sum of term magnitudes used to bound the rounding error.
    """

    def __init__(self, total, tail, absolute, terms, prec):
        self.total = total
        self.tail = tail
        self.absolute = absolute
        self.terms = terms
        self.prec = prec

    @property
    def rounding(self):
        ctx = self.absolute.context
        return 20 * (self.terms + 1) * self.absolute * ctx.ldexp(1, -self.prec)


def _sum_terms(ctx, plan, alpha, n, z, tol, max_terms):
    a = ctx.mpf(alpha)
    zz = ctx.convert(z)
    factor = ctx.factorial(n)
    power = ctx.mpf(1)
    total = ctx.mpf(0)
    absolute = ctx.mpf(0)
    for k in range(max_terms - 1):
        term = factor * power * ctx.rgamma(a * (k + n) + 1)
        total += term
        magnitude = abs(term)
        absolute += magnitude
        log_ratio = plan.log_ratios[k]
        if log_ratio < 0:
            ratio = math.exp(log_ratio) * (1 + 1e-9)
            if ratio < 1:
                tail = magnitude * ratio / (1 - ratio)
                if tail <= tol * abs(total):
                    return _Partial(total, tail, absolute, k + 1, ctx.prec)
        factor = factor * (k + n + 1) / (k + 1)
        power *= zz
    raise ConvergenceError('series for E_{}^({})({}) did not converge in {} terms'.format(
        alpha, n, z, max_terms))


def _summed(plan, alpha, n, z, tol, max_terms):
    """Sum the n-times differentiated series at z so that both the truncation
    and the rounding error stay below tol relative to the result.
    """
    if not plan.feasible(tol):
        raise ConvergenceError(
            'E_{}^({})({}) needs more than {} terms at relative tolerance {}'.format(
                alpha, n, z, max_terms, tol))
    extra = 0
    for _ in range(ATTEMPTS):
        digits = plan.digits(tol, extra)
        if digits > MAX_DIGITS:
            break
        with _precision(digits) as ctx:
            partial = _sum_terms(ctx, plan, alpha, n, z, tol, max_terms)
            size = abs(partial.total)
            budget = 1e-3 * tol * size
            if partial.rounding <= budget:
                logger.debug('E_%s^(%s)(%s): %s terms at %s digits', alpha, n, z,
                             partial.terms, digits)
                return partial
            shortfall = float(ctx.log10(partial.rounding / budget)) if size else 50.0
        extra += math.ceil(shortfall) + 5
        logger.debug('E_%s^(%s)(%s): raising precision by %s digits', alpha, n, z, extra)
    raise ConvergenceError('E_{}^({})({}) lost all significance to cancellation'.format(
        alpha, n, z))


def integral_applies(alpha, z):
    """Whether z lies in the sector |arg z| > a pi where E_a has the integral
    representation over the positive axis.
    """
    if alpha >= 1 or z == 0:
        return False
    return abs(cmath.phase(complex(z))) > alpha * math.pi + ARG_MARGIN


def _breakpoints(ctx, z, splits=(1,)):
    modulus = ctx.mpf(abs(z))
    points = sorted({ctx.mpf(0), modulus} | {ctx.mpf(s) for s in splits})
    return points + [ctx.inf]


def _integrand(ctx, alpha, n, z):
    """x -> exp(-x^(1/a)) [b^n / (x - z b)^(n+1) - c^n / (x - z c)^(n+1)] with
    b = exp(-i pi a) and c = exp(i pi a), and the factor n! / (2 pi i a) that
    turns its integral over the positive axis into E_a^(n)(z).
    """
    a = ctx.mpf(alpha)
    zz = ctx.mpc(z)
    inverse = 1 / a
    lower, upper = ctx.expjpi(-a), ctx.expjpi(a)
    lower_n, upper_n = lower ** n, upper ** n
    scale = ctx.factorial(n) / (ctx.mpc(0, 2) * ctx.pi * a)

    def integrand(x):
        return ctx.exp(-x ** inverse) * (lower_n / (x - zz * lower) ** (n + 1) -
                                         upper_n / (x - zz * upper) ** (n + 1))
    return integrand, scale


def _integrated(alpha, n, z, tol):
    """E_a^(n)(z) by tanh-sinh quadrature of the integral representation,
    raising the precision until the error estimate drops below tol.
    """
    digits = int(math.ceil(20 - math.log10(tol))) + n // 4
    for attempt in range(ATTEMPTS):
        with _precision(digits) as ctx:
            integrand, scale = _integrand(ctx, alpha, n, z)
            value, error = ctx.quad(integrand, _breakpoints(ctx, z), error=True,
                                    maxdegree=8 + attempt)
            value *= scale
            if error * abs(scale) <= tol * abs(value):
                logger.debug('E_%s^(%s)(%s): quadrature at %s digits', alpha, n, z, digits)
                return value
        digits += 20
    raise ConvergenceError('quadrature for E_{}^({})({}) did not settle'.format(alpha, n, z))


def _evaluate(alpha, n, z, tol, max_terms, route):
    """E_a^(n)(z) by the series or the integral.  The automatic route takes the
    integral when the series would need too many terms or would cancel away
    more than MAX_LOST_DIGITS digits.
    """
    if route not in ROUTES:
        raise DomainError('unknown route {!r}; expected one of {}'.format(route, ROUTES))
    applies = integral_applies(alpha, z)
    if route == 'integral':
        if not applies:
            raise DomainError('no integral representation of E_{} at {}'.format(alpha, z))
        return _integrated(alpha, n, z, tol)
    plan = _Plan(alpha, n, abs(z), max_terms)
    if route == 'auto' and applies and \
            (not plan.feasible(tol) or plan.lost_digits > MAX_LOST_DIGITS):
        try:
            return _integrated(alpha, n, z, tol)
        except ConvergenceError:
            if not plan.feasible(tol):
                raise
            logger.debug('E_%s^(%s)(%s): falling back to the series', alpha, n, z)
    return _summed(plan, alpha, n, z, tol, max_terms).total


def _check_argument(z, z_max):
    if not cmath.isfinite(z):
        raise DomainError('argument must be finite: {}'.format(z))
    if abs(z) > z_max and z.real > 0:
        raise DomainError('|z| = {} exceeds {} in the right half-plane'.format(abs(z), z_max))


def ml_eval(params, z, z_max=Z_MAX, route='auto'):
    """E_a(z) for Re(z) <= 0 or |z| <= z_max.  A real argument gives a float,
    a complex one a complex.
    """
    _check_argument(complex(z), z_max)
    if z == 0:
        return complex(1.0) if isinstance(z, complex) else 1.0
    value = _evaluate(params.alpha, 0, z, 0.1 * params.rel_tol, params.max_terms, route)
    if isinstance(z, complex):
        return complex(value)
    return float(value.real)


def ml_deriv(params, n, x, n_max=N_MAX, route='auto'):
    """The n-th derivative of E_a at a real x <= 0.  Non-negative by complete
    monotonicity.
    """
    if not 0 <= n <= n_max or int(n) != n:
        raise DomainError('derivative order must be an integer in [0, {}]: {}'.format(n_max, n))
    x = float(x)
    if x > 0 or not math.isfinite(x):
        raise DomainError('derivatives are only available for x <= 0: {}'.format(x))
    return _cached_deriv(params, int(n), x, route)


@lru_cache(maxsize=65536)
def _cached_deriv(params, n, x, route):
    if x == 0:
        return zero_derivative(params.alpha, n)
    value = _evaluate(params.alpha, n, x, 0.1 * params.rel_tol, params.max_terms, route)
    return float(value.real)


def survival(params, sigma):
    """Probability of no event up to time sigma, E_a(-sigma^a)."""
    if sigma < 0:
        raise DomainError('sigma must be non-negative: {}'.format(sigma))
    return ml_eval(params, -float(sigma) ** params.alpha)


def count_weights(params, mass, n_max):
    """Weights of 0..n_max points in a window of mass `mass`.  The tail bound
    is whatever probability the truncation leaves out; weights that add up to
    more than one, or come out negative, raise ConvergenceError.
    """
    if mass < 0 or not math.isfinite(mass):
        raise DomainError('mass must be non-negative and finite: {}'.format(mass))
    if n_max < 0:
        raise DomainError('n_max must be non-negative: {}'.format(n_max))
    weights = np.zeros(n_max + 1)
    if mass == 0:
        weights[0] = 1.0
        return CountWeights(params.alpha, mass, weights, 0.0)
    log_mass = math.log(mass)
    for n in range(n_max + 1):
        derivative = ml_deriv(params, n, -mass, n_max=max(n_max, N_MAX))
        if derivative < 0:
            raise ConvergenceError('E_{}^({})({}) came out negative: {}'.format(
                params.alpha, n, -mass, derivative))
        if derivative > 0:
            weights[n] = math.exp(n * log_mass - gammaln(n + 1) + math.log(derivative))
    total = math.fsum(weights)
    if total > 1 + NORMALIZATION_TOL:
        raise ConvergenceError('count weights for alpha={} mass={} add up to {}'.format(
            params.alpha, mass, total))
    return CountWeights(params.alpha, mass, weights, max(0.0, 1.0 - total))


def count_probability(params, sigma, n):
    """P(n events by time sigma) for the temporal fractional Poisson process of
    unit rate: sigma^(a n) / n! E_a^(n)(-sigma^a).
    """
    if sigma < 0:
        raise DomainError('sigma must be non-negative: {}'.format(sigma))
    return count_weights(params, float(sigma) ** params.alpha, n).weights[n]


def count_law_cf(params, mass, lam):
    """Characteristic function E[exp(i lam N)] = E_a(mass (exp(i lam) - 1)) of the
    count in a window of the given mass.
    """
    return ml_eval(params, complex(mass * (cmath.exp(1j * lam) - 1)))


class _OracleSeries:
    """Taylor series of E_a^(n) at z with every term formed in working
    precision.  The ratio of consecutive term magnitudes,
    |z| (k+n+1)/(k+1) Gamma(a(k+n)+1) / Gamma(a(k+n+1)+1), does not increase
    in k, so once it drops below one the remaining tail is bounded by a
    geometric series.
    """

    def __init__(self, alpha, n, z, digits, max_terms):
        self.alpha = alpha
        self.n = n
        self.z = z
        self.digits = digits
        self.max_terms = max_terms
        self.peak = self._survey()

    def _log_ratio(self, ctx, a, log_modulus, k):
        m = k + self.n
        return log_modulus + ctx.log(ctx.mpf(m + 1) / (k + 1)) + \
            ctx.loggamma(a * m + 1) - ctx.loggamma(a * (m + 1) + 1)

    def _survey(self):
        """Largest log term magnitude, or None when the terms do not fall by
        the requested digits within max_terms.
        """
        with _precision(20) as ctx:
            a = ctx.mpf(self.alpha)
            log_modulus = ctx.log(abs(ctx.mpc(self.z)))
            log_term = ctx.loggamma(self.n + 1) - ctx.loggamma(a * self.n + 1)
            peak = log_term
            drop = (self.digits + 10) * LN10
            for k in range(self.max_terms):
                log_ratio = self._log_ratio(ctx, a, log_modulus, k)
                if log_ratio < -LN2 and log_term < peak - drop:
                    return float(peak)
                log_term += log_ratio
                peak = max(peak, log_term)
        return None

    @property
    def feasible(self):
        return self.peak is not None and max(self.peak, 0.0) / LN10 <= ORACLE_LOST_DIGITS

    def enclosure(self):
        working = self.digits + 15 + int(math.ceil(max(self.peak, 0.0) / LN10))
        with _precision(working) as ctx:
            a = ctx.mpf(self.alpha)
            zz = ctx.mpc(self.z) if isinstance(self.z, complex) else ctx.mpf(self.z)
            log_modulus = ctx.log(abs(zz))
            target = ctx.mpf(10) ** -(self.digits + 3)
            factor = ctx.factorial(self.n)
            power = ctx.mpf(1)
            total = ctx.mpf(0)
            absolute = ctx.mpf(0)
            for k in range(self.max_terms):
                term = factor * power * ctx.rgamma(a * (k + self.n) + 1)
                total += term
                absolute += abs(term)
                ratio = ctx.exp(self._log_ratio(ctx, a, log_modulus, k))
                if ratio < 0.5:
                    tail = abs(term) * ratio / (1 - ratio)
                    if tail <= target * abs(total):
                        rounding = 16 * (k + 10) * absolute * ctx.ldexp(1, -ctx.prec)
                        return Enclosure(total, tail + rounding, self.digits)
                factor = factor * (k + self.n + 1) / (k + 1)
                power *= zz
        raise EnclosureError('series for E_{}^({})({}) did not certify in {} terms'.format(
            self.alpha, self.n, self.z, self.max_terms))


def _oracle_integral(alpha, n, z, digits):
    """E_a^(n)(z) from the integral representation at two precisions and two
    subdivisions.  The radius is their difference plus the error estimates.
    """
    values = []
    for extra, splits in ((20, (0.5, 1, 2)), (40, (0.25, 1, 4))):
        with _precision(digits + extra) as ctx:
            integrand, scale = _integrand(ctx, alpha, n, z)
            value, error = ctx.quad(integrand, _breakpoints(ctx, z, splits), error=True,
                                    maxdegree=10)
            values.append((value * scale, error * abs(scale)))
    with _precision(digits + 40) as ctx:
        (coarse, coarse_error), (fine, fine_error) = values
        center = fine if isinstance(z, complex) else fine.real
        return Enclosure(center, abs(fine - coarse) + coarse_error + fine_error, digits)


def ml_oracle(alpha, z, precision_digits, order=0, max_terms=ORACLE_TERMS, z_max=Z_MAX):
    """An enclosure of E_a^(order)(z) whose radius is at most
    10^-precision_digits relative to its center.

    Wherever the Taylor series can be summed, the radius adds a geometric bound
    on the discarded tail to a bound on the accumulated rounding error.  Deeper
    in the left half-plane, where the series would cancel away too many digits,
    the integral representation is evaluated twice and the radius is an
    estimate.
    """
    if not 0 < alpha <= 1:
        raise DomainError('alpha must lie in (0, 1]: {}'.format(alpha))
    if abs(z) > z_max:
        raise DomainError('|z| = {} exceeds {}'.format(abs(z), z_max))
    if order < 0 or int(order) != order:
        raise DomainError('order must be a non-negative integer: {}'.format(order))
    digits = int(precision_digits)
    order = int(order)
    if z == 0:
        with _precision(digits + 10) as ctx:
            center = ctx.factorial(order) * ctx.rgamma(ctx.mpf(alpha) * order + 1)
            return Enclosure(center, ctx.mpf(0), digits)
    series = _OracleSeries(alpha, order, z, digits, max_terms)
    if series.feasible:
        enclosure = series.enclosure()
    elif integral_applies(alpha, z):
        enclosure = _oracle_integral(alpha, order, z, digits)
    else:
        raise EnclosureError('no certified route to E_{}^({})({})'.format(alpha, order, z))
    with _precision(digits + 5) as ctx:
        if enclosure.radius > ctx.mpf(10) ** -digits * abs(enclosure.center):
            raise EnclosureError('enclosure of E_{}^({})({}) wider than {} digits'.format(
                alpha, order, z, digits))
    return enclosure
