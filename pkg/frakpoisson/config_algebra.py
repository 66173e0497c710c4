"""
Exact algebra on finite configurations of a finite atomic base space.

A configuration is a multiset of atoms, stored as the multiplicity k_i of each
atom.  The Lebesgue-Poisson weight of a configuration is prod mu_i^k_i / k_i!;
its fractional version multiplies the weight of every n-point configuration
by E_a^(n)(0) = n! / Gamma(a n + 1).  Functions on configurations are kept as
sparse dictionaries, and every identity between them can be checked by
enumerating all configurations up to a fixed size.
"""
# pylint: disable=invalid-name, too-few-public-methods, too-many-arguments
import itertools
import json
import logging
import math
from collections import Counter
from functools import lru_cache

import numpy as np
from scipy.special import comb, factorial, gammaln

from .constants import CONFIG_N_MAX, M_MAX, SIGMA_BUDGET, Z_MAX
from .fpp_sampler import sample_counts
from .mittag_leffler import DomainError, ml_eval
from .stats import mean_stderr


logger = logging.getLogger(__name__)

# Largest number of configurations enumerated on a single level
LEVEL_LIMIT = 2_000_000
NORM_LEVEL_CAP = 80


class SupportError(RuntimeError):
    """Raised when a configuration falls outside the declared support of a
    function or operator.
    """


class CapError(RuntimeError):
    """Raised when an enumeration cap is too small for the request."""


def compositions(total, parts):
    """Produce the `parts`-tuples of non-negative integers that sum to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


class DiscreteConfiguration:
    """A multiset of atoms given by its multiplicities k_1..k_M."""

    @classmethod
    def parse(cls, label, atoms):
        """Parse a label such as '1:2,3:1' (atom 1 twice, atom 3 once; atoms
        are numbered from 1).  The empty string is the empty configuration.
        """
        multiplicities = [0] * atoms
        for part in filter(None, (p.strip() for p in label.split(','))):
            try:
                atom, count = (int(v) for v in part.split(':'))
            except ValueError as err:
                raise DomainError('bad configuration label {!r}'.format(label)) from err
            if not 1 <= atom <= atoms or count < 0:
                raise DomainError('bad configuration label {!r}'.format(label))
            multiplicities[atom - 1] += count
        return cls(multiplicities)

    @classmethod
    def from_indices(cls, indices, atoms):
        """The configuration holding the (0-based) atom indices given."""
        multiplicities = [0] * atoms
        for index in indices:
            multiplicities[index] += 1
        return cls(multiplicities)

    @classmethod
    def empty(cls, atoms):
        return cls([0] * atoms)

    def __init__(self, multiplicities):
        self.multiplicities = tuple(int(k) for k in multiplicities)
        if any(k < 0 for k in self.multiplicities):
            raise DomainError('multiplicities must be non-negative: {}'.format(multiplicities))

    @property
    def size(self):
        return sum(self.multiplicities)

    @property
    def atoms(self):
        return len(self.multiplicities)

    @property
    def indices(self):
        """Sorted atom indices with repetition."""
        return tuple(i for i, k in enumerate(self.multiplicities) for _ in range(k))

    @property
    def label(self):
        return ','.join('{}:{}'.format(i + 1, k) for i, k in enumerate(self.multiplicities) if k)

    def add(self, i):
        multiplicities = list(self.multiplicities)
        multiplicities[i] += 1
        return DiscreteConfiguration(multiplicities)

    def remove(self, i):
        if not self.multiplicities[i]:
            raise SupportError('atom {} does not occur in {}'.format(i + 1, self))
        multiplicities = list(self.multiplicities)
        multiplicities[i] -= 1
        return DiscreteConfiguration(multiplicities)

    def sub_configurations(self):
        """Every sub-multiset eta together with the number of ways prod C(k_i, j_i)
        of choosing it among the points of this configuration.
        """
        ranges = [range(k + 1) for k in self.multiplicities]
        for choice in itertools.product(*ranges):
            count = 1
            for k, j in zip(self.multiplicities, choice):
                count *= math.comb(k, j)
            yield DiscreteConfiguration(choice), count

    @property
    def sort_key(self):
        return self.size, self.indices

    def __lt__(self, other):
        return self.sort_key < other.sort_key

    def __eq__(self, other):
        return isinstance(other, DiscreteConfiguration) and \
            self.multiplicities == other.multiplicities

    def __hash__(self):
        return hash(self.multiplicities)

    def __repr__(self):
        return '{{{}}}'.format(self.label)


class DiscreteBaseSpace:
    """Atoms x_1..x_M with positive masses mu_1..mu_M."""

    @classmethod
    def load(cls, **kwargs):
        """Factory method that reads masses either as a sequence or as a comma
        separated string.
        """
        masses = kwargs['masses']
        if isinstance(masses, str):
            masses = [float(m) for m in masses.split(',') if m.strip()]
        return cls(masses, m_max=kwargs.get('m_max') or M_MAX)

    def __init__(self, masses, atoms=None, m_max=M_MAX):
        masses = np.asarray(masses, dtype=float)
        if masses.ndim != 1 or not 1 <= len(masses) <= m_max:
            raise DomainError('need between 1 and {} atoms: {}'.format(m_max, masses))
        if not np.all(masses > 0) or not np.all(np.isfinite(masses)):
            raise DomainError('masses must be positive and finite: {}'.format(masses))
        masses.setflags(write=False)
        self.masses = masses
        self.atoms = list(atoms) if atoms is not None else \
            ['x{}'.format(i + 1) for i in range(len(masses))]
        if len(self.atoms) != len(masses):
            raise DomainError('one label per atom is required')

    @property
    def size(self):
        return len(self.masses)

    @property
    def total_mass(self):
        return float(self.masses.sum())

    def pairing(self, f, g):
        """<f, g>_mu = sum f_i g_i mu_i (no conjugation)."""
        return complex(np.sum(_values(f) * _values(g) * self.masses))

    def inner(self, f, g):
        """The L2(mu) inner product, conjugate-linear in g."""
        return complex(np.sum(_values(f) * np.conj(_values(g)) * self.masses))

    def norm_p(self, f, p):
        """sum |f_i|^p mu_i."""
        return float(np.sum(np.abs(_values(f)) ** p * self.masses))

    def empty(self):
        return DiscreteConfiguration.empty(self.size)

    def point(self, i):
        return self.empty().add(i)

    def level(self, n):
        """All configurations with n points."""
        return [DiscreteConfiguration(k) for k in compositions(n, self.size)]

    def configurations(self, n_cap):
        """All configurations with at most n_cap points, level by level."""
        result = []
        for n in range(n_cap + 1):
            result.extend(self.level(n))
        return result

    def parse(self, label):
        return DiscreteConfiguration.parse(label, self.size)

    @property
    def signature(self):
        return tuple(self.masses)

    def __eq__(self, other):
        return isinstance(other, DiscreteBaseSpace) and self.signature == other.signature

    def __hash__(self):
        return hash(self.signature)

    def __repr__(self):
        return 'DiscreteBaseSpace({})'.format(list(self.masses))


class DiscreteField:
    """A complex value at every atom."""

    @classmethod
    def random(cls, base, rng, scale=1.0, real=False):
        values = rng.normal(base.size)
        if not real:
            values = values + 1j * rng.normal(base.size)
        return cls(scale * values)

    def __init__(self, values):
        values = np.asarray(values, dtype=complex)
        if not np.all(np.isfinite(values)):
            raise DomainError('field values must be finite: {}'.format(values))
        self.values = values

    def __call__(self, i):
        return self.values[i]

    def __len__(self):
        return len(self.values)

    def conj(self):
        return DiscreteField(np.conj(self.values))

    def __repr__(self):
        return 'DiscreteField({})'.format(self.values)


def _values(f):
    return f.values if isinstance(f, DiscreteField) else np.asarray(f, dtype=complex)


class BaseOperator:
    """A matrix acting on fields of the base space."""

    @classmethod
    def identity(cls, size):
        return cls(np.eye(size))

    @classmethod
    def zero(cls, size):
        return cls(np.zeros((size, size)))

    @classmethod
    def random(cls, size, rng, positive=False):
        matrix = rng.normal((size, size)) + 1j * rng.normal((size, size))
        if positive:
            matrix = matrix @ matrix.conj().T
        return cls(matrix)

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DomainError('operator needs a square matrix: {}'.format(matrix.shape))
        self.matrix = matrix

    @property
    def size(self):
        return self.matrix.shape[0]

    def apply(self, f):
        return DiscreteField(self.matrix @ _values(f))


class ConfigFunction:
    """A complex function on configurations with at most n_cap points.  Only
    non-zero values are stored.
    """

    @classmethod
    def tabulate(cls, base, func, n_cap=CONFIG_N_MAX):
        """Evaluate func on every configuration with at most n_cap points."""
        G = cls(base, n_cap=n_cap)
        for eta in base.configurations(n_cap):
            G[eta] = func(eta)
        return G

    @classmethod
    def indicator(cls, base, configurations, n_cap=None):
        configurations = list(configurations)
        if n_cap is None:
            n_cap = max((eta.size for eta in configurations), default=0)
        return cls(base, {eta: 1.0 for eta in configurations}, n_cap=n_cap)

    @classmethod
    def random(cls, base, rng, n_cap, density=1.0):
        """Normal complex values on a random share `density` of the
        configurations with at most n_cap points.
        """
        G = cls(base, n_cap=n_cap)
        for eta in base.configurations(n_cap):
            if density >= 1 or rng.random() < density:
                G[eta] = complex(rng.normal(), rng.normal())
        return G

    @classmethod
    def from_json(cls, text, base, n_cap=CONFIG_N_MAX):
        """Read the mapping written by to_json."""
        data = json.loads(text)
        G = cls(base, n_cap=n_cap)
        for label, (re, im) in data.items():
            G[base.parse(label)] = complex(re, im)
        return G

    def __init__(self, base, values=None, n_cap=CONFIG_N_MAX):
        self.base = base
        self.n_cap = int(n_cap)
        self._values = {}
        for eta, value in (values or {}).items():
            self[eta] = value

    def _check(self, eta):
        if eta.atoms != self.base.size:
            raise DomainError('{} does not live on {} atoms'.format(eta, self.base.size))
        if eta.size > self.n_cap:
            raise SupportError('{} has more than {} points'.format(eta, self.n_cap))

    def __getitem__(self, eta):
        return self._values.get(eta, 0j)

    def __setitem__(self, eta, value):
        self._check(eta)
        value = complex(value)
        if value == 0:
            self._values.pop(eta, None)
        else:
            self._values[eta] = value

    def add(self, eta, value):
        self[eta] = self[eta] + value

    def __call__(self, eta):
        return self[eta]

    def items(self):
        return sorted(self._values.items(), key=lambda item: item[0].sort_key)

    def __len__(self):
        return len(self._values)

    @property
    def support_level(self):
        """Largest number of points of a configuration where G is non-zero, or
        -1 for the zero function.
        """
        return max((eta.size for eta in self._values), default=-1)

    def map_levels(self, factors, n_cap=None):
        """Multiply the value at every n-point configuration by factors[n]."""
        result = ConfigFunction(self.base, n_cap=self.n_cap if n_cap is None else n_cap)
        for eta, value in self._values.items():
            result[eta] = value * factors[eta.size]
        return result

    def _combine(self, other, sign):
        result = ConfigFunction(self.base, dict(self._values), max(self.n_cap, other.n_cap))
        for eta, value in other._values.items():
            result.add(eta, sign * value)
        return result

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __mul__(self, scalar):
        return ConfigFunction(self.base, {eta: scalar * v for eta, v in self._values.items()},
                              self.n_cap)

    __rmul__ = __mul__

    def max_abs(self):
        return max((abs(v) for v in self._values.values()), default=0.0)

    def max_abs_diff(self, other):
        return (self - other).max_abs()

    def to_json(self):
        """{"1:2,3:1": [re, im], ...}, keys in canonical order."""
        return json.dumps({eta.label: [value.real, value.imag] for eta, value in self.items()})

    def __repr__(self):
        return 'ConfigFunction({} values, n_cap={})'.format(len(self), self.n_cap)


@lru_cache(maxsize=256)
def level_factors(alpha, n_max):
    """E_a^(n)(0) = n! / Gamma(a n + 1) for n = 0..n_max, read-only."""
    n = np.arange(n_max + 1, dtype=float)
    factors = np.exp(gammaln(n + 1) - gammaln(alpha * n + 1))
    factors.setflags(write=False)
    return factors


@lru_cache(maxsize=256)
def level_roots(alpha, n_max):
    roots = np.sqrt(level_factors(alpha, n_max))
    roots.setflags(write=False)
    return roots


def lp_weight(base, eta):
    """lambda_mu({eta}) = prod mu_i^k_i / k_i!."""
    weight = 1.0
    for mass, k in zip(base.masses, eta.multiplicities):
        if k:
            weight *= mass ** k / math.factorial(k)
    return weight


def lp_weight_bruteforce(base, eta):
    """The weight of eta found by summing prod mu over all ordered tuples of
    atoms whose multiset is eta, divided by n!.
    """
    n = eta.size
    target = Counter(eta.indices)
    total = 0.0
    for atoms in itertools.product(range(base.size), repeat=n):
        if Counter(atoms) == target:
            total += math.prod(base.masses[i] for i in atoms)
    return total / math.factorial(n)


def frac_lp_weight(ml, base, eta):
    """E_a^(|eta|)(0) times the Lebesgue-Poisson weight of eta."""
    return float(level_factors(ml.alpha, eta.size)[eta.size]) * lp_weight(base, eta)


def k_transform(G, gamma, n_max=CONFIG_N_MAX):
    """(KG)(gamma) = sum of G over the sub-configurations of gamma, each counted
    as often as it can be chosen among the points of gamma.
    """
    if gamma.size > n_max:
        raise SupportError('{} has more than {} points'.format(gamma, n_max))
    total = 0j
    for eta, count in gamma.sub_configurations():
        value = G[eta]
        if value:
            total += count * value
    return total


def k_indicator(configurations, multiplicities):
    """(K 1_A) on many configurations at once, given as rows of
    multiplicities.
    """
    multiplicities = np.asarray(multiplicities)
    total = np.zeros(len(multiplicities))
    for eta in configurations:
        term = np.ones(len(multiplicities))
        for i, j in enumerate(eta.multiplicities):
            if j:
                term *= comb(multiplicities[:, i], j)
        total += term
    return total


def _integral(base, G, n_cap, factors):
    if G.support_level > n_cap:
        raise CapError('function reaches {} points, beyond the cap {}'.format(
            G.support_level, n_cap))
    total = 0j
    for eta in base.configurations(n_cap):
        value = G[eta]
        if value:
            total += value * factors[eta.size] * lp_weight(base, eta)
    return total


def lp_integral(base, G, n_cap):
    """Integral of G against the Lebesgue-Poisson measure."""
    return _integral(base, G, n_cap, np.ones(n_cap + 1))


def frac_lp_integral(ml, base, G, n_cap):
    """Integral of G against the fractional Lebesgue-Poisson measure."""
    return _integral(base, G, n_cap, level_factors(ml.alpha, n_cap))


def inner_product(base, G, H, ml=None):
    """<G, H> in L2 of the Lebesgue-Poisson measure, or of its fractional
    version when ml is given.
    """
    n_cap = max(G.n_cap, H.n_cap)
    factors = np.ones(n_cap + 1) if ml is None else level_factors(ml.alpha, n_cap)
    total = 0j
    for eta, value in G.items():
        other = H[eta]
        if other:
            total += value * np.conj(other) * factors[eta.size] * lp_weight(base, eta)
    return complex(total)


def coherent_state(f, eta):
    """e(f, eta) = prod over the points of eta of f; 1 on the empty set."""
    values = _values(f)
    result = 1 + 0j
    for i, k in enumerate(eta.multiplicities):
        if k:
            result *= values[i] ** k
    return result


def frac_coherent(ml, f, eta):
    """The coherent state divided by sqrt(E_a^(|eta|)(0))."""
    return coherent_state(f, eta) / level_roots(ml.alpha, eta.size)[eta.size]


def coherent_function(base, f, n_cap, ml=None):
    """The (fractional, when ml is given) coherent state of f tabulated on
    configurations with at most n_cap points.
    """
    if ml is None:
        return ConfigFunction.tabulate(base, lambda eta: coherent_state(f, eta), n_cap)
    return ConfigFunction.tabulate(base, lambda eta: frac_coherent(ml, f, eta), n_cap)


def i_alpha(ml, G):
    """G * sqrt(E_a^(|.|)(0)), from L2 of the fractional measure to L2 of the
    Lebesgue-Poisson measure.
    """
    return G.map_levels(level_roots(ml.alpha, G.n_cap))


def i_alpha_inv(ml, G):
    return G.map_levels(1 / level_roots(ml.alpha, G.n_cap))


def annihilation_lp(base, phi, G):
    """(a-(phi) G)(eta) = sum_i G(eta + x_i) phi_i mu_i."""
    weights = _values(phi) * base.masses
    result = ConfigFunction(base, n_cap=G.n_cap)
    for xi, value in G.items():
        for i, k in enumerate(xi.multiplicities):
            if k and weights[i]:
                result.add(xi.remove(i), value * weights[i])
    return result


def creation_lp(base, phi, G, n_max=CONFIG_N_MAX):
    """(a+(phi) G)(eta) = sum_i k_i(eta) G(eta - x_i) phi_i."""
    phi = _values(phi)
    if G.support_level + 1 > n_max:
        raise SupportError('creation would reach {} points, beyond {}'.format(
            G.support_level + 1, n_max))
    result = ConfigFunction(base, n_cap=min(G.n_cap + 1, n_max))
    for xi, value in G.items():
        for i, k in enumerate(xi.multiplicities):
            if phi[i]:
                result.add(xi.add(i), (k + 1) * value * phi[i])
    return result


def _level_ratio(alpha, n_cap, shift):
    """sqrt(E_a^(n + shift)(0) / E_a^(n)(0)) for n = 0..n_cap (0 where n + shift
    is negative).
    """
    roots = level_roots(alpha, n_cap + max(shift, 0))
    ratios = np.zeros(n_cap + 1)
    for n in range(n_cap + 1):
        if n + shift >= 0:
            ratios[n] = roots[n + shift] / roots[n]
    return ratios


def annihilation_alpha(ml, base, phi, G, route='formula'):
    """Annihilation in L2 of the fractional measure, either by the explicit
    level factors or by conjugating with I_alpha.
    """
    if route == 'conjugation':
        return i_alpha_inv(ml, annihilation_lp(base, phi, i_alpha(ml, G)))
    lowered = annihilation_lp(base, phi, G)
    return lowered.map_levels(_level_ratio(ml.alpha, lowered.n_cap, 1))


def creation_alpha(ml, base, phi, G, route='formula', n_max=CONFIG_N_MAX):
    """Creation in L2 of the fractional measure, either by the explicit level
    factors or by conjugating with I_alpha.
    """
    if route == 'conjugation':
        return i_alpha_inv(ml, creation_lp(base, phi, i_alpha(ml, G), n_max))
    raised = creation_lp(base, phi, G, n_max)
    return raised.map_levels(_level_ratio(ml.alpha, raised.n_cap, -1))


def second_quantization_lp(base, A, f, eta):
    """(H_A e(f))(eta) = sum over the points x of eta of (Af)(x) e(f, eta - x)."""
    Af = A.apply(f).values
    total = 0j
    for i, k in enumerate(eta.multiplicities):
        if k:
            total += k * Af[i] * coherent_state(f, eta.remove(i))
    return total


def second_quantization_lp_operator(base, A, G):
    """H_A on an arbitrary function: (H G)(eta) = sum_i k_i sum_j A_ij
    G(eta - x_i + x_j).  It preserves the number of points.
    """
    matrix = A.matrix
    result = ConfigFunction(base, n_cap=G.n_cap)
    for xi, value in G.items():
        for j, k in enumerate(xi.multiplicities):
            if not k:
                continue
            removed = xi.remove(j)
            for i in range(base.size):
                if matrix[i, j]:
                    eta = removed.add(i)
                    result.add(eta, eta.multiplicities[i] * matrix[i, j] * value)
    return result


def second_quantization_alpha(ml, base, A, f, eta, route='formula'):
    """H_A of the fractional coherent state of f, at eta."""
    n = eta.size
    if route == 'conjugation':
        coherent = coherent_function(base, f, n, ml)
        image = i_alpha_inv(ml, second_quantization_lp_operator(base, A, i_alpha(ml, coherent)))
        return image[eta]
    if n == 0:
        return 0j
    roots = level_roots(ml.alpha, n)
    Af = A.apply(f).values
    total = 0j
    for i, k in enumerate(eta.multiplicities):
        if k:
            total += k * Af[i] * frac_coherent(ml, f, eta.remove(i))
    return roots[n - 1] / roots[n] * total


def sample_multiplicities(ml, base, rng, n_samples, method='mixture'):
    """Configurations of the fractional Poisson measure on the atoms, as rows
    of multiplicities.
    """
    counts = sample_counts(ml, base.total_mass, rng, n_samples, method)
    return rng.multinomial(counts, base.masses / base.total_mass)


class CorrelationReport:
    """Monte Carlo mean of K 1_A against the fractional Lebesgue-Poisson measure
    of A.
    """

    def __init__(self, configurations, estimate, stderr, exact, bruteforce, sigmas):
        self.configurations = configurations
        self.estimate = float(estimate)
        self.stderr = float(stderr)
        self.exact = float(exact)
        self.bruteforce = float(bruteforce)
        self.sigmas = sigmas

    @property
    def passed(self):
        budget = max(self.sigmas * self.stderr, 1e-12 * abs(self.exact))
        return abs(self.estimate - self.exact) <= budget and \
            math.isclose(self.exact, self.bruteforce, rel_tol=1e-12, abs_tol=1e-15)

    @property
    def name(self):
        return 'K1_A for A = {}'.format(' '.join(repr(eta) for eta in self.configurations))


def correlation_identity_check(ml, base, configurations, n_samples, rng, method='mixture',
                               sigmas=SIGMA_BUDGET):
    """Check E[(K 1_A)(gamma)] against the fractional Lebesgue-Poisson measure of
    A, for A a finite set of configurations.
    """
    configurations = sorted(set(configurations))
    n_cap = max(eta.size for eta in configurations)
    exact = frac_lp_integral(ml, base, ConfigFunction.indicator(base, configurations, n_cap),
                             n_cap).real
    factors = level_factors(ml.alpha, n_cap)
    bruteforce = sum(factors[eta.size] * lp_weight_bruteforce(base, eta)
                     for eta in configurations)
    multiplicities = sample_multiplicities(ml, base, rng, n_samples, method)
    estimate, stderr = mean_stderr(k_indicator(configurations, multiplicities))
    return CorrelationReport(configurations, estimate, stderr, exact, bruteforce, sigmas)


class NormIdentity:
    """Both sides of ||e(f)||_p^p = E_a(||f||_p^p), with the enumeration tail."""

    def __init__(self, lhs, rhs, tail, levels):
        self.lhs = lhs
        self.rhs = rhs
        self.tail = tail
        self.levels = levels

    @property
    def difference(self):
        return abs(self.lhs - self.rhs)


def _level_tail(alpha, s, n):
    """Bound on sum_{m > n} s^m / Gamma(a m + 1); the term ratios decrease."""
    if s == 0:
        return 0.0
    log_next = (n + 1) * math.log(s) - gammaln(alpha * (n + 1) + 1)
    log_ratio = math.log(s) + gammaln(alpha * (n + 1) + 1) - gammaln(alpha * (n + 2) + 1)
    if log_ratio >= 0:
        return math.inf
    return math.exp(log_next) / (1 - math.exp(log_ratio))


def norm_identity_check(ml, base, f, p=2, tol=1e-10, level_cap=NORM_LEVEL_CAP):
    """Enumerate sum over eta of |e(f, eta)|^p times the fractional weight of
    eta, level by level, until the remaining levels are certified below tol;
    return it together with E_a(sum |f_i|^p mu_i).
    """
    s = base.norm_p(f, p)
    if s > Z_MAX:
        raise DomainError('||f||^p = {} exceeds {}'.format(s, Z_MAX))
    a = np.abs(_values(f)) ** p * base.masses
    lhs = 0.0
    n = 0
    while True:
        if n > level_cap:
            raise CapError('tail above {} after {} levels'.format(tol, level_cap))
        if math.comb(n + base.size - 1, base.size - 1) > LEVEL_LIMIT:
            raise CapError('level {} has too many configurations to enumerate'.format(n))
        multiplicities = np.array(list(compositions(n, base.size)))
        level = np.sum(np.prod(a ** multiplicities / factorial(multiplicities), axis=1))
        lhs += float(level_factors(ml.alpha, n)[n] * level)
        tail = _level_tail(ml.alpha, s, n)
        if tail <= tol:
            break
        n += 1
    logger.debug('norm identity enumerated %s levels, tail %.2e', n + 1, tail)
    rhs = ml_eval(ml, s)
    return NormIdentity(lhs, rhs, tail, n + 1)


def coherent_gram(base, fields, n_cap, ml=None):
    """Gram matrix of the (fractional) coherent states of the fields in L2 of
    the (fractional) Lebesgue-Poisson measure, enumerated up to n_cap points.
    """
    states = [coherent_function(base, f, n_cap, ml) for f in fields]
    size = len(states)
    gram = np.zeros((size, size), dtype=complex)
    for a in range(size):
        for b in range(size):
            gram[a, b] = inner_product(base, states[a], states[b], ml)
    return gram


def exact_coherent_gram(base, fields):
    """exp(<f_a, f_b>_mu), the limit of coherent_gram."""
    return np.array([[np.exp(base.inner(f, g)) for g in fields] for f in fields])


def totality_witness(ml, base, fields, n_cap):
    """Ratio of the smallest to the largest singular value of the coherent
    Gram matrix.
    """
    singular = np.linalg.svd(coherent_gram(base, fields, n_cap, ml), compute_uv=False)
    return float(singular.min() / singular.max())
