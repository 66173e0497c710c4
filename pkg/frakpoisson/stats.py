"""
Monte Carlo statistics shared by the verification checks: standard errors,
jackknife estimates, and chi-square and Kolmogorov-Smirnov tests.
"""
# pylint: disable=invalid-name
import numpy as np
import scipy.stats

from .constants import MIN_EXPECTED


def mean_stderr(values):
    """Sample mean and its standard error.  Complex values get the root of the
    summed variances of the real and imaginary parts.
    """
    values = np.asarray(values)
    n = len(values)
    if n < 2:
        raise ValueError('need at least two values: {}'.format(n))
    mean = values.mean()
    if np.iscomplexobj(values):
        variance = values.real.var(ddof=1) + values.imag.var(ddof=1)
    else:
        variance = values.var(ddof=1)
    return mean, float(np.sqrt(variance / n))


def jackknife_mean(values):
    """Mean together with its leave-one-out jackknife standard error."""
    values = np.asarray(values)
    n = len(values)
    if n < 2:
        raise ValueError('need at least two values: {}'.format(n))
    mean = values.mean()
    leave_one_out = (n * mean - values) / (n - 1)
    spread = np.abs(leave_one_out - leave_one_out.mean()) ** 2
    return mean, float(np.sqrt((n - 1) / n * spread.sum()))


def covariance_stderr(a, b):
    """Sample covariance of paired values and the standard error of the
    centered products it averages.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = len(a)
    products = (a - a.mean()) * (b - b.mean())
    covariance = products.sum() / (n - 1)
    return float(covariance), float(products.std(ddof=1) / np.sqrt(n))


def within(estimate, target, budget):
    return bool(abs(estimate - target) <= budget)


def _pool(table, min_expected):
    """Merge adjacent columns of a 2 x k contingency table, right to left,
    until every expected count under homogeneity is at least min_expected.
    """
    columns = [table[:, j].astype(float) for j in range(table.shape[1])]
    rows = table.sum(axis=1).astype(float)
    total = rows.sum()

    def smallest_expected(column):
        return (rows * column.sum() / total).min()

    pooled = []
    pending = np.zeros(2)
    for column in reversed(columns):
        pending = pending + column
        if smallest_expected(pending) >= min_expected:
            pooled.append(pending)
            pending = np.zeros(2)
    if pending.sum() > 0:
        if pooled:
            pooled[-1] = pooled[-1] + pending
        else:
            pooled.append(pending)
    return np.array(pooled[::-1]).T


class ChiSquareResult:
    """Outcome of a chi-square test."""

    def __init__(self, statistic, dof, pvalue, bins):
        self.statistic = float(statistic)
        self.dof = int(dof)
        self.pvalue = float(pvalue)
        self.bins = int(bins)

    def passed(self, significance):
        return self.pvalue > significance

    def __repr__(self):
        return 'ChiSquareResult(statistic={:.3f}, dof={}, pvalue={:.4f})'.format(
            self.statistic, self.dof, self.pvalue)


def two_sample_chi_square(a, b, min_expected=MIN_EXPECTED):
    """Test whether two samples of non-negative integers share a law, with
    bins pooled until every expected count reaches min_expected.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    top = int(max(a.max(initial=0), b.max(initial=0)))
    table = np.vstack([
        np.bincount(a, minlength=top + 1),
        np.bincount(b, minlength=top + 1),
    ])
    table = _pool(table, min_expected)
    if table.shape[1] < 2:
        return ChiSquareResult(0.0, 0, 1.0, table.shape[1])
    statistic, pvalue, dof, _ = scipy.stats.chi2_contingency(table, correction=False)
    return ChiSquareResult(statistic, dof, pvalue, table.shape[1])


def goodness_of_fit(sample, probabilities, min_expected=MIN_EXPECTED):
    """One-sample chi-square test of non-negative integers against the given
    probabilities of 0, 1, 2, ...; the last bin absorbs the remaining mass.
    """
    sample = np.asarray(sample, dtype=np.int64)
    probabilities = np.asarray(probabilities, dtype=float)
    n = len(sample)
    k = len(probabilities)
    observed = np.bincount(np.minimum(sample, k - 1), minlength=k).astype(float)
    expected = probabilities * n
    expected[-1] += max(0.0, n - expected.sum())
    bins_observed, bins_expected = [], []
    pending_o = pending_e = 0.0
    for o, e in zip(observed[::-1], expected[::-1]):
        pending_o += o
        pending_e += e
        if pending_e >= min_expected:
            bins_observed.append(pending_o)
            bins_expected.append(pending_e)
            pending_o = pending_e = 0.0
    if bins_observed:
        bins_observed[-1] += pending_o
        bins_expected[-1] += pending_e
    if len(bins_observed) < 2:
        return ChiSquareResult(0.0, 0, 1.0, len(bins_observed))
    observed = np.array(bins_observed[::-1])
    expected = np.array(bins_expected[::-1])
    expected *= observed.sum() / expected.sum()
    statistic, pvalue = scipy.stats.chisquare(observed, expected)
    return ChiSquareResult(statistic, len(observed) - 1, pvalue, len(observed))


def ks_test(sample, cdf):
    """Kolmogorov-Smirnov distance between a sample and a vectorized CDF."""
    result = scipy.stats.kstest(np.asarray(sample, dtype=float), cdf)
    return float(result.statistic), float(result.pvalue)
