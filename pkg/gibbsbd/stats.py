"""
Small statistical helpers shared by the experiments.
"""
import math

import numpy as np
from scipy import stats

from .exceptions import InsufficientSamples

__all__ = '''
Z95
mean_and_se
proportion_interval
total_variation
empirical_pmf
pooled_chi_square
two_sample_chi_square
'''.split()

Z95 = 1.959963984540054


def mean_and_se(values):
    """Sample mean and standard error (0 for fewer than two values)."""
    values = np.asarray(values, dtype=float)
    if not len(values):
        raise InsufficientSamples('no samples')
    if len(values) < 2:
        return float(values[0]), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(len(values)))


def proportion_interval(successes, trials, confidence=0.95):
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise InsufficientSamples('no trials')
    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(
        confidence_level=confidence, method='wilson')
    return float(ci.low), float(ci.high)


def empirical_pmf(values, support=None):
    """Dict value -> relative frequency."""
    values = list(values)
    if not values:
        raise InsufficientSamples('no samples')
    counts = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    if support is not None:
        for v in support:
            counts.setdefault(v, 0)
    total = float(len(values))
    return {k: c / total for k, c in counts.items()}


def total_variation(p, q):
    """``1/2 sum |p - q|`` for two dict-valued distributions."""
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def pooled_chi_square(observed, expected_probs, min_expected=5.0):
    """
    Goodness-of-fit test of ``observed`` counts against ``expected_probs``
    after pooling adjacent cells (in the given order) until every pooled
    cell expects at least ``min_expected``. Returns (statistic, p_value,
    dof).
    """
    observed = np.asarray(observed, dtype=float)
    probs = np.asarray(expected_probs, dtype=float)
    total = observed.sum()
    if total <= 0:
        raise InsufficientSamples('no samples')
    expected = probs / probs.sum() * total
    pooled_obs, pooled_exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            pooled_obs.append(acc_o)
            pooled_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if pooled_exp:
            pooled_obs[-1] += acc_o
            pooled_exp[-1] += acc_e
        else:
            pooled_obs.append(acc_o)
            pooled_exp.append(acc_e)
    if len(pooled_exp) < 2:
        raise InsufficientSamples(
            'fewer than two cells with %g expected counts; draw more '
            'samples' % min_expected)
    stat, p = stats.chisquare(pooled_obs, pooled_exp)
    return float(stat), float(p), len(pooled_exp) - 1


def two_sample_chi_square(first, second):
    """Contingency test that two samples of discrete values agree."""
    first, second = list(first), list(second)
    if not first or not second:
        raise InsufficientSamples('both samples must be non-empty')
    support = sorted(set(first) | set(second))
    if len(support) < 2:
        return 0.0, 1.0
    table = np.array([[first.count(v) for v in support],
                      [second.count(v) for v in support]], dtype=float)
    stat, p, _, _ = stats.chi2_contingency(table)
    return float(stat), float(p)
