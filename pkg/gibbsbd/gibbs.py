"""
Finite-volume Gibbs measures ``mu_{Lambda|xi}`` with activity ``lambda``:
partition functions, an exact rejection sampler dominated by a Poisson
process, and the finite-volume GNZ identity as a Monte Carlo check.

Under bounded range only the boundary points within distance R of the
region matter, so a :class:`GibbsSpec` stores the boundary truncated to
that collar.
"""
import logging
import math

import numpy as np
from scipy import stats
from scipy.spatial.distance import cdist

from .configuration import EMPTY, PointConfiguration, is_feasible
from .dynamics import RATE_SLACK
from .exceptions import (ContractViolation, ConvergenceError,
                         DegenerateSampler, DomainError,
                         RateBoundViolation, UnsupportedStatistic)
from .stats import Z95, mean_and_se

__all__ = '''
GibbsSpec
PartitionEstimate
GNZResult
ExactSampler
GNZ_STATISTICS
collar_truncate
partition_function
sample_exact
gnz_residual
'''.split()

logger = logging.getLogger(__name__)

INF = float('inf')

# H_Lambda(eta | xi) >= -STABILITY_FACTOR * L * eta(Lambda)
STABILITY_FACTOR = 1.5


def collar_truncate(boundary, region, range_):
    """Keep the boundary atoms outside ``region`` within distance R of it."""
    return PointConfiguration(
        (loc, m) for loc, m in boundary.atoms
        if not region.contains(loc) and region.distance_to(loc) < range_)


class GibbsSpec(object):
    """
    ``(lambda, phi, Lambda, xi)``: activity, pair potential, bounded box and
    a feasible boundary configuration living in the R-collar of the box.
    """

    __slots__ = ('activity', 'potential', 'region', 'boundary',
                 '_boundary_array')

    def __init__(self, activity, potential, region, boundary=EMPTY,
                 truncate=False):
        if not (activity >= 0 and math.isfinite(activity)):
            raise DomainError('activity must be finite and non-negative')
        if potential.dim != region.dim:
            raise DomainError('potential is %d-dimensional but the region '
                              'is %d-dimensional' % (potential.dim, region.dim))
        if truncate:
            boundary = collar_truncate(boundary, region, potential.range)
        if boundary.dim not in (None, region.dim):
            raise DomainError('boundary dimension does not match the region')
        for loc, _ in boundary.atoms:
            if region.contains(loc):
                raise ContractViolation('boundary point %r lies inside %r'
                                        % (loc, region))
            if not region.distance_to(loc) < potential.range:
                raise ContractViolation('boundary point %r lies outside the '
                                        'R-collar' % (loc,))
        if not is_feasible(boundary, potential):
            raise ContractViolation('boundary configuration is infeasible')
        self.activity = float(activity)
        self.potential = potential
        self.region = region
        self.boundary = boundary
        self._boundary_array = boundary.as_array(region.dim)

    def __reduce__(self):
        return (GibbsSpec, (self.activity, self.potential, self.region,
                            self.boundary))

    @property
    def dim(self):
        return self.region.dim

    @property
    def volume(self):
        return self.region.volume

    @property
    def boundary_points(self):
        return self._boundary_array

    @property
    def envelope_rate(self):
        """``lambda e^L nu(Lambda)``, the dominating birth rate."""
        return (self.activity * math.exp(self.potential.local_stability)
                * self.volume)

    def with_boundary(self, boundary, truncate=False):
        return GibbsSpec(self.activity, self.potential, self.region, boundary,
                         truncate=truncate)

    def boundary_influence(self, x):
        return self.potential.influence(x, self._boundary_array)

    def influence(self, x, points):
        """``W(x, eta + xi_out)`` for ``eta`` given as an array of points."""
        w = self.potential.influence(x, points)
        if w == INF:
            return INF
        return w + self.boundary_influence(x)

    def influences(self, xs, points):
        """Vector of ``W(x, eta + xi_out)`` over the rows ``x`` of ``xs``."""
        xs = np.asarray(xs, dtype=float).reshape(-1, self.dim)
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        others = np.vstack([points, self._boundary_array])
        if not len(others):
            return np.zeros(len(xs))
        phi = self.potential
        if phi.is_radial:
            return phi.profile(cdist(xs, others)).sum(axis=1)
        return np.array([phi.influence(x, others) for x in xs])

    def conditional_energy_of(self, points):
        """``H_Lambda(eta | xi)`` for an array of points inside the region."""
        inner = self.potential.pair_energy(points)
        if inner == INF:
            return INF
        return inner + self.potential.cross_energy(points,
                                                   self._boundary_array)

    def same_system(self, other):
        """True when only the boundaries may differ."""
        return (self.activity == other.activity
                and self.potential == other.potential
                and self.region == other.region)

    def to_dict(self):
        return {'activity': self.activity,
                'potential': self.potential.to_dict(),
                'region': self.region.to_dict(),
                'boundary': self.boundary.to_list()}

    def __repr__(self):
        return '<GibbsSpec lambda=%g %r %r |xi|=%d>' % (
            self.activity, self.potential, self.region, self.boundary.count)


class PartitionEstimate(object):
    """Estimate of ``Xi_{Lambda|xi}`` with a 95% error bound.

    Unpacks as ``(estimate, error_bound)``.
    """

    __slots__ = ('estimate', 'error_bound', 'mode', 'terms', 'tail')

    def __init__(self, estimate, error_bound, mode, terms=(), tail=0.0):
        self.estimate = float(estimate)
        self.error_bound = float(error_bound)
        self.mode = mode
        self.terms = tuple(terms)
        self.tail = float(tail)

    def __iter__(self):
        yield self.estimate
        yield self.error_bound

    def to_dict(self):
        return {'estimate': self.estimate, 'error_bound': self.error_bound,
                'mode': self.mode, 'tail': self.tail,
                'terms': [list(t) for t in self.terms]}

    def __repr__(self):
        return '<PartitionEstimate %.9g +- %.3g (%s)>' % (
            self.estimate, self.error_bound, self.mode)


def _series_tail(a, n):
    """``sum_{j > n} a^j / j!``."""
    if a == 0:
        return 0.0
    return math.exp(a) * stats.poisson.sf(n, a)


def _stratified_term(spec, n, samples, strata, rng):
    """Mean of ``exp(-H)`` over ``Lambda^n`` with the first point stratified
    along the first axis. Returns (mean, 95% half-width)."""
    region = spec.region
    strata = max(1, min(strata, samples))
    per = max(2, samples // strata)
    lo, hi = region.lower[0], region.upper[0]
    width = (hi - lo) / strata
    means, variances = [], []
    for s in range(strata):
        values = np.empty(per)
        for i in range(per):
            pts = region.sample(rng, n)
            pts[0, 0] = lo + width * (s + rng.random())
            h = spec.conditional_energy_of(pts)
            values[i] = 0.0 if h == INF else math.exp(-h)
        means.append(values.mean())
        variances.append(values.var(ddof=1) / per)
    mean = float(np.mean(means))
    half = Z95 * math.sqrt(sum(variances)) / strata
    return mean, half


def partition_function(spec, mode='series', n_max=None, samples=10000,
                       rng=None, tol=1e-6, strata=8, max_order=200):
    """
    Estimate ``Xi_{Lambda|xi}(lambda)``.

    ``series`` sums ``lambda^n / n! * integral over Lambda^n of exp(-H)``
    term by term (stratified Monte Carlo per term) and adds the tail bound
    ``sum_{j > n_max} (lambda e^{3L/2} nu)^j / j!``; if that tail exceeds
    ``tol`` a :class:`ConvergenceError` is raised. ``monte_carlo`` uses
    ``Xi = e^{lambda nu} E[exp(-H)]`` under the Poisson process of
    intensity lambda.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    lam, vol = spec.activity, spec.volume
    L = spec.potential.local_stability

    if mode == 'monte_carlo':
        values = np.empty(samples)
        for i in range(samples):
            pts = spec.region.sample(rng, rng.poisson(lam * vol))
            h = spec.conditional_energy_of(pts)
            values[i] = 0.0 if h == INF else math.exp(-h)
        mean, se = mean_and_se(values)
        scale = math.exp(lam * vol)
        return PartitionEstimate(scale * mean, scale * Z95 * se, mode)

    if mode != 'series':
        raise DomainError('unknown partition function mode %r' % mode)

    a = lam * math.exp(STABILITY_FACTOR * L) * vol
    if n_max is None:
        n_max = 0
        while _series_tail(a, n_max) > tol:
            n_max += 1
            if n_max > max_order:
                raise ConvergenceError(
                    'series tail still above %g at order %d' % (tol, max_order))
    tail = _series_tail(a, n_max)
    if tail > tol:
        raise ConvergenceError(
            'series tail bound %.3g exceeds %g at n_max=%d; raise n_max or '
            'shrink the region or the activity' % (tail, tol, n_max))

    terms = [(0, 1.0, 0.0)]
    variance = 0.0
    for n in range(1, n_max + 1):
        coef = (lam * vol) ** n / math.factorial(n)
        if coef == 0:
            break
        mean, half = _stratified_term(spec, n, samples, strata, rng)
        terms.append((n, coef * mean, coef * half))
        variance += (coef * half) ** 2
    estimate = math.fsum(t[1] for t in terms)
    return PartitionEstimate(estimate, math.sqrt(variance) + tail, mode,
                             terms, tail)


class ExactSampler(object):
    """
    Rejection sampler for ``mu_{Lambda|xi}``.

    Proposals are Poisson processes of intensity ``lambda e^{3L/2}`` on the
    region, accepted with probability ``exp(-H_Lambda(eta|xi) - 3/2 L
    eta(Lambda))``. The acceptance rate equals ``exp(-lambda e^{3L/2}
    nu) Xi`` and so is at least ``exp(-lambda e^{3L/2} nu)``; a pilot run
    only happens when that bound is below ``min_acceptance``.
    """

    def __init__(self, spec, rng=None, min_acceptance=1e-6, pilot=20000):
        self.spec = spec
        L = spec.potential.local_stability
        self.penalty = STABILITY_FACTOR * L
        self.mean_count = spec.activity * math.exp(self.penalty) * spec.volume
        self.acceptance = math.exp(-self.mean_count)
        if self.acceptance < min_acceptance:
            if rng is None:
                rng = np.random.default_rng(0)
            accepted = sum(self._accept(rng, self._propose(rng))
                           for _ in range(pilot))
            rate = accepted / float(pilot)
            logger.info('pilot acceptance %d/%d for %r', accepted, pilot,
                        spec)
            if rate < min_acceptance:
                raise DegenerateSampler(
                    'estimated acceptance %.3g below %g; shrink the region '
                    'or the activity' % (rate, min_acceptance))
            self.acceptance = rate

    def _propose(self, rng):
        n = rng.poisson(self.mean_count)
        pts = self.spec.region.sample(rng, n)
        h = self.spec.conditional_energy_of(pts)
        if h == INF:
            return pts, -INF
        log_acc = -h - self.penalty * n
        if log_acc > RATE_SLACK:
            raise RateBoundViolation(
                'H = %.6g for %d points is below -3/2 L n; the local '
                'stability constant of %r is wrong' % (h, n,
                                                       self.spec.potential))
        return pts, min(0.0, log_acc)

    @staticmethod
    def _accept(rng, proposal):
        log_acc = proposal[1]
        if log_acc == -INF:
            return False
        return rng.random() < math.exp(log_acc)

    def sample_points(self, rng, max_attempts=None):
        if max_attempts is None:
            max_attempts = int(math.ceil(100.0 / self.acceptance))
        for _ in range(max_attempts):
            proposal = self._propose(rng)
            if self._accept(rng, proposal):
                return proposal[0]
        raise DegenerateSampler('no acceptance in %d attempts' % max_attempts)

    def sample(self, rng, max_attempts=None):
        return PointConfiguration.from_points(
            self.sample_points(rng, max_attempts))


def sample_exact(spec, rng, **kwargs):
    """One exact draw from ``mu_{Lambda|xi}``."""
    return ExactSampler(spec, rng=rng, **kwargs).sample(rng)


class GNZResult(object):
    __slots__ = ('lhs', 'rhs', 'ci', 'z', 'samples', 'statistic')

    def __init__(self, lhs, rhs, ci, z, samples, statistic):
        self.lhs = float(lhs)
        self.rhs = float(rhs)
        self.ci = float(ci)
        self.z = float(z)
        self.samples = int(samples)
        self.statistic = statistic

    def __iter__(self):
        yield self.lhs
        yield self.rhs
        yield self.z

    def to_dict(self):
        return {'lhs': self.lhs, 'rhs': self.rhs, 'ci': self.ci, 'z': self.z,
                'samples': self.samples, 'statistic': self.statistic}

    def __repr__(self):
        return '<GNZResult lhs=%.6g rhs=%.6g z=%.3g>' % (
            self.lhs, self.rhs, self.z)


def _gnz_one(spec, pts, x, **_):
    return float(len(pts)), 1.0


def _gnz_count(spec, pts, x, query_box=None, m=None, **_):
    if query_box is None or m is None:
        raise UnsupportedStatistic('the count statistic needs query_box and m')
    inside = sum(1 for p in pts if query_box.contains(p))
    lhs = float(len(pts)) if inside == m else 0.0
    rhs = 1.0 if inside + (1 if query_box.contains(x) else 0) == m else 0.0
    return lhs, rhs


def _gnz_boltzmann(spec, pts, x, **_):
    phi = spec.potential
    lhs = 0.0
    for p in pts:
        w = phi.influence(p, pts)
        lhs += 0.0 if w == INF else math.exp(-w)
    w = phi.influence(x, pts)
    self_term = phi.evaluate(x, x)
    if w == INF or self_term == INF:
        return lhs, 0.0
    return lhs, math.exp(-(w + self_term))


# F(x, eta) choices: each returns (sum_{x in eta} F(x, eta), F(x, eta + delta_x))
GNZ_STATISTICS = {
    'one': _gnz_one,
    'count': _gnz_count,
    'boltzmann': _gnz_boltzmann,
}


def gnz_residual(spec, statistic='one', samples=10000, rng=None,
                 births_per_sample=1, **options):
    """
    Estimate both sides of the finite-volume GNZ equation

        E[ sum_{x in eta} F(x, eta) ]
            = lambda * integral over Lambda of E[ e^{-W(x, eta + xi)} F(x, eta + delta_x) ] dx

    from exact samples, integrating ``x`` by uniform draws on the region.
    The z-score is that of the paired per-sample difference.
    """
    try:
        fn = GNZ_STATISTICS[statistic]
    except KeyError:
        raise UnsupportedStatistic('unknown GNZ statistic %r, expected one of '
                                   '%s' % (statistic,
                                           ', '.join(sorted(GNZ_STATISTICS))))
    if rng is None:
        rng = np.random.default_rng(0)
    sampler = ExactSampler(spec, rng=rng)
    scale = spec.activity * spec.volume
    lhs = np.empty(samples)
    rhs = np.empty(samples)
    for i in range(samples):
        pts = sampler.sample_points(rng)
        left, right = 0.0, 0.0
        for _ in range(births_per_sample):
            x = spec.region.sample(rng)
            left, f_plus = fn(spec, pts, x, **options)
            if f_plus:
                w = spec.influence(x, pts)
                if w != INF:
                    right += math.exp(-w) * f_plus
        lhs[i] = left
        rhs[i] = scale * right / births_per_sample
    diff_mean, diff_se = mean_and_se(lhs - rhs)
    if diff_se > 0:
        z = diff_mean / diff_se
    else:
        z = 0.0 if diff_mean == 0 else math.copysign(INF, diff_mean)
    return GNZResult(lhs.mean(), rhs.mean(), Z95 * diff_se, z, samples,
                     statistic)
