"""
Disagreement percolation over the box grid ``V_n``.

Two coupled chains on ``Lambda^(n)`` start empty and differ only through
their boundaries. Disagreement can only enter a box from a neighbouring box,
and every box is entered at rate at most ``rho = lambda e^L R^d``, so
reaching ``V_m`` from the outside takes ``n - m`` ordered Poisson-dominated
steps. This module measures the hitting times and compares them with those
bounds, and runs the spatial-mixing sweep that compares projections of
``mu_{Lambda_{k+n}|xi}`` and ``mu_{Lambda_{k+n}|zeta}`` on ``Lambda_k``.
"""
import itertools
import logging
import math
from collections import defaultdict

import numpy as np
from scipy.special import gammaln, logsumexp

from .configuration import EMPTY, PointConfiguration, is_feasible
from .coupling import (SHARED, _EVENT_EFFECT, contraction_rate,
                       count_distance, count_distance_se, mixing_ceiling,
                       simulate_coupled)
from .dynamics import BirthDeathSpec
from .exceptions import DomainError, RangeError, WindowError
from .gibbs import GibbsSpec
from .potential import weak_temperedness_constant
from .runner import run_replicas
from .space import INNER, BoxGrid, BoxRegion
from .stats import proportion_interval

__all__ = '''
HittingRecord
PercolationReport
OrderedHittingResult
SpatialMixingRow
hitting_record
locality_violations
run_percolation
poisson_tail
ordered_hitting_check
count_paths
path_counts
path_sum_bound
percolation_window
mixing_window
minimal_feasible_n
single_collar_point
saturated_collar
poisson_collar
canonical_boundary_pair
BOUNDARY_PAIRS
spatial_mixing_experiment
'''.split()

logger = logging.getLogger(__name__)

INF = float('inf')

# spacing inflation so that lattice neighbours sit at distance >= the core
LATTICE_SLACK = 1e-9


class HittingRecord(object):
    """
    First-disagreement times ``T_k`` per box of one coupled run. Boxes never
    hit are absent from ``times`` and read as ``inf``.
    """

    __slots__ = ('times', 'replica', 't_end', 'violations')

    def __init__(self, times, replica, t_end, violations=()):
        self.times = dict(times)
        self.replica = replica
        self.t_end = float(t_end)
        self.violations = list(violations)

    def time(self, k):
        return self.times.get(tuple(k), INF)

    def first_within(self, radius):
        """Earliest ``T_k`` over ``|k|_inf <= radius``."""
        hits = [t for k, t in self.times.items()
                if max(abs(c) for c in k) <= radius]
        return min(hits) if hits else INF

    def to_dict(self):
        return {'replica': self.replica, 't_end': self.t_end,
                'times': [[list(k), t] for k, t in sorted(self.times.items())],
                'violations': len(self.violations)}


def _scan(traj, grid):
    """One pass over the events: hitting times and locality violations."""
    counts = defaultdict(int)
    times = {}
    violations = []
    initial = traj.initial
    for part in (initial.excl1, initial.excl2):
        for loc, m in part.atoms:
            k = grid.index_of_point(loc)
            if k is not None:
                counts[k] += m
                times.setdefault(k, 0.0)
    for t, code, loc in traj.iter_events():
        part, sign = _EVENT_EFFECT[code]
        if part == SHARED:
            continue
        k = grid.index_of_point(loc)
        if k is None:
            continue
        if sign > 0:
            if not counts[k] and grid.classify_vertex(k) == INNER:
                if not any(counts[j] for j in grid.neighbors(k)):
                    violations.append((t, k, loc))
            counts[k] += 1
            times.setdefault(k, t)
        else:
            counts[k] -= 1
    return times, violations


def hitting_record(traj, grid, replica=0):
    times, violations = _scan(traj, grid)
    return HittingRecord(times, replica, traj.end_time, violations)


def locality_violations(traj, grid):
    """
    Events where an inner box starts to disagree while none of its
    neighbours does. Under the identity coupling this list is always empty.
    """
    return _scan(traj, grid)[1]


def poisson_tail(rho, t, k):
    """``1 - F_{rho t}(k - 1)`` with F the Poisson CDF, summed in log space."""
    if rho < 0 or t < 0:
        raise DomainError('rho and t must be non-negative')
    if int(k) != k or k < 1:
        raise DomainError('k must be a positive integer')
    a = rho * t
    if a == 0:
        return 0.0
    j = np.arange(int(k))
    log_cdf = logsumexp(j * math.log(a) - a - gammaln(j + 1))
    return float(max(0.0, -math.expm1(log_cdf)))


def percolation_window(n, m, dim, R, activity, L):
    """``(n - m) / (e^2 (6m + 3)^d R^d lambda e^L)``."""
    rate = math.e ** 2 * (6 * m + 3) ** dim * R ** dim * activity * math.exp(L)
    return INF if rate == 0 else (n - m) / rate


class OrderedHittingResult(object):
    __slots__ = ('chain', 't', 'empirical', 'interval', 'bound', 'replicas')

    def __init__(self, chain, t, empirical, interval, bound, replicas):
        self.chain = chain
        self.t = t
        self.empirical = empirical
        self.interval = interval
        self.bound = bound
        self.replicas = replicas

    @property
    def se(self):
        p = self.empirical
        return math.sqrt(p * (1 - p) / self.replicas)

    def holds(self, z=3.0):
        return self.empirical <= self.bound + z * self.se

    def to_dict(self):
        return {'chain': [list(k) for k in self.chain], 't': self.t,
                'empirical': self.empirical, 'ci_low': self.interval[0],
                'ci_high': self.interval[1], 'bound': self.bound,
                'replicas': self.replicas}


def _check_path(grid, chain):
    chain = [grid.check(k) for k in chain]
    if not chain:
        raise DomainError('empty box chain')
    for a, b in zip(chain, chain[1:]):
        if b not in grid.neighbors(a):
            raise DomainError('%r and %r are not neighbours' % (a, b))
    return chain


def ordered_hitting_check(records, chain, t, grid, rho):
    """
    Frequency of ``T_{k_1} < ... < T_{k_l} <= t`` over ``records`` against
    the Poisson bound ``1 - F_{rho t}(l - 1)``.
    """
    chain = _check_path(grid, chain)
    records = list(records)
    for rec in records:
        if rec.t_end < t:
            raise RangeError('record ends at %g before t=%g' % (rec.t_end, t))
    hits = 0
    for rec in records:
        times = [rec.time(k) for k in chain]
        if times[-1] <= t and all(a < b for a, b in zip(times, times[1:])):
            hits += 1
    interval = proportion_interval(hits, len(records))
    return OrderedHittingResult(chain, t, hits / float(len(records)), interval,
                                poisson_tail(rho, t, len(chain)),
                                len(records))


def path_counts(grid, k, max_length=None):
    """
    ``{l: |P_l(k, V_out)|}``: simple grid paths of ``l`` vertices from ``k``
    that end at their first visit to the outer layer.
    """
    start = grid.check(k)
    if max_length is None:
        max_length = len(grid)
    counts = defaultdict(int)
    outer = grid.radius

    def walk(v, visited, length):
        if max(abs(c) for c in v) == outer:
            counts[length] += 1
            return
        if length == max_length:
            return
        for w in grid.neighbors(v):
            if w not in visited:
                visited.add(w)
                walk(w, visited, length + 1)
                visited.discard(w)

    walk(start, {start}, 1)
    return dict(counts)


def count_paths(grid, k, length):
    return path_counts(grid, k, length).get(length, 0)


def path_sum_bound(grid, k, rho, t, max_length=None):
    """``sum_l |P_l(k, V_out)| (1 - F_{rho t}(l - 1))``."""
    return math.fsum(c * poisson_tail(rho, t, length)
                     for length, c in path_counts(grid, k, max_length).items())


class PercolationReport(object):
    """
    Empirical ``Pr[disagreement reaches Lambda^(m) by t]`` with its Wilson
    interval next to the ceiling ``e^{-(n - m)}``. ``profile`` lists the
    reach probability of every sup-norm layer ``j = 0..n``.
    """

    __slots__ = ('n', 'm', 't', 'replicas', 'reached', 'probability',
                 'interval', 'ceiling', 'rho', 'window', 'profile',
                 'violations', 'path_bound', 'records')

    def __init__(self, n, m, t, records, rho, window, path_bound=None):
        self.n, self.m, self.t = n, m, t
        self.records = list(records)
        self.replicas = len(self.records)
        self.rho = rho
        self.window = window
        self.ceiling = math.exp(-(n - m))
        self.path_bound = path_bound
        self.reached = sum(1 for r in self.records
                           if r.first_within(m) <= t)
        if self.replicas:
            self.probability = self.reached / float(self.replicas)
            self.interval = proportion_interval(self.reached, self.replicas)
        else:
            self.probability, self.interval = 0.0, (0.0, 1.0)
        self.profile = []
        for j in range(n + 1):
            hit = sum(1 for r in self.records
                      if any(max(abs(c) for c in k) == j and tk <= t
                             for k, tk in r.times.items()))
            self.profile.append(
                (j, hit / float(self.replicas) if self.replicas else 0.0))
        self.violations = sum(len(r.violations) for r in self.records)

    @property
    def in_window(self):
        return self.t <= self.window

    @property
    def se(self):
        if not self.replicas:
            return 0.0
        p = self.probability
        return math.sqrt(p * (1 - p) / self.replicas)

    def holds(self, z=3.0):
        return self.probability <= self.ceiling + z * self.se

    def to_dict(self):
        return {'n': self.n, 'm': self.m, 't': self.t,
                'replicas': self.replicas, 'reached': self.reached,
                'probability': self.probability,
                'ci_low': self.interval[0], 'ci_high': self.interval[1],
                'ceiling': self.ceiling, 'rho': self.rho,
                'window': self.window, 'in_window': self.in_window,
                'path_bound': self.path_bound,
                'locality_violations': self.violations,
                'profile': [list(p) for p in self.profile]}


def _percolation_replica(rng, replica, spec1, spec2, grid, t):
    traj = simulate_coupled(spec1, spec2, EMPTY, EMPTY, t, rng)
    return hitting_record(traj, grid, replica)


def percolation_specs(n, potential, activity, boundary1, boundary2):
    grid = BoxGrid(potential.dim, potential.range, n)
    region = grid.region()
    spec1 = BirthDeathSpec(GibbsSpec(activity, potential, region, boundary1))
    spec2 = BirthDeathSpec(GibbsSpec(activity, potential, region, boundary2))
    return grid, spec1, spec2


def run_percolation(n, m, potential, activity, boundary1, boundary2, t,
                    replicas, seed, jobs=1, stream=()):
    """
    Couple the chains on ``Lambda^(n)`` from empty starts and record, per
    replica, when each box first disagrees. Times outside the window
    ``t < (n - m) / (e^2 (6m + 3)^d R^d lambda e^L)`` only produce a warning.
    """
    if int(m) != m or int(n) != n or not 0 <= m < n:
        raise DomainError('need integers 0 <= m < n, got m=%r n=%r' % (m, n))
    if not potential.range > 0:
        raise DomainError('the box grid needs a potential with positive range')
    if not t >= 0:
        raise DomainError('t must be non-negative')
    grid, spec1, spec2 = percolation_specs(n, potential, activity, boundary1,
                                           boundary2)
    L, R, dim = potential.local_stability, potential.range, potential.dim
    window = percolation_window(n, m, dim, R, activity, L)
    if t > window:
        logger.warning('t=%g is outside the percolation window t < %g', t,
                       window)
    rho = activity * math.exp(L) * R ** dim
    records = run_replicas(_percolation_replica, seed, replicas,
                           args=(spec1, spec2, grid, t), jobs=jobs,
                           stream=stream)
    path_bound = None
    if dim == 1:
        path_bound = max(path_sum_bound(grid, (k,), rho, t)
                         for k in range(-m, m + 1))
    report = PercolationReport(n, m, t, records, rho, window, path_bound)
    if report.violations:
        logger.error('%d locality violations in %d runs', report.violations,
                      replicas)
    return report


def mixing_window(n, k, dim, R, activity, L, delta, eps):
    """
    ``(t_lo, t_hi)`` with ``t_lo = ln(lambda (2n+2k+1)^d R^d e^L / eps) /
    delta`` and ``t_hi = n / (e^2 (6k+3)^d R^d lambda e^L)``.
    """
    if activity == 0:
        return 0.0, INF
    if delta <= 0:
        t_lo = INF
    else:
        mass = activity * (2 * n + 2 * k + 1) ** dim * R ** dim * math.exp(L)
        t_lo = max(0.0, math.log(mass / eps) / delta)
    return t_lo, percolation_window(n, k, dim, R, activity, L)


def minimal_feasible_n(k, dim, R, activity, L, delta, start=1, cap=200):
    """Smallest ``n >= start`` whose window with ``eps = e^{-n}`` is not
    empty, or None below ``cap``."""
    for n in range(max(1, start), cap + 1):
        t_lo, t_hi = mixing_window(n, k, dim, R, activity, L, delta,
                                   math.exp(-n))
        if t_lo <= t_hi:
            return n
    return None


def single_collar_point(region, potential):
    """One point at distance R/2 beyond the upper face of the first axis."""
    if not potential.range > 0:
        return EMPTY
    loc = list(region.center)
    loc[0] = region.upper[0] + potential.range / 2.0
    return PointConfiguration([(loc, 1)])


def saturated_collar(region, potential):
    """
    A lattice packing of the R-collar with spacing equal to the hard-core
    diameter (R/2 without a core), anchored at the region centre.
    """
    R = potential.range
    if not R > 0:
        return EMPTY
    spacing = (potential.core_radius or R / 2.0) * (1.0 + LATTICE_SLACK)
    centre = region.center
    axes = []
    for c, lo, hi in zip(centre, region.lower, region.upper):
        j_lo = int(math.floor((lo - R - c) / spacing))
        j_hi = int(math.ceil((hi + R - c) / spacing))
        axes.append([c + j * spacing for j in range(j_lo, j_hi + 1)])
    atoms = [(loc, 1) for loc in itertools.product(*axes)
             if not region.contains(loc) and region.distance_to(loc) < R]
    boundary = PointConfiguration(atoms)
    if not is_feasible(boundary, potential):
        return _thin_feasible(boundary.points(), potential)
    return boundary


def _thin_feasible(points, potential):
    kept = []
    for x in points:
        if all(potential.evaluate(x, y) != INF for y in kept):
            kept.append(x)
    return PointConfiguration.from_points(kept)


def poisson_collar(region, potential, activity, rng):
    """
    A Poisson process of intensity ``activity`` on the R-collar, thinned in
    sampling order to a feasible configuration.
    """
    R = potential.range
    if not R > 0 or activity == 0:
        return EMPTY
    outer = region.expand(R)
    count = rng.poisson(activity * outer.volume)
    pts = outer.sample(rng, count)
    collar = [tuple(p.tolist()) for p in pts
              if not region.contains(p) and region.distance_to(p) < R]
    return _thin_feasible(collar, potential)


def _pair_none(region, potential, activity, rng):
    return EMPTY, EMPTY


def _pair_single(region, potential, activity, rng):
    return EMPTY, single_collar_point(region, potential)


def _pair_saturated(region, potential, activity, rng):
    return EMPTY, saturated_collar(region, potential)


def _pair_poisson(region, potential, activity, rng):
    return (poisson_collar(region, potential, activity, rng),
            poisson_collar(region, potential, activity, rng))


BOUNDARY_PAIRS = {
    'none': _pair_none,
    'single_point': _pair_single,
    'saturated': _pair_saturated,
    'poisson': _pair_poisson,
}


def canonical_boundary_pair(name, region, potential, activity=1.0, rng=None):
    """``(xi, zeta)`` for one of the named boundary pairs."""
    try:
        builder = BOUNDARY_PAIRS[name]
    except KeyError:
        raise DomainError('unknown boundary pair %r, expected one of %s' % (
            name, ', '.join(sorted(BOUNDARY_PAIRS))))
    if rng is None:
        rng = np.random.default_rng(0)
    return builder(region, potential, activity, rng)


class SpatialMixingRow(object):
    """
    One grid size of the spatial-mixing sweep. ``lower_bound`` is the
    projected count distance on ``Lambda_k``; ``upper_bound`` is the
    non-coalescence frequency on ``Lambda_k`` plus both chains' mixing
    ceilings; ``ceiling`` is ``3 eps``.
    """

    __slots__ = ('n', 'eps', 't', 't_lo', 't_hi', 'window_ok', 'minimal_n',
                 'delta', 'lower_bound', 'lower_se', 'disagree', 'interval',
                 'upper_bound', 'ceiling', 'replicas')

    def __init__(self, **kwargs):
        for name in self.__slots__:
            setattr(self, name, kwargs.get(name))

    def to_dict(self):
        data = {name: getattr(self, name) for name in self.__slots__}
        data['interval'] = list(self.interval)
        return data


def _mixing_replica(rng, replica, spec1, spec2, query, t):
    traj = simulate_coupled(spec1, spec2, EMPTY, EMPTY, t, rng)
    state = traj.state_at(t)
    eta1 = state.eta1.restrict(query)
    eta2 = state.eta2.restrict(query)
    return eta1.count, eta2.count, eta1 != eta2


def spatial_mixing_experiment(k, n_values, potential, activity, boundary_pair,
                              replicas, seed, jobs=1, strict=False,
                              tol=1e-10):
    """
    For each ``n``: couple the chains on ``Lambda_{k+n}`` under the boundary
    pair up to ``t(n)`` from the window with ``eps = e^{-n}`` and compare
    their projections on ``Lambda_k``.

    ``boundary_pair`` is a name from :data:`BOUNDARY_PAIRS` or a callable
    ``(region, potential, activity, rng) -> (xi, zeta)``. An empty window
    raises :class:`WindowError` when ``strict``; otherwise the row runs at
    ``t_lo``, is flagged, and reports the minimal feasible ``n``.
    """
    if int(k) != k or k < 0:
        raise DomainError('k must be a non-negative integer')
    R, dim, L = potential.range, potential.dim, potential.local_stability
    if not R > 0:
        raise DomainError('spatial mixing needs a potential with positive '
                          'range')
    builder = boundary_pair if callable(boundary_pair) else (
        lambda region, phi, lam, rng: canonical_boundary_pair(
            boundary_pair, region, phi, lam, rng))
    est = weak_temperedness_constant(potential, tol=tol)
    query = BoxRegion.cube(dim, (k + 0.5) * R)
    rows = []
    for n in n_values:
        if int(n) != n or n < 1:
            raise DomainError('n must be a positive integer')
        region = BoxRegion.cube(dim, (k + n + 0.5) * R)
        rng = np.random.default_rng([int(seed), int(n)])
        xi, zeta = builder(region, potential, activity, rng)
        spec1 = BirthDeathSpec(GibbsSpec(activity, potential, region, xi))
        spec2 = BirthDeathSpec(GibbsSpec(activity, potential, region, zeta))
        delta = contraction_rate(spec1, est)
        eps = math.exp(-n)
        t_lo, t_hi = mixing_window(n, k, dim, R, activity, L, delta, eps)
        window_ok = t_lo <= t_hi
        minimal_n = None
        if window_ok:
            t = 0.5 * (t_lo + t_hi) if math.isfinite(t_hi) else t_lo
        else:
            minimal_n = minimal_feasible_n(k, dim, R, activity, L, delta,
                                           start=n + 1)
            message = ('empty time window for n=%d (t_lo=%.4g > t_hi=%.4g); '
                       'minimal feasible n: %s' % (n, t_lo, t_hi, minimal_n))
            if strict:
                raise WindowError(message, minimal_n)
            logger.warning(message)
            t = t_lo
        if not math.isfinite(t):
            raise WindowError('no finite time for n=%d: delta=%g' % (n, delta),
                              minimal_n)
        results = run_replicas(_mixing_replica, seed, replicas,
                               args=(spec1, spec2, query, t), jobs=jobs,
                               stream=(n,))
        first = [r[0] for r in results]
        second = [r[1] for r in results]
        split = sum(1 for r in results if r[2])
        disagree = split / float(replicas)
        ceiling = (mixing_ceiling(spec1, delta, t)
                   + mixing_ceiling(spec2, delta, t))
        rows.append(SpatialMixingRow(
            n=n, eps=eps, t=t, t_lo=t_lo, t_hi=t_hi, window_ok=window_ok,
            minimal_n=minimal_n, delta=delta,
            lower_bound=count_distance(first, second),
            lower_se=count_distance_se(first, second),
            disagree=disagree, interval=proportion_interval(split, replicas),
            upper_bound=disagree + ceiling, ceiling=3 * eps,
            replicas=replicas))
    return rows
