"""
The spatial birth-death process whose stationary law is
``mu_{Lambda|xi}``.

Every point dies at rate one; births happen at rate ``lambda e^{-W(x, eta +
xi)}`` per unit volume. The simulator thins the dominating rate
``eta(Lambda) + lambda e^L nu(Lambda)``: birth proposals are uniform on the
region and accepted with probability ``e^{-W - L}``, which never exceeds one
under local stability. Rejected proposals are not jumps and are not
recorded.
"""
import bisect
import logging
import math

import numpy as np
from scipy import integrate

from .configuration import PointConfiguration, is_feasible
from .exceptions import (ContractViolation, DomainError, RangeError,
                         RateBoundViolation)
from .stats import Z95, mean_and_se

__all__ = '''
BirthDeathSpec
Trajectory
RateEstimate
total_rate
simulate
state_at
'''.split()

logger = logging.getLogger(__name__)

INF = float('inf')

BIRTH = 1
DEATH = -1

# slack for acceptance probabilities that overshoot one by rounding only
RATE_SLACK = 1e-12


class PointBuffer(object):
    """
    Growable ``(capacity, d)`` array of the current points. Removal swaps
    the last row into the hole, so indices are not stable.
    """

    __slots__ = ('data', 'size')

    def __init__(self, dim, points=(), capacity=16):
        points = np.asarray(points, dtype=float).reshape(-1, dim)
        capacity = max(capacity, 2 * len(points))
        self.data = np.zeros((capacity, dim))
        self.data[:len(points)] = points
        self.size = len(points)

    def __len__(self):
        return self.size

    def view(self):
        return self.data[:self.size]

    def add(self, x):
        if self.size == len(self.data):
            grown = np.zeros((2 * len(self.data), self.data.shape[1]))
            grown[:self.size] = self.data
            self.data = grown
        self.data[self.size] = x
        self.size += 1

    def pop(self, i):
        """Remove row ``i`` and return it as a location tuple."""
        loc = tuple(self.data[i].tolist())
        self.size -= 1
        self.data[i] = self.data[self.size]
        return loc


class BirthDeathSpec(object):
    """The jump kernel ``K_{Lambda|xi}`` of a :class:`~gibbsbd.GibbsSpec`."""

    __slots__ = ('gibbs',)

    def __init__(self, gibbs):
        self.gibbs = gibbs

    def __reduce__(self):
        return (BirthDeathSpec, (self.gibbs,))

    @property
    def activity(self):
        return self.gibbs.activity

    @property
    def potential(self):
        return self.gibbs.potential

    @property
    def region(self):
        return self.gibbs.region

    @property
    def boundary(self):
        return self.gibbs.boundary

    @property
    def birth_envelope(self):
        """``lambda e^L nu(Lambda)``."""
        return self.gibbs.envelope_rate

    def acceptance(self, w):
        """Thinning probability ``e^{-W - L}`` for an influence value."""
        if w == INF:
            return 0.0
        p = math.exp(-w - self.potential.local_stability)
        if p > 1.0 + RATE_SLACK:
            raise RateBoundViolation(
                'W = %.6g is below -L = %.6g; the local stability constant '
                'of %r is wrong' % (w, -self.potential.local_stability,
                                    self.potential))
        return p

    def check_start(self, eta0):
        region = self.region
        for loc, _ in eta0.atoms:
            if not region.contains(loc):
                raise ContractViolation('start point %r lies outside %r'
                                        % (loc, region))
        if not is_feasible(eta0, self.potential):
            raise ContractViolation('start configuration is infeasible')

    def __repr__(self):
        return '<BirthDeathSpec %r>' % (self.gibbs,)


class Trajectory(object):
    """
    A piecewise-constant path ``X_t`` on ``[0, end_time]``.

    Stored as the start state plus one ``(sign, location)`` event per jump:
    ``jump_times[0] == 0`` and ``jump_times[i]`` is the time of
    ``events[i - 1]``. States are replayed on demand.
    """

    __slots__ = ('initial', 'jump_times', 'events', 'end_time', 'metadata',
                 '_counts')

    def __init__(self, initial, jump_times, events, end_time, metadata=None):
        if len(jump_times) != len(events) + 1:
            raise DomainError('need one jump time per event plus tau_0')
        self.initial = initial
        self.jump_times = list(jump_times)
        self.events = list(events)
        self.end_time = float(end_time)
        self.metadata = dict(metadata or {})
        counts = [initial.count]
        for sign, _ in self.events:
            counts.append(counts[-1] + sign)
        self._counts = counts

    def __len__(self):
        return len(self.jump_times)

    @property
    def counts(self):
        return list(self._counts)

    @property
    def states(self):
        return list(self.iter_states())

    def iter_states(self):
        mults = dict(self.initial.atoms)
        yield self.initial
        for sign, loc in self.events:
            mults[loc] = mults.get(loc, 0) + sign
            if not mults[loc]:
                del mults[loc]
            yield PointConfiguration(mults)

    def index_at(self, t):
        if not 0 <= t <= self.end_time:
            raise RangeError('t=%r outside [0, %r]' % (t, self.end_time))
        return bisect.bisect_right(self.jump_times, t) - 1

    def state_at(self, t):
        idx = self.index_at(t)
        mults = dict(self.initial.atoms)
        for sign, loc in self.events[:idx]:
            mults[loc] = mults.get(loc, 0) + sign
            if not mults[loc]:
                del mults[loc]
        return PointConfiguration(mults)

    def count_at(self, t):
        return self._counts[self.index_at(t)]

    def counts_at(self, times):
        return [self.count_at(t) for t in times]

    def to_dict(self):
        return {
            'initial': self.initial.to_list(),
            'jump_times': self.jump_times,
            'events': [[sign, list(loc)] for sign, loc in self.events],
            'end_time': self.end_time,
            'metadata': self.metadata,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(PointConfiguration.from_list(data['initial']),
                   data['jump_times'],
                   [(int(sign), tuple(loc)) for sign, loc in data['events']],
                   data['end_time'], data.get('metadata'))

    def __repr__(self):
        return '<Trajectory jumps=%d end=%g>' % (len(self.events),
                                                 self.end_time)


def state_at(traj, t):
    """Right-continuous lookup ``X_t = Z_n`` for ``tau_n <= t < tau_n+1``."""
    return traj.state_at(t)


class RateEstimate(object):
    """``kappa(eta)`` with an absolute error. Unpacks as (value, error)."""

    __slots__ = ('value', 'abs_error', 'deaths', 'births')

    def __init__(self, deaths, births, abs_error):
        self.deaths = deaths
        self.births = float(births)
        self.value = deaths + self.births
        self.abs_error = float(abs_error)

    def __iter__(self):
        yield self.value
        yield self.abs_error

    def __repr__(self):
        return '<RateEstimate %.9g +- %.2g>' % (self.value, self.abs_error)


def _breakpoints_1d(spec, points, lo, hi):
    phi = spec.potential
    radii = set(phi.breakpoints) | {phi.range}
    centres = list(np.ravel(points)) + list(np.ravel(spec.gibbs.boundary_points))
    found = set()
    for y in centres:
        for r in radii:
            for b in (y - r, y + r):
                if lo < b < hi:
                    found.add(b)
    return sorted(found)


def total_rate(spec, eta, tol=1e-9, samples=100000, rng=None):
    """
    ``kappa(eta) = eta(Lambda) + lambda * integral of e^{-W(x, eta + xi)}``.

    In one dimension the birth integral uses adaptive quadrature split at
    every discontinuity of the integrand; otherwise it is a Monte Carlo mean
    with a 95% half-width as the error.
    """
    spec.check_start(eta)
    gibbs = spec.gibbs
    deaths = eta.count
    lam = spec.activity
    if lam == 0:
        return RateEstimate(deaths, 0.0, 0.0)
    points = eta.as_array(gibbs.dim)
    region = gibbs.region
    if gibbs.dim == 1:
        lo, hi = region.lower[0], region.upper[0]
        breaks = _breakpoints_1d(spec, points, lo, hi)

        def f(x):
            w = gibbs.influences([[x]], points)[0]
            return 0.0 if w == INF else math.exp(-w)

        value, err = integrate.quad(f, lo, hi, points=breaks or None,
                                    epsabs=tol, epsrel=tol,
                                    limit=max(100, 4 * len(breaks) + 50))
        return RateEstimate(deaths, lam * value, lam * err)

    if rng is None:
        rng = np.random.default_rng(0)
    xs = region.sample(rng, samples)
    weights = np.exp(-gibbs.influences(xs, points))
    mean, se = mean_and_se(weights)
    scale = lam * region.volume
    return RateEstimate(deaths, scale * mean, scale * Z95 * se)


def simulate(spec, eta0, t_end, rng):
    """
    Run the birth-death process from ``eta0`` up to ``t_end``.

    Waiting times are inverse-CDF exponentials at the envelope rate; one
    uniform picks between death (a uniformly chosen point) and a birth
    proposal. A waiting time that rounds to zero moves the event to the next
    representable float, so jump times are strictly increasing; run metadata
    counts proposals, rejections and such ties.
    """
    if not (t_end >= 0 and math.isfinite(t_end)):
        raise DomainError('t_end must be finite and non-negative')
    spec.check_start(eta0)
    gibbs = spec.gibbs
    region = gibbs.region
    envelope = spec.birth_envelope
    buf = PointBuffer(gibbs.dim, eta0.as_array(gibbs.dim))

    times = [0.0]
    events = []
    proposals = rejections = ties = 0
    t = 0.0
    while True:
        n = len(buf)
        rate = n + envelope
        if rate <= 0:
            break
        t_next = t - math.log1p(-rng.random()) / rate
        if t_next <= t:
            # event times stay strictly increasing
            ties += 1
            t_next = float(np.nextafter(t, INF))
        if t_next > t_end:
            break
        t = t_next
        v = rng.random() * rate
        if v < n:
            events.append((DEATH, buf.pop(min(int(v), n - 1))))
            times.append(t)
            continue
        proposals += 1
        x = region.sample(rng)
        p = spec.acceptance(gibbs.influence(x, buf.view()))
        if rng.random() < p:
            buf.add(x)
            events.append((BIRTH, tuple(x.tolist())))
            times.append(t)
        else:
            rejections += 1

    if ties:
        logger.warning('%d floating-point ties between event times nudged '
                       'apart', ties)
    metadata = {'proposals': proposals, 'rejections': rejections,
                'ties': ties, 'jumps': len(events)}
    return Trajectory(eta0, times, events, t_end, metadata)
