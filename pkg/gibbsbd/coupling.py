"""
The identity coupling of two birth-death chains that share activity,
potential and region but may see different boundaries.

Points of ``eta1 & eta2`` die together; exclusive points die alone. A birth
proposal at ``x`` is accepted in chain ``i`` with probability ``p_i``; a
single uniform ``u`` puts it in both chains when ``u < min(p1, p2)``, in
chain 1 only when ``min <= u < p1`` and in chain 2 only when ``min <= u <
p2``.
"""
import bisect
import logging
import math

import numpy as np

from .configuration import PointConfiguration, intersect, subtract
from .dynamics import PointBuffer, Trajectory, BIRTH, DEATH
from .exceptions import (ContractViolation, DomainError, InsufficientSamples,
                         RangeError)
from .stats import empirical_pmf, mean_and_se, proportion_interval

__all__ = '''
CoupledState
CoupledTrajectory
TVEstimate
simulate_coupled
disagreement_count
contraction_rate
fit_contraction_rate
mixing_ceiling
tv_estimates
count_distance
count_distance_se
disagreement_profile
'''.split()

logger = logging.getLogger(__name__)

INF = float('inf')

# event codes; _EVENT_EFFECT maps each to (part of the coupled state, sign)
DEATH_SHARED, DEATH_1, DEATH_2, BIRTH_SHARED, BIRTH_1, BIRTH_2 = range(6)

SHARED, EXCL1, EXCL2 = 'shared', 'excl1', 'excl2'

_EVENT_EFFECT = {
    DEATH_SHARED: (SHARED, DEATH),
    DEATH_1: (EXCL1, DEATH),
    DEATH_2: (EXCL2, DEATH),
    BIRTH_SHARED: (SHARED, BIRTH),
    BIRTH_1: (EXCL1, BIRTH),
    BIRTH_2: (EXCL2, BIRTH),
}

SENTINEL_SLACK = 1e-12


class CoupledState(object):
    """
    A pair ``(eta1, eta2)`` with the cached decomposition
    ``eta1 = shared + excl1`` and ``eta2 = shared + excl2``.
    """

    __slots__ = ('shared', 'excl1', 'excl2')

    def __init__(self, shared, excl1, excl2):
        self.shared = shared
        self.excl1 = excl1
        self.excl2 = excl2

    @classmethod
    def from_pair(cls, eta1, eta2):
        return cls(intersect(eta1, eta2), subtract(eta1, eta2),
                   subtract(eta2, eta1))

    @property
    def eta1(self):
        return self.shared + self.excl1

    @property
    def eta2(self):
        return self.shared + self.excl2

    @property
    def disagreement(self):
        return self.excl1.count + self.excl2.count

    def coalesced(self):
        return not self.disagreement

    def __eq__(self, other):
        if not isinstance(other, CoupledState):
            return NotImplemented
        return (self.shared, self.excl1, self.excl2) == (
            other.shared, other.excl1, other.excl2)

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash((self.shared, self.excl1, self.excl2))

    def __repr__(self):
        return '<CoupledState shared=%d excl1=%d excl2=%d>' % (
            self.shared.count, self.excl1.count, self.excl2.count)


def disagreement_count(state):
    """``f(eta1, eta2) = (eta1 sym-diff eta2)(Lambda)``."""
    return state.disagreement


class CoupledTrajectory(object):
    """
    Jump times, coupled events and the disagreement ``f`` after every jump.

    ``coalescence_time`` is the first time with ``eta1 == eta2`` (None if
    never). It is absorbing only when both chains see the same boundary.
    """

    __slots__ = ('initial', 'jump_times', 'events', 'end_time', 'metadata',
                 'disagreements', 'coalescence_time', 'same_boundary')

    def __init__(self, initial, jump_times, events, end_time, metadata=None,
                 same_boundary=True):
        if len(jump_times) != len(events) + 1:
            raise DomainError('need one jump time per event plus tau_0')
        self.initial = initial
        self.jump_times = list(jump_times)
        self.events = list(events)
        self.end_time = float(end_time)
        self.metadata = dict(metadata or {})
        self.same_boundary = bool(same_boundary)
        f = [initial.disagreement]
        for code, _ in self.events:
            part, sign = _EVENT_EFFECT[code]
            f.append(f[-1] + (sign if part != SHARED else 0))
        self.disagreements = f
        self.coalescence_time = None
        for t, value in zip(self.jump_times, f):
            if not value:
                self.coalescence_time = t
                break

    def __len__(self):
        return len(self.jump_times)

    def index_at(self, t):
        if not 0 <= t <= self.end_time:
            raise RangeError('t=%r outside [0, %r]' % (t, self.end_time))
        return bisect.bisect_right(self.jump_times, t) - 1

    def disagreement_at(self, t):
        return self.disagreements[self.index_at(t)]

    def coalesced_at(self, t):
        return self.disagreement_at(t) == 0

    def iter_events(self):
        """Yield ``(time, code, location)`` for every jump."""
        for t, (code, loc) in zip(self.jump_times[1:], self.events):
            yield t, code, loc

    def _replay(self, idx):
        parts = {SHARED: dict(self.initial.shared.atoms),
                 EXCL1: dict(self.initial.excl1.atoms),
                 EXCL2: dict(self.initial.excl2.atoms)}
        for code, loc in self.events[:idx]:
            part, sign = _EVENT_EFFECT[code]
            mults = parts[part]
            mults[loc] = mults.get(loc, 0) + sign
            if not mults[loc]:
                del mults[loc]
        return CoupledState(PointConfiguration(parts[SHARED]),
                            PointConfiguration(parts[EXCL1]),
                            PointConfiguration(parts[EXCL2]))

    def state_at(self, t):
        return self._replay(self.index_at(t))

    def marginal(self, chain):
        """The path of chain 1 or 2 as a plain :class:`Trajectory`."""
        if chain not in (1, 2):
            raise DomainError('chain must be 1 or 2')
        own = {1: (DEATH_1, BIRTH_1), 2: (DEATH_2, BIRTH_2)}[chain]
        initial = self.initial.eta1 if chain == 1 else self.initial.eta2
        times, events = [0.0], []
        for t, code, loc in self.iter_events():
            if code in own or code in (DEATH_SHARED, BIRTH_SHARED):
                events.append((_EVENT_EFFECT[code][1], loc))
                times.append(t)
        return Trajectory(initial, times, events, self.end_time)

    def count_at(self, t, chain, region=None):
        state = self.state_at(t)
        eta = state.eta1 if chain == 1 else state.eta2
        return eta.count if region is None else eta.count_in(region)

    def absorption_violations(self):
        """Times at which equal-boundary chains split after coalescing."""
        if not self.same_boundary or self.coalescence_time is None:
            return []
        start = self.disagreements.index(0)
        return [t for t, f in zip(self.jump_times[start:],
                                  self.disagreements[start:]) if f]

    def to_dict(self):
        return {
            'initial': {'shared': self.initial.shared.to_list(),
                        'excl1': self.initial.excl1.to_list(),
                        'excl2': self.initial.excl2.to_list()},
            'jump_times': self.jump_times,
            'events': [[code, list(loc)] for code, loc in self.events],
            'end_time': self.end_time,
            'coalescence_time': self.coalescence_time,
            'metadata': self.metadata,
        }

    def __repr__(self):
        return '<CoupledTrajectory jumps=%d end=%g coalesced=%r>' % (
            len(self.events), self.end_time, self.coalescence_time)


def _check_pair(spec1, spec2):
    if not spec1.gibbs.same_system(spec2.gibbs):
        raise ContractViolation('coupled chains must share activity, '
                                'potential and region')


def simulate_coupled(spec1, spec2, eta1, eta2, t_end, rng):
    """
    Run the identity coupling from ``(eta1, eta2)`` up to ``t_end``.

    ``W_i`` is accumulated as ``(W(x, shared) + W(x, excl_i)) + W(x, xi_i)``
    so that the two chains compute bit-identical influences whenever the
    exclusive points and boundary differences are out of range of ``x``.
    Zero waiting times are nudged to the next float as in :func:`simulate`.
    """
    _check_pair(spec1, spec2)
    if not (t_end >= 0 and math.isfinite(t_end)):
        raise DomainError('t_end must be finite and non-negative')
    spec1.check_start(eta1)
    spec2.check_start(eta2)
    g1, g2 = spec1.gibbs, spec2.gibbs
    dim, region, phi = g1.dim, g1.region, g1.potential
    envelope = spec1.birth_envelope
    start = CoupledState.from_pair(eta1, eta2)
    shared = PointBuffer(dim, start.shared.as_array(dim))
    excl1 = PointBuffer(dim, start.excl1.as_array(dim))
    excl2 = PointBuffer(dim, start.excl2.as_array(dim))
    same_boundary = g1.boundary == g2.boundary

    times, events = [0.0], []
    proposals = ties = 0
    t = 0.0
    while True:
        s, e1, e2 = len(shared), len(excl1), len(excl2)
        deaths = s + e1 + e2
        rate = deaths + envelope
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
        if v < deaths:
            i = min(int(v), deaths - 1)
            if i < s:
                events.append((DEATH_SHARED, shared.pop(i)))
            elif i < s + e1:
                events.append((DEATH_1, excl1.pop(i - s)))
            else:
                events.append((DEATH_2, excl2.pop(i - s - e1)))
            times.append(t)
            continue
        proposals += 1
        x = region.sample(rng)
        w_shared = phi.influence(x, shared.view())
        w1 = (w_shared + phi.influence(x, excl1.view())) + \
            g1.boundary_influence(x)
        w2 = (w_shared + phi.influence(x, excl2.view())) + \
            g2.boundary_influence(x)
        p1 = spec1.acceptance(w1)
        p2 = spec2.acceptance(w2)
        u = rng.random()
        loc = tuple(x.tolist())
        if u < min(p1, p2):
            shared.add(x)
            events.append((BIRTH_SHARED, loc))
        elif u < p1:
            excl1.add(x)
            events.append((BIRTH_1, loc))
        elif u < p2:
            excl2.add(x)
            events.append((BIRTH_2, loc))
        else:
            continue
        times.append(t)

    metadata = {'proposals': proposals, 'ties': ties, 'jumps': len(events)}
    return CoupledTrajectory(start, times, events, t_end, metadata,
                             same_boundary=same_boundary)


def contraction_rate(spec, est):
    """
    ``delta = 1 - lambda e^L (c_hat + abs_error)``. At or above the
    uniqueness threshold the sentinel 0.0 is returned with a warning.
    """
    delta = 1.0 - (spec.activity * math.exp(spec.potential.local_stability)
                   * est.upper)
    if delta <= SENTINEL_SLACK:
        logger.warning('activity %g is at or above the uniqueness threshold '
                       'of %r; no contraction (delta=%.3g)', spec.activity,
                       spec.potential, delta)
        return 0.0
    return delta


def fit_contraction_rate(times, mean_f):
    """Least-squares slope of ``-log E[f(t)]`` against ``t``."""
    pairs = [(t, f) for t, f in zip(times, mean_f) if f > 0]
    if len(pairs) < 2:
        raise InsufficientSamples('need two times with positive mean '
                                  'disagreement to fit a rate')
    ts = np.array([p[0] for p in pairs], dtype=float)
    logs = np.log([p[1] for p in pairs])
    slope, _ = np.polyfit(ts, logs, 1)
    return float(-slope)


def mixing_ceiling(spec, delta, t, start_count=0):
    """``e^{-delta t} (lambda e^L nu(Lambda) + eta(Lambda))``."""
    return math.exp(-delta * t) * (spec.birth_envelope + start_count)


class TVEstimate(object):
    """
    Coupling-based total variation certificates at one time.

    ``non_coalesced`` is the raw ``Pr[eta1(t) != eta2(t)]`` with its Wilson
    interval; the coupling inequality turns it into a TV upper bound up to
    the factor convention (1 or 2) chosen by the report. ``lower_bounds``
    maps each query box to ``max_m |Pr[N_B = m] - Pr'[N_B = m]|``.
    """

    __slots__ = ('t', 'runs', 'non_coalesced', 'interval', 'lower_bounds')

    def __init__(self, t, runs, non_coalesced, interval, lower_bounds):
        self.t = t
        self.runs = runs
        self.non_coalesced = non_coalesced
        self.interval = interval
        self.lower_bounds = lower_bounds

    @property
    def lower_bound(self):
        return max(self.lower_bounds.values()) if self.lower_bounds else 0.0

    @property
    def half_width(self):
        return max(self.non_coalesced - self.interval[0],
                   self.interval[1] - self.non_coalesced)

    def to_dict(self):
        return {'t': self.t, 'runs': self.runs,
                'non_coalesced': self.non_coalesced,
                'ci_low': self.interval[0], 'ci_high': self.interval[1],
                'lower_bound': self.lower_bound}


def count_distance(first, second):
    """``max_m |P1(N = m) - P2(N = m)|`` of two samples of counts."""
    p1 = empirical_pmf(first)
    p2 = empirical_pmf(second)
    return max(abs(p1.get(m, 0.0) - p2.get(m, 0.0)) for m in set(p1) | set(p2))


def count_distance_se(first, second):
    """Binomial SE of :func:`count_distance` at its maximising count."""
    first, second = list(first), list(second)
    n1, n2 = float(len(first)), float(len(second))
    best, se = -1.0, 0.0
    for m in sorted(set(first) | set(second)):
        p1, p2 = first.count(m) / n1, second.count(m) / n2
        if abs(p1 - p2) > best:
            best = abs(p1 - p2)
            se = math.sqrt(p1 * (1 - p1) / n1 + p2 * (1 - p2) / n2)
    return se


def tv_estimates(runs, t, boxes=None):
    """Upper and lower TV certificates from coupled runs at time ``t``."""
    runs = list(runs)
    if not runs:
        raise InsufficientSamples('no coupled runs')
    for run in runs:
        if run.end_time < t:
            raise RangeError('run ends at %g before t=%g' % (run.end_time, t))
    states = [run.state_at(t) for run in runs]
    split = sum(1 for state in states if state.disagreement)
    interval = proportion_interval(split, len(runs))
    lower = {}
    for box in boxes or ():
        first = [state.eta1.count_in(box) for state in states]
        second = [state.eta2.count_in(box) for state in states]
        lower[box] = count_distance(first, second)
    return TVEstimate(t, len(runs), split / float(len(runs)), interval, lower)


def disagreement_profile(runs, times):
    """Rows ``(t, mean f, SE, coalesced fraction)`` over coupled runs."""
    runs = list(runs)
    if not runs:
        raise InsufficientSamples('no coupled runs')
    rows = []
    for t in times:
        f = [run.disagreement_at(t) for run in runs]
        mean, se = mean_and_se(f)
        coalesced = sum(1 for v in f if not v) / float(len(f))
        rows.append((t, mean, se, coalesced))
    return rows
