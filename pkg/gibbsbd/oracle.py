"""
Brute-force ground truth on discretized instances.

The region is cut into a uniform grid of cells. Each cell holds at most
``capacity`` points, all placed at the cell centre. The induced birth-death
chain on occupancy vectors has per-point death rate one and birth rate
``lambda vol e^{-W(centre, state + xi)}`` per cell. It is reversible with
respect to the discrete Gibbs weights

    prod_i (lambda vol)^{o_i} / o_i!  *  e^{-H(o)}

so its stationary law is known both by solving ``pi Q = 0`` and in closed
form; the two must agree. Simulated paths are checked against the same
reversibility by counting their jumps between occupancy vectors in both
directions.
"""
import itertools
import logging
import math

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import expm_multiply

from .exceptions import (ContractViolation, InsufficientSamples,
                         OracleMismatch, StateSpaceTooLarge)
from .space import BoxRegion
from .stats import pooled_chi_square, total_variation

__all__ = '''
DiscretizedInstance
DiscreteChain
OracleComparison
FluxBalance
OVERFLOW
STATE_CAP
discretize
exact_stationary
coarsen
compare_to_simulation
occupancy_flux
merge_flux
coalescence_probability
'''.split()

logger = logging.getLogger(__name__)

INF = float('inf')

STATE_CAP = 10 ** 6
MATCH_TOL = 1e-10

# occupancy outside the discrete state space (too many points in a cell or
# a discretely infeasible pattern)
OVERFLOW = 'overflow'


class DiscretizedInstance(object):
    """
    A :class:`~gibbsbd.GibbsSpec` on a grid of ``cells_per_dim ** d`` cells,
    ordered like ``itertools.product`` over the axes.
    """

    def __init__(self, spec, cells_per_dim, capacity=1, cap=STATE_CAP):
        if int(cells_per_dim) != cells_per_dim or cells_per_dim < 1:
            raise ContractViolation('cells_per_dim must be a positive integer')
        if int(capacity) != capacity or capacity < 1:
            raise ContractViolation('capacity must be a positive integer')
        self.spec = spec
        self.cells_per_dim = int(cells_per_dim)
        self.capacity = int(capacity)
        region = spec.region
        self.widths = np.array(region.sides) / self.cells_per_dim
        self.cell_volume = float(np.prod(self.widths))
        axes = [[lo + (j + 0.5) * w for j in range(self.cells_per_dim)]
                for lo, w in zip(region.lower, self.widths)]
        self.centers = np.array(list(itertools.product(*axes)), dtype=float)
        self.cells = [
            BoxRegion(c - self.widths / 2.0, c + self.widths / 2.0)
            for c in self.centers]

        phi = spec.potential
        n = len(self.centers)
        pair = np.zeros((n, n))
        for i in range(n):
            pair[i, i] = phi.evaluate(self.centers[i], self.centers[i])
            for j in range(i + 1, n):
                pair[i, j] = pair[j, i] = phi.evaluate(self.centers[i],
                                                       self.centers[j])
        self.pair = pair
        self.field = np.array([spec.boundary_influence(c)
                               for c in self.centers], dtype=float)
        self.birth_weight = spec.activity * self.cell_volume
        self.states = self._enumerate(cap)
        self.index = {s: i for i, s in enumerate(self.states)}

    @property
    def n_cells(self):
        return len(self.centers)

    def __len__(self):
        return len(self.states)

    def _enumerate(self, cap):
        """Feasible occupancy vectors: exactly the component reachable from
        the empty state."""
        n, c = self.n_cells, self.capacity
        finite = np.isfinite(self.pair)
        open_cell = np.isfinite(self.field)
        occ = [0] * n
        states = []

        def fill(i):
            if i == n:
                states.append(tuple(occ))
                if len(states) > cap:
                    raise StateSpaceTooLarge(
                        'more than %d feasible states; use fewer cells or a '
                        'lower capacity' % cap)
                return
            fill(i + 1)
            if open_cell[i] and all(finite[i, j] for j in range(i) if occ[j]):
                for v in range(1, c + 1):
                    if v >= 2 and not finite[i, i]:
                        break
                    occ[i] = v
                    fill(i + 1)
                occ[i] = 0

        fill(0)
        return sorted(states)

    def influence(self, i, occ):
        """``W(centre_i, state + xi)`` with same-cell points included."""
        occ = np.asarray(occ)
        mask = occ > 0
        values = self.pair[i, mask]
        if np.any(np.isinf(values)) or math.isinf(self.field[i]):
            return INF
        return float(occ[mask] @ values) + float(self.field[i])

    def birth_rate(self, i, occ):
        if occ[i] >= self.capacity:
            return 0.0
        w = self.influence(i, occ)
        return 0.0 if w == INF else self.birth_weight * math.exp(-w)

    def energy(self, occ):
        total = 0.0
        occupied = [i for i, o in enumerate(occ) if o]
        for a, i in enumerate(occupied):
            terms = [occ[i] * (occ[i] - 1) / 2.0 * self.pair[i, i]
                     if occ[i] > 1 else 0.0, occ[i] * self.field[i]]
            terms.extend(occ[i] * occ[j] * self.pair[i, j]
                         for j in occupied[a + 1:])
            for term in terms:
                if term == INF:
                    return INF
                total += term
        return total

    def gibbs_weight(self, occ):
        h = self.energy(occ)
        if h == INF:
            return 0.0
        w = math.exp(-h)
        for o in occ:
            w *= self.birth_weight ** o / math.factorial(o)
        return w

    def cell_of(self, x):
        region = self.spec.region
        idx = []
        for v, lo, w in zip(x, region.lower, self.widths):
            j = int(math.floor((v - lo) / w))
            idx.append(min(max(j, 0), self.cells_per_dim - 1))
        return int(np.ravel_multi_index(idx, (self.cells_per_dim,) *
                                        len(idx)))

    def occupancy(self, eta):
        """Occupancy vector of a continuous configuration, or OVERFLOW."""
        occ = [0] * self.n_cells
        for loc, m in eta.atoms:
            occ[self.cell_of(loc)] += m
        occ = tuple(occ)
        return occ if occ in self.index else OVERFLOW

    def to_dict(self):
        return {'cells_per_dim': self.cells_per_dim,
                'capacity': self.capacity, 'cells': self.n_cells,
                'states': len(self.states),
                'cell_volume': self.cell_volume}

    def __repr__(self):
        return '<DiscretizedInstance cells=%d capacity=%d states=%d>' % (
            self.n_cells, self.capacity, len(self.states))


def discretize(spec, cells_per_dim, capacity=1, cap=STATE_CAP):
    return DiscretizedInstance(spec, cells_per_dim, capacity, cap)


def _transitions(inst, occ):
    """Yield ``(target, rate)`` for the births and deaths out of ``occ``."""
    for i in range(inst.n_cells):
        if occ[i]:
            target = occ[:i] + (occ[i] - 1,) + occ[i + 1:]
            yield target, float(occ[i])
        rate = inst.birth_rate(i, occ)
        if rate > 0:
            target = occ[:i] + (occ[i] + 1,) + occ[i + 1:]
            yield target, rate


class DiscreteChain(object):
    """Generator, solved stationary law and closed-form Gibbs weights."""

    def __init__(self, instance, generator, pi, gibbs_weights, residual):
        self.instance = instance
        self.generator = generator
        self.pi = pi
        self.gibbs_weights = gibbs_weights
        self.residual = residual

    @property
    def states(self):
        return self.instance.states

    @property
    def empty_probability(self):
        return float(self.pi[self.instance.index[(0,) * self.instance.n_cells]])

    def probability(self, occ):
        idx = self.instance.index.get(tuple(occ))
        return 0.0 if idx is None else float(self.pi[idx])

    def distribution(self):
        return {s: float(p) for s, p in zip(self.states, self.pi)}

    def marginals(self):
        """``(cells, capacity + 1)`` array of ``Pr[o_i = v]``."""
        inst = self.instance
        out = np.zeros((inst.n_cells, inst.capacity + 1))
        for s, p in zip(self.states, self.pi):
            for i, o in enumerate(s):
                out[i, o] += p
        return out

    def count_distribution(self):
        dist = {}
        for s, p in zip(self.states, self.pi):
            n = sum(s)
            dist[n] = dist.get(n, 0.0) + float(p)
        return dist

    def to_dict(self):
        return {'instance': self.instance.to_dict(),
                'residual': self.residual,
                'states': [list(s) for s in self.states],
                'pi': [float(p) for p in self.pi]}


def exact_stationary(inst):
    """
    Build the generator, solve ``pi Q = 0, sum pi = 1`` densely and
    cross-check against the normalized Gibbs weights.
    """
    size = len(inst.states)
    Q = np.zeros((size, size))
    for a, occ in enumerate(inst.states):
        for target, rate in _transitions(inst, occ):
            b = inst.index.get(target)
            if b is not None:
                Q[a, b] += rate
        Q[a, a] = -Q[a].sum()
    A = Q.T.copy()
    A[-1, :] = 1.0
    rhs = np.zeros(size)
    rhs[-1] = 1.0
    try:
        pi = linalg.solve(A, rhs)
    except np.linalg.LinAlgError as e:
        raise OracleMismatch('generator of %r has no unique stationary law: '
                             '%s' % (inst, e))
    residual = float(np.abs(pi @ Q).max()) if size else 0.0

    weights = np.array([inst.gibbs_weight(s) for s in inst.states])
    weights /= weights.sum()
    mismatch = float(np.abs(pi - weights).max())
    if mismatch > MATCH_TOL or residual > MATCH_TOL:
        raise OracleMismatch('stationary solve disagrees with the Gibbs '
                             'weights by %.3g (residual %.3g)'
                             % (mismatch, residual))
    logger.debug('oracle solved %d states, residual %.2g', size, residual)
    return DiscreteChain(inst, Q, pi, weights, residual)


def coarsen(fine_chain, coarse):
    """Push the law of a refined chain onto the occupancy space of
    ``coarse``; mass that does not fit lands on OVERFLOW."""
    fine = fine_chain.instance
    cell_map = [coarse.cell_of(c) for c in fine.centers]
    dist = {}
    for s, p in zip(fine.states, fine_chain.pi):
        occ = [0] * coarse.n_cells
        for i, o in enumerate(s):
            occ[cell_map[i]] += o
        key = tuple(occ)
        if key not in coarse.index:
            key = OVERFLOW
        dist[key] = dist.get(key, 0.0) + float(p)
    return dist


class OracleComparison(object):
    __slots__ = ('samples', 'tv', 'chi2', 'p_value', 'dof', 'overflow',
                 'discretization', 'tolerance', 'empirical')

    def __init__(self, samples, tv, chi2, p_value, dof, overflow,
                 discretization, tolerance, empirical):
        self.samples = samples
        self.tv = tv
        self.chi2 = chi2
        self.p_value = p_value
        self.dof = dof
        self.overflow = overflow
        self.discretization = discretization
        self.tolerance = tolerance
        self.empirical = empirical

    @property
    def passed(self):
        return self.tv <= self.tolerance + (self.discretization or 0.0)

    def to_dict(self):
        return {'samples': self.samples, 'tv': self.tv, 'chi2': self.chi2,
                'p_value': self.p_value, 'dof': self.dof,
                'overflow': self.overflow,
                'discretization': self.discretization,
                'tolerance': self.tolerance, 'passed': self.passed}


def discretization_term(inst, chain=None):
    """``2 TV(pi_h, coarsened pi_{h/2})``, or None if the refinement is over
    the state cap."""
    if chain is None:
        chain = exact_stationary(inst)
    try:
        fine = DiscretizedInstance(inst.spec, 2 * inst.cells_per_dim,
                                   inst.capacity)
    except StateSpaceTooLarge:
        logger.warning('skipped discretization refinement of %r: state '
                       'space too large', inst)
        return None
    coarse_law = coarsen(exact_stationary(fine), inst)
    return 2.0 * total_variation(chain.distribution(), coarse_law)


def compare_to_simulation(inst, chain, samples, tolerance=0.02, refine=True,
                          min_expected=5.0):
    """
    Compare continuous samples (PointConfigurations, e.g. ``state_at(t)`` of
    many runs) with the discrete stationary law by total variation and a
    pooled chi-square test.
    """
    samples = list(samples)
    if not samples:
        raise InsufficientSamples('no samples to compare')
    counts = {}
    for eta in samples:
        key = inst.occupancy(eta)
        counts[key] = counts.get(key, 0) + 1
    total = float(len(samples))
    empirical = {k: c / total for k, c in counts.items()}
    tv = total_variation(empirical, chain.distribution())

    observed = [counts.get(s, 0) for s in chain.states]
    expected = list(chain.pi)
    overflow = counts.get(OVERFLOW, 0)
    if overflow:
        observed.append(overflow)
        expected.append(0.0)
    if total * max(expected) < min_expected:
        raise InsufficientSamples('%d samples are too few for a chi-square '
                                  'test' % len(samples))
    chi2, p_value, dof = pooled_chi_square(observed, expected, min_expected)
    term = discretization_term(inst, chain) if refine else None
    return OracleComparison(len(samples), tv, chi2, p_value, dof,
                            overflow / total, term, tolerance, empirical)


def occupancy_flux(inst, traj, burn_in=0.0):
    """
    Count the jumps of a continuous trajectory between occupancy vectors of
    ``inst``, keyed ``(before, after)``. Jumps before ``burn_in`` are
    skipped; vectors over capacity are counted as they are.
    """
    occ = [0] * inst.n_cells
    for loc, m in traj.initial.atoms:
        occ[inst.cell_of(loc)] += m
    tally = {}
    for t, (sign, loc) in zip(traj.jump_times[1:], traj.events):
        before = tuple(occ)
        occ[inst.cell_of(loc)] += sign
        if t >= burn_in:
            key = (before, tuple(occ))
            tally[key] = tally.get(key, 0) + 1
    return tally


def merge_flux(tallies):
    merged = {}
    for tally in tallies:
        for key, n in tally.items():
            merged[key] = merged.get(key, 0) + n
    return merged


class FluxBalance(object):
    """
    Jump counts between occupancy classes in both directions.

    A reversible chain in equilibrium crosses from A to B as often as from
    B to A, so ``(n_AB - n_BA) / sqrt(n_AB + n_BA)`` is scored per pair and
    every score must stay within ``z``.
    """

    __slots__ = ('rows', 'z')

    def __init__(self, tally, z):
        pairs = {}
        for (a, b), n in tally.items():
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            forward, backward = pairs.get(key, (0, 0))
            if key[0] == a:
                forward += n
            else:
                backward += n
            pairs[key] = (forward, backward)
        self.rows = [(a, b, f, r, (f - r) / math.sqrt(f + r))
                     for (a, b), (f, r) in sorted(pairs.items())]
        self.z = z

    @property
    def jumps(self):
        return sum(f + r for _, _, f, r, _ in self.rows)

    @property
    def worst(self):
        return max([abs(row[4]) for row in self.rows] or [0.0])

    @property
    def passed(self):
        return self.worst <= self.z

    def to_dict(self):
        return {'pairs': len(self.rows), 'jumps': self.jumps,
                'worst': self.worst, 'z': self.z, 'passed': self.passed}


def _coupled_moves(inst1, inst2, o1, o2):
    """Identity-coupling transitions between pairs of occupancy vectors."""
    for i in range(inst1.n_cells):
        s = min(o1[i], o2[i])
        e1, e2 = o1[i] - s, o2[i] - s
        down1 = o1[:i] + (o1[i] - 1,) + o1[i + 1:]
        down2 = o2[:i] + (o2[i] - 1,) + o2[i + 1:]
        if s:
            yield (down1, down2), float(s)
        if e1:
            yield (down1, o2), float(e1)
        if e2:
            yield (o1, down2), float(e2)
        b1 = inst1.birth_rate(i, o1)
        b2 = inst2.birth_rate(i, o2)
        up1 = o1[:i] + (o1[i] + 1,) + o1[i + 1:]
        up2 = o2[:i] + (o2[i] + 1,) + o2[i + 1:]
        both = min(b1, b2)
        if both > 0:
            yield (up1, up2), both
        if b1 > both:
            yield (up1, o2), b1 - both
        if b2 > both:
            yield (o1, up2), b2 - both


def coalescence_probability(inst1, inst2, start1, start2, t, cap=STATE_CAP):
    """
    Exact ``Pr[eta1(t) == eta2(t)]`` for the identity coupling of two
    discretized chains that differ only in their boundary.
    """
    if not inst1.spec.same_system(inst2.spec) or \
            inst1.cells_per_dim != inst2.cells_per_dim or \
            inst1.capacity != inst2.capacity:
        raise ContractViolation('coupled instances must share activity, '
                                'potential, region and cells')
    pairs = [(a, b) for a in inst1.states for b in inst2.states]
    if len(pairs) > cap:
        raise StateSpaceTooLarge('%d coupled states exceed the cap of %d'
                                 % (len(pairs), cap))
    index = {p: i for i, p in enumerate(pairs)}
    rows, cols, vals = [], [], []
    for a, (o1, o2) in enumerate(pairs):
        out = 0.0
        for target, rate in _coupled_moves(inst1, inst2, o1, o2):
            b = index.get(target)
            if b is not None:
                rows.append(a)
                cols.append(b)
                vals.append(rate)
                out += rate
        rows.append(a)
        cols.append(a)
        vals.append(-out)
    Q = sparse.csr_matrix((vals, (rows, cols)), shape=(len(pairs),) * 2)
    start = np.zeros(len(pairs))
    start[index[(tuple(start1), tuple(start2))]] = 1.0
    law = expm_multiply(Q.T * t, start)
    return float(sum(law[i] for i, (o1, o2) in enumerate(pairs) if o1 == o2))
