"""
Finite point configurations (counting measures on R^d), their lattice
operations and the energy functionals built on a pair potential.

Locations compare by exact bit equality of their coordinates: two points
are the same only when one was copied from the other.
"""
import math

import numpy as np

from .compat import json
from .exceptions import ContractViolation, DomainError

__all__ = '''
PointConfiguration
ExtendedEnergy
EMPTY
intersect
union
subtract
sym_diff
restrict
energy
influence
conditional_energy
is_feasible
'''.split()

# energies are floats in (-inf, inf]; +inf marks an infeasible pair
ExtendedEnergy = float

INF = float('inf')


def _location(x):
    return tuple(float(v) for v in np.ravel(x))


class PointConfiguration(object):
    """
    A finite multiset of located points.

    ``PointConfiguration([((0.5,), 2), ((1.0,), 1)])`` holds two points at
    0.5 and one at 1.0. Atoms are kept in canonical (lexicographic) order,
    which fixes the summation order of every energy.
    """

    __slots__ = ('_mults', '_atoms', '_count', '_dim')

    def __init__(self, atoms=()):
        mults = {}
        items = atoms.items() if isinstance(atoms, dict) else atoms
        dim = None
        for loc, mult in items:
            loc = _location(loc)
            if int(mult) != mult or mult < 0:
                raise DomainError('multiplicity must be a non-negative '
                                  'integer, got %r' % (mult,))
            if dim is None:
                dim = len(loc)
            elif len(loc) != dim:
                raise DomainError('mixed dimensions in configuration')
            if mult:
                mults[loc] = mults.get(loc, 0) + int(mult)
        self._mults = mults
        self._atoms = tuple(sorted(mults.items()))
        self._count = sum(mults.values())
        self._dim = dim if mults else None

    @classmethod
    def from_points(cls, points):
        """One unit atom per row/item of ``points`` (repeats accumulate)."""
        return cls((p, 1) for p in points)

    @property
    def atoms(self):
        return self._atoms

    @property
    def count(self):
        return self._count

    @property
    def dim(self):
        return self._dim

    @property
    def support(self):
        return tuple(loc for loc, _ in self._atoms)

    def is_empty(self):
        return not self._count

    def is_simple(self):
        return all(m == 1 for _, m in self._atoms)

    def multiplicity(self, x):
        return self._mults.get(_location(x), 0)

    def points(self):
        """All points with repetition, in canonical order."""
        return [loc for loc, m in self._atoms for _ in range(m)]

    def as_array(self, dim=None):
        dim = dim or self._dim or 1
        pts = self.points()
        if not pts:
            return np.zeros((0, dim))
        return np.array(pts, dtype=float)

    def count_in(self, region):
        return sum(m for loc, m in self._atoms if region.contains(loc))

    def restrict(self, region):
        return PointConfiguration(
            (loc, m) for loc, m in self._atoms if region.contains(loc))

    def add_point(self, x, mult=1):
        return self + PointConfiguration([(x, mult)])

    def remove_point(self, x):
        loc = _location(x)
        if loc not in self._mults:
            raise ContractViolation('%r is not an atom of the configuration'
                                    % (loc,))
        mults = dict(self._mults)
        mults[loc] -= 1
        return PointConfiguration(mults)

    def __add__(self, other):
        mults = dict(self._mults)
        for loc, m in other._atoms:
            mults[loc] = mults.get(loc, 0) + m
        return PointConfiguration(mults)

    def __le__(self, other):
        return all(other._mults.get(loc, 0) >= m for loc, m in self._atoms)

    def __len__(self):
        return self._count

    def __iter__(self):
        return iter(self._atoms)

    def __eq__(self, other):
        if not isinstance(other, PointConfiguration):
            return NotImplemented
        return self._atoms == other._atoms

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash(self._atoms)

    def __reduce__(self):
        return (PointConfiguration, (self._atoms,))

    def to_list(self):
        return [{'coords': list(loc), 'mult': m} for loc, m in self._atoms]

    def to_json(self):
        return json.dumps(self.to_list())

    @classmethod
    def from_list(cls, data):
        return cls((item['coords'], item.get('mult', 1)) for item in data)

    @classmethod
    def from_json(cls, text):
        return cls.from_list(json.loads(text))

    def __repr__(self):
        body = ', '.join(
            '%s:%d' % (loc[0] if len(loc) == 1 else loc, m)
            for loc, m in self._atoms)
        return '<PointConfiguration {%s}>' % body


EMPTY = PointConfiguration()


def intersect(eta, xi):
    return PointConfiguration(
        (loc, min(m, xi._mults[loc]))
        for loc, m in eta._atoms if loc in xi._mults)


def union(eta, xi):
    mults = dict(eta._mults)
    for loc, m in xi._atoms:
        mults[loc] = max(mults.get(loc, 0), m)
    return PointConfiguration(mults)


def subtract(eta, xi):
    return PointConfiguration(
        (loc, max(0, m - xi._mults.get(loc, 0))) for loc, m in eta._atoms)


def sym_diff(eta, xi):
    return subtract(eta, xi) + subtract(xi, eta)


def restrict(eta, region):
    return eta.restrict(region)


def _sum(terms):
    # compensated summation; a single +inf term dominates
    for t in terms:
        if t == INF:
            return INF
    return math.fsum(terms)


def energy(eta, phi):
    """
    ``H(eta)``: phi summed over unordered pairs of distinct points, counted
    with multiplicity (an atom of multiplicity m adds m(m-1)/2 self pairs).
    """
    atoms = eta.atoms
    terms = []
    for i, (x, mx) in enumerate(atoms):
        if mx > 1:
            value = phi.evaluate(x, x)
            if value == INF:
                return INF
            terms.append(mx * (mx - 1) / 2.0 * value)
        for y, my in atoms[i + 1:]:
            value = phi.evaluate(x, y)
            if value == INF:
                return INF
            terms.append(mx * my * value)
    return _sum(terms)


def influence(x, eta, phi):
    """``W(x, eta) = sum_y phi(x, y) eta(dy)``."""
    terms = []
    for y, m in eta.atoms:
        value = phi.evaluate(x, y)
        if value == INF:
            return INF
        terms.append(m * value)
    return _sum(terms)


def conditional_energy(eta, xi, region, phi):
    """
    ``H_Lambda(eta | xi)`` through the decomposition

        1/2 sum_{x in eta} W(x, eta - delta_x) + sum_{x in eta} W(x, xi_out)

    where ``xi_out`` is the part of ``xi`` outside ``region``.
    """
    for loc, _ in eta.atoms:
        if not region.contains(loc):
            raise ContractViolation('%r lies outside %r' % (loc, region))
    outside = PointConfiguration(
        (loc, m) for loc, m in xi.atoms if not region.contains(loc))
    inner, cross = [], []
    for x, m in eta.atoms:
        w_in = influence(x, eta.remove_point(x), phi)
        w_out = influence(x, outside, phi)
        if w_in == INF or w_out == INF:
            return INF
        inner.append(m * w_in)
        cross.append(m * w_out)
    return _sum([0.5 * _sum(inner), _sum(cross)])


def is_feasible(eta, phi):
    """True iff no pair of points (with multiplicity) has infinite energy."""
    atoms = eta.atoms
    for i, (x, mx) in enumerate(atoms):
        if mx > 1 and phi.evaluate(x, x) == INF:
            return False
        for y, _ in atoms[i + 1:]:
            if phi.evaluate(x, y) == INF:
                return False
    return True
