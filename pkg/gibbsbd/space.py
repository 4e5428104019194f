"""
Axis-aligned geometry of R^d and the box grid used by the disagreement
percolation experiments.

A :class:`BoxGrid` of radius ``n`` and cell size ``R`` has the vertex set
``V_n = {k in Z^d : |k|_inf <= n}``. Vertex ``k`` owns the closed cube of
side ``R`` centred at ``R * k``; two vertices are adjacent when their
sup-norm distance is exactly one.
"""
import itertools
import math

import numpy as np

from .exceptions import DomainError

__all__ = '''
BoxRegion
BoxGrid
INNER
OUTER
volume
box_of_index
neighbors
classify_vertex
'''.split()

INNER = 'inner'
OUTER = 'outer'


class BoxRegion(object):
    """
    A bounded closed box ``[lower_1, upper_1] x ... x [lower_d, upper_d]``.

    Instances are immutable values and compare by their corners.
    """

    __slots__ = ('lower', 'upper')

    def __init__(self, lower, upper):
        lower = tuple(float(v) for v in lower)
        upper = tuple(float(v) for v in upper)
        if not lower or len(lower) != len(upper):
            raise DomainError('lower and upper must be non-empty and of '
                              'equal length')
        for lo, hi in zip(lower, upper):
            if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                raise DomainError('invalid box side [%r, %r]' % (lo, hi))
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)

    def __setattr__(self, key, value):
        raise AttributeError('BoxRegion is immutable')

    def __reduce__(self):
        return (BoxRegion, (self.lower, self.upper))

    @classmethod
    def cube(cls, dim, half_width, center=None):
        center = (0.0,) * dim if center is None else tuple(center)
        return cls([c - half_width for c in center],
                   [c + half_width for c in center])

    @property
    def dim(self):
        return len(self.lower)

    @property
    def sides(self):
        return tuple(hi - lo for lo, hi in zip(self.lower, self.upper))

    @property
    def volume(self):
        return math.prod(self.sides)

    @property
    def center(self):
        return tuple((lo + hi) / 2.0 for lo, hi in zip(self.lower, self.upper))

    def contains(self, x):
        return all(lo <= v <= hi for v, lo, hi in zip(x, self.lower, self.upper))

    __contains__ = contains

    def distance_to(self, x):
        """Euclidean distance from ``x`` to the closed box (0 inside)."""
        total = 0.0
        for v, lo, hi in zip(x, self.lower, self.upper):
            if v < lo:
                total += (lo - v) ** 2
            elif v > hi:
                total += (v - hi) ** 2
        return math.sqrt(total)

    def expand(self, margin):
        return BoxRegion([lo - margin for lo in self.lower],
                         [hi + margin for hi in self.upper])

    def sample(self, rng, size=None):
        """Uniform point(s) in the box drawn from a numpy Generator."""
        if size is None:
            return rng.uniform(self.lower, self.upper)
        return rng.uniform(self.lower, self.upper, size=(size, self.dim))

    def to_dict(self):
        return {'dim': self.dim, 'lower': list(self.lower),
                'upper': list(self.upper)}

    @classmethod
    def from_dict(cls, data):
        region = cls(data['lower'], data['upper'])
        if 'dim' in data and int(data['dim']) != region.dim:
            raise DomainError('dim %r does not match corners' % data['dim'])
        return region

    def __eq__(self, other):
        if not isinstance(other, BoxRegion):
            return NotImplemented
        return self.lower == other.lower and self.upper == other.upper

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash((self.lower, self.upper))

    def __repr__(self):
        return '<BoxRegion %s>' % ' x '.join(
            '[%g, %g]' % side for side in zip(self.lower, self.upper))


class BoxGrid(object):
    """
    The grid ``V_n`` of boxes ``Lambda_k`` with side ``cell_size`` covering
    ``[-(n + 1/2) R, (n + 1/2) R]^d``.
    """

    __slots__ = ('dim', 'cell_size', 'radius')

    def __init__(self, dim, cell_size, radius):
        if int(dim) != dim or dim < 1:
            raise DomainError('dim must be a positive integer')
        if not cell_size > 0 or not math.isfinite(cell_size):
            raise DomainError('cell_size must be positive')
        if int(radius) != radius or radius < 0:
            raise DomainError('radius must be a non-negative integer')
        object.__setattr__(self, 'dim', int(dim))
        object.__setattr__(self, 'cell_size', float(cell_size))
        object.__setattr__(self, 'radius', int(radius))

    def __setattr__(self, key, value):
        raise AttributeError('BoxGrid is immutable')

    def __reduce__(self):
        return (BoxGrid, (self.dim, self.cell_size, self.radius))

    def __len__(self):
        return (2 * self.radius + 1) ** self.dim

    def __contains__(self, k):
        return (len(k) == self.dim
                and all(int(c) == c for c in k)
                and max(abs(c) for c in k) <= self.radius)

    def check(self, k):
        k = tuple(k)
        if k not in self:
            raise DomainError('%r is not a vertex of V_%d in dimension %d' % (
                k, self.radius, self.dim))
        return tuple(int(c) for c in k)

    def vertices(self):
        side = range(-self.radius, self.radius + 1)
        return itertools.product(side, repeat=self.dim)

    def inner_vertices(self):
        return (k for k in self.vertices() if self._norm(k) < self.radius)

    def outer_vertices(self):
        return (k for k in self.vertices() if self._norm(k) == self.radius)

    @staticmethod
    def _norm(k):
        return max(abs(c) for c in k) if k else 0

    def box_of_index(self, k):
        k = self.check(k)
        half = self.cell_size / 2.0
        return BoxRegion([self.cell_size * c - half for c in k],
                         [self.cell_size * c + half for c in k])

    def neighbors(self, k):
        k = self.check(k)
        found = set()
        for step in itertools.product((-1, 0, 1), repeat=self.dim):
            if not any(step):
                continue
            j = tuple(a + b for a, b in zip(k, step))
            if self._norm(j) <= self.radius:
                found.add(j)
        return found

    def classify_vertex(self, k):
        k = self.check(k)
        return OUTER if self._norm(k) == self.radius else INNER

    def region(self):
        """The union ``Lambda^(n)`` of all boxes."""
        half = (self.radius + 0.5) * self.cell_size
        return BoxRegion.cube(self.dim, half)

    def index_of_point(self, x):
        """
        The lexicographically smallest vertex whose closed box contains
        ``x``, or None if ``x`` lies outside the grid.
        """
        k = tuple(int(math.ceil(v / self.cell_size - 0.5)) for v in x)
        if self._norm(k) > self.radius:
            return None
        return k

    def indices_of_points(self, points):
        """Vectorized :meth:`index_of_point` for an ``(m, d)`` array."""
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        idx = np.ceil(points / self.cell_size - 0.5).astype(int)
        inside = np.abs(idx).max(axis=1, initial=0) <= self.radius
        return [tuple(int(c) for c in row) if ok else None
                for row, ok in zip(idx, inside)]

    def to_dict(self):
        return {'dim': self.dim, 'R': self.cell_size, 'n': self.radius}

    @classmethod
    def from_dict(cls, data):
        return cls(data['dim'], data['R'], data['n'])

    def __eq__(self, other):
        if not isinstance(other, BoxGrid):
            return NotImplemented
        return (self.dim, self.cell_size, self.radius) == (
            other.dim, other.cell_size, other.radius)

    def __hash__(self):
        return hash((self.dim, self.cell_size, self.radius))

    def __repr__(self):
        return '<BoxGrid d=%d R=%g n=%d>' % (
            self.dim, self.cell_size, self.radius)


def volume(region):
    return region.volume


def box_of_index(grid, k):
    return grid.box_of_index(k)


def neighbors(grid, k):
    return grid.neighbors(k)


def classify_vertex(grid, k):
    return grid.classify_vertex(k)
