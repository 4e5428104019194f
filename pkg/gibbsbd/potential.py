"""
Pair potentials with their certified constants.

A potential carries its range ``R`` (phi vanishes at distance >= R), its
local stability constant ``L`` (adding a point to a feasible configuration
lowers the energy by at most L) and, through
:func:`weak_temperedness_constant`, an estimate of

    C_hat = sup_x  integral of 1 - exp(-|phi(x, y)|) dy

from which the uniqueness threshold ``1 / (e^L C_hat)`` follows.

Values live in the extended reals ``(-inf, inf]``: a hard core is
``float('inf')`` and ``exp(-inf)`` is exactly ``0.0``.
"""
import logging
import math

import numpy as np
from scipy import integrate, special
from scipy.spatial.distance import pdist, cdist

from .exceptions import DomainError, InvalidFieldValue, ValidationError

__all__ = '''
PotentialSpec
TemperednessEstimate
BUILTIN_KINDS
make_builtin
make_custom
hard_sphere
strauss
square_well
zero_potential
scale_potential
packing_bound
ball_volume
sphere_surface
weak_temperedness_constant
uniqueness_threshold
penrose_ruelle_threshold
cluster_expansion_threshold
analyticity_threshold
threshold_report
'''.split()

logger = logging.getLogger(__name__)

INF = float('inf')


def _hard_sphere(dist, r):
    return np.where(dist < r, INF, 0.0)


def _strauss(dist, r, beta):
    return np.where(dist < r, float(beta), 0.0)


def _square_well(dist, r0, R, a):
    out = np.where(dist < R, -float(a), 0.0)
    out[dist < r0] = INF
    return out


def _zero(dist):
    return np.zeros_like(dist, dtype=float)


# kind -> (profile, parameter names passed to it)
_PROFILES = {
    'hard_sphere': (_hard_sphere, ('r',)),
    'strauss': (_strauss, ('r', 'beta')),
    'square_well': (_square_well, ('r0', 'R', 'a')),
    'zero': (_zero, ()),
}

BUILTIN_KINDS = tuple(sorted(_PROFILES))


def ball_volume(dim, radius=1.0):
    return math.pi ** (dim / 2.0) / special.gamma(dim / 2.0 + 1.0) * radius ** dim


def sphere_surface(dim):
    """Surface area of the unit sphere in R^dim (2 for dim=1)."""
    return 2.0 * math.pi ** (dim / 2.0) / special.gamma(dim / 2.0)


def packing_bound(dim, r0, R):
    """
    Volume-division bound on the number of hard cores (pairwise distance
    >= r0) that fit in the shell ``r0 <= |y - x| < R``: the shell volume
    divided by the volume of a cube of side ``r0 / sqrt(d)``.
    """
    shell = ball_volume(dim, R) - ball_volume(dim, r0)
    cube = (r0 / math.sqrt(dim)) ** dim
    return int(math.floor(shell / cube * (1.0 + 1e-12)))


class PotentialSpec(object):
    """
    A symmetric pair potential on R^dim.

    Built-in kinds are translation and rotation invariant and are evaluated
    through a radial profile ``phi(|x - y|)``; custom potentials provide
    either such a profile or a general ``evaluate(x, y)`` callable.
    ``scale`` multiplies every finite value (inverse temperature folding).
    """

    __slots__ = ('dim', 'kind', 'params', 'range', 'local_stability',
                 'certified', 'scale', 'breakpoints', '_evaluate', '_profile')

    def __init__(self, dim, kind, params, range_, local_stability,
                 certified=True, scale=1.0, breakpoints=(),
                 evaluate=None, profile=None):
        if int(dim) != dim or dim < 1:
            raise DomainError('dim must be a positive integer')
        if not (range_ >= 0 and math.isfinite(range_)):
            raise DomainError('range must be finite and non-negative')
        if not (local_stability >= 0 and math.isfinite(local_stability)):
            raise DomainError('local stability must be finite and '
                              'non-negative')
        if not scale >= 0:
            raise DomainError('scale must be non-negative')
        self.dim = int(dim)
        self.kind = kind
        self.params = dict(params)
        self.range = float(range_)
        self.local_stability = float(local_stability)
        self.certified = bool(certified)
        self.scale = float(scale)
        self.breakpoints = tuple(sorted(float(b) for b in breakpoints
                                        if 0 < b < range_))
        self._evaluate = evaluate
        self._profile = profile

    @property
    def is_radial(self):
        return self.kind in _PROFILES or self._profile is not None

    @property
    def core_radius(self):
        """Hard-core diameter for the built-in kinds that have one."""
        if self.kind == 'hard_sphere':
            return self.params['r']
        if self.kind == 'square_well':
            return self.params['r0']
        return None

    def _scaled(self, values):
        if self.scale == 1.0:
            return values
        finite = np.isfinite(values)
        return np.where(finite, values * self.scale if self.scale else 0.0,
                        values)

    def profile(self, dist):
        """phi as a function of the distance, vectorized over ``dist``."""
        dist = np.asarray(dist, dtype=float)
        if self.kind in _PROFILES:
            fn, names = _PROFILES[self.kind]
            values = fn(dist, *[self.params[n] for n in names])
        elif self._profile is not None:
            values = np.asarray(
                np.vectorize(self._profile, otypes=[float])(dist), dtype=float)
            values = np.where(dist >= self.range, 0.0, values)
        else:
            raise DomainError('potential %r has no radial profile' % self.kind)
        return self._scaled(self._checked(values))

    @staticmethod
    def _checked(values):
        if np.any(np.isneginf(values)) or np.any(np.isnan(values)):
            raise DomainError('potential values must lie in (-inf, inf]')
        return values

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.is_radial:
            return float(self.profile(np.linalg.norm(x - y))[()])
        value = np.asarray([self._raw(x, y)], dtype=float)
        return float(self._scaled(self._checked(value))[0])

    def _raw(self, x, y):
        if np.linalg.norm(x - y) >= self.range:
            return 0.0
        return float(self._evaluate(x, y))

    def interactions(self, x, points):
        """Array of ``phi(x, y)`` over the rows ``y`` of ``points``."""
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        if not len(points):
            return np.zeros(0)
        if self.is_radial:
            return self.profile(np.sqrt(((points - x) ** 2).sum(axis=1)))
        x = np.asarray(x, dtype=float)
        values = np.array([self._raw(x, y) for y in points], dtype=float)
        return self._scaled(self._checked(values))

    def influence(self, x, points):
        """``W(x, eta) = sum_y phi(x, y)`` for an array of points."""
        values = self.interactions(x, points)
        return float(values.sum()) if len(values) else 0.0

    def pair_values(self, points):
        """Condensed vector of phi over the unordered pairs of ``points``."""
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        if len(points) < 2:
            return np.zeros(0)
        if self.is_radial:
            return self.profile(pdist(points))
        values = [self._raw(points[i], points[j])
                  for i in range(len(points))
                  for j in range(i + 1, len(points))]
        return self._scaled(self._checked(np.array(values, dtype=float)))

    def pair_energy(self, points):
        values = self.pair_values(points)
        return float(values.sum()) if len(values) else 0.0

    def cross_energy(self, points, others):
        """``sum_{x in points, y in others} phi(x, y)``."""
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        others = np.asarray(others, dtype=float).reshape(-1, self.dim)
        if not len(points) or not len(others):
            return 0.0
        if self.is_radial:
            return float(self.profile(cdist(points, others)).sum())
        return float(sum(self.influence(x, others) for x in points))

    def to_dict(self):
        data = {'kind': self.kind, 'dim': self.dim}
        data.update(self.params)
        data['range'] = self.range
        data['local_stability'] = self.local_stability
        data['certified'] = self.certified
        if self.scale != 1.0:
            data['scale'] = self.scale
        return data

    def __eq__(self, other):
        if not isinstance(other, PotentialSpec):
            return NotImplemented
        return (self.dim, self.kind, self.params, self.range,
                self.local_stability, self.scale, self._evaluate,
                self._profile) == (
            other.dim, other.kind, other.params, other.range,
            other.local_stability, other.scale, other._evaluate,
            other._profile)

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash((self.dim, self.kind, self.range, self.local_stability))

    def __repr__(self):
        params = ', '.join('%s=%g' % kv for kv in sorted(self.params.items()))
        return '<PotentialSpec %s(d=%d%s) R=%g L=%g>' % (
            self.kind, self.dim, ', ' + params if params else '',
            self.range, self.local_stability)


def _require(errors, ok, name, message):
    if not ok:
        errors.append((name, message))


def make_builtin(kind, dim=1, **params):
    """
    Build one of the standard potentials.

    hard_sphere(r), strauss(r, beta), square_well(r0, R, a, L_bound), zero().
    Every inconsistent parameter is reported in a single ValidationError.
    """
    if kind not in _PROFILES:
        raise InvalidFieldValue('unknown potential kind %r, expected one '
                                'of %s' % (kind, ', '.join(BUILTIN_KINDS)))
    errors = []
    _require(errors, int(dim) == dim and dim >= 1, 'dim',
             'must be a positive integer')
    expected = {'hard_sphere': {'r'}, 'strauss': {'r', 'beta'},
                'square_well': {'r0', 'R', 'a', 'L_bound'}, 'zero': set()}
    missing = expected[kind] - set(params)
    for name in sorted(missing):
        errors.append((name, 'required for %s' % kind))
    for name in sorted(set(params) - expected[kind]):
        errors.append((name, 'not a parameter of %s' % kind))
    if errors:
        raise ValidationError(errors)
    params = {k: float(v) for k, v in params.items()}

    if kind == 'hard_sphere':
        _require(errors, params['r'] > 0, 'r', 'must be positive')
        range_, L, breaks = params['r'], 0.0, ()
    elif kind == 'strauss':
        _require(errors, params['r'] > 0, 'r', 'must be positive')
        _require(errors, 0 <= params['beta'] < INF, 'beta',
                 'must be finite and non-negative')
        range_, L, breaks = params['r'], 0.0, ()
    elif kind == 'square_well':
        r0, R, a, L = (params['r0'], params['R'], params['a'],
                       params['L_bound'])
        _require(errors, r0 > 0, 'r0', 'must be positive')
        _require(errors, R > r0, 'R', 'must exceed r0')
        _require(errors, 0 <= a < INF, 'a', 'must be finite and non-negative')
        _require(errors, 0 <= L < INF, 'L_bound',
                 'must be finite and non-negative')
        if not errors:
            needed = a * packing_bound(dim, r0, R)
            _require(errors, L >= needed * (1 - 1e-12), 'L_bound',
                     'must be at least a * M(d, r0, R) = %g' % needed)
        range_, breaks = R, (r0,)
    else:
        range_, L, breaks = 0.0, 0.0, ()
    if errors:
        raise ValidationError(errors)
    profile_params = {k: v for k, v in params.items() if k != 'L_bound'}
    return PotentialSpec(dim, kind, profile_params, range_, L,
                         breakpoints=breaks)


def hard_sphere(dim, r):
    return make_builtin('hard_sphere', dim, r=r)


def strauss(dim, r, beta):
    return make_builtin('strauss', dim, r=r, beta=beta)


def square_well(dim, r0, R, a, L_bound):
    return make_builtin('square_well', dim, r0=r0, R=R, a=a, L_bound=L_bound)


def zero_potential(dim):
    return make_builtin('zero', dim)


def make_custom(dim, range_, local_stability, evaluate=None, profile=None,
                breakpoints=(), name='custom'):
    """
    A user potential. Exactly one of ``profile`` (radial, phi(distance)) or
    ``evaluate`` (phi(x, y), assumed symmetric) must be given. The local
    stability constant is asserted by the caller, not certified.
    """
    if (evaluate is None) == (profile is None):
        raise DomainError('give exactly one of evaluate or profile')
    return PotentialSpec(dim, 'custom', {'name': name}, range_,
                         local_stability, certified=False,
                         breakpoints=breakpoints, evaluate=evaluate,
                         profile=profile)


def scale_potential(spec, beta):
    """``phi_beta = beta * phi`` with local stability ``beta * L``."""
    if not beta >= 0:
        raise DomainError('beta must be non-negative')
    return PotentialSpec(spec.dim, spec.kind, spec.params, spec.range,
                         spec.local_stability * beta,
                         certified=spec.certified, scale=spec.scale * beta,
                         breakpoints=spec.breakpoints,
                         evaluate=spec._evaluate, profile=spec._profile)


class TemperednessEstimate(object):
    """
    Estimates of the weak temperedness constant ``c_hat``, the temperedness
    constant ``c_full`` and the attractive mass
    ``A = integral of 1{phi < 0} (e^-phi - 1)``. ``abs_error`` is a
    quadrature error bound (method ``quadrature``) or a 95% CI half-width
    (method ``monte_carlo``).
    """

    __slots__ = ('c_hat', 'c_full', 'abs_error', 'method', 'attractive_mass')

    def __init__(self, c_hat, c_full, abs_error, method, attractive_mass=0.0):
        self.c_hat = float(c_hat)
        self.c_full = float(c_full)
        self.abs_error = float(abs_error)
        self.method = method
        self.attractive_mass = float(attractive_mass)

    @property
    def upper(self):
        return self.c_hat + self.abs_error

    def to_dict(self):
        return {'c_hat': self.c_hat, 'c_full': self.c_full,
                'abs_error': self.abs_error, 'method': self.method,
                'attractive_mass': self.attractive_mass}

    def __repr__(self):
        return '<TemperednessEstimate c_hat=%.9g c_full=%.9g +-%.2g %s>' % (
            self.c_hat, self.c_full, self.abs_error, self.method)


def _weak_integrand(values):
    # 1 - e^{-|phi|}, exactly 1 on hard cores
    return -np.expm1(-np.abs(values))


def _full_integrand(values):
    return np.abs(np.expm1(-values))


def _attractive_integrand(values):
    return np.where(values < 0, np.expm1(-np.minimum(values, 0.0)), 0.0)


def _radial_integral(spec, integrand, tol):
    surface = sphere_surface(spec.dim)
    power = spec.dim - 1

    def f(r):
        return float(integrand(spec.profile(np.array([r])))[0]) * r ** power

    value, err = integrate.quad(f, 0.0, spec.range,
                                points=spec.breakpoints or None,
                                epsabs=tol, epsrel=tol, limit=500)
    return surface * value, surface * err


def _uniform_ball(rng, dim, radius, size):
    direction = rng.standard_normal((size, dim))
    direction /= np.linalg.norm(direction, axis=1)[:, None]
    radii = radius * rng.random(size) ** (1.0 / dim)
    return direction * radii[:, None]


def weak_temperedness_constant(spec, tol=1e-10, centers=None, samples=200000,
                               rng=None):
    """
    Estimate ``C_hat``, ``C`` and the attractive mass of ``spec``.

    Radial potentials reduce to one-dimensional integrals over ``[0, R]``
    done by adaptive Gauss-Kronrod quadrature (error <= tol). Other
    potentials take the largest Monte Carlo estimate over ``centers``.
    """
    if not tol > 0:
        raise DomainError('tol must be positive')
    if spec.range == 0:
        return TemperednessEstimate(0.0, 0.0, 0.0, 'quadrature')
    if spec.is_radial:
        c_hat, err_hat = _radial_integral(spec, _weak_integrand, tol)
        c_full, err_full = _radial_integral(spec, _full_integrand, tol)
        attractive, err_att = _radial_integral(spec, _attractive_integrand,
                                               tol)
        abs_error = max(err_hat, err_full, err_att)
        if abs_error > tol:
            logger.warning('quadrature error %.3g above requested %.3g',
                           abs_error, tol)
        return TemperednessEstimate(c_hat, c_full, abs_error, 'quadrature',
                                    attractive)

    if centers is None or not len(centers):
        raise DomainError('non-radial potentials need a grid of centers for '
                          'the Monte Carlo estimate')
    if rng is None:
        rng = np.random.default_rng(0)
    vol = ball_volume(spec.dim, spec.range)
    best = None
    for center in np.asarray(centers, dtype=float).reshape(-1, spec.dim):
        ys = center + _uniform_ball(rng, spec.dim, spec.range, samples)
        values = spec.interactions(center, ys)
        weak = vol * _weak_integrand(values)
        full = vol * _full_integrand(values)
        att = vol * _attractive_integrand(values)
        c_hat = weak.mean()
        half = 1.96 * weak.std(ddof=1) / math.sqrt(samples)
        if best is None or c_hat > best[0]:
            best = (c_hat, full.mean(), half, att.mean())
    c_hat, c_full, half, att = best
    return TemperednessEstimate(c_hat, c_full, half, 'monte_carlo', att)


def uniqueness_threshold(spec, est):
    """Conservative ``lambda* = 1 / (e^L (c_hat + abs_error))``."""
    denominator = math.exp(spec.local_stability) * est.upper
    if denominator == 0:
        return INF
    return 1.0 / denominator


def penrose_ruelle_threshold(spec, est):
    if est.c_full == 0:
        return INF
    return 1.0 / (math.exp(spec.local_stability + 1.0) * est.c_full)


def cluster_expansion_threshold(spec, est):
    if est.upper == 0:
        return INF
    return 1.0 / (math.exp(spec.local_stability / 2.0 + 1.0) * est.upper)


def analyticity_threshold(spec, est):
    """``e^{2(1 - W(e A / C))} / (e^{L+1} C)`` with W the Lambert function."""
    if est.c_full == 0:
        return INF
    w = special.lambertw(math.e * est.attractive_mass / est.c_full).real
    return math.exp(2.0 * (1.0 - w)) / (
        math.exp(spec.local_stability + 1.0) * est.c_full)


def threshold_report(spec, tol=1e-10, **kwargs):
    est = weak_temperedness_constant(spec, tol=tol, **kwargs)
    lam = uniqueness_threshold(spec, est)
    pr = penrose_ruelle_threshold(spec, est)
    report = est.to_dict()
    report.update({
        'lambda_star': lam,
        'lambda_penrose_ruelle': pr,
        'lambda_cluster_expansion': cluster_expansion_threshold(spec, est),
        'lambda_analyticity': analyticity_threshold(spec, est),
        'improvement_ratio': lam / pr if math.isfinite(pr) else None,
        'local_stability': spec.local_stability,
        'local_stability_certified': spec.certified,
    })
    return report
