"""
The experiment config schema and its loaders.

A config is one TOML (or JSON) document::

    kind = "couple"
    seed = 7
    activity = 0.4
    t_end = 4.0
    replicas = 2000

    [potential]
    kind = "hard_sphere"
    dim = 1
    r = 0.5

    [region]
    lower = [0.0]
    upper = [2.0]

    [boundary2]
    kind = "single_point"
"""
import os

from .compat import json, tomllib
from .configuration import EMPTY, PointConfiguration
from .definition import Definition
from .exceptions import GibbsError, ValidationError
from .fields import (BlockField, BooleanField, FloatField, FloatListField,
                     IntegerField, ListField, StringField)
from .gibbs import GNZ_STATISTICS
from .percolation import (BOUNDARY_PAIRS, poisson_collar, saturated_collar,
                          single_collar_point)
from .potential import BUILTIN_KINDS, make_builtin, scale_potential
from .space import BoxRegion

__all__ = '''
KINDS
PARTNERS
PotentialBlock
RegionBlock
BoundaryBlock
GridBlock
ToleranceBlock
OutputBlock
ExperimentConfig
configuration_from_list
load_config
'''.split()

KINDS = ('simulate', 'couple', 'percolate', 'spatial-mixing', 'gnz-check',
         'threshold', 'oracle', 'partition')

_POTENTIAL_PARAMS = ('r', 'beta', 'r0', 'R', 'a', 'L_bound')

# how the second chain of a coupling starts
PARTNERS = ('initial', 'stationary')


class PotentialBlock(Definition):
    kind = StringField(required=True, choices=BUILTIN_KINDS)
    dim = IntegerField(default=1, minimum=1, maximum=3)
    r = FloatField(minimum=0)
    beta = FloatField(minimum=0)
    r0 = FloatField(minimum=0)
    R = FloatField(minimum=0)
    a = FloatField(minimum=0)
    L_bound = FloatField(minimum=0)
    # inverse temperature folded into phi
    scale = FloatField(default=1.0, minimum=0)

    def _params(self):
        return {name: getattr(self, name) for name in _POTENTIAL_PARAMS
                if getattr(self, name) is not None}

    def check_(self):
        try:
            make_builtin(self.kind, self.dim, **self._params())
        except ValidationError as e:
            return list(e.errors)
        except GibbsError as e:
            return [('kind', str(e))]
        return []

    def build(self):
        phi = make_builtin(self.kind, self.dim, **self._params())
        return phi if self.scale == 1.0 else scale_potential(phi, self.scale)


class RegionBlock(Definition):
    lower = FloatListField(required=True)
    upper = FloatListField(required=True)

    def check_(self):
        errors = []
        if len(self.lower) != len(self.upper) or not self.lower:
            errors.append(('upper', 'lower and upper need the same non-zero '
                                    'length'))
        elif any(not lo < hi for lo, hi in zip(self.lower, self.upper)):
            errors.append(('upper', 'every side needs lower < upper'))
        return errors

    def build(self):
        return BoxRegion(self.lower, self.upper)


BOUNDARY_KINDS = ('empty', 'points', 'single_point', 'saturated', 'poisson')


class BoundaryBlock(Definition):
    """
    ``points`` lists ``{coords, mult}`` tables (or bare coordinate lists);
    the other kinds are built from the region and the potential.
    """
    kind = StringField(default='empty', choices=BOUNDARY_KINDS)
    points = ListField()
    activity = FloatField(minimum=0)

    def check_(self):
        if self.kind == 'points' and self.points is None:
            return [('points', "required when kind is 'points'")]
        return []

    def build(self, region, potential, activity, rng):
        if self.kind == 'empty':
            return EMPTY
        if self.kind == 'points':
            return configuration_from_list(self.points)
        if self.kind == 'single_point':
            return single_collar_point(region, potential)
        if self.kind == 'saturated':
            return saturated_collar(region, potential)
        lam = activity if self.activity is None else self.activity
        return poisson_collar(region, potential, lam, rng)


class GridBlock(Definition):
    n = IntegerField(minimum=1)
    m = IntegerField(minimum=0)
    k = IntegerField(minimum=0)
    n_values = ListField()
    chain = ListField()
    t_values = FloatListField()

    def check_(self):
        errors = []
        if self.n is not None and self.m is not None and self.m >= self.n:
            errors.append(('m', 'must be smaller than n'))
        for v in self.n_values or ():
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                errors.append(('n_values', 'must hold positive integers, '
                                           'got %r' % (v,)))
        return errors


class ToleranceBlock(Definition):
    quadrature = FloatField(default=1e-10, minimum=0)
    series = FloatField(default=1e-6, minimum=0)
    min_acceptance = FloatField(default=1e-6, minimum=0)
    oracle_tv = FloatField(default=0.02, minimum=0)
    z = FloatField(default=3.0, minimum=0)
    alpha = FloatField(default=0.01, minimum=0, maximum=1)


class OutputBlock(Definition):
    out_dir = StringField(default='results')
    format = StringField(default='csv', choices=('csv', 'json'))
    snapshots = BooleanField(default=False)


class ExperimentConfig(Definition):
    kind = StringField(required=True, choices=KINDS)
    seed = IntegerField(required=True, minimum=0)
    jobs = IntegerField(default=1, minimum=1)
    replicas = IntegerField(default=1000, minimum=1)
    samples = IntegerField(default=10000, minimum=1)

    activity = FloatField(minimum=0)
    # activity as a fraction of the certified uniqueness threshold
    activity_fraction = FloatField(minimum=0)

    potential = BlockField(PotentialBlock, required=True)
    region = BlockField(RegionBlock)
    boundary = BlockField(BoundaryBlock, default=dict)
    boundary2 = BlockField(BoundaryBlock, default=dict)
    boundary_pair = StringField(choices=tuple(sorted(BOUNDARY_PAIRS)))

    initial = ListField()
    initial2 = ListField()
    partner = StringField(default='initial', choices=PARTNERS)
    t_end = FloatField(minimum=0)
    times = FloatListField()
    # oracle flux counts start here; defaults to t_end / 2
    burn_in = FloatField(minimum=0)

    grid = BlockField(GridBlock, default=dict)

    statistic = StringField(default='one',
                            choices=tuple(sorted(GNZ_STATISTICS)))
    query = BlockField(RegionBlock)
    count = IntegerField(minimum=0)

    mode = StringField(default='series', choices=('series', 'monte_carlo'))
    n_max = IntegerField(minimum=0)

    cells = IntegerField(minimum=1)
    capacity = IntegerField(default=1, minimum=1)

    strict = BooleanField(default=False)
    tolerances = BlockField(ToleranceBlock, default=dict)
    output = BlockField(OutputBlock, default=dict)

    def check_(self):
        errors = []
        if self.activity is None and self.activity_fraction is None \
                and self.kind != 'threshold':
            errors.append(('activity', 'give activity or activity_fraction'))
        if self.activity is not None and self.activity_fraction is not None:
            errors.append(('activity_fraction',
                           'give only one of activity and activity_fraction'))
        needs_region = ('simulate', 'couple', 'gnz-check', 'oracle',
                        'partition')
        if self.kind in needs_region and self.region is None:
            errors.append(('region', 'required for %s' % self.kind))
        if self.kind in ('simulate', 'couple') and self.t_end is None:
            errors.append(('t_end', 'required for %s' % self.kind))
        if self.kind == 'percolate':
            for name in ('n', 'm'):
                if getattr(self.grid, name) is None:
                    errors.append(('grid.%s' % name,
                                   'required for percolate'))
        if self.kind == 'spatial-mixing':
            if self.grid.k is None:
                errors.append(('grid.k', 'required for spatial-mixing'))
            if not self.grid.n_values:
                errors.append(('grid.n_values',
                               'required for spatial-mixing'))
        if self.kind == 'oracle' and self.cells is None:
            errors.append(('cells', 'required for oracle'))
        if self.burn_in is not None and \
                (self.t_end is None or self.burn_in >= self.t_end):
            errors.append(('burn_in', 'must be below t_end'))
        if self.statistic == 'count' and self.kind == 'gnz-check' and \
                (self.query is None or self.count is None):
            errors.append(('query', "the 'count' statistic needs query and "
                                    "count"))
        dim = self.potential.dim
        for name in ('region', 'query'):
            block = getattr(self, name)
            if block is not None and len(block.lower) != dim:
                errors.append(('%s.lower' % name,
                               'must have %d coordinates' % dim))
        return errors

    def with_overrides(self, **overrides):
        """A copy with CLI flags applied (None values are ignored)."""
        return ExperimentConfig.from_dict(
            _apply_overrides(self.to_dict(), overrides))


def _apply_overrides(data, overrides):
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ('out_dir', 'format'):
            output = data.setdefault('output', {})
            if isinstance(output, dict):
                output[key] = value
        else:
            data[key] = value
    return data


def configuration_from_list(items):
    """
    A configuration from ``{coords, mult}`` tables or bare coordinate lists;
    None gives the empty configuration.
    """
    if not items:
        return EMPTY
    return PointConfiguration.from_list(
        item if isinstance(item, dict) else {'coords': item}
        for item in items)


def load_config(path, **overrides):
    """
    Read a ``.toml`` or ``.json`` experiment config. Overrides are merged
    into the file's contents before validation, so a flag can supply a
    field the file leaves out.
    """
    ext = os.path.splitext(path)[1].lower()
    try:
        if ext == '.json':
            with open(path) as f:
                data = json.loads(f.read())
        else:
            with open(path, 'rb') as f:
                data = tomllib.load(f)
    except ValueError as e:
        raise ValidationError([(path, 'cannot parse: %s' % e)])
    if not isinstance(data, dict):
        raise ValidationError([(path, 'expected a table at the top level')])
    return ExperimentConfig.from_dict(_apply_overrides(data, overrides))
