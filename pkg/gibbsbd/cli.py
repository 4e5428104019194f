"""
Command line entry point.

    gibbsbd threshold --spec hard_sphere.toml
    gibbsbd couple --spec1 empty.toml --spec2 point.toml --t-end 4 --seed 7
    gibbsbd run --spec experiment.toml --jobs 4 --out-dir out/

Exit codes: 0 every check passed, 1 a statistical check failed, 2 the
config is invalid, 3 any other runtime error.
"""
import argparse
import logging
import sys

from .exceptions import GibbsError, StatisticalTestFailure, ValidationError
from .experiment import KINDS, load_config
from .experiments import run_experiment
from .reporting import emit
from .version import __version__

__all__ = '''
EXIT_OK
EXIT_FAILED
EXIT_INVALID
EXIT_ERROR
build_parser
resolve_config
run
main
'''.split()

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_ERROR = 0, 1, 2, 3


def _add_common(parser):
    parser.add_argument('--spec', '--spec1', dest='spec', required=True,
                        help='experiment config (.toml or .json)')
    parser.add_argument('--seed', type=int, help='overrides the config seed')
    parser.add_argument('--jobs', type=int, help='worker processes')
    parser.add_argument('--out-dir', dest='out_dir', help='output directory')
    parser.add_argument('--format', choices=('csv', 'json'),
                        help='table format')
    parser.add_argument('--replicas', type=int)
    parser.add_argument('--t-end', dest='t_end', type=float)
    parser.add_argument('--cells', type=int,
                        help='cells per axis of the oracle discretization')
    parser.add_argument('-v', '--verbose', action='store_true')
    parser.add_argument('-q', '--quiet', action='store_true')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='gibbsbd',
        description='Spatial birth-death dynamics of Gibbs point processes.')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    sub = parser.add_subparsers(dest='command')
    sub.required = True
    run_parser = sub.add_parser('run', help='run the kind named in the config')
    _add_common(run_parser)
    for kind in KINDS:
        kind_parser = sub.add_parser(kind, help='run a %s experiment' % kind)
        _add_common(kind_parser)
        if kind == 'couple':
            kind_parser.add_argument(
                '--spec2', help='config whose boundary and initial state '
                                'drive the second chain')
    return parser


def _second_chain(config, path, overrides):
    other = load_config(path, **overrides)
    errors = []
    for name in ('potential', 'region', 'activity', 'activity_fraction'):
        if getattr(other, name) != getattr(config, name):
            errors.append(('spec2.%s' % name, 'must match the first spec'))
    if errors:
        raise ValidationError(errors)
    return {'boundary2': other.boundary.to_dict(),
            'initial2': other.initial}


def resolve_config(args):
    """Load ``--spec`` and apply the command line overrides."""
    overrides = {'seed': args.seed, 'jobs': args.jobs,
                 'out_dir': args.out_dir, 'format': args.format,
                 'replicas': args.replicas, 't_end': args.t_end,
                 'cells': args.cells}
    if args.command != 'run':
        overrides['kind'] = args.command
    config = load_config(args.spec, **overrides)
    if getattr(args, 'spec2', None):
        config = config.with_overrides(
            **_second_chain(config, args.spec2, overrides))
    return config


def run(config, out_dir=None, fmt=None):
    """
    Run the experiment, write its artifacts and raise
    :class:`StatisticalTestFailure` if any acceptance check failed.
    """
    result = run_experiment(config)
    emit(result, config, out_dir, fmt)
    if not result.passed:
        raise StatisticalTestFailure(
            '%s failed: %s' % (config.kind, ', '.join(result.failures)),
            result.failures)
    return result


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format='%(asctime)s %(levelname)s %(name)s: '
                               '%(message)s')
    try:
        run(resolve_config(args))
    except ValidationError as e:
        for path, msg in e.errors:
            logger.error('invalid config: %s: %s', path, msg)
        return EXIT_INVALID
    except StatisticalTestFailure as e:
        logger.error('%s', e)
        return EXIT_FAILED
    except (GibbsError, OSError) as e:
        logger.error('%s: %s', type(e).__name__, e)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
