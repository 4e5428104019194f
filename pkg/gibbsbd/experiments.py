"""
One function per experiment kind.

Each takes a validated :class:`~gibbsbd.experiment.ExperimentConfig` and
returns an :class:`ExperimentResult`: a JSON-able payload, named tables for
CSV output, named pass/fail checks and optional snapshot records. Nothing
here writes files; :mod:`gibbsbd.reporting` does.

Random streams are separated by purpose so that, for instance, adding
snapshots or a reference run never changes the coupled runs::

    replica_rng(seed, i, (STREAM_RUNS,))       # the experiment's replicas
    replica_rng(seed, 0, (STREAM_BOUNDARY,))   # random boundary draws
"""
import logging
import math

import numpy as np
from scipy import stats

from .configuration import conditional_energy
from .coupling import (contraction_rate, disagreement_profile,
                       fit_contraction_rate, mixing_ceiling, simulate_coupled,
                       tv_estimates)
from .dynamics import BirthDeathSpec, simulate
from .exceptions import DomainError, InsufficientSamples
from .experiment import configuration_from_list
from .gibbs import GibbsSpec, gnz_residual, partition_function, sample_exact
from .oracle import (FluxBalance, coalescence_probability,
                     compare_to_simulation, discretize, exact_stationary,
                     merge_flux, occupancy_flux)
from .percolation import (canonical_boundary_pair, ordered_hitting_check,
                          percolation_window, run_percolation,
                          spatial_mixing_experiment)
from .potential import (threshold_report, uniqueness_threshold,
                        weak_temperedness_constant)
from .runner import replica_rng, run_replicas
from .space import BoxGrid
from .stats import mean_and_se, pooled_chi_square, two_sample_chi_square

__all__ = '''
ExperimentResult
EXPERIMENTS
run_experiment
run_simulate
run_couple
run_percolate
run_spatial_mixing
run_gnz_check
run_threshold
run_oracle
run_partition
'''.split()

logger = logging.getLogger(__name__)

INF = float('inf')

STREAM_RUNS, STREAM_REFERENCE, STREAM_BOUNDARY, STREAM_SNAPSHOT = range(1, 5)

# the Penrose-Ruelle improvement factor is at least e up to quadrature error
IMPROVEMENT_SLACK = 1e-6


class ExperimentResult(object):
    """
    ``payload`` is the JSON report body, ``tables`` maps a name to
    ``(header, rows)``, ``checks`` maps a check name to a bool and
    ``snapshots`` holds JSON-lines records.
    """

    __slots__ = ('kind', 'payload', 'tables', 'checks', 'snapshots')

    def __init__(self, kind, payload=None, tables=None, checks=None,
                 snapshots=None):
        self.kind = kind
        self.payload = dict(payload or {})
        self.tables = dict(tables or {})
        self.checks = dict(checks or {})
        self.snapshots = list(snapshots or ())

    @property
    def passed(self):
        return all(self.checks.values())

    @property
    def failures(self):
        return sorted(name for name, ok in self.checks.items() if not ok)

    def to_dict(self):
        return {'kind': self.kind, 'payload': self.payload,
                'checks': self.checks, 'passed': self.passed}

    def __repr__(self):
        return '<ExperimentResult %s passed=%r>' % (self.kind, self.passed)


def _activity(config, potential):
    if config.activity is not None:
        return config.activity
    est = weak_temperedness_constant(potential,
                                     tol=config.tolerances.quadrature)
    lam_star = uniqueness_threshold(potential, est)
    if not math.isfinite(lam_star):
        raise DomainError('activity_fraction needs a finite uniqueness '
                          'threshold; %r has none' % (potential,))
    return config.activity_fraction * lam_star


def _boundaries(config, region, potential, activity):
    rng = replica_rng(config.seed, 0, (STREAM_BOUNDARY,))
    if config.boundary_pair is not None:
        return canonical_boundary_pair(config.boundary_pair, region,
                                       potential, activity, rng)
    return (config.boundary.build(region, potential, activity, rng),
            config.boundary2.build(region, potential, activity, rng))


def _setup(config):
    potential = config.potential.build()
    activity = _activity(config, potential)
    region = config.region.build()
    xi, zeta = _boundaries(config, region, potential, activity)
    spec1 = BirthDeathSpec(GibbsSpec(activity, potential, region, xi,
                                     truncate=True))
    spec2 = BirthDeathSpec(GibbsSpec(activity, potential, region, zeta,
                                     truncate=True))
    return spec1, spec2


def _times(config):
    if config.times:
        times = sorted(config.times)
    else:
        times = [config.t_end * i / 10.0 for i in range(11)]
    if times[-1] > config.t_end or times[0] < 0:
        raise DomainError('sample times must lie in [0, t_end]')
    return times


def _partner_start(rng, spec, start, partner, min_acceptance):
    if partner == 'stationary':
        return sample_exact(spec.gibbs, rng, min_acceptance=min_acceptance)
    return start


def _single_replica(rng, replica, spec, eta0, t_end, times, keep,
                    partner='initial', min_acceptance=1e-6):
    eta0 = _partner_start(rng, spec, eta0, partner, min_acceptance)
    traj = simulate(spec, eta0, t_end, rng)
    final = traj.state_at(t_end)
    feasible = conditional_energy(final, spec.boundary, spec.region,
                                  spec.potential) < INF
    return (traj.counts_at(times), feasible, traj.metadata,
            traj.to_dict() if keep else None)


def _coupled_replica(rng, replica, spec1, spec2, eta1, eta2, t_end, partner,
                     min_acceptance):
    eta2 = _partner_start(rng, spec2, eta2, partner, min_acceptance)
    return simulate_coupled(spec1, spec2, eta1, eta2, t_end, rng)


def _counts_law(spec, eta0, t):
    """
    Exact law of ``N(t)`` without interaction: surviving start points are
    Binomial(n0, e^-t) and births are Poisson(lambda nu (1 - e^-t)).
    """
    survive = math.exp(-t)
    mean = spec.activity * spec.region.volume * (1.0 - survive)
    top = eta0.count + int(stats.poisson.isf(1e-12, mean)) + 1 if mean \
        else eta0.count
    survivors = stats.binom.pmf(np.arange(eta0.count + 1), eta0.count,
                                survive)
    births = stats.poisson.pmf(np.arange(top + 1), mean) if mean \
        else np.array([1.0])
    law = np.convolve(survivors, births)[:top + 1]
    law[-1] += max(0.0, 1.0 - law.sum())
    return law


def run_simulate(config):
    spec, _ = _setup(config)
    eta0 = configuration_from_list(config.initial)
    times = _times(config)
    keep = config.output.snapshots
    results = run_replicas(_single_replica, config.seed, config.replicas,
                           args=(spec, eta0, config.t_end, times, keep),
                           jobs=config.jobs, stream=(STREAM_RUNS,))
    rows = []
    for j, t in enumerate(times):
        mean, se = mean_and_se([r[0][j] for r in results])
        rows.append((t, mean, se))
    totals = {}
    for r in results:
        for key, value in r[2].items():
            totals[key] = totals.get(key, 0) + value
    checks = {'feasible': all(r[1] for r in results)}
    payload = {'spec': spec.gibbs.to_dict(), 'replicas': config.replicas,
               'totals': totals, 'mean_final_count': rows[-1][1]}
    if spec.potential.kind == 'zero':
        final = [r[0][-1] for r in results]
        law = _counts_law(spec, eta0, config.t_end)
        observed = np.bincount(np.minimum(final, len(law) - 1),
                               minlength=len(law))
        try:
            chi2, p, dof = pooled_chi_square(observed, law)
        except InsufficientSamples as e:
            logger.warning('skipped the Poisson count check: %s', e)
        else:
            payload['poisson_check'] = {'chi2': chi2, 'p_value': p,
                                        'dof': dof}
            checks['poisson_counts'] = p >= config.tolerances.alpha
    snapshots = [dict(r[3], replica=i) for i, r in enumerate(results)
                 if r[3] is not None]
    return ExperimentResult(
        'simulate', payload,
        {'counts': (('t', 'mean_count', 'se'), rows)}, checks, snapshots)


def _reference_counts(config, spec, eta0, partner):
    results = run_replicas(_single_replica, config.seed, config.replicas,
                           args=(spec, eta0, config.t_end, [config.t_end],
                                 False, partner,
                                 config.tolerances.min_acceptance),
                           jobs=config.jobs, stream=(STREAM_REFERENCE,))
    return [r[0][0] for r in results]


def run_couple(config):
    spec1, spec2 = _setup(config)
    eta1 = configuration_from_list(config.initial)
    eta2 = configuration_from_list(config.initial2)
    times = _times(config)
    z = config.tolerances.z
    keep = config.output.snapshots
    runs = run_replicas(_coupled_replica, config.seed, config.replicas,
                        args=(spec1, spec2, eta1, eta2, config.t_end,
                              config.partner,
                              config.tolerances.min_acceptance),
                        jobs=config.jobs, stream=(STREAM_RUNS,))
    same_boundary = spec1.boundary == spec2.boundary
    est = weak_temperedness_constant(spec1.potential,
                                     tol=config.tolerances.quadrature)
    delta = contraction_rate(spec1, est)
    profile = disagreement_profile(runs, times)
    f0 = disagreement_profile(runs, [0.0])[0][1]
    checks = {}
    rows = []
    contraction_ok = True
    for t, mean, se, coalesced in profile:
        bound = f0 * math.exp(-delta * t)
        rows.append((t, mean, se, coalesced, bound))
        if mean - z * se > bound:
            contraction_ok = False
    payload = {'spec1': spec1.gibbs.to_dict(), 'spec2': spec2.gibbs.to_dict(),
               'replicas': config.replicas, 'delta': delta,
               'c_hat': est.c_hat, 'partner': config.partner,
               'same_boundary': same_boundary,
               'initial_disagreement': f0}
    try:
        payload['fitted_delta'] = fit_contraction_rate(
            [r[0] for r in profile], [r[1] for r in profile])
    except InsufficientSamples:
        payload['fitted_delta'] = None
    if same_boundary and config.partner == 'initial' and delta > 0:
        checks['contraction'] = contraction_ok
    if same_boundary:
        violations = sum(len(run.absorption_violations()) for run in runs)
        payload['absorption_violations'] = violations
        checks['absorption'] = violations == 0

    tv_rows = []
    ceiling_ok = True
    for t in times:
        est_t = tv_estimates(runs, t, [spec1.region])
        se = math.sqrt(est_t.non_coalesced * (1 - est_t.non_coalesced)
                       / est_t.runs)
        ceiling = mixing_ceiling(spec1, delta, t, eta1.count)
        tv_rows.append((t, est_t.non_coalesced, est_t.interval[0],
                        est_t.interval[1], est_t.lower_bound, ceiling))
        if est_t.non_coalesced > ceiling + z * se:
            ceiling_ok = False
    if same_boundary and config.partner == 'stationary' and delta > 0:
        checks['mixing_ceiling'] = ceiling_ok

    marginal = {}
    alpha = config.tolerances.alpha
    coupled1 = [run.count_at(config.t_end, 1) for run in runs]
    ref1 = _reference_counts(config, spec1, eta1, 'initial')
    stat, p = two_sample_chi_square(coupled1, ref1)
    marginal['chain1'] = {'chi2': stat, 'p_value': p}
    checks['marginal_chain1'] = p >= alpha
    coupled2 = [run.count_at(config.t_end, 2) for run in runs]
    ref2 = _reference_counts(config, spec2, eta2, config.partner)
    stat, p = two_sample_chi_square(coupled2, ref2)
    marginal['chain2'] = {'chi2': stat, 'p_value': p}
    checks['marginal_chain2'] = p >= alpha
    payload['marginals'] = marginal

    snapshots = []
    if keep:
        snapshots = [dict(run.to_dict(), replica=i)
                     for i, run in enumerate(runs)]
    return ExperimentResult(
        'couple', payload,
        {'disagreement': (('t', 'mean_f', 'se', 'coalesced',
                           'contraction_bound'), rows),
         'tv': (('t', 'non_coalesced', 'ci_low', 'ci_high', 'count_distance',
                 'mixing_ceiling'), tv_rows)},
        checks, snapshots)


def _grid_chain(chain):
    return [tuple(k) if isinstance(k, (list, tuple)) else (k,)
            for k in chain]


def run_percolate(config):
    potential = config.potential.build()
    activity = _activity(config, potential)
    n, m = config.grid.n, config.grid.m
    grid = BoxGrid(potential.dim, potential.range, n)
    xi, zeta = _boundaries(config, grid.region(), potential, activity)
    t = config.t_end
    if t is None:
        # midpoint of the window, which starts at zero
        t = percolation_window(n, m, potential.dim, potential.range,
                               activity, potential.local_stability) / 2.0
        if not math.isfinite(t):
            raise DomainError('the percolation window is unbounded; give '
                              't_end')
    report = run_percolation(n, m, potential, activity, xi, zeta, t,
                             config.replicas, config.seed,
                             jobs=config.jobs, stream=(STREAM_RUNS,))
    z = config.tolerances.z
    checks = {'ceiling': report.holds(z),
              'locality': report.violations == 0}
    payload = report.to_dict()
    payload['activity'] = activity
    payload['boundary_counts'] = [xi.count, zeta.count]
    tables = {
        'percolation': (('n', 'm', 't', 'probability', 'ci_low', 'ci_high',
                         'ceiling', 'path_bound'),
                        [(n, m, report.t, report.probability,
                          report.interval[0], report.interval[1],
                          report.ceiling, report.path_bound)]),
        'profile': (('layer', 'probability'), report.profile),
    }
    if config.grid.chain:
        chain = _grid_chain(config.grid.chain)
        hitting_rows, results = [], []
        for s in config.grid.t_values or [t]:
            result = ordered_hitting_check(report.records, chain, s, grid,
                                           report.rho)
            results.append(result.to_dict())
            hitting_rows.append((s, result.empirical, result.interval[0],
                                 result.interval[1], result.bound))
            checks['ordered_hitting_t%g' % s] = result.holds(z)
        payload['ordered_hitting'] = results
        tables['ordered_hitting'] = (('t', 'empirical', 'ci_low', 'ci_high',
                                      'bound'), hitting_rows)
    snapshots = []
    if config.output.snapshots:
        snapshots = [r.to_dict() for r in report.records]
    return ExperimentResult('percolate', payload, tables, checks, snapshots)


def run_spatial_mixing(config):
    potential = config.potential.build()
    activity = _activity(config, potential)
    pair = config.boundary_pair
    if pair is None:
        boundary, boundary2 = config.boundary, config.boundary2

        def pair(region, phi, lam, rng):
            return (boundary.build(region, phi, lam, rng),
                    boundary2.build(region, phi, lam, rng))

    rows = spatial_mixing_experiment(
        config.grid.k, config.grid.n_values, potential, activity, pair,
        config.replicas, config.seed, jobs=config.jobs, strict=config.strict,
        tol=config.tolerances.quadrature)
    z = config.tolerances.z
    monotone = True
    for prev, row in zip(rows, rows[1:]):
        band = z * math.hypot(prev.lower_se, row.lower_se)
        if row.lower_bound > prev.lower_bound + band:
            monotone = False
    last = rows[-1]
    checks = {
        'monotone': monotone,
        'decay': last.lower_bound <= math.exp(-last.n) + z * last.lower_se,
    }
    header = ('n', 'eps', 't', 't_lo', 't_hi', 'window_ok', 'lower_bound',
              'lower_se', 'disagree', 'ci_low', 'ci_high', 'upper_bound',
              'ceiling')
    table = [(r.n, r.eps, r.t, r.t_lo, r.t_hi, r.window_ok, r.lower_bound,
              r.lower_se, r.disagree, r.interval[0], r.interval[1],
              r.upper_bound, r.ceiling) for r in rows]
    payload = {'k': config.grid.k, 'activity': activity,
               'rows': [r.to_dict() for r in rows]}
    return ExperimentResult('spatial-mixing', payload,
                            {'spatial_mixing': (header, table)}, checks)


def _gnz_replica(rng, replica, spec, statistic, samples, options):
    return gnz_residual(spec, statistic, samples=samples, rng=rng, **options)


def _snapshot_replica(rng, replica, spec, min_acceptance):
    eta = sample_exact(spec, rng, min_acceptance=min_acceptance)
    return {'replica': replica, 'points': eta.to_list()}


def run_gnz_check(config):
    spec1, _ = _setup(config)
    spec = spec1.gibbs
    options = {}
    if config.statistic == 'count':
        options = {'query_box': config.query.build(), 'm': config.count}
    results = run_replicas(_gnz_replica, config.seed, config.replicas,
                           args=(spec, config.statistic, config.samples,
                                 options),
                           jobs=config.jobs, stream=(STREAM_RUNS,))
    z = config.tolerances.z
    failures = sum(1 for r in results if not abs(r.z) < z)
    allowed = int(0.05 * len(results))
    rows = [(i, r.lhs, r.rhs, r.ci, r.z) for i, r in enumerate(results)]
    payload = {'spec': spec.to_dict(), 'statistic': config.statistic,
               'runs': [r.to_dict() for r in results],
               'failures': failures, 'allowed_failures': allowed}
    snapshots = []
    if config.output.snapshots:
        snapshots = run_replicas(_snapshot_replica, config.seed,
                                 config.samples,
                                 args=(spec, config.tolerances.min_acceptance),
                                 jobs=config.jobs, stream=(STREAM_SNAPSHOT,))
    return ExperimentResult(
        'gnz-check', payload,
        {'gnz': (('run', 'lhs', 'rhs', 'ci', 'z'), rows)},
        {'gnz_identity': failures <= allowed}, snapshots)


def run_threshold(config):
    potential = config.potential.build()
    report = threshold_report(potential, tol=config.tolerances.quadrature)
    report['potential'] = potential.to_dict()
    checks = {}
    ratio = report['improvement_ratio']
    if ratio is not None:
        checks['improvement'] = ratio >= math.e - IMPROVEMENT_SLACK
    names = ('lambda_star', 'lambda_penrose_ruelle',
             'lambda_cluster_expansion', 'lambda_analyticity')
    rows = [(name, report[name]) for name in names]
    return ExperimentResult('threshold', report,
                            {'thresholds': (('name', 'value'), rows)},
                            checks)


def _state_label(occ):
    return ' '.join(str(o) for o in occ)


def _oracle_replica(rng, replica, spec, eta0, t_end, inst, burn_in):
    traj = simulate(spec, eta0, t_end, rng)
    return traj.state_at(t_end), occupancy_flux(inst, traj, burn_in)


def run_oracle(config):
    spec1, spec2 = _setup(config)
    inst = discretize(spec1.gibbs, config.cells, config.capacity)
    chain = exact_stationary(inst)
    total = math.fsum(chain.gibbs_weights)
    rows = [(_state_label(s), float(p), w / total)
            for s, p, w in zip(chain.states, chain.pi, chain.gibbs_weights)]
    marginals = chain.marginals()
    marginal_rows = [(i, v, float(marginals[i, v]))
                     for i in range(marginals.shape[0])
                     for v in range(marginals.shape[1])]
    payload = chain.to_dict()
    payload['empty_probability'] = chain.empty_probability
    payload['count_distribution'] = {
        str(n): p for n, p in sorted(chain.count_distribution().items())}
    tables = {'stationary': (('state', 'pi', 'gibbs'), rows),
              'marginals': (('cell', 'occupancy', 'probability'),
                            marginal_rows)}
    checks = {}
    if config.t_end is not None:
        eta0 = configuration_from_list(config.initial)
        burn_in = config.burn_in
        if burn_in is None:
            burn_in = config.t_end / 2.0
        runs = run_replicas(_oracle_replica, config.seed, config.replicas,
                            args=(spec1, eta0, config.t_end, inst, burn_in),
                            jobs=config.jobs, stream=(STREAM_RUNS,))
        comparison = compare_to_simulation(
            inst, chain, [final for final, _ in runs],
            tolerance=config.tolerances.oracle_tv)
        payload['comparison'] = comparison.to_dict()
        checks['oracle_tv'] = comparison.passed
        balance = FluxBalance(merge_flux(flux for _, flux in runs),
                              config.tolerances.z)
        payload['detailed_balance'] = dict(balance.to_dict(),
                                            burn_in=burn_in)
        tables['flux'] = (
            ('from', 'to', 'forward', 'backward', 'z_score'),
            [(_state_label(a), _state_label(b), f, r, score)
             for a, b, f, r, score in balance.rows])
        checks['detailed_balance'] = balance.passed
        if spec2.boundary != spec1.boundary:
            inst2 = discretize(spec2.gibbs, config.cells, config.capacity)
            empty = (0,) * inst.n_cells
            times = _times(config)
            tables['coalescence'] = (
                ('t', 'probability'),
                [(t, coalescence_probability(inst, inst2, empty, empty, t))
                 for t in times])
    return ExperimentResult('oracle', payload, tables, checks)


def run_partition(config):
    spec, _ = _setup(config)
    rng = replica_rng(config.seed, 0, (STREAM_RUNS,))
    result = partition_function(spec.gibbs, mode=config.mode,
                                n_max=config.n_max, samples=config.samples,
                                rng=rng, tol=config.tolerances.series)
    payload = result.to_dict()
    payload['spec'] = spec.gibbs.to_dict()
    tables = {}
    if result.terms:
        tables['terms'] = (('n', 'term', 'half_width'),
                           [tuple(t) for t in result.terms])
    return ExperimentResult('partition', payload, tables)


EXPERIMENTS = {
    'simulate': run_simulate,
    'couple': run_couple,
    'percolate': run_percolate,
    'spatial-mixing': run_spatial_mixing,
    'gnz-check': run_gnz_check,
    'threshold': run_threshold,
    'oracle': run_oracle,
    'partition': run_partition,
}


def run_experiment(config):
    """Dispatch on ``config.kind``."""
    logger.info('running %s experiment with seed %d', config.kind,
                config.seed)
    return EXPERIMENTS[config.kind](config)
