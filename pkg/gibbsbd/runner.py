"""
Replica fan-out.

Replica ``i`` of a run seeded with ``seed`` draws from
``Generator(Philox(SeedSequence([seed, *stream, i])))``, so its stream does
not depend on which worker runs it or when. ``stream`` separates the arms of
one experiment (for instance the grid sizes of a sweep). Results come back
in replica order.
"""
import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .exceptions import DomainError

__all__ = '''
replica_rng
run_replicas
'''.split()

logger = logging.getLogger(__name__)


def replica_rng(seed, replica=0, stream=()):
    if seed is None:
        raise DomainError('a seed is required')
    key = [int(seed)] + [int(s) for s in stream] + [int(replica)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def _call(payload):
    fn, seed, stream, replica, args = payload
    return fn(replica_rng(seed, replica, stream), replica, *args)


def run_replicas(fn, seed, replicas, args=(), jobs=1, stream=(),
                 chunksize=None):
    """
    Evaluate ``fn(rng, replica, *args)`` for every replica index.

    ``fn`` and ``args`` must be picklable when ``jobs > 1``.
    """
    if replicas < 0:
        raise DomainError('replicas must be non-negative')
    stream = tuple(stream)
    payloads = [(fn, seed, stream, i, tuple(args)) for i in range(replicas)]
    if jobs is None or jobs <= 1 or replicas <= 1:
        return [_call(p) for p in payloads]
    if chunksize is None:
        chunksize = max(1, replicas // (4 * jobs))
    logger.debug('running %d replicas on %d workers', replicas, jobs)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_call, payloads, chunksize=chunksize))
