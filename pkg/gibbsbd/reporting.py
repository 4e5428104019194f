"""
Artifact writers.

An experiment directory holds ``report.json`` (resolved config, version tag,
payload and checks), one CSV per table when the format is ``csv``,
``snapshots.jsonl`` when snapshots were requested, and ``metadata.json``.
Only ``metadata.json`` carries a timestamp, so two runs with the same config
and seed produce byte-identical data files.
"""
import csv
import datetime
import logging
import math
import os
import platform

import numpy as np
import scipy

from .compat import json
from .version import __version__

__all__ = '''
to_jsonable
dumps
build_report
write_json
write_csv
write_jsonl
run_metadata
emit
'''.split()

logger = logging.getLogger(__name__)

REPORT = 'report.json'
METADATA = 'metadata.json'
SNAPSHOTS = 'snapshots.jsonl'


def _float(value):
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return value


def to_jsonable(value):
    """Plain JSON types; infinities become the strings ``inf``/``-inf``."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, float):
        return _float(value)
    return value


def dumps(value, indent=None):
    return json.dumps(to_jsonable(value), sort_keys=True, indent=indent)


def build_report(result, config, tables=False):
    report = {
        'kind': result.kind,
        'version': __version__,
        'config': config.to_dict(),
        'result': result.payload,
        'checks': result.checks,
        'passed': result.passed,
    }
    if tables:
        report['tables'] = {
            name: [dict(zip(header, row)) for row in rows]
            for name, (header, rows) in result.tables.items()}
    return report


def write_json(path, payload):
    with open(path, 'w') as f:
        f.write(dumps(payload, indent=2))
        f.write('\n')


def _cell(value):
    if value is None:
        return ''
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float):
        value = _float(value)
        return value if isinstance(value, str) else repr(value)
    return value


def write_csv(path, header, rows):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def write_jsonl(path, records):
    with open(path, 'w') as f:
        for record in records:
            f.write(dumps(record))
            f.write('\n')


def run_metadata():
    now = datetime.datetime.now(datetime.timezone.utc)
    return {
        'timestamp': now.isoformat(),
        'python': platform.python_version(),
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'version': __version__,
    }


def emit(result, config, out_dir=None, fmt=None):
    """Write every artifact of ``result``; returns the written paths."""
    out_dir = out_dir or config.output.out_dir
    fmt = fmt or config.output.format
    if not os.path.isdir(out_dir):
        os.makedirs(out_dir)
    paths = []

    def target(name):
        path = os.path.join(out_dir, name)
        paths.append(path)
        return path

    write_json(target(REPORT), build_report(result, config,
                                            tables=fmt == 'json'))
    if fmt == 'csv':
        for name, (header, rows) in sorted(result.tables.items()):
            write_csv(target('%s.csv' % name), header, rows)
    if result.snapshots:
        write_jsonl(target(SNAPSHOTS), result.snapshots)
    write_json(target(METADATA), run_metadata())
    logger.info('wrote %d files to %s', len(paths), out_dir)
    return paths
