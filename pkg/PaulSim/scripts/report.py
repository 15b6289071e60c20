"""Report bundles: CSV tables, a plain-text summary and a provenance block"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from threadpoolctl import threadpool_limits
from tqdm import tqdm

from PaulSim.utilities.logger import get_logger
from PaulSim.utilities.utils import config_hash

logger = get_logger(__name__)

CSV_OPTIONS = dict(index=False, float_format='%.10g', lineterminator='\n', na_rep='nan')
CHECK_COLUMNS = ['band', 'value', 'low', 'high', 'pass']


def _single_threaded(fn, item):
    with threadpool_limits(limits=1):
        return fn(item)


def parallel_map(fn, items, workers=1, desc=None, verbose=False):
    """
    Ordered map over independent sweep points.

    Every call runs with BLAS limited to one thread, so results do not
    depend on the worker count.
    """
    items = list(items)
    bar = tqdm(items, desc=desc, disable=not verbose, leave=False)
    if workers == 1 or len(items) < 2:
        return [_single_threaded(fn, item) for item in bar]
    return Parallel(n_jobs=workers)(delayed(_single_threaded)(fn, item) for item in bar)


def check(band, value, low=-np.inf, high=np.inf):
    """One acceptance band; NaN values fail."""
    value = float(value)
    return {'band': band, 'value': value, 'low': float(low), 'high': float(high),
            'pass': bool(not np.isnan(value) and low <= value <= high)}


@dataclass
class ReportBundle:
    """
    Everything a run or a reproduction writes.

    tables:  name -> DataFrame, written as <name>.csv in insertion order
    inputs:  the plain config echoed into summary.txt and hashed
    notes:   extra summary lines
    checks:  rows from check(), written as checks.csv when present
    """
    title: str
    inputs: dict
    tables: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def provenance(self):
        from PaulSim import __version__
        return {'config_sha256': config_hash(self.inputs), 'paulsim_version': __version__}

    @property
    def failed(self):
        return [c for c in self.checks if not c['pass']]

    def summary(self):
        lines = ['PaulSim report: %s' % self.title, '', 'inputs:']
        lines += ['  ' + s for s in json.dumps(self.inputs, indent=2, sort_keys=True,
                                                ensure_ascii=False).splitlines()]
        if self.notes:
            lines += ['', 'results:'] + ['  ' + n for n in self.notes]
        if self.checks:
            lines += ['', 'checks:']
            for c in self.checks:
                lines.append('  [%s] %s = %.6g (band %.6g .. %.6g)'
                             % ('pass' if c['pass'] else 'FAIL', c['band'], c['value'],
                                c['low'], c['high']))
        lines += ['', 'tables: ' + ', '.join('%s.csv' % name for name in self.tables)]
        lines += ['', 'provenance:']
        lines += ['  %s: %s' % kv for kv in sorted(self.provenance.items())]
        return '\n'.join(lines) + '\n'

    def write(self, out_dir):
        """Write every table, checks.csv and summary.txt; returns the written paths."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        tables = dict(self.tables)
        if self.checks:
            tables['checks'] = pd.DataFrame(self.checks, columns=CHECK_COLUMNS)
        for name, frame in tables.items():
            path = out_dir / ('%s.csv' % name)
            frame.to_csv(path, **CSV_OPTIONS)
            written.append(path)
        path = out_dir / 'summary.txt'
        with path.open('w', encoding='utf-8', newline='\n') as f:
            f.write(self.summary())
        written.append(path)
        logger.info('wrote %d files to %s', len(written), out_dir)
        return written
