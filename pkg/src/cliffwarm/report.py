"""Result tables: per-seed training summaries and the comparison table of
training runs against the genetic baseline.

All tables are CSV with a fixed column order. Missing values are empty
cells.
"""

import csv
import json
import os

from .exceptions import ArgumentError
from .utils import arithmetic_mean, geometric_mean, mean_std


__all__ = ('SUMMARY_COLUMNS', 'COMPARE_COLUMNS', 'RATIO_COLUMNS',
           'BUDGET_NAME', 'summary_rows', 'accuracy_stats', 'compare_row',
           'aggregate_rows', 'write_csv', 'read_csv', 'write_budget',
           'read_budget')


SUMMARY_COLUMNS = ('seed', 'E_best', 'accuracy', 'rounds', 'episodes',
                   'evaluations')

COMPARE_COLUMNS = (
    'task', 'n', 'N_params', 'E_opt',
    'search_mean', 'search_std', 'search_best',
    'ga_evals_mean', 'ga_evals_std', 'ga_evals_best',
    'ga_rounds_mean', 'ga_rounds_std', 'ga_rounds_best',
    'ratio_mean_evals', 'ratio_best_evals',
    'ratio_mean_rounds', 'ratio_best_rounds')

RATIO_COLUMNS = COMPARE_COLUMNS[-4:]

BUDGET_NAME = 'budget.json'


def _cell(value):
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(filename, columns, rows):
    """Write dict ``rows`` under ``columns``."""
    with open(filename, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])


def read_csv(filename):
    with open(filename, newline='') as f:
        return list(csv.DictReader(f))


def summary_rows(rows):
    """The per-seed ``rows`` followed by ``mean``, ``std`` and ``best``
    rows. ``best`` is the seed with the highest accuracy, or the lowest
    energy when accuracies are unknown."""
    if not rows:
        raise ArgumentError('no runs to summarize')
    result = [dict(r) for r in rows]
    mean, std = {'seed': 'mean'}, {'seed': 'std'}
    for column in SUMMARY_COLUMNS[1:]:
        values = [r[column] for r in rows if r.get(column) is not None]
        if values:
            mean[column], std[column] = mean_std(values)
    if all(r.get('accuracy') is not None for r in rows):
        top = max(rows, key=lambda r: r['accuracy'])
    else:
        top = min(rows, key=lambda r: r['E_best'])
    best = dict(top)
    best['seed'] = 'best'
    return result + [mean, std, best]


def accuracy_stats(values):
    """``(mean, std, best)`` of per-seed accuracies, ``None`` entries
    skipped."""
    values = [v for v in values if v is not None]
    if not values:
        return None, None, None
    mean, std = mean_std(values)
    return mean, std, max(values)


def _ratio(a, b):
    if a is None or b is None or not b > 0:
        return None
    return a / b


def compare_row(task, n, n_params, e_opt, search, ga_evals=None,
                ga_rounds=None):
    """One row of the comparison table. ``search``, ``ga_evals`` and
    ``ga_rounds`` are lists of per-seed accuracies; the GA lists are
    ``None`` when that matching mode was not run."""
    row = {'task': task, 'n': n, 'N_params': n_params, 'E_opt': e_opt}
    s_mean, s_std, s_best = accuracy_stats(search)
    row.update(search_mean=s_mean, search_std=s_std, search_best=s_best)
    for mode, values in (('evals', ga_evals), ('rounds', ga_rounds)):
        if values is None:
            continue
        g_mean, g_std, g_best = accuracy_stats(values)
        row['ga_%s_mean' % mode] = g_mean
        row['ga_%s_std' % mode] = g_std
        row['ga_%s_best' % mode] = g_best
        row['ratio_mean_%s' % mode] = _ratio(s_mean, g_mean)
        row['ratio_best_%s' % mode] = _ratio(s_best, g_best)
    return row


def aggregate_rows(rows):
    """``GeoMean`` and ``ArithMean`` rows over the ratio columns of
    ``rows``; a column without any positive ratio stays empty."""
    geo, arith = {'task': 'GeoMean'}, {'task': 'ArithMean'}
    for column in RATIO_COLUMNS:
        values = [r[column] for r in rows
                  if r.get(column) is not None and r[column] > 0]
        if values:
            geo[column] = geometric_mean(values)
            arith[column] = arithmetic_mean(values)
    return [geo, arith]


def write_budget(directory, data):
    with open(os.path.join(directory, BUDGET_NAME), 'w') as f:
        json.dump(data, f, indent=4, sort_keys=True)


def read_budget(directory):
    """The budget file a training run leaves in its directory, or
    ``None``."""
    filename = os.path.join(directory, BUDGET_NAME)
    if not os.path.exists(filename):
        return None
    with open(filename) as f:
        return json.load(f)
