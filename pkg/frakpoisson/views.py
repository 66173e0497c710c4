"""
Print reports, check rows and samples to an io stream, e.g., a terminal,
formatted in a human-readable or a machine-readable way.
"""
#pylint: disable=invalid-name, too-few-public-methods

import pandas as pd
from tabulate import tabulate


def _cell(value):
    if isinstance(value, complex):
        return '{:.15g}{:+.15g}i'.format(value.real, value.imag)
    if isinstance(value, float):
        return '{:.15g}'.format(value)
    return value


class Options:
    """Holds command-line options."""

    def __init__(self, **kwargs):
        self.kwargs = kwargs
        self.failures_only = kwargs.get('failures_only', False)


class RowsTerminalView:
    """Print check rows as an aligned table, one row per check."""

    headers = ['check', 'estimate', 'target', 'budget', 'pass']

    def __init__(self, rows, io, **kwargs):
        self.rows = rows
        self.io = io
        self.options = Options(**kwargs)

    def table(self):
        rows = self.rows
        if self.options.failures_only:
            rows = [row for row in rows if not row.passed]
        return [[row.name, _cell(row.estimate), _cell(row.target), '{:.2e}'.format(row.budget),
                 'ok' if row.passed else 'FAIL'] for row in rows]

    def call(self):
        """Print to the io object."""
        self.io.write(tabulate(self.table(), headers=self.headers) + '\n')


class ReportTerminalView:
    """Serialize an experiment report to something that can be printed to a
    terminal.
    """

    def __init__(self, report, io, **kwargs):
        self.report = report
        self.io = io
        self.options = Options(**kwargs)

    def call(self):
        """Print to the io object."""
        config = self.report.config
        environment = self.report.environment
        self.io.write('\n')
        self.io.write('Experiment:  {}\n'.format(config.experiment))
        self.io.write('Seed:        {}\n'.format(config.seed))
        self.io.write('Workers:     {}\n'.format(environment.get('workers')))
        self.io.write('Seconds:     {}\n'.format(environment.get('wall_clock_seconds')))
        self.io.write('\n')

        df = self.report.to_frame()
        if df.empty:
            self.io.write('No checks.\n')
        else:
            if self.options.failures_only:
                df = df[~df.passed]
            with pd.option_context('display.max_rows', 9999, 'display.max_colwidth', 80):
                self.io.write(df.to_string(index=False) + '\n')
        failed = sum(not row.passed for row in self.report.rows)
        self.io.write('\n{} checks, {} failed\n'.format(len(self.report.rows), failed))


class ReportJsonView:
    """Write an experiment report as JSON."""

    def __init__(self, report, io):
        self.report = report
        self.io = io

    def call(self):
        self.io.write(self.report.to_json() + '\n')


class SampleCsvView:
    """Write sampled counts, or sampled points when a window was given, as CSV."""

    def __init__(self, io, counts=None, batch=None):
        self.io = io
        self.counts = counts
        self.batch = batch

    def call(self):
        if self.batch is not None:
            self.batch.to_csv(self.io)
            return
        df = pd.DataFrame({'sample_id': range(len(self.counts)), 'count': self.counts})
        df.to_csv(self.io, index=False)
