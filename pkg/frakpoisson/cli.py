"""
Command-line driver: Mittag-Leffler tables, count and configuration samples,
and verification experiments.

Exit codes: 0 when every check passes, 1 when one fails and 2 on a usage error.
"""
# pylint: disable=missing-docstring
import argparse
import logging
import sys

import numpy as np

from . import __version__
from .fpp_sampler import ConfigurationBatch, IntensityMeasure, Window, sample_configurations, \
    sample_count_direct, sample_count_mixture, sample_counts
from .harness import CheckRow, Experiment, SUITES, map_blocks, ml_rows, worker_count
from .mittag_leffler import DomainError, MLParams
from .stable_mixture import RngStream, StableParams
from .stats import two_sample_chi_square
from .constants import BLOCK_SIZE, SIGNIFICANCE
from .views import ReportJsonView, ReportTerminalView, RowsTerminalView, SampleCsvView


logger = logging.getLogger(__name__)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def number(text):
    """A real number, or a complex one written as '1+2j' or '1+2i'."""
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return complex(text.replace(' ', '').replace('i', 'j'))
    except ValueError as err:
        raise argparse.ArgumentTypeError('not a number: {!r}'.format(text)) from err


class App:
    def __init__(self, **kwargs):
        self.kwargs = kwargs
        self.out = kwargs.get('stdout') or sys.stdout

    def call(self):
        return getattr(self, 'cmd_{}'.format(self.kwargs['command']))()

    def cmd_ml(self):
        arguments = self.kwargs.get('z') or []
        derivatives = [(n, self.kwargs['x']) for n in self.kwargs.get('deriv') or []]
        if not arguments and not derivatives:
            raise DomainError('nothing to evaluate: give --z or --deriv')
        rows = ml_rows(self.kwargs['alpha'], arguments, derivatives, self.kwargs['digits'])
        RowsTerminalView(rows, self.out).call()
        return EXIT_PASS if all(row.passed for row in rows) else EXIT_FAIL

    def cmd_sample(self):
        if self.kwargs.get('seed') is None:
            raise DomainError('a seed is required (--seed)')
        alpha, mass = self.kwargs['alpha'], self.kwargs['mass']
        samples, method = self.kwargs['samples'], self.kwargs['method']
        if mass < 0:
            raise DomainError('mass must be non-negative: {}'.format(mass))
        ml = MLParams(alpha)
        rng = RngStream(self.kwargs['seed'])
        workers = worker_count()
        if self.kwargs.get('compare'):
            return self._compare(ml, mass, samples, rng, workers)
        if self.kwargs.get('window'):
            window = Window.parse(self.kwargs['window'])
            mu = IntensityMeasure.constant(mass / window.volume)
            batch = ConfigurationBatch.concatenate(map_blocks(
                lambda s, n: sample_configurations(ml, window, mu, s, n, method),
                rng, samples, BLOCK_SIZE, workers))
            self._write(SampleCsvView, batch=batch)
        else:
            counts = np.concatenate(map_blocks(
                lambda s, n: sample_counts(ml, mass, s, n, method),
                rng, samples, BLOCK_SIZE, workers))
            logger.info('mean count %.6f over %s samples', counts.mean(), samples)
            self._write(SampleCsvView, counts=counts)
        return EXIT_PASS

    def _compare(self, ml, mass, samples, rng, workers):
        direct_rng, mixture_rng = rng.split(2)
        stable = StableParams(ml.alpha)
        direct = np.concatenate(map_blocks(lambda s, n: sample_count_direct(ml, mass, s, n),
                                           direct_rng, samples, BLOCK_SIZE, workers))
        mixture = np.concatenate(map_blocks(lambda s, n: sample_count_mixture(stable, mass, s, n),
                                            mixture_rng, samples, BLOCK_SIZE, workers))
        test = two_sample_chi_square(direct, mixture)
        row = CheckRow('direct vs mixture alpha={} mass={} (chi-square p-value)'.format(
            ml.alpha, mass), test.pvalue, SIGNIFICANCE, 0.0, kind='at_least')
        RowsTerminalView([row], self.out).call()
        return EXIT_PASS if row.passed else EXIT_FAIL

    def _write(self, view_cls, **kwargs):
        path = self.kwargs.get('out')
        if path:
            with open(path, 'w', newline='') as file:
                view_cls(file, **kwargs).call()
        else:
            view_cls(self.out, **kwargs).call()

    def cmd_verify(self):
        overrides = {
            'experiment': self.kwargs.get('which'),
            'seed': self.kwargs.get('seed'),
            'alpha': self.kwargs.get('alpha'),
            'mass': self.kwargs.get('mass'),
            'samples': self.kwargs.get('samples'),
            'method': self.kwargs.get('method'),
            'nfuncs': self.kwargs.get('nfuncs'),
            'window': self.kwargs.get('window'),
            'masses': self.kwargs.get('masses'),
            'tolerance_scale': self.kwargs.get('tolerance_scale'),
            'out': self.kwargs.get('out'),
        }
        experiment = Experiment.load(self.kwargs.get('config'), **overrides)
        report = experiment.call()
        if experiment.config.out:
            report.write(experiment.config.out)
        if self.kwargs.get('format') == 'json':
            ReportJsonView(report, self.out).call()
        else:
            ReportTerminalView(report, self.out,
                               failures_only=self.kwargs.get('failures_only')).call()
        return EXIT_PASS if report.passed else EXIT_FAIL


def parse_arguments(argv=None):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--verbose', '-v', dest='verbose', action='store_true',
                        default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog='frakpoisson', parents=[common])
    parser.add_argument('--version', action='version', version=__version__)
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    ml = commands.add_parser('ml', parents=[common],
                             help='Mittag-Leffler values and derivatives against the oracle')
    ml.add_argument('--alpha', dest='alpha', type=float, required=True)
    ml.add_argument('--z', dest='z', type=number, action='append')
    ml.add_argument('--deriv', dest='deriv', type=int, action='append')
    ml.add_argument('--x', dest='x', type=float)
    ml.add_argument('--digits', dest='digits', type=int)
    ml.set_defaults(x=0.0, digits=30)

    sample = commands.add_parser('sample', parents=[common],
                                 help='counts, or configurations on a window, as CSV')
    sample.add_argument('--alpha', dest='alpha', type=float, required=True)
    sample.add_argument('--mass', dest='mass', type=float)
    sample.add_argument('--samples', '-n', dest='samples', type=int)
    sample.add_argument('--seed', dest='seed', type=int)
    sample.add_argument('--method', dest='method', choices=['direct', 'mixture'])
    sample.add_argument('--window', dest='window', type=str)
    sample.add_argument('--compare', dest='compare', action='store_true')
    sample.add_argument('--out', dest='out', type=str)
    sample.set_defaults(mass=1.0, samples=1000, method='direct', compare=False)

    verify = commands.add_parser('verify', parents=[common], help='run a verification suite')
    verify.add_argument('which', nargs='?', choices=list(SUITES))
    verify.add_argument('--config', dest='config', type=str)
    verify.add_argument('--alpha', dest='alpha', type=float)
    verify.add_argument('--mass', dest='mass', type=float)
    verify.add_argument('--samples', '-n', dest='samples', type=int)
    verify.add_argument('--seed', dest='seed', type=int)
    verify.add_argument('--method', dest='method', choices=['direct', 'mixture'])
    verify.add_argument('--nfuncs', dest='nfuncs', type=int)
    verify.add_argument('--window', dest='window', type=str)
    verify.add_argument('--masses', dest='masses', type=str)
    verify.add_argument('--tolerance-scale', dest='tolerance_scale', type=float)
    verify.add_argument('--out', dest='out', type=str)
    verify.add_argument('--format', dest='format', choices=['table', 'json'])
    verify.add_argument('--failures-only', dest='failures_only', action='store_true')
    verify.set_defaults(format='table', failures_only=False)

    return parser.parse_args(argv)


def main(argv=None):
    args = parse_arguments(argv)
    level = logging.DEBUG if getattr(args, 'verbose', False) else logging.WARNING
    logging.basicConfig(level=level,
                        stream=sys.stderr, format='%(levelname)s %(name)s: %(message)s')
    try:
        return App(**vars(args)).call()
    except KeyboardInterrupt:
        print('command canceled.')
        return EXIT_FAIL
    except ValueError as err:
        sys.stderr.write('usage error: {}\n'.format(err))
        return EXIT_USAGE
    except RuntimeError as err:
        sys.stderr.write('error: {}\n'.format(err))
        return EXIT_FAIL
