# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""
===========
fedpdfp.cli
===========

Command-line entry point, ``fedpdfp <command>``.

Commands
--------

``run``
    Federated training described by a configuration file; writes the
    metrics stream and the final state.
``quantizer-bench``
    Monte Carlo bias, error and bit cost of the quantizer.
``tv-demo``
    Toy total-variation reconstruction with federated clients.
``partition``
    Write the client shards of a data set as LIBSVM files.
``diagnose``
    Optimality residuals and Lyapunov value of a saved final state.

Exit status is 0 on success, 2 for configuration errors and 3 for data
errors.
"""
import os
import sys
from argparse import ArgumentParser
import numpy as np
from astropy.table import Table
from . import __version__ as fedpdfpVersion
from .config import ConfigError, ExperimentConfig, load_config
from .dataio import (DataFormatError, build_graph_matrix, graph_operator, load_matrix,
                     partition, plan_partition, read_libsvm, split_train_test,
                     write_partition)
from .fedsim import FedConfig, StepSchedule, lyapunov, simulate, step_size, write_metrics
from .linops import IdentityOperator
from .log import get_logger, DEBUG
from .losses import ProblemSpec, accuracy
from .proxlib import RegularizerSpec
from .quantize import empirical_moments, encoded_bits, quantize, random_stream, variance_bound
from .solvers import PdState, default_lambda, kkt_residual, reference_solution


def _options(*args):
    """Parse command-line options.
    """
    parser = ArgumentParser(description="Federated primal-dual fixed point experiments.",
                            prog=os.path.basename(sys.argv[0]))
    parser.add_argument('-v', '--verbose', dest='verbose', action='store_true',
                        help='Print extra debugging information.')
    parser.add_argument('-V', '--version', action='version', version='%(prog)s ' + fedpdfpVersion)
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True
    common = ArgumentParser(add_help=False)
    common.add_argument('-c', '--config', dest='config', metavar='PATH',
                        help='Read the experiment configuration from PATH.')
    common.add_argument('-s', '--seed', dest='seed', type=int, metavar='U64',
                        help='Override the master seed.')
    common.add_argument('-o', '--out', dest='out', metavar='PATH',
                        help='Override the output path.')
    common.add_argument('-t', '--threads', dest='threads', type=int, metavar='INT',
                        help='Override the number of worker threads.')
    sub.add_parser('run', parents=[common], help='Run federated training.')
    bench = sub.add_parser('quantizer-bench', help='Benchmark the quantizer.')
    bench.add_argument('-d', '--dim', dest='dim', type=int, default=123, metavar='D',
                       help='Vector length (default %(default)s).')
    bench.add_argument('-l', '--levels', dest='levels', type=int, nargs='+', default=[1, 4, 20],
                       metavar='S', help='Quantization levels (default %(default)s).')
    bench.add_argument('-n', '--trials', dest='trials', type=int, default=10000, metavar='N',
                       help='Monte Carlo trials (default %(default)s).')
    bench.add_argument('-s', '--seed', dest='seed', type=int, default=0, metavar='U64',
                       help='Seed (default %(default)s).')
    bench.add_argument('-o', '--out', dest='out', metavar='PATH',
                       help='Also write the table to PATH.')
    sub.add_parser('tv-demo', parents=[common], help='Toy total-variation reconstruction.')
    sub.add_parser('partition', parents=[common], help='Write client shards as LIBSVM files.')
    diagnose = sub.add_parser('diagnose', parents=[common], help='Evaluate a saved final state.')
    diagnose.add_argument('-S', '--state', dest='state', metavar='PATH',
                          help='Final state written by run (default: output path with .npz).')
    return parser.parse_args(args if args else None)


def _config(options):
    config = load_config(options.config) if options.config else ExperimentConfig.from_dict(None)
    config.override(seed=options.seed, out=options.out, threads=options.threads)
    return config


def _state_file(out):
    return os.path.splitext(out)[0] + '.npz'


def load_data(config):
    """Read the training and test sets named in `config`.

    Returns
    -------
    :func:`tuple`
        Training and test :class:`~fedpdfp.dataio.Dataset`; the test set
        is ``None`` if neither a file nor a split is configured.
    """
    data = config.data
    if data['train'] is None:
        raise ConfigError("data.train is required.")
    train = read_libsvm(data['train'], data['d'])
    if data['test'] is not None:
        test = read_libsvm(data['test'], train.d)
    elif data['n_train'] is not None or data['n_test'] is not None:
        try:
            train, test = split_train_test(train, data['n_train'], data['n_test'], seed=data['split_seed'])
        except ValueError as e:
            raise ConfigError("data.n_train, data.n_test: {0}".format(e))
    else:
        test = None
    return train, test


def build_problem(config, train):
    """Client shards, regularizer and operator of a training run.

    Returns
    -------
    :class:`~fedpdfp.losses.ProblemSpec`
        The problem, with :math:`\\lambda` resolved.
    """
    log = get_logger()
    problem, fed = config.problem, config.federation
    if problem['regularizer'] != 'l1':
        raise ConfigError("problem.regularizer must be 'l1' for run; group-l2 is used by tv-demo.")
    if fed['algorithm'] == 'fpdfp-identity':
        B = IdentityOperator(train.d)
    elif config.data['graph'] is not None:
        B = graph_operator(load_matrix(config.data['graph']))
    else:
        B = graph_operator(build_graph_matrix(train, config.data['graph_threshold']))
    log.info("Coupling operator %r.", B)
    if B.cols != train.d:
        raise DataFormatError("Graph has {0:d} columns but the data have {1:d} features.".format(B.cols, train.d))
    try:
        shards = partition(train, fed['N'], seed=config.data['split_seed'], kind=problem['loss'],
                           mu1=problem['mu1'])
    except ValueError as e:
        if isinstance(e, DataFormatError):
            raise
        raise ConfigError("federation.N: {0}".format(e))
    lam = fed['lam'] if fed['lam'] != 'auto' else default_lambda(B)
    if fed['algorithm'] == 'fpdfp-identity':
        lam = 1.0
    return ProblemSpec(shards, RegularizerSpec('l1', problem['mu2']), B, lam)


def _reference(config, problem, out):
    diag = config.diagnostics
    cache = diag['reference'] if diag['reference'] is not None else os.path.splitext(out)[0] + '.reference.npz'
    gamma = diag['reference_gamma']
    if gamma is None:
        gamma = step_size(config.federation['K'], config.schedule())
    return reference_solution(problem, gamma, problem.lam, K=diag['reference_rounds'], cache=cache)


def run(config):
    """Train as described by `config`.

    Writes the metrics to ``run.out`` and the final state next to it, with
    extension ``.npz``.

    Returns
    -------
    :func:`tuple`
        The final :class:`~fedpdfp.fedsim.ServerState` and the metrics rows.
    """
    log = get_logger()
    train, test = load_data(config)
    problem = build_problem(config, train)
    fed = config.fed_config(lam=problem.lam)
    test_shard = None if test is None else test.shard(config.problem['loss'], mu1=config.problem['mu1'])
    reference = None
    if config.diagnostics['reference'] is not None:
        reference = _reference(config, problem, config.run['out'])
    server, rows = simulate(problem, fed, test=test_shard, reference=reference)
    write_metrics(rows, config.run['out'])
    v = server.v if server.v is not None else np.zeros(0)
    np.savez(_state_file(config.run['out']), x=server.x, v=v, k=server.k)
    log.info("Wrote %s.", config.run['out'])
    last = rows[-1]
    print("final train_loss={0:.10g} test_accuracy={1:.6f} uplink_bits_cum={2:d}".format(
        last.train_loss, last.test_accuracy, last.uplink_bits_cum))
    return server, rows


def quantizer_bench(dim, levels, trials, seed=0):
    """Monte Carlo properties of the quantizer on a Gaussian vector.

    Parameters
    ----------
    dim : :class:`int`
        Vector length.
    levels : :class:`list`
        Quantization levels to test.
    trials : :class:`int`
        Number of trials per level.
    seed : :class:`int`, optional
        Seed.

    Returns
    -------
    :class:`~astropy.table.Table`
        Columns ``s``, ``mean_bias`` (average over coordinates of the
        mean error), ``max_bias_sigma`` (largest mean error in standard
        errors), ``mean_sq_error``, ``bits`` (mean encoded size),
        ``bound`` (variance bound).
    """
    if dim < 1 or trials < 1 or any(s < 1 for s in levels):
        raise ValueError("dim, trials and levels must be positive.")
    x = random_stream(seed, 0, 0, 'data').standard_normal(dim)
    table = Table(names=('s', 'mean_bias', 'max_bias_sigma', 'mean_sq_error', 'bits', 'bound'),
                  dtype=(int, float, float, float, float, float))
    for s in levels:
        bias, mse, stderr = empirical_moments(x, s, trials, seed=seed, full=True)
        safe = np.where(stderr > 0, stderr, 1.0)
        sigma = np.where(stderr > 0, np.abs(bias) / safe, 0.0)
        draws = min(trials, 100)
        rng = random_stream(seed, s, 0, 'quantize-x')
        bits = np.mean([encoded_bits(quantize(x, s, rng)) for _ in range(draws)])
        table.add_row((s, float(bias.mean()), float(sigma.max()), mse, float(bits), variance_bound(x, s)))
    table['bits'].unit = 'bit'
    return table


def tv_demo(config):
    """Run :func:`~fedpdfp.imaging.tv_demo` as described by ``config.imaging``.

    Writes the per-round metrics of the best weight to ``run.out`` and the
    image to ``imaging.image``.
    """
    from .imaging import tv_demo as demo, write_image
    log = get_logger()
    im = config.imaging
    fed = config.federation
    lam = None if im['lam'] == 'auto' else im['lam']
    fc = FedConfig(im['clients'], K=im['K'], s=None if fed['s'] == 'off' else fed['s'],
                   lam=lam, schedule=StepSchedule('constant', im['gamma']),
                   seed=config.run['seed'], blocks=fed['blocks'], threads=config.run['threads'],
                   log_every=config.run['log_every'])
    result = demo(im['size'], im['noise'], im['mu'], fc, lam=lam, seed=config.run['seed'])
    result['metrics'].write(config.run['out'], format='ascii.csv', overwrite=True)
    write_image(im['image'], result['image'], mu=result['mu'], psnr=result['psnr'])
    log.info("Wrote %s and %s.", config.run['out'], im['image'])
    print("best mu={0:g} psnr={1:.2f} baseline_psnr={2:.2f} uplink_bits_cum={3:d}".format(
        result['mu'], result['psnr'], result['baseline_psnr'],
        int(result['metrics']['uplink_bits_cum'][-1])))
    return result


def partition_command(config, outdir):
    """Write the client shards of the training set to `outdir`.
    """
    log = get_logger()
    train, test = load_data(config)
    try:
        plan = plan_partition(len(train), config.federation['N'], config.data['split_seed'])
    except ValueError as e:
        raise ConfigError("federation.N: {0}".format(e))
    names = write_partition(train, plan, outdir)
    log.info("Wrote %d shards to %s.", len(names), outdir)
    print("wrote {0:d} shards of sizes {1:d}-{2:d} to {3}".format(len(names), int(plan.sizes().min()),
                                                                   int(plan.sizes().max()), outdir))
    return names


def diagnose(config, state):
    """Optimality residuals and Lyapunov value of a saved final state.

    Returns
    -------
    :class:`dict`
        ``kkt_rv``, ``kkt_rx``, ``lyapunov``, ``accuracy`` (test set, NaN if
        none).
    """
    if config.federation['algorithm'] != 'fpdfp':
        raise ConfigError("federation.algorithm must be 'fpdfp' for diagnose.")
    train, test = load_data(config)
    problem = build_problem(config, train)
    with np.load(state) as data:
        final = PdState(data['x'], data['v'], int(data['k']))
    final.check(problem)
    reference = _reference(config, problem, config.run['out'])
    gamma = step_size(final.k, config.schedule())
    r_v, r_x = kkt_residual(final.x, final.v, problem, gamma, problem.lam)
    result = {'kkt_rv': r_v, 'kkt_rx': r_x,
              'lyapunov': lyapunov(final.x, final.v, reference.x, reference.v, gamma, problem.lam),
              'accuracy': accuracy(test, final.x) if test is not None and config.problem['loss'] == 'logistic' else float('nan')}
    print("kkt_rv={kkt_rv:.6g} kkt_rx={kkt_rx:.6g} lyapunov={lyapunov:.6g} test_accuracy={accuracy:.6f}".format(**result))
    return result


def main(*args):
    """Entry-point for command-line scripts.

    Returns
    -------
    :class:`int`
        An integer suitable for passing to :func:`sys.exit`.
    """
    options = _options(*args)
    if options.verbose:
        log = get_logger(DEBUG)
    else:
        log = get_logger()
    try:
        if options.command == 'quantizer-bench':
            table = quantizer_bench(options.dim, options.levels, options.trials, options.seed)
            table.pprint(max_lines=-1, max_width=-1)
            if options.out:
                table.write(options.out, format='ascii.csv', overwrite=True)
            return 0
        config = _config(options)
        if options.command == 'run':
            run(config)
        elif options.command == 'tv-demo':
            tv_demo(config)
        elif options.command == 'partition':
            partition_command(config, options.out if options.out else 'shards')
        else:
            diagnose(config, options.state if options.state else _state_file(config.run['out']))
    except ConfigError as e:
        log.critical(str(e))
        return 2
    except (DataFormatError, OSError) as e:
        log.critical(str(e))
        return 3
    except ValueError as e:
        log.critical(str(e))
        return 2
    return 0
