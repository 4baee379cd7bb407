# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""
==============
fedpdfp.fedsim
==============

Simulation of federated training rounds.

Four algorithms are available, selected by :attr:`FedConfig.algorithm`:

``fpdfp``
    Every selected client takes one PDFP step from the global
    :math:`(x_k, v_k)` with a minibatch gradient and uploads
    :math:`Q(x^{(i)}_{k+1} - x_k)` and :math:`Q(v^{(i)}_{k+1})`.  The server
    sets :math:`x_{k+1} = x_k + \\frac{1}{n}\\sum_i Q(x^{(i)}_{k+1} - x_k)` and
    :math:`v_{k+1} = \\frac{1}{n}\\sum_i Q(v^{(i)}_{k+1})`.
``fpdfp-identity``
    The :math:`B = I` form: clients take one proximal gradient step and
    upload only the primal difference.
``fedavg``
    :math:`\\tau` local SGD steps, the server averages the raw parameters.
``fedpaq``
    :math:`\\tau` local SGD steps, the server averages quantized differences.

The two baselines ignore :math:`g`.

Randomness is drawn from streams keyed by (seed, round, client, purpose),
see :func:`~fedpdfp.quantize.random_stream`, and the server always reduces
client messages in increasing client id.  The metrics of a run therefore
depend only on the configuration and the seed, not on the number of
threads.
"""
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
import numpy as np
from astropy.table import Table
from .linops import DimensionError
from .losses import (LossShard, composite_objective, loss_value, accuracy,
                     minibatch_grad)
from .proxlib import prox_g, dual_feasible
from .quantize import Quantizer, random_stream
from .solvers import pdfp_update, kkt_residual, check_coupling, default_lambda


_algorithms = ('fpdfp', 'fpdfp-identity', 'fedavg', 'fedpaq')


class StepSchedule(object):
    """Step sizes :math:`\\gamma_k`.

    Parameters
    ----------
    kind : :class:`str`
        ``'constant'`` or ``'decreasing'``.
    gamma : :class:`float`, optional
        The constant step.
    d1 : :class:`float`, optional
        :math:`D_1` of the decreasing schedule
        :math:`\\gamma_k = 2/(D_1(k + k_0) + 1)`.
    offset : :class:`int`, optional
        :math:`k_0`; zero gives :math:`\\gamma_0 = 2`.
    """

    def __init__(self, kind='constant', gamma=None, d1=None, offset=0):
        if kind == 'constant':
            if gamma is None or not gamma > 0:
                raise ValueError("A constant schedule needs gamma > 0.")
            gamma = float(gamma)
        elif kind == 'decreasing':
            if d1 is None or not d1 > 0:
                raise ValueError("A decreasing schedule needs d1 > 0.")
            if offset < 0:
                raise ValueError("The schedule offset must be nonnegative.")
            d1 = float(d1)
        else:
            raise ValueError("Unknown schedule kind '{0}'.".format(kind))
        self.kind = kind
        self.gamma = gamma
        self.d1 = d1
        self.offset = int(offset)

    def __repr__(self):
        if self.kind == 'constant':
            return "StepSchedule('constant', gamma={0:g})".format(self.gamma)
        return "StepSchedule('decreasing', d1={0:g}, offset={1:d})".format(self.d1, self.offset)

    def __eq__(self, other):
        if not isinstance(other, StepSchedule):
            return NotImplemented
        return ((self.kind, self.gamma, self.d1, self.offset) ==
                (other.kind, other.gamma, other.d1, other.offset))

    def __call__(self, k):
        return step_size(k, self)


def step_size(k, schedule):
    """Step size of round `k`.

    Parameters
    ----------
    k : :class:`int`
        Round index, ``k >= 0``.
    schedule : :class:`StepSchedule`
        The schedule.

    Returns
    -------
    :class:`float`
        :math:`\\gamma_k`.
    """
    if k < 0:
        raise ValueError("Round index must be nonnegative.")
    if schedule.kind == 'constant':
        return schedule.gamma
    return 2.0 / (schedule.d1 * (k + schedule.offset) + 1.0)


class FedConfig(object):
    """Parameters of a federated run.

    Parameters
    ----------
    N : :class:`int`
        Number of clients.
    n : :class:`int`, optional
        Clients selected per round; all of them by default.
    b : :class:`int`, optional
        Local batch size; ``None`` for full local gradients.
    K : :class:`int`, optional
        Number of rounds.
    s : :class:`int`, optional
        Quantization levels; ``None`` disables quantization.
    lam : :class:`float`, optional
        Coupling parameter; ``None`` uses :math:`1/\\rho_{\\max}(BB^T)`.
    schedule : :class:`StepSchedule`, optional
        Step sizes; constant 0.1 by default.
    tau : :class:`int`, optional
        Local steps of the baselines.
    algorithm : :class:`str`, optional
        One of ``'fpdfp'``, ``'fpdfp-identity'``, ``'fedavg'``, ``'fedpaq'``.
    seed : :class:`int`, optional
        Master seed.
    blocks : :class:`int` or :class:`list`, optional
        Block partition of the quantizer.
    threads : :class:`int`, optional
        Worker threads for client updates.
    log_every : :class:`int`, optional
        Log progress every this many rounds; 0 disables.

    Raises
    ------
    ValueError
        Naming the offending fields.
    """

    def __init__(self, N, n=None, b=None, K=1, s=None, lam=None, schedule=None,
                 tau=1, algorithm='fpdfp', seed=0, blocks=1, threads=1, log_every=0):
        self.N = int(N)
        self.n = self.N if n is None else int(n)
        self.b = None if b is None else int(b)
        self.K = int(K)
        self.s = None if s is None else int(s)
        self.lam = None if lam is None else float(lam)
        self.schedule = StepSchedule('constant', 0.1) if schedule is None else schedule
        self.tau = int(tau)
        self.algorithm = algorithm
        self.seed = int(seed)
        self.blocks = blocks
        self.threads = int(threads)
        self.log_every = int(log_every)
        if self.N < 1:
            raise ValueError("N must be at least 1.")
        if not 1 <= self.n <= self.N:
            raise ValueError("n = {0:d} must satisfy 1 <= n <= N = {1:d}.".format(self.n, self.N))
        if self.b is not None and self.b < 1:
            raise ValueError("b must be at least 1.")
        if self.K < 1:
            raise ValueError("K must be at least 1.")
        if self.s is not None and self.s < 1:
            raise ValueError("s must be at least 1 or off.")
        if self.lam is not None and not self.lam > 0:
            raise ValueError("lam must be positive.")
        if self.tau < 1:
            raise ValueError("tau must be at least 1.")
        if self.algorithm not in _algorithms:
            raise ValueError("algorithm '{0}' is not one of {1}.".format(self.algorithm, _algorithms))
        if self.threads < 1:
            raise ValueError("threads must be at least 1.")

    def __repr__(self):
        return ("FedConfig(algorithm='{0}', N={1:d}, n={2:d}, b={3}, K={4:d}, "
                "s={5}, lam={6}, {7!r})").format(self.algorithm, self.N, self.n, self.b, self.K,
                                                 'off' if self.s is None else self.s,
                                                 self.lam, self.schedule)

    @property
    def quantizer(self):
        """The :class:`~fedpdfp.quantize.Quantizer` of the uploads.
        """
        return Quantizer(self.s, self.blocks)

    def check_shards(self, shards):
        """Check the configuration against the client data.
        """
        if len(shards) != self.N:
            raise ValueError("N = {0:d} but {1:d} client shards were given.".format(self.N, len(shards)))
        smallest = min(shard.n for shard in shards)
        if self.b is not None and self.b > smallest:
            raise ValueError("b = {0:d} exceeds the smallest shard size {1:d}.".format(self.b, smallest))


class ServerState(object):
    """Global iterate kept by the server.

    Parameters
    ----------
    x : array-like
        Global primal vector.
    v : array-like, optional
        Global dual vector, only kept by ``fpdfp``.
    k : :class:`int`, optional
        Rounds completed.
    bits : :class:`int`, optional
        Cumulative uplink bits.
    """

    def __init__(self, x, v=None, k=0, bits=0):
        self.x = np.asarray(x, dtype=np.float64)
        self.v = None if v is None else np.asarray(v, dtype=np.float64)
        self.k = int(k)
        self.bits = int(bits)

    @classmethod
    def initial(cls, problem, algorithm='fpdfp'):
        """The zero state for `algorithm`.
        """
        v = np.zeros(problem.m) if algorithm == 'fpdfp' else None
        return cls(np.zeros(problem.d), v)

    def __repr__(self):
        return "ServerState(k={0:d}, d={1:d}, dual={2}, bits={3:d})".format(
            self.k, self.x.size, self.v is not None, self.bits)


ClientMessage = namedtuple('ClientMessage', ['client', 'delta_x', 'qv', 'uplink_bits'])
ClientMessage.__doc__ = """Upload of one client in one round.

``delta_x`` and ``qv`` are payloads of :meth:`~fedpdfp.quantize.Quantizer.compress`;
``qv`` is ``None`` unless the algorithm sends a dual vector.
"""


MetricsRow = namedtuple('MetricsRow', ['round', 'gamma_k', 'train_loss', 'test_loss',
                                       'test_accuracy', 'uplink_bits_cum', 'lyapunov',
                                       'kkt_rv', 'kkt_rx'])
MetricsRow.__doc__ = """Metrics after one round; unavailable values are NaN.
"""


def sample_clients(N, n, k, seed):
    """Select `n` of `N` clients uniformly without replacement.

    Parameters
    ----------
    N : :class:`int`
        Number of clients.
    n : :class:`int`
        Number to select.
    k : :class:`int`
        Round index.
    seed : :class:`int`
        Master seed.

    Returns
    -------
    :class:`numpy.ndarray`
        Sorted client ids in ``0 ... N-1``.
    """
    if not 1 <= n <= N:
        raise ValueError("Cannot select n = {0} of N = {1} clients.".format(n, N))
    if n == N:
        return np.arange(N)
    return np.sort(random_stream(seed, k, 0, 'sample').choice(N, size=n, replace=False))


def fpdfp_local_update(shard, x, v, gamma, lam, operator, regularizer, b, rng):
    """One local PDFP step of a client.

    Parameters
    ----------
    shard : :class:`~fedpdfp.losses.LossShard`
        The client data.
    x, v : :class:`numpy.ndarray`
        The global iterate.
    gamma, lam : :class:`float`
        Step size and coupling parameter.
    operator : :class:`~fedpdfp.linops.LinearOperator`
        :math:`B`.
    regularizer : :class:`~fedpdfp.proxlib.RegularizerSpec`
        :math:`g`.
    b : :class:`int` or ``None``
        Batch size.
    rng : :class:`numpy.random.Generator`
        Generator for the batch.

    Returns
    -------
    :func:`tuple`
        :math:`(x^{(i)}_{k+1}, v^{(i)}_{k+1})`.
    """
    g = minibatch_grad(shard, x, b, rng)
    return pdfp_update(x, v, g, gamma, lam, operator, regularizer)


def _fpdfp_client(problem, config, server, gamma, lam, client):
    quantizer = config.quantizer
    rng = random_stream(config.seed, server.k, client, 'batch')
    x_i, v_i = fpdfp_local_update(problem.shards[client], server.x, server.v, gamma, lam,
                                  problem.operator, problem.regularizer, config.b, rng)
    delta = quantizer.compress(x_i - server.x, random_stream(config.seed, server.k, client, 'quantize-x'))
    qv = quantizer.compress(v_i, random_stream(config.seed, server.k, client, 'quantize-v'))
    return ClientMessage(client, delta, qv, quantizer.bits(delta) + quantizer.bits(qv))


def _identity_client(problem, config, server, gamma, lam, client):
    quantizer = config.quantizer
    rng = random_stream(config.seed, server.k, client, 'batch')
    g = minibatch_grad(problem.shards[client], server.x, config.b, rng)
    x_i = prox_g(problem.regularizer, server.x - gamma * g, gamma)
    delta = quantizer.compress(x_i - server.x, random_stream(config.seed, server.k, client, 'quantize-x'))
    return ClientMessage(client, delta, None, quantizer.bits(delta))


def _baseline_client(problem, config, server, gamma, lam, client):
    shard = problem.shards[client]
    rng = random_stream(config.seed, server.k, client, 'batch')
    y = server.x
    for _ in range(config.tau):
        y = y - gamma * minibatch_grad(shard, y, config.b, rng)
    if config.algorithm == 'fedavg':
        return ClientMessage(client, y, None, 32 * y.size)
    quantizer = config.quantizer
    delta = quantizer.compress(y - server.x, random_stream(config.seed, server.k, client, 'quantize-x'))
    return ClientMessage(client, delta, None, quantizer.bits(delta))


def aggregate(x, messages, quantizer, n, average=False):
    """Combine client messages in increasing client id.

    Parameters
    ----------
    x : :class:`numpy.ndarray`
        Global primal vector of the round.
    messages : :class:`list`
        :class:`ClientMessage` objects.
    quantizer : :class:`~fedpdfp.quantize.Quantizer`
        Decoder of the payloads.
    n : :class:`int`
        Number of selected clients.
    average : :class:`bool`, optional
        If ``True``, the ``delta_x`` fields hold raw parameters and are
        averaged directly.

    Returns
    -------
    :func:`tuple`
        The new primal vector and the new dual vector (``None`` when no
        message carries one).
    """
    messages = sorted(messages, key=lambda m: m.client)
    if len(messages) != n:
        raise ValueError("Expected {0:d} messages, got {1:d}.".format(n, len(messages)))
    total = np.zeros_like(x)
    dual = None
    for message in messages:
        total += message.delta_x if average else quantizer.decompress(message.delta_x)
        if message.qv is not None:
            decoded = quantizer.decompress(message.qv)
            dual = decoded if dual is None else dual + decoded
    x_new = total / n if average else x + total / n
    return x_new, (None if dual is None else dual / n)


def lyapunov(x, v, x_star, v_star, gamma, lam):
    """Evaluate :math:`\\lVert x - x^*\\rVert^2 + \\frac{\\gamma^2}{\\lambda}\\lVert v - v^*\\rVert^2`.

    The dual term is dropped when `v` is ``None``.
    """
    value = float(np.sum((np.asarray(x) - x_star)**2))
    if v is not None:
        value += gamma**2 / lam * float(np.sum((np.asarray(v) - v_star)**2))
    return value


def _metrics(server, problem, config, lam, test=None, reference=None):
    """Metrics of `server` after its latest round.
    """
    nan = float('nan')
    gamma_next = step_size(server.k, config.schedule)
    test_loss, test_accuracy = nan, nan
    if test is not None:
        test_loss = loss_value(test, server.x)
        if test.kind == 'logistic':
            test_accuracy = accuracy(test, server.x)
    kkt_rv, kkt_rx = nan, nan
    if config.algorithm == 'fpdfp':
        kkt_rv, kkt_rx = kkt_residual(server.x, server.v, problem, gamma_next, lam)
    elif config.algorithm == 'fpdfp-identity':
        kkt_rx = kkt_residual(server.x, np.zeros(problem.m), problem, gamma_next, 1.0)[1]
    value = nan
    if reference is not None:
        value = lyapunov(server.x, server.v, reference.x, reference.v, gamma_next, lam)
    return MetricsRow(server.k, step_size(server.k - 1, config.schedule),
                      composite_objective(problem, server.x), test_loss, test_accuracy,
                      server.bits, value, kkt_rv, kkt_rx)


def _run_round(client_update, server, problem, config, lam, executor=None):
    gamma = step_size(server.k, config.schedule)
    selected = sample_clients(config.N, config.n, server.k, config.seed)
    work = lambda client: client_update(problem, config, server, gamma, lam, int(client))
    if executor is None:
        messages = [work(c) for c in selected]
    else:
        messages = list(executor.map(work, selected))
    x, v = aggregate(server.x, messages, config.quantizer, config.n,
                     average=(config.algorithm == 'fedavg'))
    bits = sum(m.uplink_bits for m in messages)
    return ServerState(x, v, server.k + 1, server.bits + bits)


def fpdfp_round(server, problem, config, lam=None, test=None, reference=None, executor=None,
                evaluate=True):
    """One round of federated PDFP.

    Parameters
    ----------
    server : :class:`ServerState`
        Global iterate; must carry a dual vector.
    problem : :class:`~fedpdfp.losses.ProblemSpec`
        The problem; one shard per client.
    config : :class:`FedConfig`
        Run parameters.
    lam : :class:`float`, optional
        Coupling parameter; ``config.lam`` or ``problem.lam`` by default.
    test : :class:`~fedpdfp.losses.LossShard`, optional
        Held-out data for the test columns of the metrics.
    reference : :class:`~fedpdfp.solvers.PdState`, optional
        Reference saddle point for the Lyapunov column.
    executor : :class:`concurrent.futures.Executor`, optional
        Runs the client updates.
    evaluate : :class:`bool`, optional
        If ``False``, skip the metrics and return ``None`` in their place.

    Returns
    -------
    :func:`tuple`
        The new :class:`ServerState` and its :class:`MetricsRow`.
    """
    if server.v is None:
        raise ValueError("Federated PDFP needs a dual vector in the server state.")
    lam = _coupling(problem, config, lam)
    server = _run_round(_fpdfp_client, server, problem, config, lam, executor)
    if not evaluate:
        return server, None
    return server, _metrics(server, problem, config, lam, test, reference)


def fpdfp_identity_round(server, problem, config, test=None, reference=None, executor=None,
                         evaluate=True):
    """One round of federated PDFP with :math:`B = I`, :math:`\\lambda = 1`.

    Only the primal difference is uploaded.  Arguments are as for
    :func:`fpdfp_round`.

    Raises
    ------
    ValueError
        If the operator of `problem` is not the identity.
    """
    if problem.operator.kind != 'identity':
        raise ValueError("The identity form of federated PDFP needs B = I, got {0!r}.".format(problem.operator))
    server = _run_round(_identity_client, ServerState(server.x, None, server.k, server.bits),
                        problem, config, 1.0, executor)
    if not evaluate:
        return server, None
    return server, _metrics(server, problem, config, 1.0, test, reference)


def baseline_round(server, problem, config, test=None, reference=None, executor=None,
                   evaluate=True):
    """One round of FedAvg or FedPAQ, following ``config.algorithm``.

    Clients take ``config.tau`` minibatch SGD steps on their smooth loss;
    the regularizer is ignored.  Arguments are as for :func:`fpdfp_round`.
    """
    if config.algorithm not in ('fedavg', 'fedpaq'):
        raise ValueError("Baseline rounds need algorithm 'fedavg' or 'fedpaq', got '{0}'.".format(config.algorithm))
    server = _run_round(_baseline_client, ServerState(server.x, None, server.k, server.bits),
                        problem, config, 1.0, executor)
    if not evaluate:
        return server, None
    return server, _metrics(server, problem, config, 1.0, test, reference)


def _coupling(problem, config, lam):
    if lam is None:
        lam = config.lam if config.lam is not None else problem.lam
    if lam is None:
        lam = default_lambda(problem.operator)
    return lam


def simulate(problem, config, test=None, reference=None, server=None, callback=None,
             evaluate=True):
    """Run ``config.K`` rounds.

    Parameters
    ----------
    problem : :class:`~fedpdfp.losses.ProblemSpec`
        The problem; one shard per client.
    config : :class:`FedConfig`
        Run parameters.
    test : :class:`~fedpdfp.losses.LossShard`, optional
        Held-out data.
    reference : :class:`~fedpdfp.solvers.PdState`, optional
        Reference saddle point for the Lyapunov column.
    server : :class:`ServerState`, optional
        Starting point; zero by default.
    callback : callable, optional
        Called as ``callback(server, row)`` after every round.
    evaluate : :class:`bool`, optional
        If ``False``, no metrics are computed and the returned list is empty.

    Returns
    -------
    :func:`tuple`
        The final :class:`ServerState` and the list of :class:`MetricsRow`.
    """
    from .log import get_logger
    log = get_logger()
    config.check_shards(problem.shards)
    if test is not None and not isinstance(test, LossShard):
        raise TypeError("Test data must be a LossShard.")
    if server is None:
        server = ServerState.initial(problem, config.algorithm)
    if server.x.shape != (problem.d,):
        raise DimensionError("Server state of shape {0} does not match dimension {1:d}.".format(server.x.shape, problem.d))
    if config.algorithm == 'fpdfp':
        lam = _coupling(problem, config, None)
        check_coupling(problem.operator, lam)
        run = lambda s, ex: fpdfp_round(s, problem, config, lam, test, reference, ex, evaluate)
    elif config.algorithm == 'fpdfp-identity':
        run = lambda s, ex: fpdfp_identity_round(s, problem, config, test, reference, ex, evaluate)
    else:
        run = lambda s, ex: baseline_round(s, problem, config, test, reference, ex, evaluate)
    log.info("Starting %r.", config)
    rows = list()
    executor = ThreadPoolExecutor(max_workers=config.threads) if config.threads > 1 else None
    try:
        for _ in range(config.K):
            server, row = run(server, executor)
            if evaluate:
                rows.append(row)
            if config.algorithm == 'fpdfp' and not dual_feasible(problem.regularizer, server.v, slack=1e-6):
                log.debug("Server dual left the feasible ball at round %d.", server.k)
            if evaluate and config.log_every and server.k % config.log_every == 0:
                log.info("Round %d: train loss %.6g, uplink bits %d.", row.round, row.train_loss, row.uplink_bits_cum)
            if callback is not None:
                callback(server, row)
    finally:
        if executor is not None:
            executor.shutdown()
    return server, rows


def metrics_table(rows):
    """Convert :class:`MetricsRow` objects to a :class:`~astropy.table.Table`.
    """
    table = Table(rows=[tuple(r) for r in rows] if rows else None, names=MetricsRow._fields,
                  dtype=[int, float, float, float, float, int, float, float, float])
    table['round'].description = 'Rounds completed'
    table['uplink_bits_cum'].unit = 'bit'
    return table


def write_metrics(rows, filename):
    """Write the metrics stream as comma-separated text with a header line.

    Parameters
    ----------
    rows : :class:`list`
        :class:`MetricsRow` objects.
    filename : :class:`str`
        Output file, overwritten.
    """
    metrics_table(rows).write(filename, format='ascii.csv', overwrite=True)


def read_metrics(filename):
    """Read a file written by :func:`write_metrics`.

    Returns
    -------
    :class:`list`
        :class:`MetricsRow` objects.
    """
    table = Table.read(filename, format='ascii.csv')
    return [MetricsRow(int(r['round']), *[float(r[c]) for c in MetricsRow._fields[1:5]],
                       int(r['uplink_bits_cum']), *[float(r[c]) for c in MetricsRow._fields[6:]])
            for r in table]


def rate_recurrence_bound(delta0, a, c, k0, k):
    """Closed-form bound :math:`\\frac{(k_0+c)^2}{(k+c)^2}\\Delta_{k_0} + \\frac{a}{k+c}`.
    """
    return (k0 + c)**2 / (k + c)**2 * delta0 + a / (k + c)


def rate_recurrence(delta0, a, c, k0, k_max):
    """Iterate :math:`\\Delta_{k+1} = (1 - \\frac{2}{k+c})\\Delta_k + \\frac{a}{(k+c)^2}`.

    Parameters
    ----------
    delta0 : :class:`float`
        :math:`\\Delta_{k_0} \\geq 0`.
    a, c : :class:`float`
        Constants, :math:`a \\geq 0`, :math:`c > 0`; :math:`k_0 + c \\geq 2`
        keeps the sequence nonnegative.
    k0, k_max : :class:`int`
        First and last index.

    Returns
    -------
    :class:`numpy.ndarray`
        :math:`\\Delta_{k_0}, \\ldots, \\Delta_{k_{\\max}}`.
    """
    if delta0 < 0 or a < 0 or c <= 0:
        raise ValueError("Need delta0 >= 0, a >= 0 and c > 0.")
    if k0 + c < 2:
        raise ValueError("Need k0 + c >= 2.")
    if k_max < k0:
        raise ValueError("Need k_max >= k0.")
    delta = np.zeros(k_max - k0 + 1)
    delta[0] = delta0
    for i, k in enumerate(range(k0, k_max)):
        delta[i + 1] = (1.0 - 2.0 / (k + c)) * delta[i] + a / (k + c)**2
    return delta


def rate_recurrence_check(delta0, a, c, k0, k_max):
    """Check :func:`rate_recurrence_bound` along :func:`rate_recurrence`.

    Returns
    -------
    :class:`bool`
        ``True`` if the bound holds at every :math:`k_0 \\leq k \\leq k_{\\max}`,
        up to a relative 1e-12.
    """
    delta = rate_recurrence(delta0, a, c, k0, k_max)
    bound = rate_recurrence_bound(delta0, a, c, k0, np.arange(k0, k_max + 1, dtype=np.float64))
    return bool(np.all(delta <= bound * (1.0 + 1e-12)))
