# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""
==============
fedpdfp.losses
==============

Smooth client losses and the composite objective.

A client holds a :class:`LossShard`, :math:`n_i` samples with targets, and
the loss :math:`f^{(i)}(x) = \\frac{1}{n_i}\\sum_j f_j^{(i)}(x)`.  Two kinds
are supported:

``logistic``
    :math:`f_j(x) = \\log(1 + \\exp(-b_j s_j^T x)) + \\frac{\\mu_1}{2}\\lVert x\\rVert^2`,
    labels :math:`b_j \\in \\{-1, +1\\}`.
``least-squares``
    :math:`f_j(x) = \\frac{1}{2}(a_j^T x - b_j)^2`, so that
    :math:`f^{(i)}(x) = \\frac{1}{2n_i}\\lVert A x - b\\rVert^2`.  With
    ``normalized=False`` the shard loss is :math:`\\frac{1}{2}\\lVert Ax - b\\rVert^2`
    instead.
"""
import numpy as np
import scipy.sparse as sparse
from scipy.special import expit
from .linops import DimensionError, SparseMatrixOperator, spectral_norm_sq
from .proxlib import regularizer_value


_kinds = ('logistic', 'least-squares')


class LossShard(object):
    """The data and loss held by one client.

    Parameters
    ----------
    kind : :class:`str`
        ``'logistic'`` or ``'least-squares'``.
    samples : :class:`scipy.sparse.spmatrix` or :class:`numpy.ndarray`
        The :math:`n_i \\times d` sample matrix.
    targets : array-like
        Labels (logistic) or targets (least squares), length :math:`n_i`.
    mu1 : :class:`float`, optional
        Ridge weight of the logistic loss.
    normalized : :class:`bool`, optional
        Least squares only; if ``False``, drop the :math:`1/n_i` factor.
    """

    def __init__(self, kind, samples, targets, mu1=0.0, normalized=True):
        if kind not in _kinds:
            raise ValueError("Unknown loss kind '{0}'; expected one of {1}.".format(kind, _kinds))
        samples = sparse.csr_matrix(samples, dtype=np.float64)
        targets = np.asarray(targets, dtype=np.float64).ravel()
        if samples.shape[0] < 1:
            raise ValueError("A loss shard needs at least one sample.")
        if targets.size != samples.shape[0]:
            raise DimensionError("{0:d} samples but {1:d} targets.".format(samples.shape[0], targets.size))
        if kind == 'logistic' and not np.all(np.abs(targets) == 1):
            raise ValueError("Logistic labels must be -1 or +1.")
        self.kind = kind
        self.samples = samples
        self.targets = targets
        self.mu1 = float(mu1)
        self.normalized = bool(normalized)

    @property
    def n(self):
        """Number of samples.
        """
        return self.samples.shape[0]

    @property
    def d(self):
        """Feature dimension.
        """
        return self.samples.shape[1]

    def __repr__(self):
        return "LossShard('{0}', n={1:d}, d={2:d})".format(self.kind, self.n, self.d)

    def _check(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.d,):
            raise DimensionError("Shard of dimension {0:d} evaluated at a vector of shape {1}.".format(self.d, x.shape))
        return x

    def _gradient(self, samples, targets, x):
        """Average per-sample gradient over the rows of `samples`.
        """
        b = samples.shape[0]
        if self.kind == 'logistic':
            weights = -targets * expit(-targets * samples.dot(x))
            return samples.T.dot(weights) / b + self.mu1 * x
        scale = 1.0 if self.normalized else float(self.n)
        return scale * samples.T.dot(samples.dot(x) - targets) / b


def loss_value(shard, x):
    """Evaluate the shard loss :math:`f^{(i)}(x)`.

    Parameters
    ----------
    shard : :class:`LossShard`
        The client data.
    x : :class:`numpy.ndarray`
        The point.

    Returns
    -------
    :class:`float`
        The loss.
    """
    x = shard._check(x)
    if shard.kind == 'logistic':
        margins = shard.targets * shard.samples.dot(x)
        return float(np.logaddexp(0.0, -margins).mean() + 0.5 * shard.mu1 * np.dot(x, x))
    residual = shard.samples.dot(x) - shard.targets
    value = 0.5 * float(np.dot(residual, residual))
    return value / shard.n if shard.normalized else value


def full_grad(shard, x):
    """Exact gradient of the shard loss.
    """
    x = shard._check(x)
    return shard._gradient(shard.samples, shard.targets, x)


def minibatch_grad(shard, x, b, rng):
    """Stochastic gradient over a uniformly drawn batch of `b` samples.

    The batch is drawn without replacement.  With ``b = n`` (or ``None``)
    the exact gradient is returned and `rng` is not used.

    Parameters
    ----------
    shard : :class:`LossShard`
        The client data.
    x : :class:`numpy.ndarray`
        The point.
    b : :class:`int` or ``None``
        Batch size, ``1 <= b <= n``.
    rng : :class:`numpy.random.Generator`
        Random generator.

    Returns
    -------
    :class:`numpy.ndarray`
        The average of the per-sample gradients of the batch.

    Raises
    ------
    ValueError
        If `b` is not in ``[1, n]``.
    """
    if b is None or b == shard.n:
        return full_grad(shard, x)
    if b < 1 or b > shard.n:
        raise ValueError("Batch size {0} is not in [1, {1:d}].".format(b, shard.n))
    x = shard._check(x)
    batch = np.sort(rng.choice(shard.n, size=b, replace=False))
    return shard._gradient(shard.samples[batch], shard.targets[batch], x)


def lipschitz_estimate(shard, **kwargs):
    """Lipschitz constant of the gradient of a least-squares shard.

    Additional keyword arguments are passed to
    :func:`~fedpdfp.linops.spectral_norm_sq`.

    Raises
    ------
    ValueError
        For logistic shards, whose constant is left to the user.
    """
    if shard.kind != 'least-squares':
        raise ValueError("Lipschitz estimates are only available for least-squares shards.")
    rho = spectral_norm_sq(SparseMatrixOperator(shard.samples), **kwargs)
    return rho / shard.n if shard.normalized else rho


class ProblemSpec(object):
    """The composite problem :math:`\\frac{1}{N}\\sum_i f^{(i)}(x) + g(Bx)`.

    Parameters
    ----------
    shards : :class:`list`
        One :class:`LossShard` per client.
    regularizer : :class:`~fedpdfp.proxlib.RegularizerSpec`
        The regularizer :math:`g`.
    operator : :class:`~fedpdfp.linops.LinearOperator`
        The operator :math:`B`.
    lam : :class:`float`, optional
        The coupling parameter :math:`\\lambda`, if already chosen.
    """

    def __init__(self, shards, regularizer, operator, lam=None):
        shards = tuple(shards)
        if len(shards) == 0:
            raise ValueError("A problem needs at least one client.")
        for shard in shards:
            if shard.d != operator.cols:
                raise DimensionError("Shard dimension {0:d} does not match operator shape {1}.".format(shard.d, operator.shape))
        if regularizer.groups is not None and regularizer.groups.size != operator.rows:
            raise DimensionError("Group partition of length {0:d} does not match operator shape {1}.".format(regularizer.groups.size, operator.shape))
        self.shards = shards
        self.regularizer = regularizer
        self.operator = operator
        self.lam = lam

    @property
    def n_clients(self):
        """Number of clients :math:`N`.
        """
        return len(self.shards)

    @property
    def d(self):
        """Primal dimension.
        """
        return self.operator.cols

    @property
    def m(self):
        """Dual dimension.
        """
        return self.operator.rows

    def __repr__(self):
        return "ProblemSpec(N={0:d}, d={1:d}, m={2:d}, {3!r})".format(self.n_clients, self.d, self.m, self.regularizer)

    def loss(self, x):
        """Mean of the client losses.
        """
        return sum(loss_value(shard, x) for shard in self.shards) / self.n_clients

    def grad(self, x):
        """Exact gradient of the mean of the client losses.
        """
        total = full_grad(self.shards[0], x)
        for shard in self.shards[1:]:
            total = total + full_grad(shard, x)
        return total / self.n_clients


def composite_objective(problem, x):
    """Evaluate :math:`\\frac{1}{N}\\sum_i f^{(i)}(x) + g(Bx)`.

    Parameters
    ----------
    problem : :class:`ProblemSpec`
        The problem.
    x : :class:`numpy.ndarray`
        The point.

    Returns
    -------
    :class:`float`
        The objective.
    """
    return problem.loss(x) + regularizer_value(problem.regularizer, problem.operator.apply(x))


def _labelled(data):
    """Return (samples, labels) pairs from shards, datasets or lists of them.
    """
    if isinstance(data, (list, tuple)):
        pairs = list()
        for item in data:
            pairs += _labelled(item)
        return pairs
    if isinstance(data, LossShard):
        if data.kind != 'logistic':
            raise ValueError("Accuracy is only defined for logistic data.")
        return [(data.samples, data.targets)]
    return [(data.rows, data.labels)]


def accuracy(data, x):
    """Fraction of samples whose label is the sign of :math:`s^T x`.

    A zero score counts as a misclassification.

    Parameters
    ----------
    data : :class:`LossShard`, :class:`~fedpdfp.dataio.Dataset` or :class:`list`
        Logistic shards or datasets.
    x : :class:`numpy.ndarray`
        The classifier.

    Returns
    -------
    :class:`float`
        Accuracy in ``[0, 1]``.
    """
    correct, total = 0, 0
    for samples, labels in _labelled(data):
        correct += int(np.count_nonzero(np.sign(samples.dot(x)) == labels))
        total += labels.size
    return correct / total if total else 0.0
