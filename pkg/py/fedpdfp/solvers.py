# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""
===============
fedpdfp.solvers
===============

Serial primal-dual fixed point (PDFP) iteration and optimality diagnostics.

One step from :math:`(x_k, v_k)` with gradient :math:`\\nabla f(x_k)` is

.. math::

    x_{k+1/2} &= x_k - \\gamma\\nabla f(x_k) \\\\
    v_{k+1} &= \\mathrm{Prox}_{\\frac{\\lambda}{\\gamma}g^*}\\left(\\frac{\\lambda}{\\gamma}Bx_{k+1/2} + (I - \\lambda BB^T)v_k\\right) \\\\
    x_{k+1} &= x_{k+1/2} - \\gamma B^T v_{k+1}

and converges for :math:`0 < \\lambda \\leq 1/\\rho_{\\max}(BB^T)` and a
step :math:`\\gamma` below twice the inverse Lipschitz constant of
:math:`\\nabla f`.
"""
import os
import hashlib
from warnings import warn
import numpy as np
from .linops import DimensionError, spectral_norm_sq
from .losses import composite_objective
from .proxlib import prox_g, prox_g_conj


class CouplingWarning(UserWarning):
    """The coupling parameter exceeds :math:`1/\\rho_{\\max}(BB^T)`.
    """
    pass


class PdState(object):
    """Primal-dual iterate.

    Parameters
    ----------
    x : array-like
        Primal vector.
    v : array-like
        Dual vector.
    k : :class:`int`, optional
        Round index.
    """

    def __init__(self, x, v, k=0):
        self.x = np.asarray(x, dtype=np.float64)
        self.v = np.asarray(v, dtype=np.float64)
        self.k = int(k)
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.v))):
            raise ValueError("Primal-dual state has non-finite entries at round {0:d}.".format(self.k))

    @classmethod
    def zeros(cls, problem):
        """The all-zero state of `problem`.
        """
        return cls(np.zeros(problem.d), np.zeros(problem.m), 0)

    def __repr__(self):
        return "PdState(k={0:d}, d={1:d}, m={2:d})".format(self.k, self.x.size, self.v.size)

    def check(self, problem):
        """Raise :exc:`~fedpdfp.linops.DimensionError` unless the state fits `problem`.
        """
        if self.x.shape != (problem.d,) or self.v.shape != (problem.m,):
            raise DimensionError("State shapes {0} and {1} do not match operator shape {2}.".format(
                self.x.shape, self.v.shape, problem.operator.shape))


def _dual_argument(x_half, v, gamma, lam, operator):
    return (lam / gamma) * operator.apply(x_half) + v - lam * operator.apply(operator.apply_adjoint(v))


def pdfp_update(x, v, g, gamma, lam, operator, regularizer):
    """One PDFP update from `x`, `v` using the gradient `g`.

    This is shared by the serial solver and by the federated clients.

    Returns
    -------
    :func:`tuple`
        The new primal and dual vectors.
    """
    if gamma <= 0 or lam <= 0:
        raise ValueError("gamma and lambda must be positive.")
    x_half = x - gamma * g
    v_new = prox_g_conj(regularizer, _dual_argument(x_half, v, gamma, lam, operator), lam / gamma)
    return x_half - gamma * operator.apply_adjoint(v_new), v_new


def check_coupling(operator, lam, rho=None):
    """Warn with :class:`CouplingWarning` if `lam` is not admissible.

    Parameters
    ----------
    operator : :class:`~fedpdfp.linops.LinearOperator`
        The operator :math:`B`.
    lam : :class:`float`
        Coupling parameter.
    rho : :class:`float`, optional
        :math:`\\rho_{\\max}(BB^T)`, estimated if not given.

    Returns
    -------
    :class:`bool`
        ``True`` if `lam` is admissible.
    """
    if rho is None:
        rho = spectral_norm_sq(operator)
    if rho > 0 and lam * rho > 1.0 + 1e-6:
        warn("lambda = {0:g} exceeds 1/rho_max(BB^T) = {1:g}.".format(lam, 1.0 / rho), CouplingWarning)
        return False
    return True


def default_lambda(operator):
    """Return :math:`1/\\rho_{\\max}(BB^T)`, the largest admissible coupling.
    """
    rho = spectral_norm_sq(operator)
    return 1.0 / rho if rho > 0 else 1.0


def pdfp_step(state, problem, gamma, lam, grad=None):
    """Apply one PDFP step.

    Parameters
    ----------
    state : :class:`PdState`
        Current iterate.
    problem : :class:`~fedpdfp.losses.ProblemSpec`
        The problem.
    gamma : :class:`float`
        Step size.
    lam : :class:`float`
        Coupling parameter.
    grad : callable, optional
        Gradient oracle ``grad(x)``; defaults to the exact gradient of the
        problem.

    Returns
    -------
    :class:`PdState`
        The next iterate.
    """
    state.check(problem)
    if grad is None:
        grad = problem.grad
    x, v = pdfp_update(state.x, state.v, grad(state.x), gamma, lam,
                       problem.operator, problem.regularizer)
    return PdState(x, v, state.k + 1)


def pdfp_solve(problem, gamma, lam=None, K=1, state=None, grad=None,
               callback=None, record=False):
    """Run `K` PDFP steps.

    Parameters
    ----------
    problem : :class:`~fedpdfp.losses.ProblemSpec`
        The problem.
    gamma : :class:`float` or callable
        Constant step, or a function of the round index.
    lam : :class:`float`, optional
        Coupling parameter.  Defaults to ``problem.lam``, and then to
        :math:`1/\\rho_{\\max}(BB^T)`.
    K : :class:`int`, optional
        Number of rounds.
    state : :class:`PdState`, optional
        Starting point; zero by default.
    grad : callable, optional
        Gradient oracle, see :func:`pdfp_step`.
    callback : callable, optional
        Called as ``callback(state)`` after every round.
    record : :class:`bool`, optional
        If ``True``, record the composite objective after every round.

    Returns
    -------
    :func:`tuple`
        The final :class:`PdState` and the list of recorded objectives
        (empty unless `record` is set).
    """
    if K < 1:
        raise ValueError("K must be at least 1.")
    if lam is None:
        lam = problem.lam
    if lam is None:
        lam = default_lambda(problem.operator)
    else:
        check_coupling(problem.operator, lam)
    if state is None:
        state = PdState.zeros(problem)
    step = gamma if callable(gamma) else (lambda k: gamma)
    history = list()
    for _ in range(K):
        state = pdfp_step(state, problem, step(state.k), lam, grad)
        if record:
            history.append(composite_objective(problem, state.x))
        if callback is not None:
            callback(state)
    return state, history


def prox_grad_step(x, problem, gamma, grad=None):
    """Proximal gradient step :math:`\\mathrm{Prox}_{\\gamma g}(x - \\gamma\\nabla f(x))`.

    This is what a PDFP step reduces to when :math:`B = I` and
    :math:`\\lambda = 1`.

    Raises
    ------
    ValueError
        If the operator of `problem` is not the identity.
    """
    if problem.operator.kind != 'identity':
        raise ValueError("Proximal gradient steps need B = I, got {0!r}.".format(problem.operator))
    if grad is None:
        grad = problem.grad
    x = np.asarray(x, dtype=np.float64)
    return prox_g(problem.regularizer, x - gamma * grad(x), gamma)


def kkt_residual(x, v, problem, gamma, lam, grad=None):
    """Residuals of the fixed-point optimality system.

    With :math:`T(x, v)` the dual update of :func:`pdfp_step`, returns
    :math:`r_v = \\lVert v - T(x, v)\\rVert_2` and
    :math:`r_x = \\lVert \\gamma\\nabla f(x) + \\gamma B^T T(x, v)\\rVert_2`.
    Both vanish exactly at a saddle point.

    Parameters
    ----------
    x, v : :class:`numpy.ndarray`
        Primal and dual points.
    problem : :class:`~fedpdfp.losses.ProblemSpec`
        The problem.
    gamma, lam : :class:`float`
        Step size and coupling parameter.
    grad : callable, optional
        Gradient oracle; exact by default.

    Returns
    -------
    :func:`tuple`
        ``(r_v, r_x)``.
    """
    if gamma <= 0 or lam <= 0:
        raise ValueError("gamma and lambda must be positive.")
    if grad is None:
        grad = problem.grad
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    g = grad(x)
    operator = problem.operator
    t = prox_g_conj(problem.regularizer, _dual_argument(x - gamma * g, v, gamma, lam, operator), lam / gamma)
    r_v = float(np.linalg.norm(v - t))
    r_x = float(np.linalg.norm(gamma * g + gamma * operator.apply_adjoint(t)))
    return r_v, r_x


def problem_fingerprint(problem, gamma, lam, K):
    """Hash everything that determines a reference solution.

    The operator is identified by its shape and its action on a fixed
    pseudo-random vector, so matrix-free operators hash like explicit ones.

    Parameters
    ----------
    problem : :class:`~fedpdfp.losses.ProblemSpec`
        The problem.
    gamma : :class:`float`
        Constant step.
    lam : :class:`float` or ``None``
        Coupling parameter.
    K : :class:`int`
        Number of rounds.

    Returns
    -------
    :class:`str`
        Hexadecimal SHA-256 digest.
    """
    h = hashlib.sha256()
    r = problem.regularizer
    h.update("{0}|{1!r}|{2!r}|{3!r}|{4:d}".format(r.kind, float(r.weight), float(gamma),
                                                 None if lam is None else float(lam),
                                                 int(K)).encode())
    if r.groups is not None:
        h.update(np.ascontiguousarray(r.groups, dtype=np.int64).tobytes())
    B = problem.operator
    h.update("{0}|{1:d}|{2:d}".format(B.__class__.__name__, B.rows, B.cols).encode())
    w = np.random.default_rng(20260101).standard_normal(B.cols)
    h.update(np.ascontiguousarray(B.apply(w)).tobytes())
    for shard in problem.shards:
        h.update("{0}|{1:d}|{2:d}|{3!r}|{4}".format(shard.kind, shard.n, shard.d, shard.mu1,
                                                    shard.normalized).encode())
        samples = shard.samples.tocsr()
        for a in (samples.indptr, samples.indices, samples.data, shard.targets):
            h.update(np.ascontiguousarray(a).tobytes())
    return h.hexdigest()


def reference_solution(problem, gamma, lam=None, K=1000000, cache=None, overwrite=False):
    """Approximate a saddle point with a long exact-gradient PDFP run.

    Parameters
    ----------
    problem : :class:`~fedpdfp.losses.ProblemSpec`
        The problem.
    gamma : :class:`float`
        Constant step.
    lam : :class:`float`, optional
        Coupling parameter, see :func:`pdfp_solve`.
    K : :class:`int`, optional
        Number of rounds.
    cache : :class:`str`, optional
        Path of a ``.npz`` file.  If it exists and was written for the same
        problem, step, coupling parameter and number of rounds (see
        :func:`problem_fingerprint`) it is loaded instead of running the
        solver; otherwise the result is written there.
    overwrite : :class:`bool`, optional
        Ignore an existing cache file.

    Returns
    -------
    :class:`PdState`
        The reference point.
    """
    from .log import get_logger
    log = get_logger()
    fingerprint = None if cache is None else problem_fingerprint(
        problem, gamma, problem.lam if lam is None else lam, K)
    if cache is not None and os.path.exists(cache) and not overwrite:
        with np.load(cache) as data:
            state = PdState(data['x'], data['v'], int(data['k']))
            stored = str(data['fingerprint']) if 'fingerprint' in data.files else None
        if stored != fingerprint:
            log.warning("Ignoring reference cache %s written for a different problem.", cache)
        else:
            log.info("Loaded reference solution from %s (K = %d).", cache, state.k)
            return state
    log.info("Computing reference solution with K = %d rounds.", K)
    state, _ = pdfp_solve(problem, gamma, lam=lam, K=K)
    if cache is not None:
        np.savez(cache, x=state.x, v=state.v, k=state.k, fingerprint=fingerprint)
        log.info("Wrote reference solution to %s.", cache)
    return state
