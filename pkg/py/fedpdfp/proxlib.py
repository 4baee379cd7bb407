# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""
===============
fedpdfp.proxlib
===============

Proximity operators of the regularizer :math:`g` and of its conjugate.

Two regularizers are supported:

``l1``
    :math:`g(z) = \\mu\\lVert z \\rVert_1`; its conjugate is the indicator of
    the :math:`\\ell_\\infty` ball of radius :math:`\\mu`.
``group-l2``
    :math:`g(z) = \\mu\\sum_G \\lVert z_G \\rVert_2` over a partition of the
    coordinates into groups (isotropic total variation when the groups are
    the directional differences at one pixel); its conjugate is the
    indicator of a product of :math:`\\ell_2` balls of radius :math:`\\mu`.

Because both conjugates are indicators, their proximity operators are
projections and do not depend on the step.
"""
import numpy as np


_kinds = ('l1', 'group-l2')


class RegularizerSpec(object):
    """Description of the regularizer :math:`g`.

    Parameters
    ----------
    kind : :class:`str`
        ``'l1'`` or ``'group-l2'``.
    weight : :class:`float`
        The weight :math:`\\mu \\geq 0`.
    groups : array-like, optional
        For ``'group-l2'``, the group label of every coordinate (integers
        ``0 … n_groups-1``, each label used at least once).

    Raises
    ------
    ValueError
        If the kind is unknown, the weight negative, or the groups missing
        or not a partition.
    """

    def __init__(self, kind, weight, groups=None):
        if kind not in _kinds:
            raise ValueError("Unknown regularizer kind '{0}'; expected one of {1}.".format(kind, _kinds))
        weight = float(weight)
        if not weight >= 0:
            raise ValueError("Regularizer weight must be nonnegative, got {0}.".format(weight))
        self.kind = kind
        self.weight = weight
        self.groups = None
        self.n_groups = 0
        if kind == 'group-l2':
            if groups is None:
                raise ValueError("A group-l2 regularizer needs a group partition.")
            groups = np.asarray(groups, dtype=np.int64)
            n_groups = int(groups.max()) + 1 if groups.size else 0
            if groups.ndim != 1 or groups.min() < 0 or np.unique(groups).size != n_groups:
                raise ValueError("Group labels must be 0 ... n_groups-1, each used at least once.")
            self.groups = groups
            self.n_groups = n_groups

    def __repr__(self):
        if self.kind == 'l1':
            return "RegularizerSpec('l1', {0:g})".format(self.weight)
        return "RegularizerSpec('group-l2', {0:g}, n_groups={1:d})".format(self.weight, self.n_groups)

    def with_weight(self, weight):
        """Return a copy of this specification with a different weight.
        """
        return RegularizerSpec(self.kind, weight, self.groups)

    def group_norms(self, y):
        """Euclidean norm of every group of `y`.
        """
        return np.sqrt(np.bincount(self.groups, weights=y*y, minlength=self.n_groups))

    def check(self, y):
        """Check that `y` has as many coordinates as the group partition.
        """
        if self.groups is not None and y.size != self.groups.size:
            raise ValueError("Vector of length {0:d} does not match {1:d} grouped coordinates.".format(y.size, self.groups.size))


def isotropic_groups(npixels, naxes):
    """Group labels of an axis-major discrete gradient.

    Coordinate ``a*npixels + p`` (difference along axis ``a`` at pixel
    ``p``) belongs to group ``p``.

    Parameters
    ----------
    npixels : :class:`int`
        Number of pixels.
    naxes : :class:`int`
        Number of differentiated axes.

    Returns
    -------
    :class:`numpy.ndarray`
        Group label of every coordinate.
    """
    return np.tile(np.arange(npixels, dtype=np.int64), naxes)


def regularizer_value(spec, z):
    """Evaluate :math:`g(z)`.

    Parameters
    ----------
    spec : :class:`RegularizerSpec`
        The regularizer.
    z : :class:`numpy.ndarray`
        The point, usually :math:`Bx`.

    Returns
    -------
    :class:`float`
        The value.
    """
    z = np.asarray(z, dtype=np.float64)
    if spec.kind == 'l1':
        return spec.weight * float(np.abs(z).sum())
    spec.check(z)
    return spec.weight * float(spec.group_norms(z).sum())


def prox_g(spec, y, step):
    """Proximity operator of ``step * g``.

    Parameters
    ----------
    spec : :class:`RegularizerSpec`
        The regularizer.
    y : :class:`numpy.ndarray`
        The point.
    step : :class:`float`
        Positive step.

    Returns
    -------
    :class:`numpy.ndarray`
        Soft-thresholding by ``step*weight`` for ``l1``; group shrinkage
        :math:`\\max(0, 1 - \\mathrm{step}\\,\\mu/\\lVert y_G\\rVert)\\,y_G`
        for ``group-l2``.
    """
    if step <= 0:
        raise ValueError("step must be positive.")
    y = np.asarray(y, dtype=np.float64)
    threshold = step * spec.weight
    if spec.kind == 'l1':
        return np.sign(y) * np.maximum(np.abs(y) - threshold, 0.0)
    spec.check(y)
    norms = spec.group_norms(y)
    safe = np.where(norms > 0, norms, 1.0)
    factor = np.where(norms > threshold, 1.0 - threshold / safe, 0.0)
    return factor[spec.groups] * y


def prox_g_conj(spec, y, sigma=1.0):
    """Proximity operator of ``sigma * g*``, the projection onto the dual ball.

    Parameters
    ----------
    spec : :class:`RegularizerSpec`
        The regularizer.
    y : :class:`numpy.ndarray`
        The point.
    sigma : :class:`float`, optional
        Positive step.  The result does not depend on it.

    Returns
    -------
    :class:`numpy.ndarray`
        Entrywise clipping to ``[-weight, weight]`` for ``l1``; radial
        projection of every group onto the ball of radius ``weight`` for
        ``group-l2``.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive.")
    y = np.asarray(y, dtype=np.float64)
    if spec.kind == 'l1':
        return np.clip(y, -spec.weight, spec.weight)
    spec.check(y)
    norms = spec.group_norms(y)
    factor = np.ones_like(norms)
    outside = norms > spec.weight
    factor[outside] = spec.weight / norms[outside]
    return factor[spec.groups] * y


def dual_feasible(spec, v, slack=1e-12):
    """Check that `v` lies in the domain of :math:`g^*`, up to `slack`.

    Parameters
    ----------
    spec : :class:`RegularizerSpec`
        The regularizer.
    v : :class:`numpy.ndarray`
        A dual vector.
    slack : :class:`float`, optional
        Relative tolerance on the ball radius.

    Returns
    -------
    :class:`bool`
        ``True`` if `v` is feasible.
    """
    v = np.asarray(v, dtype=np.float64)
    radius = spec.weight * (1.0 + slack) + slack
    if spec.kind == 'l1':
        return bool(np.all(np.abs(v) <= radius))
    return bool(np.all(spec.group_norms(v) <= radius))


def moreau_residual(spec, y, gamma):
    """Residual of the Moreau decomposition.

    Computes :math:`\\lVert \\mathrm{Prox}_{\\gamma g}(y) +
    \\gamma\\,\\mathrm{Prox}_{\\gamma^{-1} g^*}(y/\\gamma) - y \\rVert_2`,
    which is zero up to rounding.

    Parameters
    ----------
    spec : :class:`RegularizerSpec`
        The regularizer.
    y : :class:`numpy.ndarray`
        The point.
    gamma : :class:`float`
        Positive step.

    Returns
    -------
    :class:`float`
        The residual.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive.")
    y = np.asarray(y, dtype=np.float64)
    decomposed = prox_g(spec, y, gamma) + gamma * prox_g_conj(spec, y / gamma, 1.0 / gamma)
    return float(np.linalg.norm(decomposed - y))
