# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""
===============
fedpdfp.imaging
===============

Toy total-variation reconstruction with federated clients.

Every client :math:`i` observes the same image :math:`x_0` through its own
sparse, well-conditioned measurement matrix, :math:`b_i = A_i x_0 + e_i`
with Gaussian noise :math:`e_i`.  The federated problem is

.. math::

    \\min_x \\frac{1}{N}\\sum_i \\frac{1}{2}\\lVert A_i x - b_i\\rVert_2^2 + \\mu\\lVert\\nabla x\\rVert_{1,2},

with the isotropic total variation of :math:`x` as the regularizer.
"""
import numpy as np
import scipy.sparse as sparse
from scipy.sparse.linalg import lsqr
from astropy.io import fits
from astropy.table import Table
from .linops import DiscreteGradient
from .losses import LossShard, ProblemSpec
from .proxlib import RegularizerSpec, isotropic_groups
from .quantize import random_stream


def phantom(size):
    """Piecewise-constant test image with values in [0, 1].

    Parameters
    ----------
    size : :class:`int`
        Number of pixels along each axis.

    Returns
    -------
    :class:`numpy.ndarray`
        A ``(size, size)`` image.
    """
    y, x = np.mgrid[0:size, 0:size] / float(size)
    image = np.zeros((size, size), dtype=np.float64)
    image[(x > 0.15) & (x < 0.85) & (y > 0.2) & (y < 0.8)] = 0.4
    image[(x - 0.6)**2 + (y - 0.45)**2 < 0.04] = 1.0
    image[(x > 0.25) & (x < 0.4) & (y > 0.55) & (y < 0.7)] = 0.7
    return image


def random_measurement(npixels, rng, scale=0.25):
    """Sparse measurement matrix :math:`I + s(P_1 D_1 + P_2 D_2)`.

    :math:`P_k` are random permutations and :math:`D_k` random diagonal
    sign matrices, so the singular values lie in :math:`[1 - 2s, 1 + 2s]`.

    Parameters
    ----------
    npixels : :class:`int`
        Number of pixels.
    rng : :class:`numpy.random.Generator`
        Random generator.
    scale : :class:`float`, optional
        :math:`s`, below 0.5.

    Returns
    -------
    :class:`scipy.sparse.csr_matrix`
        The matrix.
    """
    if not 0 <= scale < 0.5:
        raise ValueError("scale must be in [0, 0.5).")
    A = sparse.identity(npixels, format='csr', dtype=np.float64)
    for _ in range(2):
        perm = rng.permutation(npixels)
        signs = rng.choice([-1.0, 1.0], size=npixels)
        A = A + sparse.csr_matrix((scale * signs, (np.arange(npixels), perm)), shape=(npixels, npixels))
    return A.tocsr()


def psnr(x, x0):
    """Peak signal-to-noise ratio :math:`10\\log_{10}(\\max(x_0)^2 d/\\lVert x - x_0\\rVert^2)` in dB.

    Returns ``inf`` if the images are identical.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    x0 = np.asarray(x0, dtype=np.float64).ravel()
    err = float(np.sum((x - x0)**2))
    if err == 0:
        return float('inf')
    return 10.0 * np.log10(x0.max()**2 * x0.size / err)


def tv_problem(x0, N, noise, mu, seed=0, lam=None):
    """Build the federated reconstruction problem of `x0`.

    Parameters
    ----------
    x0 : :class:`numpy.ndarray`
        Ground-truth image.
    N : :class:`int`
        Number of clients.
    noise : :class:`float`
        Variance of the measurement noise.
    mu : :class:`float`
        Total-variation weight.
    seed : :class:`int`, optional
        Master seed of the measurements and the noise.
    lam : :class:`float`, optional
        Coupling parameter stored in the problem.

    Returns
    -------
    :class:`~fedpdfp.losses.ProblemSpec`
        One unnormalized least-squares shard per client.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    npixels = x0.size
    shards = list()
    for client in range(N):
        rng = random_stream(seed, 0, client, 'data')
        A = random_measurement(npixels, rng)
        b = A.dot(x0.ravel()) + np.sqrt(noise) * rng.standard_normal(npixels)
        shards.append(LossShard('least-squares', A, b, normalized=False))
    D = DiscreteGradient(x0.shape)
    g = RegularizerSpec('group-l2', mu, isotropic_groups(D.npixels, len(D.axes)))
    return ProblemSpec(shards, g, D, lam)


def least_squares_baseline(problem):
    """Least-squares reconstruction from all measurements, ignoring the regularizer.
    """
    A = sparse.vstack([s.samples for s in problem.shards], format='csr')
    b = np.concatenate([s.targets for s in problem.shards])
    return lsqr(A, b, atol=1e-12, btol=1e-12, iter_lim=10 * A.shape[1])[0]


def write_image(filename, image, **keywords):
    """Write `image` to a FITS file.

    Additional keywords are stored in the primary header.
    """
    hdu = fits.PrimaryHDU(np.asarray(image, dtype=np.float64))
    for key, value in keywords.items():
        hdu.header[key.upper()[:8]] = value
    hdu.writeto(filename, overwrite=True)


def read_image(filename):
    """Read an image written by :func:`write_image`.
    """
    return fits.getdata(filename).astype(np.float64)


def tv_demo(size, noise, mu, config, lam=None, seed=0):
    """Reconstruct the phantom for every weight in `mu` and keep the best.

    Parameters
    ----------
    size : :class:`int`
        Image size.
    noise : :class:`float`
        Noise variance.
    mu : :class:`float` or :class:`list`
        Total-variation weights to try.
    config : :class:`~fedpdfp.fedsim.FedConfig`
        Federated run parameters; ``config.N`` is the number of clients.
    lam : :class:`float`, optional
        Coupling parameter; :math:`1/\\rho_{\\max}(\\nabla\\nabla^T)` by default.
    seed : :class:`int`, optional
        Master seed of the measurements.

    Returns
    -------
    :class:`dict`
        ``image`` (best reconstruction), ``mu``, ``psnr``, ``baseline_psnr``
        (least squares), ``metrics`` (per-round :class:`~astropy.table.Table`
        of the best run with a ``psnr`` column) and ``grid`` (one row per
        weight).
    """
    from .fedsim import metrics_table, simulate
    from .log import get_logger
    log = get_logger()
    x0 = phantom(size)
    weights = mu if isinstance(mu, (list, tuple)) else [mu]
    baseline = psnr(least_squares_baseline(tv_problem(x0, config.N, noise, 0.0, seed)), x0)
    log.info("Least-squares reconstruction: PSNR %.2f dB.", baseline)
    best, grid = None, Table(names=('mu', 'psnr', 'uplink_bits_cum'), dtype=(float, float, int))
    for weight in weights:
        problem = tv_problem(x0, config.N, noise, weight, seed, lam)
        trace = list()
        server, rows = simulate(problem, config,
                                callback=lambda s, r: trace.append(psnr(s.x, x0)))
        value = trace[-1]
        log.info("mu = %g: PSNR %.2f dB after %d rounds.", weight, value, server.k)
        grid.add_row((weight, value, server.bits))
        if best is None or value > best['psnr']:
            metrics = metrics_table(rows)
            metrics['psnr'] = trace
            best = {'image': server.x.reshape(x0.shape), 'mu': weight, 'psnr': value, 'metrics': metrics}
    best['baseline_psnr'] = baseline
    best['grid'] = grid
    return best
