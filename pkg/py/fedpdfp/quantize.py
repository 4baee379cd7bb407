# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""
================
fedpdfp.quantize
================

Low-precision stochastic quantization of client uploads and the bit cost
of sending them.

A vector :math:`x \\neq 0` is sent as its norm, the sign of every entry and
an integer level :math:`\\ell_i \\in [0, s]` drawn so that

.. math:: \\mathbb{E}\\left[\\lVert x\\rVert\\,\\mathrm{sign}(x_i)\\,\\ell_i/s\\right] = x_i.

With :math:`r_i = s|x_i|/\\lVert x\\rVert` and :math:`\\ell = \\lfloor r_i\\rfloor`,
the level is :math:`\\ell + 1` with probability :math:`r_i - \\ell` and
:math:`\\ell` otherwise.  When :math:`|x_i| = \\lVert x\\rVert` the lower level
is taken as :math:`s - 1`, so the level is :math:`s` with probability one.

Message layout
--------------

:func:`pack` writes, most significant bit first:

1. the norm as a 32-bit big-endian IEEE float;
2. for every entry with a nonzero level, in increasing index order, the
   Elias-gamma code of (number of zero levels since the previous nonzero
   entry + 1), one sign bit (``1`` for negative) and the Elias-gamma code
   of the level;
3. the Elias-gamma code of (number of trailing zero levels + 1);
4. zero padding to a byte boundary.

:func:`encoded_bits` counts items 1-3.  An Elias-gamma code of :math:`k \\geq 1`
is :math:`\\lfloor\\log_2 k\\rfloor` zeros followed by the binary digits of
:math:`k`, :math:`2\\lfloor\\log_2 k\\rfloor + 1` bits in total.
"""
import numpy as np


#
# Purposes of the keyed random streams.  Changing these values changes
# every simulation result.
#
_purposes = {'sample': 0,
             'batch': 1,
             'quantize-x': 2,
             'quantize-v': 3,
             'data': 4,
             }


def random_stream(seed, round_index=0, client=0, purpose='batch'):
    """Return a generator keyed by (seed, round, client, purpose).

    The stream of a given key never depends on which other streams were
    created before it, so client computations can run in any order or on
    any number of threads.

    Parameters
    ----------
    seed : :class:`int`
        Master seed of the experiment.
    round_index : :class:`int`, optional
        Communication round.
    client : :class:`int`, optional
        Client id.
    purpose : :class:`str`, optional
        One of ``'sample'``, ``'batch'``, ``'quantize-x'``, ``'quantize-v'``,
        ``'data'``.

    Returns
    -------
    :class:`numpy.random.Generator`
        A generator on a counter-based :class:`~numpy.random.Philox` bit
        generator.
    """
    key = np.random.SeedSequence([int(seed), int(round_index), int(client),
                                  _purposes[purpose]])
    return np.random.Generator(np.random.Philox(key))


def _generator(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


class QuantizedVector(object):
    """A quantized vector.

    Parameters
    ----------
    norm : :class:`float`
        Euclidean norm of the original vector.
    signs : array-like
        Sign of every entry, in {-1, 0, +1}; zero wherever the level is zero.
    levels : array-like
        Level of every entry, integers in ``[0, s]``.
    s : :class:`int`
        Number of levels.
    """

    def __init__(self, norm, signs, levels, s):
        self.norm = float(norm)
        self.signs = np.asarray(signs, dtype=np.int8)
        self.levels = np.asarray(levels, dtype=np.int64)
        self.s = int(s)
        if self.signs.shape != self.levels.shape or self.levels.ndim != 1:
            raise ValueError("signs and levels must be 1D arrays of the same length.")
        if self.levels.size and (self.levels.min() < 0 or self.levels.max() > self.s):
            raise ValueError("Levels must lie in [0, {0:d}].".format(self.s))

    @property
    def dim(self):
        """Length of the original vector.
        """
        return self.levels.size

    def __repr__(self):
        return "QuantizedVector(norm={0:g}, dim={1:d}, s={2:d}, nnz={3:d})".format(
            self.norm, self.dim, self.s, int(np.count_nonzero(self.levels)))

    def __eq__(self, other):
        if not isinstance(other, QuantizedVector):
            return NotImplemented
        return (self.norm == other.norm and self.s == other.s and
                np.array_equal(self.signs, other.signs) and
                np.array_equal(self.levels, other.levels))


def _ratios(x, s):
    """Return the norm, the signs, the lower levels and the probabilities of
    the upper levels.
    """
    scale = float(np.abs(x).max()) if x.size else 0.0
    if scale == 0.0:
        zero = np.zeros(x.size)
        return 0.0, zero, zero.astype(np.int64), zero
    norm = scale * float(np.linalg.norm(x / scale))
    ratio = s * np.abs(x) / norm
    lower = np.minimum(np.floor(ratio), s - 1)
    return norm, np.sign(x), lower.astype(np.int64), ratio - lower


def quantize(x, s, rng):
    """Quantize `x` onto `s` levels.

    Parameters
    ----------
    x : array-like
        Finite vector; the zero vector maps to a message with norm zero.
    s : :class:`int`
        Number of levels, at least 1.
    rng : :class:`numpy.random.Generator` or :class:`int`
        Random generator, or a seed for one.

    Returns
    -------
    :class:`QuantizedVector`
        The quantized vector.
    """
    if s < 1:
        raise ValueError("The number of levels must be at least 1.")
    x = np.asarray(x, dtype=np.float64).ravel()
    norm, sign, lower, upper = _ratios(x, s)
    u = _generator(rng).random(x.size)
    levels = lower + (u < upper)
    return QuantizedVector(norm, np.where(levels > 0, sign, 0), levels, s)


def dequantize(q):
    """Decode a quantized vector.

    Parameters
    ----------
    q : :class:`QuantizedVector`
        The message.

    Returns
    -------
    :class:`numpy.ndarray`
        Entries ``norm * sign * level / s``.
    """
    return q.norm * (q.signs * q.levels) / q.s


def elias_gamma_length(k):
    """Length in bits of the Elias-gamma code of `k`.

    Parameters
    ----------
    k : :class:`int` or array of :class:`int`
        Positive integer(s).

    Returns
    -------
    :class:`int` or :class:`numpy.ndarray`
        :math:`2\\lfloor\\log_2 k\\rfloor + 1`.
    """
    if np.isscalar(k):
        if k < 1:
            raise ValueError("Elias-gamma codes are defined for positive integers.")
        return 2 * (int(k).bit_length() - 1) + 1
    k = np.asarray(k, dtype=np.int64)
    if k.size and k.min() < 1:
        raise ValueError("Elias-gamma codes are defined for positive integers.")
    return 2 * (np.frexp(k.astype(np.float64))[1].astype(np.int64) - 1) + 1


def elias_gamma_encode(k):
    """Elias-gamma code of the positive integer `k` as a string of bits.
    """
    if k < 1:
        raise ValueError("Elias-gamma codes are defined for positive integers.")
    binary = '{0:b}'.format(k)
    return '0' * (len(binary) - 1) + binary


def elias_gamma_decode(bits, start=0):
    """Decode one Elias-gamma code from a string of bits.

    Parameters
    ----------
    bits : :class:`str`
        String of ``'0'`` and ``'1'``.
    start : :class:`int`, optional
        Position of the first bit of the code.

    Returns
    -------
    :func:`tuple`
        The decoded integer and the position just after the code.

    Raises
    ------
    ValueError
        If the string ends before the code does.
    """
    one = bits.find('1', start)
    width = one - start + 1
    if one < 0 or one + width > len(bits):
        raise ValueError("Truncated quantized message.")
    return int(bits[one:one + width], 2), one + width


def _runs(levels):
    """Zero-run lengths before every nonzero level, then the trailing run.
    """
    nonzero = np.flatnonzero(levels)
    return nonzero, np.diff(np.concatenate(([-1], nonzero, [levels.size]))) - 1


def encoded_bits(q):
    """Size in bits of the message produced by :func:`pack`, before padding.

    Parameters
    ----------
    q : :class:`QuantizedVector`
        The message.

    Returns
    -------
    :class:`int`
        32 bits of norm, plus a sign bit and a level code for every nonzero
        level, plus one run-length code per zero run (including empty runs).
    """
    nonzero, runs = _runs(q.levels)
    return int(32 + nonzero.size +
               elias_gamma_length(q.levels[nonzero]).sum() +
               elias_gamma_length(runs + 1).sum())


def pack(q):
    """Serialize a quantized vector with the documented bit layout.

    Parameters
    ----------
    q : :class:`QuantizedVector`
        The message.

    Returns
    -------
    :class:`bytes`
        The packed message.  The norm is stored in single precision.
    """
    nonzero, runs = _runs(q.levels)
    bits = [''.join('{0:08b}'.format(b) for b in np.array([q.norm], dtype='>f4').tobytes())]
    for k, i in enumerate(nonzero):
        bits.append(elias_gamma_encode(int(runs[k]) + 1))
        bits.append('1' if q.signs[i] < 0 else '0')
        bits.append(elias_gamma_encode(int(q.levels[i])))
    bits.append(elias_gamma_encode(int(runs[-1]) + 1))
    bits = ''.join(bits)
    return np.packbits(np.frombuffer(bits.encode('ascii'), dtype=np.uint8) - ord('0')).tobytes()


def unpack(data, dim, s):
    """Deserialize a message written by :func:`pack`.

    Parameters
    ----------
    data : :class:`bytes`
        The packed message.
    dim : :class:`int`
        Length of the vector, known to the receiver.
    s : :class:`int`
        Number of levels, known to the receiver.

    Returns
    -------
    :class:`QuantizedVector`
        The message; its norm is the single-precision value that was sent.

    Raises
    ------
    ValueError
        If the message is truncated or inconsistent with `dim`.
    """
    bits = ''.join('{0:08b}'.format(b) for b in bytearray(data))
    if len(bits) < 32:
        raise ValueError("Message is too short to hold a norm.")
    norm = float(np.frombuffer(bytes(bytearray(data)[:4]), dtype='>f4')[0])
    signs = np.zeros(dim, dtype=np.int8)
    levels = np.zeros(dim, dtype=np.int64)
    position, index = 32, 0
    while True:
        run, position = elias_gamma_decode(bits, position)
        index += run - 1
        if index == dim:
            break
        if index > dim:
            raise ValueError("Zero run overflows a vector of length {0:d}.".format(dim))
        if position >= len(bits):
            raise ValueError("Truncated quantized message.")
        signs[index] = -1 if bits[position] == '1' else 1
        levels[index], position = elias_gamma_decode(bits, position + 1)
        index += 1
    return QuantizedVector(norm, signs, levels, s)


def empirical_moments(x, s, trials, seed=0, chunk=10000, full=False):
    """Monte Carlo estimate of the bias and variance of the quantizer.

    Parameters
    ----------
    x : array-like
        The vector to quantize repeatedly.
    s : :class:`int`
        Number of levels.
    trials : :class:`int`
        Number of independent quantizations.
    seed : :class:`int`, optional
        Seed of the generator.
    chunk : :class:`int`, optional
        Number of trials drawn at once.
    full : :class:`bool`, optional
        If ``True``, also return the exact standard error of every
        coordinate of the mean error, which is zero where the level is
        deterministic.

    Returns
    -------
    :func:`tuple`
        ``(mean_error, mean_sq_error)``, where ``mean_error`` is the average
        of ``dequantize(quantize(x)) - x`` and ``mean_sq_error`` the
        average of its squared norm; with `full`, the per-coordinate
        standard error is appended.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1.")
    x = np.asarray(x, dtype=np.float64).ravel()
    norm, sign, lower, upper = _ratios(x, s)
    rng = np.random.default_rng(seed)
    total = np.zeros(x.size)
    total_sq = np.zeros(x.size)
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        levels = lower + (rng.random((n, x.size)) < upper)
        error = norm * (sign * levels) / s - x
        total += error.sum(axis=0)
        total_sq += (error * error).sum(axis=0)
        done += n
    mean_error = total / trials
    mean_sq_error = float(total_sq.sum() / trials)
    if full:
        p = np.clip(upper, 0.0, 1.0)
        return mean_error, mean_sq_error, norm / s * np.sqrt(p * (1 - p) / trials)
    return mean_error, mean_sq_error


def variance_bound(x, s):
    """The bound :math:`\\min(d/s^2, \\sqrt{d}/s)\\lVert x\\rVert_2^2` on the
    quantization variance.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    d = x.size
    return min(d / s**2, np.sqrt(d) / s) * float(np.dot(x, x))


class Quantizer(object):
    """Compressor applied to every client upload.

    Parameters
    ----------
    s : :class:`int`, optional
        Number of levels.  ``None`` disables quantization: vectors are sent
        as 32-bit floats and decoded exactly.
    blocks : :class:`int` or :class:`list`, optional
        Either the number of contiguous, nearly equal blocks, or the list of
        block sizes.  A list whose sum divides the length of a vector is
        repeated to cover it, so the same list splits an image and its
        stacked gradient components row by row.  Every block is quantized
        with its own norm.
    """

    def __init__(self, s=None, blocks=1):
        if s is not None and int(s) < 1:
            raise ValueError("The number of levels must be at least 1.")
        self.s = None if s is None else int(s)
        self.blocks = blocks

    @property
    def off(self):
        """``True`` if vectors are passed through unquantized.
        """
        return self.s is None

    def __repr__(self):
        return "Quantizer(s={0}, blocks={1})".format('off' if self.off else self.s, self.blocks)

    def boundaries(self, dim):
        """Start and stop index of every block of a vector of length `dim`.
        """
        if isinstance(self.blocks, (int, np.integer)):
            count = max(1, min(int(self.blocks), dim))
            edges = np.concatenate(([0], np.cumsum([len(b) for b in np.array_split(np.arange(dim), count)])))
        else:
            sizes = np.asarray(self.blocks, dtype=np.int64)
            total = int(sizes.sum())
            if sizes.size == 0 or sizes.min() < 1 or dim % total != 0:
                raise ValueError("Block sizes sum to {0:d}, which does not divide {1:d}.".format(total, dim))
            edges = np.concatenate(([0], np.cumsum(np.tile(sizes, dim // total))))
        return list(zip(edges[:-1].tolist(), edges[1:].tolist()))

    def compress(self, x, rng):
        """Compress `x`.

        Parameters
        ----------
        x : :class:`numpy.ndarray`
            The vector.
        rng : :class:`numpy.random.Generator`
            Generator for the stochastic rounding; blocks draw from it in
            order.

        Returns
        -------
        :class:`numpy.ndarray` or :class:`list`
            A copy of `x` when quantization is off, otherwise one
            :class:`QuantizedVector` per block.
        """
        x = np.asarray(x, dtype=np.float64)
        if self.off:
            return x.copy()
        rng = _generator(rng)
        return [quantize(x[start:stop], self.s, rng) for start, stop in self.boundaries(x.size)]

    def decompress(self, payload):
        """Decode the output of :meth:`compress`.
        """
        if self.off:
            return payload.copy()
        return np.concatenate([dequantize(q) for q in payload])

    def bits(self, payload):
        """Uplink cost of the output of :meth:`compress`, in bits.
        """
        if self.off:
            return 32 * payload.size
        return sum(encoded_bits(q) for q in payload)
