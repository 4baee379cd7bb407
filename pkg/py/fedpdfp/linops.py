# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""
==============
fedpdfp.linops
==============

Linear operators :math:`B: \\mathbb{R}^d \\rightarrow \\mathbb{R}^m` used in
the coupling term :math:`g(Bx)`.

Four kinds are provided:

* :class:`SparseMatrixOperator`, any sparse matrix, *e.g.* a feature graph
  :math:`G` or a measurement matrix.
* :class:`IdentityOperator`.
* :class:`DiscreteGradient`, forward differences with a replicated (Neumann)
  boundary, so the last difference along every axis is zero.
* :class:`VerticalStack`, :math:`[B_1; B_2; \\ldots]`, *e.g.* :math:`B = [G; I]`.

Operators are immutable after construction; :meth:`~LinearOperator.apply` and
:meth:`~LinearOperator.apply_adjoint` are pure and may be called from
several threads at once.

Examples
--------

>>> import numpy as np
>>> from fedpdfp.linops import SparseMatrixOperator, IdentityOperator, VerticalStack
>>> G = SparseMatrixOperator.from_entries(1, 2, [(0, 0, 1.0), (0, 1, -1.0)])
>>> B = VerticalStack([G, IdentityOperator(2)])
>>> B.apply(np.array([4.0, 1.0]))
array([3., 4., 1.])
"""
from warnings import warn
import numpy as np
import scipy.sparse as sparse


class DimensionError(ValueError):
    """Raised when a vector does not match the shape of an operator.
    """
    pass


class SpectralNormWarning(UserWarning):
    """Power iteration stopped before reaching its tolerance.
    """
    pass


def _as_vector(x, size, shape, side):
    """Convert `x` to a flat float array and check its length.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != size:
        raise DimensionError(("Operator of shape {0} cannot be applied to a "
                              "vector of shape {1} ({2} side).").format(shape, x.shape, side))
    return x


class LinearOperator(object):
    """Base class for linear operators with a known shape.

    Parameters
    ----------
    rows : :class:`int`
        Dimension of the output space.
    cols : :class:`int`
        Dimension of the input space.
    """
    kind = None

    def __init__(self, rows, cols):
        if rows < 0 or cols < 1:
            raise DimensionError("Invalid operator shape ({0}, {1}).".format(rows, cols))
        self._rows = int(rows)
        self._cols = int(cols)

    @property
    def rows(self):
        """Dimension of the output space.
        """
        return self._rows

    @property
    def cols(self):
        """Dimension of the input space.
        """
        return self._cols

    @property
    def shape(self):
        """``(rows, cols)``.
        """
        return (self._rows, self._cols)

    def __repr__(self):
        return "{0}(rows={1:d}, cols={2:d})".format(self.__class__.__name__,
                                                    self.rows, self.cols)

    def apply(self, x):
        """Compute :math:`Bx`.

        Parameters
        ----------
        x : array-like
            Vector of length :attr:`cols`.

        Returns
        -------
        :class:`numpy.ndarray`
            Vector of length :attr:`rows`.

        Raises
        ------
        DimensionError
            If `x` has the wrong length.
        """
        return self._forward(_as_vector(x, self.cols, self.shape, 'input'))

    def apply_adjoint(self, y):
        """Compute :math:`B^T y`.

        Parameters
        ----------
        y : array-like
            Vector of length :attr:`rows`.

        Returns
        -------
        :class:`numpy.ndarray`
            Vector of length :attr:`cols`.

        Raises
        ------
        DimensionError
            If `y` has the wrong length.
        """
        return self._adjoint(_as_vector(y, self.rows, self.shape, 'output'))

    def gram(self, y):
        """Compute :math:`BB^T y`.
        """
        return self.apply(self.apply_adjoint(y))

    def todense(self):
        """Materialize the operator as a dense matrix, column by column.

        Only meant for small operators and for testing.
        """
        dense = np.zeros(self.shape, dtype=np.float64)
        e = np.zeros(self.cols, dtype=np.float64)
        for j in range(self.cols):
            e[j] = 1.0
            dense[:, j] = self._forward(e)
            e[j] = 0.0
        return dense

    def _forward(self, x):
        raise NotImplementedError

    def _adjoint(self, y):
        raise NotImplementedError


class IdentityOperator(LinearOperator):
    """The identity on :math:`\\mathbb{R}^n`.
    """
    kind = 'identity'

    def __init__(self, n):
        super(IdentityOperator, self).__init__(n, n)

    def _forward(self, x):
        return x.copy()

    def _adjoint(self, y):
        return y.copy()


class SparseMatrixOperator(LinearOperator):
    """An operator backed by a sparse matrix.

    The matrix is stored in compressed row form for repeated application,
    together with its transpose.

    Parameters
    ----------
    matrix : :class:`scipy.sparse.spmatrix` or :class:`numpy.ndarray`
        The matrix.  Values must be finite.
    """
    kind = 'sparse-matrix'

    def __init__(self, matrix):
        matrix = sparse.csr_matrix(matrix, dtype=np.float64)
        matrix.sum_duplicates()
        if not np.all(np.isfinite(matrix.data)):
            raise ValueError("Sparse matrix contains non-finite values.")
        super(SparseMatrixOperator, self).__init__(*matrix.shape)
        self._matrix = matrix
        self._transpose = matrix.T.tocsr()

    @classmethod
    def from_entries(cls, rows, cols, entries):
        """Build an operator from coordinate triplets.

        Parameters
        ----------
        rows, cols : :class:`int`
            Shape of the matrix.
        entries : iterable
            Triplets ``(i, j, value)`` with 0-based indices.

        Returns
        -------
        :class:`SparseMatrixOperator`
            The operator.

        Raises
        ------
        ValueError
            If an index is out of range or an ``(i, j)`` pair repeats.
        """
        entries = list(entries)
        if len(entries) == 0:
            return cls(sparse.csr_matrix((rows, cols), dtype=np.float64))
        i, j, v = (np.asarray(a) for a in zip(*entries))
        i = i.astype(np.int64)
        j = j.astype(np.int64)
        if (i.min() < 0 or i.max() >= rows or j.min() < 0 or j.max() >= cols):
            raise ValueError("Entry index out of range for shape ({0}, {1}).".format(rows, cols))
        if np.unique(i * cols + j).size != i.size:
            raise ValueError("Duplicate (row, col) entries.")
        return cls(sparse.coo_matrix((v.astype(np.float64), (i, j)), shape=(rows, cols)))

    @property
    def matrix(self):
        """The underlying :class:`scipy.sparse.csr_matrix`.
        """
        return self._matrix

    @property
    def nnz(self):
        """Number of stored entries.
        """
        return self._matrix.nnz

    def entries(self):
        """Return the stored entries as sorted 0-based triplets.

        Returns
        -------
        :class:`list`
            ``(row, col, value)`` tuples, sorted by row then column.
        """
        coo = self._matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [(int(coo.row[k]), int(coo.col[k]), float(coo.data[k])) for k in order]

    def _forward(self, x):
        return self._matrix.dot(x)

    def _adjoint(self, y):
        return self._transpose.dot(y)


class DiscreteGradient(LinearOperator):
    """Forward-difference gradient of an array flattened in C order.

    The output stacks one block of differences per axis, axis-major: all
    differences along ``axes[0]``, then all along ``axes[1]``, and so on.
    The last difference along each axis is zero (replicated boundary).

    Parameters
    ----------
    dims : :class:`tuple`
        Shape of the array, *e.g.* ``(32, 32)`` for an image.
    axes : :class:`tuple`, optional
        Axes to differentiate along.  Default is all axes.
    """
    kind = 'discrete-gradient'

    def __init__(self, dims, axes=None):
        dims = tuple(int(n) for n in np.atleast_1d(dims))
        if axes is None:
            axes = tuple(range(len(dims)))
        self.dims = dims
        self.axes = tuple(int(a) for a in axes)
        for a in self.axes:
            if a < 0 or a >= len(dims):
                raise ValueError("Axis {0} out of range for dims {1}.".format(a, dims))
        self.npixels = int(np.prod(dims))
        super(DiscreteGradient, self).__init__(self.npixels * len(self.axes), self.npixels)

    def __repr__(self):
        return "DiscreteGradient(dims={0}, axes={1})".format(self.dims, self.axes)

    @staticmethod
    def _last(ndim, axis):
        sl = [slice(None)] * ndim
        sl[axis] = slice(-1, None)
        return tuple(sl)

    def _forward(self, x):
        u = x.reshape(self.dims)
        blocks = list()
        for a in self.axes:
            d = np.diff(u, axis=a, append=self._take_last(u, a))
            blocks.append(d.ravel())
        return np.concatenate(blocks)

    def _take_last(self, u, axis):
        return u[self._last(u.ndim, axis)]

    def _adjoint(self, y):
        out = np.zeros(self.dims, dtype=np.float64)
        for k, a in enumerate(self.axes):
            z = y[k*self.npixels:(k+1)*self.npixels].reshape(self.dims).copy()
            z[self._last(z.ndim, a)] = 0.0
            # (D^T z)_j = z_{j-1} - z_j, with z_{-1} = 0.
            out -= z
            lead = [slice(None)] * z.ndim
            lag = [slice(None)] * z.ndim
            lead[a] = slice(1, None)
            lag[a] = slice(None, -1)
            out[tuple(lead)] += z[tuple(lag)]
        return out.ravel()


class VerticalStack(LinearOperator):
    """Vertical concatenation :math:`[B_1; B_2; \\ldots]` of operators.

    Parameters
    ----------
    children : :class:`list`
        Operators sharing the same number of columns.
    """
    kind = 'vertical-stack'

    def __init__(self, children):
        children = list(children)
        if len(children) == 0:
            raise ValueError("A vertical stack needs at least one operator.")
        cols = set(c.cols for c in children)
        if len(cols) != 1:
            raise DimensionError("Stacked operators have different column counts: {0}.".format(sorted(cols)))
        self.children = tuple(children)
        self._offsets = np.cumsum([0] + [c.rows for c in children])
        super(VerticalStack, self).__init__(int(self._offsets[-1]), cols.pop())

    def __repr__(self):
        return "VerticalStack([{0}])".format(', '.join(repr(c) for c in self.children))

    def _forward(self, x):
        return np.concatenate([c._forward(x) for c in self.children])

    def _adjoint(self, y):
        out = np.zeros(self.cols, dtype=np.float64)
        for k, c in enumerate(self.children):
            out += c._adjoint(y[self._offsets[k]:self._offsets[k+1]])
        return out


def apply(op, x):
    """Compute :math:`Bx`; see :meth:`LinearOperator.apply`.
    """
    return op.apply(x)


def apply_adjoint(op, y):
    """Compute :math:`B^T y`; see :meth:`LinearOperator.apply_adjoint`.
    """
    return op.apply_adjoint(y)


def spectral_norm_sq(op, tol=1e-8, max_iter=5000, seed=0):
    """Estimate :math:`\\rho_{\\max}(BB^T)` by power iteration.

    The iteration runs on :math:`BB^T` or :math:`B^TB`, whichever is
    smaller; both have the same nonzero spectrum.

    Parameters
    ----------
    op : :class:`LinearOperator`
        The operator :math:`B`.
    tol : :class:`float`, optional
        Relative change of the estimate at which iteration stops.
    max_iter : :class:`int`, optional
        Maximum number of iterations.
    seed : :class:`int`, optional
        Seed of the random start vector.

    Returns
    -------
    :class:`float`
        The estimate.  If `max_iter` is reached first, the last estimate is
        returned and a :class:`SpectralNormWarning` is issued.
    """
    if tol <= 0:
        raise ValueError("tol must be positive.")
    if op.rows == 0:
        return 0.0
    if op.rows <= op.cols:
        n, step = op.rows, lambda u: op.apply(op.apply_adjoint(u))
    else:
        n, step = op.cols, lambda u: op.apply_adjoint(op.apply(u))
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(n)
    u /= np.linalg.norm(u)
    estimate = 0.0
    for _ in range(max_iter):
        w = step(u)
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        u = w / new
        if abs(new - estimate) <= tol * new:
            return new
        estimate = new
    warn("Power iteration did not reach tol={0:g} in {1:d} iterations.".format(tol, max_iter),
         SpectralNormWarning)
    return estimate
