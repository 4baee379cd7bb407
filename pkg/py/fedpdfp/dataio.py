# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""
==============
fedpdfp.dataio
==============

Reading and writing data sets, splitting them between clients, and
building feature graphs.

LIBSVM format
-------------

One sample per line, ``label index:value index:value ...``, with 1-based,
strictly increasing feature indices.  Labels ``+1``/``-1`` (also ``1``/``0``
with ``0`` read as ``-1``) and ``1``/``2`` (``2`` read as ``-1``) are
accepted.  Blank lines and text after ``#`` are ignored.

Coordinate matrix format
------------------------

Lines starting with ``%`` are comments.  The first other line is
``rows cols nnz``, followed by ``nnz`` lines ``row col value`` with 1-based
indices.
"""
import os
from warnings import warn
import numpy as np
import scipy.sparse as sparse
from .linops import IdentityOperator, SparseMatrixOperator, VerticalStack
from .losses import LossShard


class DataFormatError(ValueError):
    """Raised for malformed data files.

    Parameters
    ----------
    message : :class:`str`
        Description of the problem.
    path : :class:`str`, optional
        File being read.
    lineno : :class:`int`, optional
        1-based line number.
    """

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = list()
        if path is not None:
            where.append(str(path))
        if lineno is not None:
            where.append('line {0:d}'.format(lineno))
        if where:
            message = '{0}: {1}'.format(', '.join(where), message)
        super(DataFormatError, self).__init__(message)


class FeatureWarning(UserWarning):
    """A feature was skipped while building a feature graph.
    """
    pass


class Dataset(object):
    """Labelled samples.

    Parameters
    ----------
    rows : :class:`scipy.sparse.spmatrix` or array-like
        The sample matrix.
    labels : array-like
        One label per sample.
    d : :class:`int`, optional
        Feature dimension; the number of columns of `rows` by default.
    provenance : :class:`str`, optional
        Where the data came from.
    """

    def __init__(self, rows, labels, d=None, provenance=''):
        rows = sparse.csr_matrix(rows, dtype=np.float64)
        if d is not None and d != rows.shape[1]:
            if d < rows.shape[1]:
                raise DataFormatError("Samples have {0:d} features, more than d = {1:d}.".format(rows.shape[1], d))
            rows = sparse.csr_matrix((rows.data, rows.indices, rows.indptr), shape=(rows.shape[0], d))
        self.rows = rows
        self.labels = np.asarray(labels, dtype=np.float64).ravel()
        if self.labels.size != rows.shape[0]:
            raise DataFormatError("{0:d} samples but {1:d} labels.".format(rows.shape[0], self.labels.size))
        self.provenance = provenance

    @property
    def d(self):
        """Feature dimension.
        """
        return self.rows.shape[1]

    def __len__(self):
        return self.rows.shape[0]

    def __repr__(self):
        return "Dataset(n={0:d}, d={1:d}, provenance='{2}')".format(len(self), self.d, self.provenance)

    def subset(self, index, tag=None):
        """Samples `index`, in that order.
        """
        index = np.asarray(index, dtype=np.int64)
        provenance = self.provenance if tag is None else '{0}[{1}]'.format(self.provenance, tag)
        return Dataset(self.rows[index], self.labels[index], self.d, provenance)

    def shard(self, kind='logistic', **kwargs):
        """Return the data as a :class:`~fedpdfp.losses.LossShard`.
        """
        return LossShard(kind, self.rows, self.labels, **kwargs)


def _labels(raw, path):
    """Map the label alphabet of a file to {-1, +1}.
    """
    alphabet = set(np.unique(raw).tolist())
    if alphabet <= {-1.0, 1.0}:
        return raw
    if alphabet <= {0.0, 1.0}:
        return np.where(raw == 0, -1.0, 1.0)
    if alphabet <= {1.0, 2.0}:
        return np.where(raw == 2, -1.0, 1.0)
    raise DataFormatError("Unknown label alphabet {0}.".format(sorted(alphabet)), path)


def parse_libsvm(stream, d_hint=None, path=None):
    """Parse LIBSVM text.

    Parameters
    ----------
    stream : iterable of :class:`str`
        Lines of text, *e.g.* an open file.
    d_hint : :class:`int`, optional
        Feature dimension; the largest index seen by default.
    path : :class:`str`, optional
        Name used in error messages and provenance.

    Returns
    -------
    :class:`Dataset`
        The data, labels in {-1, +1}.

    Raises
    ------
    DataFormatError
        For malformed tokens, indices that are not strictly increasing,
        indices beyond `d_hint` and unknown label alphabets.
    """
    labels, indptr, indices, values = list(), [0], list(), list()
    for lineno, line in enumerate(stream, 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            labels.append(float(tokens[0]))
        except ValueError:
            raise DataFormatError("Malformed label '{0}'.".format(tokens[0]), path, lineno)
        last = 0
        for token in tokens[1:]:
            index, sep, value = token.partition(':')
            try:
                index, value = int(index), float(value)
            except ValueError:
                sep = ''
            if not sep:
                raise DataFormatError("Malformed token '{0}'.".format(token), path, lineno)
            if index < 1:
                raise DataFormatError("Feature index {0:d} is not positive.".format(index), path, lineno)
            if index == last:
                raise DataFormatError("Duplicate feature index {0:d}.".format(index), path, lineno)
            if index < last:
                raise DataFormatError("Feature index {0:d} follows {1:d}.".format(index, last), path, lineno)
            if d_hint is not None and index > d_hint:
                raise DataFormatError("Feature index {0:d} exceeds d = {1:d}.".format(index, d_hint), path, lineno)
            last = index
            indices.append(index - 1)
            values.append(value)
        indptr.append(len(indices))
    d = d_hint if d_hint is not None else (max(indices) + 1 if indices else 0)
    rows = sparse.csr_matrix((np.array(values, dtype=np.float64), np.array(indices, dtype=np.int64), np.array(indptr)),
                             shape=(len(labels), d))
    return Dataset(rows, _labels(np.array(labels, dtype=np.float64), path), d,
                   '' if path is None else str(path))


def read_libsvm(filename, d_hint=None):
    """Read a LIBSVM file; see :func:`parse_libsvm`.
    """
    from .log import get_logger
    log = get_logger()
    with open(filename) as stream:
        ds = parse_libsvm(stream, d_hint, filename)
    log.info("Read %d samples with %d features from %s.", len(ds), ds.d, filename)
    return ds


def format_libsvm(ds):
    """Yield the canonical LIBSVM lines of `ds`.
    """
    rows = ds.rows.tocsr()
    rows.sort_indices()
    for i in range(len(ds)):
        start, stop = rows.indptr[i], rows.indptr[i+1]
        entries = ' '.join('{0:d}:{1!r}'.format(int(j) + 1, float(x))
                           for j, x in zip(rows.indices[start:stop], rows.data[start:stop]))
        label = '+1' if ds.labels[i] > 0 else '-1'
        yield (label + ' ' + entries).rstrip() + '\n'


def write_libsvm(ds, filename):
    """Write `ds` in canonical LIBSVM form.
    """
    with open(filename, 'w') as stream:
        stream.writelines(format_libsvm(ds))


def split_train_test(ds, n_train=None, n_test=None, ratio=None, seed=0):
    """Split `ds` with a seeded shuffle.

    Give either counts or the training `ratio`.  With only `n_train`, the
    rest is the test set; with only `n_test`, the rest is the training set.

    Returns
    -------
    :func:`tuple`
        Training and test :class:`Dataset`.

    Raises
    ------
    ValueError
        If the counts exceed the number of samples.
    """
    from .quantize import random_stream
    total = len(ds)
    if ratio is not None:
        if not 0 <= ratio <= 1:
            raise ValueError("ratio must be in [0, 1].")
        n_train = int(round(ratio * total))
        n_test = total - n_train
    elif n_train is None and n_test is None:
        raise ValueError("Give n_train, n_test or ratio.")
    elif n_train is None:
        n_train = total - n_test
    elif n_test is None:
        n_test = total - n_train
    if n_train < 0 or n_test < 0 or n_train + n_test > total:
        raise ValueError("Cannot take {0} training and {1} test samples from {2:d}.".format(n_train, n_test, total))
    order = random_stream(seed, 0, 0, 'data').permutation(total)
    return (ds.subset(np.sort(order[:n_train]), 'train'),
            ds.subset(np.sort(order[n_train:n_train + n_test]), 'test'))


class PartitionPlan(object):
    """Assignment of samples to clients.

    Parameters
    ----------
    N : :class:`int`
        Number of clients.
    assignment : array-like
        Client id of every sample.
    seed : :class:`int`
        Seed of the shuffle.
    scheme : :class:`str`, optional
        Only ``'iid-shuffle'``.
    """

    def __init__(self, N, assignment, seed, scheme='iid-shuffle'):
        self.N = int(N)
        self.assignment = np.asarray(assignment, dtype=np.int64)
        self.seed = seed
        self.scheme = scheme
        counts = np.bincount(self.assignment, minlength=self.N)
        if counts.size != self.N or np.any(counts == 0):
            raise ValueError("Every client must receive at least one sample.")

    def members(self, client):
        """Sample indices of `client`, in increasing order.
        """
        return np.flatnonzero(self.assignment == client)

    def sizes(self):
        """Number of samples of every client.
        """
        return np.bincount(self.assignment, minlength=self.N)


def plan_partition(n_samples, N, seed=0):
    """Shuffle the samples, then deal them out round-robin.

    Client sizes differ by at most one.

    Raises
    ------
    ValueError
        If `N` exceeds the number of samples.
    """
    from .quantize import random_stream
    if not 1 <= N <= n_samples:
        raise ValueError("Cannot split {0:d} samples between {1:d} clients.".format(n_samples, N))
    order = random_stream(seed, 0, 1, 'data').permutation(n_samples)
    assignment = np.empty(n_samples, dtype=np.int64)
    assignment[order] = np.arange(n_samples) % N
    return PartitionPlan(N, assignment, seed)


def partition(ds, N, seed=0, kind='logistic', **kwargs):
    """Split `ds` into `N` client shards.

    Additional keyword arguments are passed to :class:`~fedpdfp.losses.LossShard`.

    Returns
    -------
    :class:`list`
        One :class:`~fedpdfp.losses.LossShard` per client.
    """
    plan = plan_partition(len(ds), N, seed)
    return [ds.subset(plan.members(c)).shard(kind, **kwargs) for c in range(N)]


def shards_to_dataset(shards, provenance=''):
    """Concatenate client shards back into one :class:`Dataset`.
    """
    return Dataset(sparse.vstack([s.samples for s in shards], format='csr'),
                   np.concatenate([s.targets for s in shards]), shards[0].d, provenance)


def build_graph_matrix(ds, threshold=0.7):
    """Feature graph from thresholded empirical correlations.

    Parameters
    ----------
    ds : :class:`Dataset`
        The data.
    threshold : :class:`float`, optional
        Pairs of features with absolute correlation at least this large
        are joined.

    Returns
    -------
    :class:`~fedpdfp.linops.SparseMatrixOperator`
        One row per joined pair :math:`i < j`, sorted by :math:`(i, j)`,
        with :math:`+1` in column :math:`i` and :math:`-1` in column :math:`j`.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1].")
    n = len(ds)
    if n == 0:
        raise ValueError("Cannot build a feature graph from an empty data set.")
    X = ds.rows
    mean = np.asarray(X.mean(axis=0)).ravel()
    cov = np.asarray((X.T @ X).todense()) / n - np.outer(mean, mean)
    var = np.diag(cov).copy()
    scale = np.sqrt(np.abs(var)).max() if var.size else 0.0
    dead = var <= 1e-12 * max(scale**2, 1e-300)
    if np.any(dead):
        warn("Skipping {0:d} zero-variance features: {1}.".format(int(dead.sum()), np.flatnonzero(dead).tolist()),
             FeatureWarning)
    std = np.sqrt(np.where(dead, 1.0, var))
    corr = cov / np.outer(std, std)
    corr[dead, :] = 0.0
    corr[:, dead] = 0.0
    i, j = np.nonzero(np.triu(np.abs(corr) >= threshold * (1.0 - 1e-12), k=1))
    entries = [(r, int(a), 1.0) for r, a in enumerate(i)] + [(r, int(b), -1.0) for r, b in enumerate(j)]
    return SparseMatrixOperator.from_entries(len(i), ds.d, entries)


def graph_operator(G):
    """Return :math:`B = [G; I]`, or :math:`I` when `G` has no rows.
    """
    if G.rows == 0:
        return IdentityOperator(G.cols)
    return VerticalStack([G, IdentityOperator(G.cols)])


def save_matrix(op, filename, comment=None):
    """Write a sparse operator in coordinate format.
    """
    with open(filename, 'w') as stream:
        stream.write('% fedpdfp coordinate matrix\n')
        if comment:
            for line in comment.splitlines():
                stream.write('% {0}\n'.format(line))
        stream.write('{0:d} {1:d} {2:d}\n'.format(op.rows, op.cols, op.nnz))
        for r, c, x in op.entries():
            stream.write('{0:d} {1:d} {2!r}\n'.format(r + 1, c + 1, float(x)))


def load_matrix(filename):
    """Read a coordinate-format file.

    Returns
    -------
    :class:`~fedpdfp.linops.SparseMatrixOperator`
        The matrix.

    Raises
    ------
    DataFormatError
        For malformed lines, out-of-range or duplicate entries, and entry
        counts that disagree with the header.
    """
    header, entries, seen = None, list(), set()
    with open(filename) as stream:
        for lineno, line in enumerate(stream, 1):
            line = line.strip()
            if not line or line.startswith('%'):
                continue
            tokens = line.split()
            if header is None:
                try:
                    header = tuple(int(t) for t in tokens)
                except ValueError:
                    header = ()
                if len(header) != 3 or min(header) < 0:
                    raise DataFormatError("Malformed header '{0}'.".format(line), filename, lineno)
                if header[1] < 1:
                    raise DataFormatError("A matrix needs at least one column.", filename, lineno)
                continue
            try:
                r, c, x = int(tokens[0]), int(tokens[1]), float(tokens[2])
                if len(tokens) != 3:
                    raise ValueError
            except (ValueError, IndexError):
                raise DataFormatError("Malformed entry '{0}'.".format(line), filename, lineno)
            if not (1 <= r <= header[0] and 1 <= c <= header[1]):
                raise DataFormatError("Entry ({0:d}, {1:d}) outside a {2:d} x {3:d} matrix.".format(r, c, header[0], header[1]),
                                      filename, lineno)
            if (r, c) in seen:
                raise DataFormatError("Duplicate entry ({0:d}, {1:d}).".format(r, c), filename, lineno)
            if not np.isfinite(x):
                raise DataFormatError("Non-finite value '{0}'.".format(tokens[2]), filename, lineno)
            seen.add((r, c))
            entries.append((r - 1, c - 1, x))
    if header is None:
        raise DataFormatError("Missing header.", filename)
    if len(entries) != header[2]:
        raise DataFormatError("Header announces {0:d} entries, found {1:d}.".format(header[2], len(entries)), filename)
    return SparseMatrixOperator.from_entries(header[0], header[1], entries)


def write_partition(ds, plan, outdir, prefix='client'):
    """Write one LIBSVM file per client.

    Returns
    -------
    :class:`list`
        Names of the files written.
    """
    os.makedirs(outdir, exist_ok=True)
    names = list()
    for c in range(plan.N):
        name = os.path.join(outdir, '{0}{1:03d}.svm'.format(prefix, c))
        write_libsvm(ds.subset(plan.members(c)), name)
        names.append(name)
    return names
