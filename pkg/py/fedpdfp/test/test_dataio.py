# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""Test fedpdfp.dataio.
"""
import os
import unittest
from tempfile import TemporaryDirectory
from warnings import catch_warnings, simplefilter
import numpy as np
from ..linops import SparseMatrixOperator
from ..dataio import (DataFormatError, FeatureWarning, Dataset, parse_libsvm, read_libsvm,
                      format_libsvm, write_libsvm, split_train_test, plan_partition,
                      partition, shards_to_dataset, build_graph_matrix, graph_operator,
                      save_matrix, load_matrix, write_partition)


class TestDataio(unittest.TestCase):
    """Test fedpdfp.dataio
    """

    @classmethod
    def setUpClass(cls):
        cls.text = ['+1 1:0.5 3:1.2\n', '\n', '-1 2:0.25  # comment\n', '-1\n']
        rng = np.random.default_rng(12)
        X = rng.standard_normal((40, 6)) * (rng.random((40, 6)) < 0.5)
        cls.ds = Dataset(X, np.where(rng.random(40) < 0.5, -1.0, 1.0), provenance='random')

    def setUp(self):
        self.tmp = TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def test_parse(self):
        """Test parsing of LIBSVM lines.
        """
        ds = parse_libsvm(self.text[:1])
        self.assertEqual((len(ds), ds.d), (1, 3))
        np.testing.assert_array_equal(ds.rows.toarray(), [[0.5, 0.0, 1.2]])
        np.testing.assert_array_equal(ds.labels, [1.0])
        ds = parse_libsvm(self.text, d_hint=5)
        self.assertEqual((len(ds), ds.d), (3, 5))
        np.testing.assert_array_equal(ds.labels, [1.0, -1.0, -1.0])
        self.assertEqual(ds.rows[2].nnz, 0)

    def test_labels(self):
        """Test the accepted label alphabets.
        """
        np.testing.assert_array_equal(parse_libsvm(['2 1:1\n', '1 2:1\n']).labels, [-1.0, 1.0])
        np.testing.assert_array_equal(parse_libsvm(['0 1:1\n', '1 2:1\n']).labels, [-1.0, 1.0])
        with self.assertRaises(DataFormatError):
            parse_libsvm(['3 1:1\n', '1 2:1\n'])

    def test_parse_errors(self):
        """Errors name the file and line.
        """
        bad = {'+1 3:1 2:1\n': 'follows',
               '+1 2:1 2:3\n': 'Duplicate',
               '+1 0:1\n': 'not positive',
               '+1 1-2\n': 'Malformed token',
               'yes 1:1\n': 'Malformed label',
               '+1 7:1\n': 'exceeds'}
        for line, message in bad.items():
            with self.assertRaises(DataFormatError) as e:
                parse_libsvm(['+1 1:1\n', line], d_hint=6, path='bad.svm')
            self.assertIn('bad.svm, line 2', str(e.exception))
            self.assertIn(message, str(e.exception))
            self.assertEqual(e.exception.lineno, 2)

    def test_canonical(self):
        """Canonical text survives a write and read.
        """
        canonical = ['+1 1:0.5 3:1.2\n', '-1 2:0.25\n', '-1\n']
        self.assertEqual(list(format_libsvm(parse_libsvm(self.text))), canonical)
        filename = os.path.join(self.tmp.name, 'data.svm')
        write_libsvm(self.ds, filename)
        back = read_libsvm(filename, d_hint=6)
        self.assertEqual(back.provenance, filename)
        np.testing.assert_array_equal(back.rows.toarray(), self.ds.rows.toarray())
        np.testing.assert_array_equal(back.labels, self.ds.labels)
        with open(filename) as f:
            self.assertEqual(f.readlines(), list(format_libsvm(back)))

    def test_dataset(self):
        """Test dataset construction.
        """
        ds = Dataset(np.eye(3), [1, -1, 1], d=5)
        self.assertEqual(ds.d, 5)
        with self.assertRaises(DataFormatError):
            Dataset(np.eye(3), [1, -1, 1], d=2)
        with self.assertRaises(DataFormatError):
            Dataset(np.eye(3), [1, -1])
        sub = self.ds.subset([3, 1], 'pair')
        self.assertEqual(sub.provenance, 'random[pair]')
        np.testing.assert_array_equal(sub.labels, self.ds.labels[[3, 1]])

    def test_split(self):
        """Test seeded train/test splits.
        """
        train, test = split_train_test(self.ds, n_train=30, seed=4)
        self.assertEqual((len(train), len(test)), (30, 10))
        again, _ = split_train_test(self.ds, n_train=30, seed=4)
        np.testing.assert_array_equal(train.rows.toarray(), again.rows.toarray())
        other, _ = split_train_test(self.ds, n_train=30, seed=5)
        self.assertFalse(np.array_equal(train.rows.toarray(), other.rows.toarray()))
        train, test = split_train_test(self.ds, ratio=1.0)
        self.assertEqual((len(train), len(test)), (40, 0))
        train, test = split_train_test(self.ds, n_train=10, n_test=5)
        self.assertEqual((len(train), len(test)), (10, 5))
        with self.assertRaises(ValueError):
            split_train_test(self.ds, n_train=30, n_test=11)
        with self.assertRaises(ValueError):
            split_train_test(self.ds)
        with self.assertRaises(ValueError):
            split_train_test(self.ds, ratio=1.5)

    def test_partition(self):
        """Shards are a balanced partition of the samples.
        """
        plan = plan_partition(10, 3, seed=2)
        np.testing.assert_array_equal(plan.sizes(), [4, 3, 3])
        members = np.concatenate([plan.members(c) for c in range(3)])
        np.testing.assert_array_equal(np.sort(members), np.arange(10))
        np.testing.assert_array_equal(plan_partition(10, 1).sizes(), [10])
        with self.assertRaises(ValueError):
            plan_partition(10, 11)
        shards = partition(self.ds, 4, seed=1, mu1=0.01)
        self.assertEqual([s.n for s in shards], [10, 10, 10, 10])
        self.assertEqual(shards[0].mu1, 0.01)
        merged = shards_to_dataset(shards)
        self.assertEqual((len(merged), merged.d), (40, 6))
        self.assertAlmostEqual(abs(merged.rows).sum(), abs(self.ds.rows).sum())
        names = write_partition(self.ds, plan_partition(40, 3, seed=1), self.tmp.name)
        self.assertEqual([os.path.basename(n) for n in names],
                         ['client000.svm', 'client001.svm', 'client002.svm'])
        self.assertEqual(sum(len(read_libsvm(n, d_hint=6)) for n in names), 40)

    def test_graph(self):
        """Test feature graphs from correlations.
        """
        ds = Dataset(np.array([[1.0, 1.0], [2.0, 2.0], [0.0, 0.0], [3.0, 3.0]]), [1, -1, 1, -1])
        G = build_graph_matrix(ds)
        self.assertEqual(G.entries(), [(0, 0, 1.0), (0, 1, -1.0)])
        B = graph_operator(G)
        self.assertEqual((B.rows, B.cols), (3, 2))
        rng = np.random.default_rng(0)
        a, b = rng.standard_normal(200), rng.standard_normal(200)
        X = np.column_stack([a, a + 0.1 * rng.standard_normal(200), b, -b])
        G = build_graph_matrix(Dataset(X, np.ones(200)))
        self.assertEqual(G.entries(), [(0, 0, 1.0), (0, 1, -1.0), (1, 2, 1.0), (1, 3, -1.0)])
        G = build_graph_matrix(Dataset(np.column_stack([a, b]), np.ones(200)), threshold=1.0)
        self.assertEqual(G.rows, 0)
        self.assertEqual(graph_operator(G).kind, 'identity')
        with catch_warnings(record=True) as w:
            simplefilter('always')
            G = build_graph_matrix(Dataset(np.column_stack([a, np.ones(200), a]), np.ones(200)))
        self.assertTrue(any(issubclass(x.category, FeatureWarning) for x in w))
        self.assertEqual(G.entries(), [(0, 0, 1.0), (0, 2, -1.0)])
        with self.assertRaises(ValueError):
            build_graph_matrix(ds, threshold=0.0)

    def test_matrix_file(self):
        """Test coordinate-format files.
        """
        entries = [(0, 1, 0.5), (2, 4, -1.25), (3, 0, 3.0), (5, 2, 1e-3),
                   (7, 3, 2.0), (9, 4, -0.1), (9, 0, 7.0)]
        op = SparseMatrixOperator.from_entries(10, 5, entries)
        filename = os.path.join(self.tmp.name, 'graph.mtx')
        save_matrix(op, filename, comment='seven entries')
        back = load_matrix(filename)
        self.assertEqual((back.rows, back.cols), (10, 5))
        self.assertEqual(back.entries(), op.entries())
        with open(filename) as f:
            lines = f.readlines()
        self.assertEqual(lines[1], '% seven entries\n')
        self.assertEqual(lines[2], '10 5 7\n')
        bad = {'3 2 1\n4 1 1.0\n': 'outside',
               '3 2 2\n1 1 1.0\n1 1 2.0\n': 'Duplicate',
               '3 2 2\n1 1 1.0\n': 'announces',
               '3 2\n': 'header',
               '3 2 1\n1 x 1.0\n': 'Malformed entry',
               '3 0 0\n': 'column'}
        for content, message in bad.items():
            with open(filename, 'w') as f:
                f.write(content)
            with self.assertRaises(DataFormatError) as e:
                load_matrix(filename)
            self.assertIn(message, str(e.exception))
        with open(filename, 'w') as f:
            f.write('% empty\n3 2 0\n')
        empty = load_matrix(filename)
        self.assertEqual((empty.rows, empty.cols, empty.nnz), (3, 2, 0))
