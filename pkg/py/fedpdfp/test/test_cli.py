# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""Test fedpdfp.cli.
"""
import os
import unittest
from io import StringIO
from tempfile import TemporaryDirectory
from importlib.resources import files
from unittest.mock import patch
import yaml
import numpy as np
from astropy.table import Table
from ..config import load_config
from ..fedsim import read_metrics
from ..cli import _options, main, quantizer_bench, diagnose


class TestCli(unittest.TestCase):
    """Test fedpdfp.cli
    """

    @classmethod
    def setUpClass(cls):
        cls.data = str(files('fedpdfp.test') / 't' / 'small.svm')

    def setUp(self):
        self.tmp = TemporaryDirectory()
        self.out = os.path.join(self.tmp.name, 'metrics.csv')

    def tearDown(self):
        self.tmp.cleanup()

    def config_file(self, **sections):
        """Write a small training configuration, updated by `sections`.
        """
        d = {'data': {'train': self.data, 'n_train': 18, 'n_test': 6},
             'federation': {'N': 3, 'n': 2, 'b': 2, 'K': 20, 's': 4,
                            'schedule': {'kind': 'constant', 'gamma': 0.5}},
             'run': {'out': self.out, 'log_every': 0},
             'diagnostics': {'reference_rounds': 2000}}
        for name, values in sections.items():
            d.setdefault(name, dict()).update(values)
        filename = os.path.join(self.tmp.name, 'config.yaml')
        with open(filename, 'w') as f:
            yaml.safe_dump(d, f)
        return filename

    def test_options(self):
        """Test command-line parsing.
        """
        options = _options('run', '-c', 'x.yaml', '-s', '5', '-t', '2')
        self.assertEqual((options.command, options.config, options.seed, options.threads),
                         ('run', 'x.yaml', 5, 2))
        self.assertIsNone(options.out)
        options = _options('quantizer-bench')
        self.assertEqual((options.dim, options.levels, options.trials), (123, [1, 4, 20], 10000))
        options = _options('-v', 'diagnose', '-S', 'final.npz')
        self.assertTrue(options.verbose)
        self.assertEqual(options.state, 'final.npz')

    def test_run(self):
        """Training writes the metrics and the final state.
        """
        config = self.config_file()
        with patch('sys.stdout', new_callable=StringIO) as stdout:
            self.assertEqual(main('run', '-c', config), 0)
        self.assertTrue(stdout.getvalue().startswith('final train_loss='))
        self.assertIn('uplink_bits_cum=', stdout.getvalue())
        rows = read_metrics(self.out)
        self.assertEqual(len(rows), 20)
        self.assertTrue(0 <= rows[-1].test_accuracy <= 1)
        with np.load(os.path.join(self.tmp.name, 'metrics.npz')) as state:
            self.assertEqual(int(state['k']), 20)
            self.assertEqual(state['x'].size, 4)
            self.assertGreaterEqual(state['v'].size, 5)
        # Same configuration, same bytes.
        again = os.path.join(self.tmp.name, 'again.csv')
        with patch('sys.stdout', new_callable=StringIO):
            self.assertEqual(main('run', '-c', config, '-o', again, '-t', '2'), 0)
        with open(self.out, 'rb') as a, open(again, 'rb') as b:
            self.assertEqual(a.read(), b.read())
        other = os.path.join(self.tmp.name, 'other.csv')
        with patch('sys.stdout', new_callable=StringIO):
            self.assertEqual(main('run', '-c', config, '-o', other, '-s', '1'), 0)
        with open(self.out, 'rb') as a, open(other, 'rb') as b:
            self.assertNotEqual(a.read(), b.read())

    def test_diagnose(self):
        """Residuals of a saved state.
        """
        config = self.config_file()
        with patch('sys.stdout', new_callable=StringIO):
            self.assertEqual(main('run', '-c', config), 0)
            result = diagnose(load_config(config), os.path.join(self.tmp.name, 'metrics.npz'))
            self.assertEqual(main('diagnose', '-c', config), 0)
        self.assertTrue(os.path.exists(os.path.join(self.tmp.name, 'metrics.reference.npz')))
        self.assertGreaterEqual(result['kkt_rv'], 0)
        self.assertGreaterEqual(result['lyapunov'], 0)
        self.assertTrue(0 <= result['accuracy'] <= 1)

    @patch('fedpdfp.cli.get_logger')
    def test_errors(self, mock_get_logger):
        """Configuration and data errors have distinct exit codes.
        """
        config = self.config_file(federation={'N': 3, 'n': 5})
        self.assertEqual(main('run', '-c', config), 2)
        self.assertIn('federation.n', mock_get_logger().critical.call_args[0][0])
        config = self.config_file(data={'train': os.path.join(self.tmp.name, 'missing.svm')})
        self.assertEqual(main('run', '-c', config), 3)
        self.assertEqual(main('run'), 2)
        self.assertIn('data.train', mock_get_logger().critical.call_args[0][0])
        bad = os.path.join(self.tmp.name, 'bad.svm')
        with open(bad, 'w') as f:
            f.write('+1 2:1 1:1\n')
        config = self.config_file(data={'train': bad, 'n_train': None, 'n_test': None})
        self.assertEqual(main('run', '-c', config), 3)
        self.assertIn('line 1', mock_get_logger().critical.call_args[0][0])
        # A missing configuration file is a configuration error.
        self.assertEqual(main('run', '-c', os.path.join(self.tmp.name, 'missing.yaml')), 2)
        self.assertIn('missing.yaml', mock_get_logger().critical.call_args[0][0])
        # A graph without columns is a data error.
        graph = os.path.join(self.tmp.name, 'graph.mtx')
        with open(graph, 'w') as f:
            f.write('3 0 0\n')
        config = self.config_file(data={'graph': graph})
        self.assertEqual(main('run', '-c', config), 3)
        self.assertIn('column', mock_get_logger().critical.call_args[0][0])

    def test_partition(self):
        """Client shards are written as LIBSVM files.
        """
        config = self.config_file()
        outdir = os.path.join(self.tmp.name, 'shards')
        with patch('sys.stdout', new_callable=StringIO) as stdout:
            self.assertEqual(main('partition', '-c', config, '-o', outdir), 0)
        self.assertEqual(sorted(os.listdir(outdir)), ['client000.svm', 'client001.svm', 'client002.svm'])
        self.assertIn('sizes 6-6', stdout.getvalue())

    def test_quantizer_bench(self):
        """Quantization costs fewer bits than raw floats.
        """
        out = os.path.join(self.tmp.name, 'bench.csv')
        with patch('sys.stdout', new_callable=StringIO):
            self.assertEqual(main('quantizer-bench', '-l', '20', '-n', '200', '-o', out), 0)
        table = Table.read(out, format='ascii.csv')
        self.assertEqual(list(table['s']), [20])
        self.assertLess(table['bits'][0], 32 * 123)
        self.assertLessEqual(table['mean_sq_error'][0], 1.1 * table['bound'][0])
        fine = quantizer_bench(16, [2**30], 50, seed=3)
        self.assertLessEqual(fine['mean_sq_error'][0], 1e-12)
        with self.assertRaises(ValueError):
            quantizer_bench(0, [4], 10)

    def test_tv_demo(self):
        """The imaging demo writes its metrics and image.
        """
        image = os.path.join(self.tmp.name, 'recovered.fits')
        config = self.config_file(imaging={'size': 8, 'clients': 2, 'K': 20, 'mu': 0.01, 'image': image},
                                  federation={'s': 'off'})
        with patch('sys.stdout', new_callable=StringIO) as stdout:
            self.assertEqual(main('tv-demo', '-c', config), 0)
        self.assertTrue(stdout.getvalue().startswith('best mu=0.01'))
        self.assertTrue(os.path.exists(image))
        self.assertEqual(len(Table.read(self.out, format='ascii.csv')), 20)
