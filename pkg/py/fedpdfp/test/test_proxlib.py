# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""Test fedpdfp.proxlib.
"""
import unittest
import numpy as np
from ..proxlib import (RegularizerSpec, isotropic_groups, regularizer_value,
                       prox_g, prox_g_conj, dual_feasible, moreau_residual)


class TestProxlib(unittest.TestCase):
    """Test fedpdfp.proxlib
    """

    @classmethod
    def setUpClass(cls):
        cls.l1 = RegularizerSpec('l1', 1.0)
        cls.groups = RegularizerSpec('group-l2', 2.0, [0, 0, 1, 1, 2])

    def test_spec(self):
        """Test validation of regularizer specifications.
        """
        with self.assertRaises(ValueError):
            RegularizerSpec('l2', 1.0)
        with self.assertRaises(ValueError):
            RegularizerSpec('l1', -1.0)
        with self.assertRaises(ValueError):
            RegularizerSpec('group-l2', 1.0)
        with self.assertRaises(ValueError):
            RegularizerSpec('group-l2', 1.0, [0, 2, 2])
        self.assertEqual(self.groups.n_groups, 3)
        self.assertEqual(self.l1.with_weight(3.0).weight, 3.0)
        self.assertIn('n_groups=3', repr(self.groups))

    def test_soft_threshold(self):
        """Test the l1 proximity operator.
        """
        y = np.array([3.0, -0.5, 0.2, -2.0, 1.0])
        np.testing.assert_allclose(prox_g(self.l1, y, 1.0), [2.0, 0.0, 0.0, -1.0, 0.0])
        np.testing.assert_allclose(prox_g(self.l1, y, 0.1), [2.9, -0.4, 0.1, -1.9, 0.9])
        np.testing.assert_array_equal(prox_g(self.l1.with_weight(0.0), y, 1.0), y)
        with self.assertRaises(ValueError):
            prox_g(self.l1, y, 0.0)

    def test_clip(self):
        """Test the l1 conjugate proximity operator.
        """
        y = np.array([3.0, -0.5, 0.2, -2.0, 1.0])
        for sigma in (0.01, 1.0, 100.0):
            np.testing.assert_array_equal(prox_g_conj(self.l1, y, sigma), [1.0, -0.5, 0.2, -1.0, 1.0])
        np.testing.assert_array_equal(prox_g_conj(self.l1.with_weight(0.0), y), np.zeros(5))
        with self.assertRaises(ValueError):
            prox_g_conj(self.l1, y, -1.0)

    def test_group_shrinkage(self):
        """Test the group-l2 proximity operators.
        """
        y = np.array([3.0, 4.0, 0.3, 0.4, -1.0])
        p = prox_g(self.groups, y, 0.5)
        # Group norms 5, 0.5, 1 against threshold 1.
        np.testing.assert_allclose(p, [2.4, 3.2, 0.0, 0.0, 0.0])
        c = prox_g_conj(self.groups, y)
        np.testing.assert_allclose(c, [1.2, 1.6, 0.3, 0.4, -1.0])
        np.testing.assert_allclose(self.groups.group_norms(c), [2.0, 0.5, 1.0])
        with self.assertRaises(ValueError):
            prox_g(self.groups, np.ones(4), 1.0)

    def test_isotropic_groups(self):
        """Test groups of an axis-major gradient.
        """
        np.testing.assert_array_equal(isotropic_groups(3, 2), [0, 1, 2, 0, 1, 2])
        spec = RegularizerSpec('group-l2', 1.0, isotropic_groups(2, 2))
        self.assertAlmostEqual(regularizer_value(spec, np.array([3.0, 0.0, 4.0, 1.0])), 6.0)

    def test_regularizer_value(self):
        """Test evaluation of g.
        """
        self.assertEqual(regularizer_value(self.l1.with_weight(0.5), np.array([1.0, -3.0])), 2.0)
        self.assertAlmostEqual(regularizer_value(self.groups, np.array([3.0, 4.0, 0.0, 0.0, -1.0])), 12.0)

    def test_dual_feasible(self):
        """Conjugate projections are always dual feasible.
        """
        rng = np.random.default_rng(3)
        for _ in range(20):
            y = 10 * rng.standard_normal(5)
            self.assertTrue(dual_feasible(self.l1, prox_g_conj(self.l1, y)))
            self.assertTrue(dual_feasible(self.groups, prox_g_conj(self.groups, y)))
        self.assertFalse(dual_feasible(self.l1, np.array([1.1])))

    def test_moreau(self):
        """The Moreau decomposition holds for random draws.
        """
        rng = np.random.default_rng(1000)
        worst = 0.0
        for trial in range(1000):
            n = int(rng.integers(1, 12))
            weight = float(rng.exponential())
            if trial % 2:
                spec = RegularizerSpec('l1', weight)
            else:
                spec = RegularizerSpec('group-l2', weight, np.arange(n) % max(1, n // 2))
            y = rng.standard_normal(n) * 10**rng.uniform(-2, 2)
            gamma = 10**rng.uniform(-3, 3)
            worst = max(worst, moreau_residual(spec, y, gamma) / max(1.0, np.linalg.norm(y)))
        self.assertLessEqual(worst, 1e-10)
