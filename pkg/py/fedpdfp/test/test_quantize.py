# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""Test fedpdfp.quantize.
"""
import unittest
import numpy as np
from ..quantize import (QuantizedVector, Quantizer, random_stream, quantize, dequantize,
                        elias_gamma_length, elias_gamma_encode, elias_gamma_decode,
                        encoded_bits, pack, unpack, empirical_moments, variance_bound)


class TestQuantize(unittest.TestCase):
    """Test fedpdfp.quantize
    """

    @classmethod
    def setUpClass(cls):
        cls.x = np.array([0.5, -1.0, 0.0, 2.0, -0.25, 0.0, 0.0, 1.5])

    def test_random_stream(self):
        """Streams depend only on their key.
        """
        a = random_stream(7, 3, 2, 'batch').random(5)
        random_stream(7, 3, 1, 'batch').random(100)
        b = random_stream(7, 3, 2, 'batch').random(5)
        np.testing.assert_array_equal(a, b)
        for other in (random_stream(8, 3, 2, 'batch'), random_stream(7, 4, 2, 'batch'),
                      random_stream(7, 3, 3, 'batch'), random_stream(7, 3, 2, 'quantize-x')):
            self.assertFalse(np.array_equal(a, other.random(5)))
        with self.assertRaises(KeyError):
            random_stream(7, 3, 2, 'unknown')

    def test_quantize_structure(self):
        """Test levels, signs and decoding of a quantized vector.
        """
        q = quantize(self.x, 4, random_stream(0))
        self.assertEqual(q.dim, self.x.size)
        self.assertAlmostEqual(q.norm, np.linalg.norm(self.x))
        self.assertTrue(np.all((q.levels >= 0) & (q.levels <= 4)))
        self.assertTrue(np.all(q.signs[q.levels == 0] == 0))
        nz = q.levels > 0
        np.testing.assert_array_equal(q.signs[nz], np.sign(self.x[nz]))
        np.testing.assert_array_equal(q.levels[self.x == 0], 0)
        # Every level is one of the two grid points around the ratio.
        ratio = 4 * np.abs(self.x) / q.norm
        self.assertTrue(np.all(np.abs(q.levels - ratio) < 1))
        np.testing.assert_allclose(dequantize(q), q.norm * q.signs * q.levels / 4)

    def test_quantize_edge_cases(self):
        """Test the zero vector, a basis vector and many levels.
        """
        q = quantize(np.zeros(5), 3, 1)
        self.assertEqual(q.norm, 0.0)
        np.testing.assert_array_equal(dequantize(q), np.zeros(5))
        e = np.array([0.0, -3.0, 0.0])
        for seed in range(5):
            q = quantize(e, 2, seed)
            np.testing.assert_array_equal(q.levels, [0, 2, 0])
            np.testing.assert_array_equal(dequantize(q), e)
        x = np.random.default_rng(1).standard_normal(50)
        q = quantize(x, 2**40, 2)
        np.testing.assert_allclose(dequantize(q), x, atol=1e-10 * np.linalg.norm(x))
        with self.assertRaises(ValueError):
            quantize(x, 0, 2)
        with self.assertRaises(ValueError):
            QuantizedVector(1.0, [1, 1], [1, 5], 4)

    def test_unbiased(self):
        """Quantization is unbiased with variance below the bound.
        """
        rng = np.random.default_rng(42)
        for d in (4, 64, 256):
            x = rng.standard_normal(d)
            for s in (1, 4, 16):
                bias, mse, stderr = empirical_moments(x, s, 100000, seed=d + s, full=True)
                # The standard error is exact, so coordinates with a rare
                # upper level are judged against their true spread.
                slack = 1e-12 * np.linalg.norm(x)
                self.assertTrue(np.all(np.abs(bias) <= 5 * stderr + slack),
                                "d={0:d}, s={1:d}".format(d, s))
                self.assertLessEqual(mse, 1.05 * variance_bound(x, s))

    def test_standard_error(self):
        """Standard errors follow the level probabilities.
        """
        x = np.array([3.0, 4.0, 0.0])
        _, _, stderr = empirical_moments(x, 1, 400, full=True)
        # Ratios 0.6 and 0.8 of the norm 5.
        np.testing.assert_allclose(stderr, 5 * np.sqrt([0.24 / 400, 0.16 / 400, 0.0]))
        _, _, stderr = empirical_moments([0.0, -2.0], 3, 10, full=True)
        np.testing.assert_array_equal(stderr, [0.0, 0.0])

    def test_large_entries(self):
        """Large finite entries do not overflow the norm.
        """
        x = np.array([1e200, 2e200])
        q = quantize(x, 4, 0)
        self.assertAlmostEqual(q.norm / 1e200, np.sqrt(5.0))
        y = dequantize(q)
        self.assertTrue(np.all(np.isfinite(y)))
        self.assertTrue(np.all(np.abs(y - x) <= 1.000001 * q.norm / 4))
        tiny = np.array([3e-310, -4e-310])
        self.assertTrue(np.all(np.isfinite(dequantize(quantize(tiny, 4, 0)))))

    def test_elias_gamma(self):
        """Test Elias-gamma codes.
        """
        self.assertEqual(elias_gamma_encode(1), '1')
        self.assertEqual(elias_gamma_encode(2), '010')
        self.assertEqual(elias_gamma_encode(5), '00101')
        self.assertEqual(elias_gamma_encode(8), '0001000')
        for k in (1, 2, 3, 7, 8, 1000, 2**20 + 1):
            self.assertEqual(len(elias_gamma_encode(k)), elias_gamma_length(k))
        np.testing.assert_array_equal(elias_gamma_length(np.array([1, 2, 4, 7, 8])), [1, 3, 5, 5, 7])
        bits = elias_gamma_encode(9) + elias_gamma_encode(1) + elias_gamma_encode(4)
        k, position = elias_gamma_decode(bits)
        self.assertEqual(k, 9)
        k, position = elias_gamma_decode(bits, position)
        self.assertEqual(k, 1)
        self.assertEqual(elias_gamma_decode(bits, position), (4, len(bits)))
        with self.assertRaises(ValueError):
            elias_gamma_decode('0001')
        with self.assertRaises(ValueError):
            elias_gamma_encode(0)
        with self.assertRaises(ValueError):
            elias_gamma_length(np.array([0, 1]))

    def test_encoded_bits(self):
        """Test the bit count of a hand-computed message.
        """
        q = QuantizedVector(2.0, [0, 1, 0, 0, -1], [0, 3, 0, 0, 1], 4)
        # Runs 1, 2, 0: codes of 2, 3, 1 -> 3 + 3 + 1.  Levels 3, 1 -> 3 + 1.  Signs 2.
        self.assertEqual(encoded_bits(q), 32 + 7 + 4 + 2)
        zero = QuantizedVector(0.0, np.zeros(10), np.zeros(10), 4)
        self.assertEqual(encoded_bits(zero), 32 + elias_gamma_length(11))

    def test_pack(self):
        """Test the packed message layout.
        """
        q = QuantizedVector(2.0, [0, 1, 0, 0, -1], [0, 3, 0, 0, 1], 4)
        data = pack(q)
        self.assertEqual(len(data), (encoded_bits(q) + 7) // 8)
        self.assertEqual(data[:4], np.array([2.0], dtype='>f4').tobytes())
        self.assertEqual(unpack(data, 5, 4), q)
        rng = random_stream(5)
        x = rng.standard_normal(40) * (rng.random(40) < 0.3)
        q = quantize(x, 3, rng)
        p = unpack(pack(q), 40, 3)
        self.assertEqual(p.norm, float(np.float32(q.norm)))
        np.testing.assert_array_equal(p.levels, q.levels)
        np.testing.assert_array_equal(p.signs, q.signs)
        with self.assertRaises(ValueError):
            unpack(data, 3, 4)
        with self.assertRaises(ValueError):
            unpack(data[:4], 5, 4)

    def test_quantizer_off(self):
        """Pass-through compression.
        """
        Q = Quantizer()
        self.assertTrue(Q.off)
        payload = Q.compress(self.x, None)
        np.testing.assert_array_equal(Q.decompress(payload), self.x)
        self.assertEqual(Q.bits(payload), 32 * self.x.size)
        self.assertIn('off', repr(Q))

    def test_quantizer_blocks(self):
        """Block quantization uses one norm per block.
        """
        self.assertEqual(Quantizer(4, 3).boundaries(10), [(0, 4), (4, 7), (7, 10)])
        self.assertEqual(Quantizer(4, 20).boundaries(3), [(0, 1), (1, 2), (2, 3)])
        self.assertEqual(Quantizer(4, [2, 6]).boundaries(8), [(0, 2), (2, 8)])
        self.assertEqual(Quantizer(4, [1, 3]).boundaries(8), [(0, 1), (1, 4), (4, 5), (5, 8)])
        with self.assertRaises(ValueError):
            Quantizer(4, [2, 5]).boundaries(8)
        with self.assertRaises(ValueError):
            Quantizer(4, [0, 8]).boundaries(8)
        with self.assertRaises(ValueError):
            Quantizer(4, []).boundaries(8)
        with self.assertRaises(ValueError):
            Quantizer(0)
        Q = Quantizer(4, [2, 6])
        payload = Q.compress(self.x, random_stream(1))
        self.assertEqual(len(payload), 2)
        self.assertAlmostEqual(payload[0].norm, np.linalg.norm(self.x[:2]))
        self.assertEqual(Q.bits(payload), encoded_bits(payload[0]) + encoded_bits(payload[1]))
        self.assertEqual(Q.decompress(payload).size, self.x.size)
        again = Q.compress(self.x, random_stream(1))
        np.testing.assert_array_equal(Q.decompress(again), Q.decompress(payload))
