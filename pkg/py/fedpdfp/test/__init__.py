# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""
fedpdfp.test
============

Unit tests of fedpdfp, collected by pytest; :func:`runtests` runs them
with the standard unittest runner.
"""
import unittest


def fedpdfp_test_suite():
    """Returns unittest.TestSuite of fedpdfp tests.
    """
    from os.path import dirname
    py_dir = dirname(dirname(__file__))
    return unittest.defaultTestLoader.discover(py_dir,
                                               top_level_dir=dirname(py_dir))


def runtests():
    """Run all tests in fedpdfp.test.test_*.
    """
    unittest.TextTestRunner(verbosity=2).run(fedpdfp_test_suite())


if __name__ == "__main__":
    runtests()
