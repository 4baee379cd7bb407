# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""
=======
fedpdfp
=======

Federated primal-dual fixed-point optimization with low-precision
quantization and partial client participation.

The package simulates a server and :math:`N` clients that jointly solve

.. math:: \\min_x \\frac{1}{N}\\sum_i f^{(i)}(x) + g(Bx)

where each :math:`f^{(i)}` is a smooth loss held by one client, :math:`g`
is a norm and :math:`B` a linear operator.
"""
#
# Set version string.
#
from ._version import __version__
