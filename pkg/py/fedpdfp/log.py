# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""
===========
fedpdfp.log
===========

Pre-configured logging for simulations and experiment scripts.

The level is chosen, in order of precedence, by the `level` argument of
:func:`~fedpdfp.log.get_logger`, by the environment variable
:envvar:`FEDPDFP_LOGLEVEL`, or defaults to INFO.

Examples
--------

>>> from fedpdfp.log import log
>>> log.info('Round %d of %d.', 10, 500)

Temporarily raise the verbosity of a noisy loop:

>>> from fedpdfp.log import get_logger, FedLogContext, DEBUG
>>> log = get_logger()
>>> with FedLogContext(log, DEBUG):
...     log.debug("Per-client message sizes will be logged.")
"""
import os
import sys
import logging
from warnings import warn


_fedpdfp_log_root = dict()
_good_levels = {'DEBUG': logging.DEBUG,
                'INFO': logging.INFO,
                'WARNING': logging.WARNING,
                'ERROR': logging.ERROR,
                'CRITICAL': logging.CRITICAL,
                logging.DEBUG: logging.DEBUG,
                logging.INFO: logging.INFO,
                logging.WARNING: logging.WARNING,
                logging.ERROR: logging.ERROR,
                logging.CRITICAL: logging.CRITICAL,
                }

DEBUG = logging.DEBUG
INFO = logging.INFO
WARNING = logging.WARNING
ERROR = logging.ERROR
CRITICAL = logging.CRITICAL


class FedLogWarning(UserWarning):
    """Warnings related to misconfiguration of the logging object.
    """
    pass


class FedLogContext(object):
    """Context manager that temporarily changes the level of a logger.

    Parameters
    ----------
    logger : :class:`logging.Logger`
        Logging object.
    level : :class:`int`, optional
        The temporary level.  If not set, the context does nothing
        except warn about it.
    """
    def __init__(self, logger, level=None):
        self.logger = logger
        self.level = level
        self.old_level = None

    def __enter__(self):
        if self.level is None:
            warn("This context manager will not actually do anything!",
                 FedLogWarning)
        else:
            self.old_level = self.logger.level
            self.logger.setLevel(self.level)
        return self.logger

    def __exit__(self, et, ev, tb):
        if self.level is not None:
            self.logger.setLevel(self.old_level)


def _configure_root_logger(timestamp=False, delimiter=':'):
    """Create (once) the handler-carrying parent logger for a given format.

    Parameters
    ----------
    timestamp : :class:`bool`, optional
        If ``True``, add a timestamp to the log message.
    delimiter : :class:`str`, optional
        Separator between fields of the log message.

    Returns
    -------
    :class:`str`
        Name of the parent logger.
    """
    root_name = "fedpdfp.log.dlm" + ''.join(map(str, map(ord, delimiter)))
    if timestamp:
        root_name += 'timestamp'
    if root_name not in _fedpdfp_log_root:
        ch = logging.StreamHandler(sys.stdout)
        fmtfields = ['%(levelname)s', '%(filename)s', '%(lineno)s', '%(funcName)s']
        if timestamp:
            fmtfields.append('%(asctime)s')
        fmtfields.append(' %(message)s')
        ch.setFormatter(logging.Formatter(delimiter.join(fmtfields),
                                          datefmt='%Y-%m-%dT%H:%M:%S'))
        root = logging.getLogger(root_name)
        root.addHandler(ch)
        root.setLevel(logging.INFO)
        root.propagate = False
        _fedpdfp_log_root[root_name] = root
    return root_name


def get_logger(level=None, timestamp=False, delimiter=':'):
    """Return the package logger.

    Parameters
    ----------
    level : :class:`int` or :class:`str`, optional
        Logging level (default ``INFO``, or :envvar:`FEDPDFP_LOGLEVEL`).
    timestamp : :class:`bool`, optional
        If ``True``, add a timestamp to the log message.
    delimiter : :class:`str`, optional
        Separator between fields of the log message (default ``:``).

    Returns
    -------
    :class:`logging.Logger`
        A configured logging object.
    """
    root_name = _configure_root_logger(timestamp=timestamp, delimiter=delimiter)
    if level is None:
        ul = os.environ.get("FEDPDFP_LOGLEVEL", logging.INFO)
    else:
        ul = level
    if isinstance(ul, str):
        ul = ul.upper()
    try:
        gl = _good_levels[ul]
    except KeyError:
        warn("Invalid level='{0}' ignored.  Setting INFO.".format(ul),
             FedLogWarning)
        gl = logging.INFO
    log = logging.getLogger(root_name + '.' + logging.getLevelName(gl).lower())
    log.setLevel(gl)
    return log


log = get_logger()
