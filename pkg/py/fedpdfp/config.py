# Licensed under a 3-clause BSD style license - see LICENSE.rst
# -*- coding: utf-8 -*-
"""
==============
fedpdfp.config
==============

Experiment configuration files.

A configuration is a YAML document with the sections ``data``,
``problem``, ``federation``, ``run``, ``diagnostics`` and ``imaging``.
Every key is optional; missing keys take the defaults in :data:`defaults`.
The schema is described in :doc:`formats`.

>>> from fedpdfp.config import ExperimentConfig
>>> c = ExperimentConfig.from_dict({'federation': {'N': 4, 'n': 2}})
>>> c.federation['n']
2
"""
import copy
import yaml
from .fedsim import FedConfig, StepSchedule


class ConfigError(ValueError):
    """Raised for invalid configurations; the message names the fields.
    """
    pass


#: Default value of every configuration key.
defaults = {'data': {'train': None,
                     'test': None,
                     'd': None,
                     'n_train': None,
                     'n_test': None,
                     'split_seed': 0,
                     'graph': None,
                     'graph_threshold': 0.7},
            'problem': {'loss': 'logistic',
                        'regularizer': 'l1',
                        'mu1': 1.0e-5,
                        'mu2': 1.0e-5},
            'federation': {'algorithm': 'fpdfp',
                           'N': 20,
                           'n': None,
                           'b': None,
                           'K': 500,
                           's': 'off',
                           'lam': 'auto',
                           'tau': 1,
                           'blocks': 1,
                           'schedule': {'kind': 'constant', 'gamma': 1.0}},
            'run': {'seed': 0,
                    'out': 'metrics.csv',
                    'threads': 1,
                    'log_every': 50},
            'diagnostics': {'reference': None,
                            'reference_rounds': 100000,
                            'reference_gamma': None},
            'imaging': {'size': 32,
                        'noise': 0.02,
                        'mu': [0.005, 0.01, 0.02, 0.04, 0.08],
                        'clients': 4,
                        'K': 300,
                        'gamma': 0.4,
                        'lam': 'auto',
                        'image': 'recovered.fits'},
            }


def _off(value):
    return value is None or value is False or (isinstance(value, str) and value.lower() == 'off')


class ExperimentConfig(object):
    """A validated experiment configuration.

    Every section is available as a :class:`dict` attribute, *e.g.*
    ``config.federation['N']``.
    """

    def __init__(self, sections):
        for name in defaults:
            setattr(self, name, sections[name])
        self.validate()

    @classmethod
    def from_dict(cls, d):
        """Build a configuration from a nested :class:`dict`.

        Raises
        ------
        ConfigError
            For unknown sections or keys and invalid values.
        """
        if d is None:
            d = dict()
        if not isinstance(d, dict):
            raise ConfigError("A configuration must be a mapping of sections.")
        sections = copy.deepcopy(defaults)
        for name, values in d.items():
            if name not in defaults:
                raise ConfigError("Unknown configuration section '{0}'.".format(name))
            if values is None:
                continue
            if not isinstance(values, dict):
                raise ConfigError("Section '{0}' must be a mapping.".format(name))
            for key, value in values.items():
                if key not in defaults[name]:
                    raise ConfigError("Unknown configuration key '{0}.{1}'.".format(name, key))
                sections[name][key] = copy.deepcopy(value)
        return cls(sections)

    def to_dict(self):
        """Nested :class:`dict` such that ``from_dict(to_dict())`` is equal to this object.
        """
        return copy.deepcopy(dict((name, getattr(self, name)) for name in defaults))

    def __eq__(self, other):
        if not isinstance(other, ExperimentConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return "ExperimentConfig(algorithm='{0}', N={1}, K={2}, seed={3})".format(
            self.federation['algorithm'], self.federation['N'], self.federation['K'], self.run['seed'])

    def validate(self):
        """Check every section, normalizing values in place.
        """
        fed = self.federation
        if _off(fed['s']):
            fed['s'] = 'off'
        lam = fed['lam']
        if not (lam == 'auto' or (isinstance(lam, (int, float)) and not isinstance(lam, bool) and lam > 0)):
            raise ConfigError("federation.lam must be 'auto' or a positive number, got {0!r}.".format(lam))
        for key in ('N', 'n', 'b', 'K', 'tau'):
            if fed[key] is not None and (isinstance(fed[key], bool) or not isinstance(fed[key], int)):
                raise ConfigError("federation.{0} must be an integer, got {1!r}.".format(key, fed[key]))
        if fed['n'] is not None and fed['N'] is not None and fed['n'] > fed['N']:
            raise ConfigError("federation.n = {0:d} exceeds federation.N = {1:d}.".format(fed['n'], fed['N']))
        self.fed_config()
        if self.problem['loss'] not in ('logistic', 'least-squares'):
            raise ConfigError("problem.loss must be 'logistic' or 'least-squares', got {0!r}.".format(self.problem['loss']))
        if self.problem['regularizer'] not in ('l1', 'group-l2'):
            raise ConfigError("problem.regularizer must be 'l1' or 'group-l2', got {0!r}.".format(self.problem['regularizer']))
        for key in ('mu1', 'mu2'):
            if not isinstance(self.problem[key], (int, float)) or self.problem[key] < 0:
                raise ConfigError("problem.{0} must be a nonnegative number.".format(key))
        threshold = self.data['graph_threshold']
        if not isinstance(threshold, (int, float)) or not 0 < threshold <= 1:
            raise ConfigError("data.graph_threshold must be in (0, 1].")
        for key in ('n_train', 'n_test'):
            if self.data[key] is not None and (not isinstance(self.data[key], int) or self.data[key] < 0):
                raise ConfigError("data.{0} must be a nonnegative integer.".format(key))
        if not isinstance(self.run['threads'], int) or self.run['threads'] < 1:
            raise ConfigError("run.threads must be a positive integer.")
        if not isinstance(self.run['seed'], int) or self.run['seed'] < 0:
            raise ConfigError("run.seed must be a nonnegative integer.")
        imaging = self.imaging
        if not isinstance(imaging['size'], int) or not 2 <= imaging['size'] <= 128:
            raise ConfigError("imaging.size must be an integer in [2, 128].")
        if not isinstance(imaging['noise'], (int, float)) or imaging['noise'] < 0:
            raise ConfigError("imaging.noise must be a nonnegative variance.")
        mu = imaging['mu'] if isinstance(imaging['mu'], list) else [imaging['mu']]
        if len(mu) == 0 or any(not isinstance(m, (int, float)) or m < 0 for m in mu):
            raise ConfigError("imaging.mu must be a nonnegative number or a nonempty list of them.")
        for key in ('clients', 'K'):
            if isinstance(imaging[key], bool) or not isinstance(imaging[key], int) or imaging[key] < 1:
                raise ConfigError("imaging.{0} must be a positive integer.".format(key))
        if not isinstance(imaging['gamma'], (int, float)) or not imaging['gamma'] > 0:
            raise ConfigError("imaging.gamma must be positive.")
        if not (imaging['lam'] == 'auto' or (isinstance(imaging['lam'], (int, float)) and imaging['lam'] > 0)):
            raise ConfigError("imaging.lam must be 'auto' or a positive number.")

    def schedule(self):
        """The :class:`~fedpdfp.fedsim.StepSchedule` of the run.
        """
        s = self.federation['schedule']
        if not isinstance(s, dict):
            raise ConfigError("federation.schedule must be a mapping.")
        unknown = set(s) - {'kind', 'gamma', 'd1', 'offset'}
        if unknown:
            raise ConfigError("Unknown keys in federation.schedule: {0}.".format(sorted(unknown)))
        try:
            return StepSchedule(s.get('kind', 'constant'), s.get('gamma'), s.get('d1'), s.get('offset', 0))
        except (TypeError, ValueError) as e:
            raise ConfigError("federation.schedule: {0}".format(e))

    def fed_config(self, lam=None, N=None):
        """The :class:`~fedpdfp.fedsim.FedConfig` of the run.

        Parameters
        ----------
        lam : :class:`float`, optional
            Value to use when ``federation.lam`` is ``'auto'``.
        N : :class:`int`, optional
            Override of the number of clients.
        """
        fed = self.federation
        if fed['lam'] != 'auto':
            lam = fed['lam']
        try:
            return FedConfig(fed['N'] if N is None else N, n=fed['n'], b=fed['b'], K=fed['K'],
                             s=None if fed['s'] == 'off' else fed['s'], lam=lam,
                             schedule=self.schedule(), tau=fed['tau'], algorithm=fed['algorithm'],
                             seed=self.run['seed'], blocks=fed['blocks'], threads=self.run['threads'],
                             log_every=self.run['log_every'])
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError("federation: {0}".format(e))

    def override(self, seed=None, out=None, threads=None):
        """Apply command-line overrides and revalidate.
        """
        if seed is not None:
            self.run['seed'] = int(seed)
        if out is not None:
            self.run['out'] = out
        if threads is not None:
            self.run['threads'] = int(threads)
        self.validate()


def load_config(filename):
    """Read a YAML configuration file.

    Raises
    ------
    ConfigError
        If the file cannot be read, is not valid YAML or does not validate.
    """
    try:
        with open(filename) as f:
            d = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError("Cannot read configuration {0}: {1}".format(filename, e.strerror))
    except yaml.YAMLError as e:
        raise ConfigError("{0} is not valid YAML: {1}".format(filename, e))
    return ExperimentConfig.from_dict(d)


def dump_config(config, filename=None):
    """Write `config` as YAML, or return the text if `filename` is ``None``.
    """
    text = yaml.safe_dump(config.to_dict(), default_flow_style=False, sort_keys=True)
    if filename is None:
        return text
    with open(filename, 'w') as f:
        f.write(text)
    return text
