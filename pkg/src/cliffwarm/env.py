import os
from os import path

from .cache import get_cache
from .exceptions import EnvironmentError
from .mcts import SearchConfig
from .network import NetConfig
from .trainer import TrainRunConfig


__all__ = ('Environment', 'ConfigStorage', 'DictConfigStorage',
           'env_options', 'PRESETS', 'THREADS_VARIABLE')


THREADS_VARIABLE = 'CLIFFWARM_THREADS'


class ConfigStorage(object):
    """This is the backend which :class:`Environment` uses to store
    its configuration values.

    Only :meth:`__getitem__`, :meth:`__setitem__`, :meth:`__delitem__` and
    :meth:`__contains__` need to be implemented by subclasses.

    One rule: The default storage is case-insensitive, and custom
    storages should maintain those semantics.
    """

    def __init__(self, env):
        self.env = env

    def get(self, key, default=None):
        try:
            return self.__getitem__(key)
        except KeyError:
            return default

    def update(self, d):
        for key in d:
            self.__setitem__(key, d[key])

    def setdefault(self, key, value):
        if key not in self:
            self.__setitem__(key, value)
            return value
        return self.__getitem__(key)

    def __contains__(self, key):
        raise NotImplementedError()

    def __getitem__(self, key):
        raise NotImplementedError()

    def __setitem__(self, key, value):
        raise NotImplementedError()

    def __delitem__(self, key):
        raise NotImplementedError()


class DictConfigStorage(ConfigStorage):
    """Using a lower-case dict for configuration values.
    """
    def __init__(self, *a, **kw):
        self._dict = {}
        ConfigStorage.__init__(self, *a, **kw)
    def __contains__(self, key):
        return self._dict.__contains__(key.lower())
    def __getitem__(self, key):
        return self._dict.__getitem__(key.lower())
    def __setitem__(self, key, value):
        self._dict.__setitem__(key.lower(), value)
    def __delitem__(self, key):
        self._dict.__delitem__(key.lower())
    def keys(self):
        return self._dict.keys()


def _fields(clazz):
    return tuple(clazz.__dataclass_fields__)


NET_OPTIONS = _fields(NetConfig)
# ``simulations`` of a search comes from the training schedule
SEARCH_OPTIONS = tuple(f for f in _fields(SearchConfig) if f != 'simulations')
TRAIN_OPTIONS = _fields(TrainRunConfig)
RUN_OPTIONS = ('directory', 'cache', 'threads', 'seeds', 'hea_reps',
               'ga_population', 'ga_threads', 'ga_stall_limit')

env_options = NET_OPTIONS + SEARCH_OPTIONS + TRAIN_OPTIONS + RUN_OPTIONS


_MAXCUT_8 = {'epochs': 12, 'batch_size': 512}
_LARGE_BUFFERS = {'replay_capacity': 100000, 'best_capacity': 2000}

PRESETS = {
    'default': {},
    'maxcut_8': _MAXCUT_8,
    'maxcut_12': {'batch_size': 512},
    'maxcut_20': dict(_LARGE_BUFFERS, warmup_simulations=30, simulations=50,
                      eval_simulations=50, total_episodes=30000, epochs=24),
    'knapsack_4': {'batch_size': 512},
    'knapsack_9': dict(_LARGE_BUFFERS, epochs=24),
    'knapsack_12': dict(_LARGE_BUFFERS, total_episodes=30000, epochs=24),
    'knapsack_16': dict(_LARGE_BUFFERS, warmup_simulations=30,
                        simulations=50, eval_simulations=50,
                        total_episodes=30000, epochs=24, best_capacity=3000),
    'ising_0.5': dict(_MAXCUT_8, epochs=12, value_coef=1.0),
    'ising_1.0': dict(_MAXCUT_8, epochs=16, value_coef=2.0),
    'ising_2.0': dict(_MAXCUT_8, epochs=24, value_coef=2.0),
    'xxz_0.5': dict(_MAXCUT_8, epochs=16, value_coef=1.0),
    'xxz_1.0': dict(_MAXCUT_8, epochs=12, value_coef=1.0),
    'xxz_2.0': dict(_MAXCUT_8, epochs=16, value_coef=1.0),
    'desk': {'warmup_simulations': 25, 'simulations': 50,
             'eval_simulations': 50, 'batch_size': 256,
             'total_episodes': 2000},
}


class Environment(object):
    """Owns the configuration of a run: every hyperparameter of the
    network, the search and the training schedule, plus where results
    go.

    Values can be given as keyword arguments, and changed later through
    :attr:`config` or the attribute properties below. Keys are
    case-insensitive.
    """

    config_storage_class = DictConfigStorage

    def __init__(self, directory=None, **config):
        self._config = self.config_storage_class(self)

        for clazz, names in ((NetConfig, NET_OPTIONS),
                             (SearchConfig, SEARCH_OPTIONS),
                             (TrainRunConfig, TRAIN_OPTIONS)):
            defaults = clazz()
            for name in names:
                self.config.setdefault(name, getattr(defaults, name))
        self.config.setdefault('cache', True)
        self.config.setdefault('threads', None)
        self.config.setdefault('seeds', [0, 1, 2])
        self.config.setdefault('hea_reps', 1)
        self.config.setdefault('ga_population', 100)
        self.config.setdefault('ga_threads', 8)
        self.config.setdefault('ga_stall_limit', 100)

        self.config.update(config)
        if directory is not None:
            self.directory = directory

    @classmethod
    def from_preset(cls, name, directory=None, **config):
        """An environment with the overrides of preset ``name`` applied,
        then ``config`` on top."""
        try:
            preset = PRESETS[name.lower()]
        except KeyError:
            raise EnvironmentError('unknown preset "%s" (known: %s)' % (
                name, ', '.join(sorted(PRESETS))))
        values = dict(preset)
        values.update(config)
        env = cls(directory, **values)
        env.config['preset'] = name.lower()
        return env

    @property
    def config(self):
        """Key-value configuration. Keys are case-insensitive.
        """
        # read-only, a plain dict would lose the case-insensitive keys
        return self._config

    def _set_directory(self, directory):
        self._storage['directory'] = directory
    def _get_directory(self):
        try:
            return path.abspath(self._storage['directory'])
        except KeyError:
            raise EnvironmentError(
                'The environment has no "directory" configured')
    directory = property(_get_directory, _set_directory, doc=
    """The base directory run directories are created in.
    """)

    def _set_cache(self, enable):
        self._storage['cache'] = enable
    def _get_cache(self):
        return get_cache(self._storage['cache'])
    cache = property(_get_cache, _set_cache, doc=
    """Controls the evaluation cache. Every access gives a fresh cache,
    so that runs do not share cached rewards.

    Possible values are:

      ``True`` (default)
          An in-memory cache with room for two million configurations.

      ``False``
          Do not cache. Every simulation then counts against the
          evaluation budget, even repeated ones.

      *an integer*, ``"memory:<capacity>"``
          An in-memory cache of the given capacity.
    """)

    def _set_threads(self, threads):
        self._storage['threads'] = threads
    def _get_threads(self):
        threads = self._storage['threads']
        if threads is None:
            threads = os.environ.get(THREADS_VARIABLE)
        if threads is None:
            return self._storage['workers']
        try:
            threads = int(threads)
        except ValueError:
            raise EnvironmentError('invalid thread count: %r' % threads)
        if threads < 1:
            raise EnvironmentError('thread count must be positive')
        return threads
    threads = property(_get_threads, _set_threads, doc=
    """Number of threads that play episodes. The number of episodes
    per round does not depend on it.

    If not set, the ``CLIFFWARM_THREADS`` environment variable is used,
    and failing that the ``workers`` option.
    """)

    def _set_seeds(self, seeds):
        self._storage['seeds'] = seeds
    def _get_seeds(self):
        return [int(s) for s in self._storage['seeds']]
    seeds = property(_get_seeds, _set_seeds, doc=
    """Seeds to train with; the ``train`` command runs one training
    per seed.
    """)

    def _set_c_puct(self, value):
        self._storage['c_puct'] = value
    def _get_c_puct(self):
        return self._storage['c_puct']
    c_puct = property(_get_c_puct, _set_c_puct, doc=
    """Exploration constant of the search. Sparse reward landscapes
    may need a larger value, like 1.5.
    """)

    def _set_total_episodes(self, value):
        self._storage['total_episodes'] = value
    def _get_total_episodes(self):
        return self._storage['total_episodes']
    total_episodes = property(_get_total_episodes, _set_total_episodes)

    def _set_curriculum(self, value):
        self._storage['curriculum'] = value
    def _get_curriculum(self):
        return self._storage['curriculum']
    curriculum = property(_get_curriculum, _set_curriculum, doc=
    """Enable the incremental horizon curriculum (default). If disabled,
    every episode fills all prefix slots.
    """)

    @property
    def _storage(self):
        return self._config

    def _typed(self, clazz, names, **extra):
        values = dict((name, self.config[name]) for name in names)
        values.update(extra)
        try:
            return clazz(**values)
        except (TypeError, ValueError) as e:
            raise EnvironmentError('invalid %s: %s' % (clazz.__name__, e))

    def net_config(self):
        return self._typed(NetConfig, NET_OPTIONS)

    def search_config(self):
        return self._typed(SearchConfig, SEARCH_OPTIONS,
                           simulations=self.config['simulations'])

    def train_config(self, seed=None):
        extra = {} if seed is None else {'seed': seed}
        return self._typed(TrainRunConfig, [
            n for n in TRAIN_OPTIONS if n not in extra], **extra)

    def to_dict(self):
        return dict((k, self.config[k]) for k in sorted(self.config.keys())
                    if k != 'directory')
