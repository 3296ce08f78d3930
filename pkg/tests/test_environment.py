import os

import pytest

from cliffwarm.cache import MemoryCache
from cliffwarm.env import Environment, PRESETS, THREADS_VARIABLE
from cliffwarm.exceptions import EnvironmentError
from cliffwarm.mcts import SearchConfig
from cliffwarm.network import NetConfig
from cliffwarm.trainer import TrainRunConfig

from .helpers import assert_raises_regex


class TestEnvConfig(object):
    """Configuration values through ``env.config``."""

    def setup_method(self):
        self.m = Environment()

    def test_defaults(self):
        assert self.m.config['total_episodes'] == 60000
        assert self.m.config['c_puct'] == 1.0
        assert self.m.config['layers'] == NetConfig().layers
        assert self.m.seeds == [0, 1, 2]

    def test_initial_values_override_defaults(self):
        env = Environment(None, epochs=3, c_puct=1.5)
        assert env.config['epochs'] == 3
        assert env.c_puct == 1.5

    def test_basic(self):
        assert self.m.config.get('foo') is None
        self.m.config['foo'] = 'bar'
        assert self.m.config.get('foo') == 'bar'

    def test_case(self):
        """Keys are case-insensitive."""
        self.m.config['FoO'] = 'bar'
        assert self.m.config.get('FOO') == 'bar'
        assert self.m.config.get('foo') == 'bar'
        assert self.m.config.get('fOO') == 'bar'

    def test_properties(self):
        self.m.total_episodes = 120
        self.m.curriculum = False
        assert self.m.config['TOTAL_EPISODES'] == 120
        assert self.m.train_config().curriculum is False

    def test_no_directory(self):
        assert_raises_regex(EnvironmentError, 'no "directory"', getattr,
                            self.m, 'directory')
        self.m.directory = 'runs'
        assert self.m.directory == os.path.abspath('runs')

    def test_to_dict(self):
        env = Environment('somewhere', seeds=[4])
        data = env.to_dict()
        assert 'directory' not in data
        assert data['seeds'] == [4]


class TestTypedConfigs(object):

    def test_net_config(self):
        env = Environment(layers=2, heads=4)
        config = env.net_config()
        assert isinstance(config, NetConfig)
        assert (config.layers, config.heads) == (2, 4)

    def test_search_config(self):
        env = Environment(c_puct=1.5, simulations=20)
        config = env.search_config()
        assert isinstance(config, SearchConfig)
        assert config.c_puct == 1.5
        assert config.simulations == 20

    def test_train_config_seed(self):
        env = Environment(seed=3)
        assert env.train_config().seed == 3
        assert env.train_config(seed=8).seed == 8
        assert isinstance(env.train_config(), TrainRunConfig)

    def test_invalid_values(self):
        env = Environment(workers=0)
        assert_raises_regex(EnvironmentError, 'workers', env.train_config)
        env = Environment(heads=3)
        assert_raises_regex(EnvironmentError, 'NetConfig', env.net_config)


class TestPresets(object):

    def test_overrides(self):
        env = Environment.from_preset('maxcut_8')
        assert env.config['epochs'] == 12
        assert env.config['batch_size'] == 512
        assert env.config['preset'] == 'maxcut_8'
        # untouched values keep their defaults
        assert env.config['simulations'] == 100

    def test_config_on_top(self):
        env = Environment.from_preset('KNAPSACK_16', 'runs', epochs=2)
        assert env.config['epochs'] == 2
        assert env.config['best_capacity'] == 3000

    def test_unknown(self):
        assert_raises_regex(EnvironmentError, 'unknown preset',
                            Environment.from_preset, 'nope')

    def test_all_valid(self):
        for name in PRESETS:
            env = Environment.from_preset(name)
            env.net_config()
            env.search_config()
            env.train_config()


class TestSpecialProperties(object):
    """Options that are stored as given but come back as objects."""

    def setup_method(self):
        self.m = Environment('.')

    def test_cache(self):
        # True
        self.m.cache = True
        assert isinstance(self.m.config['cache'], type(True))
        assert isinstance(self.m.cache, MemoryCache)
        # every access gives a new cache
        assert self.m.cache is not self.m.cache

        # False value
        self.m.cache = False
        assert self.m.cache is None

        # Capacity
        self.m.cache = 'memory:100'
        assert self.m.cache.capacity == 100
        self.m.cache = 50
        assert self.m.cache.capacity == 50

        # Class assign
        self.m.cache = MemoryCache
        assert isinstance(self.m.cache, MemoryCache)

        # Invalid value
        self.m.cache = 'invalid-value'
        pytest.raises(ValueError, getattr, self.m, 'cache')

    def test_threads(self, monkeypatch):
        monkeypatch.delenv(THREADS_VARIABLE, raising=False)
        self.m.config['workers'] = 7
        assert self.m.threads == 7
        monkeypatch.setenv(THREADS_VARIABLE, '3')
        assert self.m.threads == 3
        self.m.threads = 2
        assert self.m.threads == 2

    def test_invalid_threads(self, monkeypatch):
        monkeypatch.setenv(THREADS_VARIABLE, 'many')
        assert_raises_regex(EnvironmentError, 'invalid thread count',
                            getattr, self.m, 'threads')
        self.m.threads = 0
        assert_raises_regex(EnvironmentError, 'positive', getattr, self.m,
                            'threads')

    def test_seeds(self):
        self.m.seeds = ['1', 2]
        assert self.m.seeds == [1, 2]
