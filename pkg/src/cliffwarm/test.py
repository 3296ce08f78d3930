"""Helpers for testing cliffwarm.

This is included in the package because it is useful for testing code
built on top of cliffwarm, like custom problem types.
"""

import json
import tempfile
import shutil
import os
from os import path

from cliffwarm.env import Environment
from cliffwarm.problems import get_problem_class


__all__ = ('TempDirHelper', 'TempRunHelper', 'TINY_CONFIG')


# A network and a budget small enough for a run to finish in seconds.
TINY_CONFIG = {
    'layers': 1, 'heads': 2, 'model_dim': 32, 'ff_dim': 64,
    'state_embed_dim': 8, 'pos_embed_dim': 24, 'context_len': 16,
    'ham_mlp': [32, 32], 'policy_head': [32, 24], 'value_head': [32, 1],
    'max_qubits': 8,
    'total_episodes': 24, 'workers': 2, 'episodes_per_round': 6,
    'warmup_simulations': 4, 'simulations': 6, 'eval_simulations': 6,
    'epochs': 2, 'batch_size': 16, 'replay_start': 6, 'mix_start': 12,
    'eval_period': 2, 'checkpoint_period': 2,
    'seeds': [0, 1], 'ga_population': 10, 'ga_threads': 2,
    'ga_stall_limit': 5,
}


class TempDirHelper(object):
    """Base-class for tests that write files: every test gets a fresh
    temporary directory, removed again afterwards.
    """

    def setup_method(self):
        self._tempdir_created = tempfile.mkdtemp()

    def teardown_method(self):
        shutil.rmtree(self._tempdir_created)

    @property
    def tempdir(self):
        return self._tempdir_created

    def create_files(self, files):
        """Write ``{name: text}`` into the temporary directory, creating
        subdirectories as needed."""
        for name, data in files.items():
            dirs = path.dirname(self.path(name))
            if not path.exists(dirs):
                os.makedirs(dirs)
            with open(self.path(name), 'w', encoding='utf-8') as f:
                f.write(data)

    def exists(self, name):
        return path.exists(self.path(name))

    def get_json(self, name):
        with open(self.path(name)) as f:
            return json.load(f)

    def path(self, name):
        return path.join(self._tempdir_created, name)


class TempRunHelper(TempDirHelper):
    """Base-class for tests which provides an environment with a tiny
    network and budget, based in a temporary directory.
    """

    default_config = TINY_CONFIG

    def setup_method(self):
        TempDirHelper.setup_method(self)
        self.env = self._create_environment()

    def _create_environment(self):
        return Environment(self._tempdir_created, **self.default_config)

    def make_instance(self, name='instance.json', type='maxcut', n=2,
                      seed=0, **kwargs):
        """Write an instance file and return ``(path, problem, E_opt)``."""
        problem = get_problem_class(type).generate(n, seed=seed, **kwargs)
        e_opt = problem.exact_ground_energy()
        with open(self.path(name), 'w') as f:
            json.dump(problem.to_dict(e_opt), f)
        return self.path(name), problem, e_opt
