"""The decision process the search runs on: a state is the sequence of
gates placed in the first prefix slots, an action places the next gate,
and the reward of a finished sequence is the negative energy of the
circuit it produces.
"""

import math
import logging

import numpy as np

from .cache import EvaluationCounter
from .clifford import N_GATES, IDENTITY, hamiltonian_energy
from .exceptions import ArgumentError


__all__ = ('EpisodeState', 'RewardNormalizer', 'CircuitEvaluator',
           'normalize_reward')


log = logging.getLogger(__name__)


class EpisodeState(object):
    """``prefix`` of gate ids, at most ``horizon`` long; the episode is
    over once the prefix reaches the horizon."""

    __slots__ = ('prefix', 'horizon')

    def __init__(self, horizon, prefix=()):
        self.prefix = tuple(int(g) for g in prefix)
        self.horizon = int(horizon)
        if len(self.prefix) > self.horizon:
            raise ArgumentError('prefix of length %d exceeds horizon %d' % (
                len(self.prefix), self.horizon))

    def __len__(self):
        return len(self.prefix)

    @property
    def is_terminal(self):
        return len(self.prefix) == self.horizon

    def step(self, action):
        if self.is_terminal:
            raise ArgumentError('episode is already over')
        if not 0 <= action < N_GATES:
            raise ArgumentError('action %d is not a gate id' % action)
        return EpisodeState(self.horizon, self.prefix + (int(action),))

    def __eq__(self, other):
        return isinstance(other, EpisodeState) and \
            self.prefix == other.prefix and self.horizon == other.horizon

    def __hash__(self):
        return hash((self.prefix, self.horizon))

    def __repr__(self):
        return '<EpisodeState %d/%d %s>' % (
            len(self.prefix), self.horizon, list(self.prefix))


class RewardNormalizer(object):
    """Running mean and standard deviation of raw rewards (Welford), and
    the mapping ``(R - max(mu, 0)) / (sigma + eps) - 1`` clipped to
    ``[-1, 1]``.

    The ``-1`` offset means a zero reward normalizes to ``-1`` whenever
    the running mean is not positive.
    """

    def __init__(self, eps=1e-8):
        self.eps = eps
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0
        self.frozen = False

    @classmethod
    def from_stats(cls, mean, std, count=1, eps=1e-8):
        norm = cls(eps)
        norm.count = count
        norm.mean = float(mean)
        norm._m2 = float(std) ** 2 * count
        return norm

    @property
    def std(self):
        if self.count == 0:
            return 0.0
        return math.sqrt(self._m2 / self.count)

    def update(self, reward):
        if self.frozen:
            raise ArgumentError('cannot update a frozen normalizer')
        reward = float(reward)
        self.count += 1
        delta = reward - self.mean
        self.mean += delta / self.count
        self._m2 += delta * (reward - self.mean)

    def normalize(self, reward):
        value = (reward - max(self.mean, 0.0)) / (self.std + self.eps) - 1.0
        return float(np.clip(value, -1.0, 1.0))

    def snapshot(self):
        """A frozen copy, for use while the live statistics move on."""
        copy = RewardNormalizer(self.eps)
        copy.load_state_dict(self.state_dict())
        copy.frozen = True
        return copy

    def state_dict(self):
        return {'count': self.count, 'mean': self.mean, 'm2': self._m2,
                'eps': self.eps}

    def load_state_dict(self, state):
        self.count = state['count']
        self.mean = state['mean']
        self._m2 = state['m2']
        self.eps = state['eps']

    def __repr__(self):
        return '<RewardNormalizer n=%d mean=%.4g std=%.4g>' % (
            self.count, self.mean, self.std)


def normalize_reward(normalizer, reward):
    return normalizer.normalize(reward)


class CircuitEvaluator(object):
    """Evaluates prefix configurations of one skeleton against one
    Hamiltonian.

    Unassigned slots count as the identity, so every prefix is padded to
    the full slot count before it is looked up in ``cache``. Only
    configurations that are actually simulated and were not in the cache
    yet are counted.
    """

    def __init__(self, skeleton, hamiltonian, cache=None, counter=None):
        if skeleton.n_qubits != hamiltonian.n_qubits:
            raise ArgumentError('skeleton has %d qubits, Hamiltonian %d' % (
                skeleton.n_qubits, hamiltonian.n_qubits))
        self.skeleton = skeleton
        self.hamiltonian = hamiltonian
        self.cache = cache
        self.counter = counter if counter is not None else EvaluationCounter()

    @property
    def n_slots(self):
        return self.skeleton.n_slots

    def key(self, prefix):
        prefix = tuple(int(g) for g in prefix)
        if len(prefix) > self.n_slots:
            raise ArgumentError('prefix of length %d does not fit %d slots' % (
                len(prefix), self.n_slots))
        return prefix + (IDENTITY,) * (self.n_slots - len(prefix))

    def simulate(self, prefix):
        """Raw reward ``-<H>`` without touching the cache or counter."""
        return -hamiltonian_energy(self.skeleton.prepare(prefix),
                                   self.hamiltonian)

    def evaluate(self, prefix, count=True, tag='train'):
        key = self.key(prefix)
        if not count:
            cached = self.cache.get(key) if self.cache is not None else None
            return cached if cached is not None else self.simulate(key)
        if self.cache is not None:
            cached = self.cache.get(key)
            if cached is not None:
                return cached
        reward = self.simulate(key)
        if self.cache is None or self.cache.add(key, reward):
            self.counter.increment(tag)
        return reward

    def evaluate_state(self, state, count=True, tag='train'):
        """Raw reward of the episode state's prefix."""
        return self.evaluate(state.prefix, count=count, tag=tag)

    @property
    def evaluations(self):
        return self.counter.total
