"""Training sample storage.

Two stores feed the optimizer: a ring buffer holding every recent sample,
and a small best-game buffer that only keeps the samples of the highest
reward episodes with a positive raw reward.
"""

import heapq
import logging
import itertools
from collections import deque, namedtuple

import numpy as np

from .clifford import N_GATES
from .exceptions import ArgumentError


__all__ = ('TrainingSample', 'ReplayBuffer', 'BestGameBuffer',
           'mixed_batch', 'sample_ratio')


log = logging.getLogger(__name__)


TrainingSample = namedtuple('TrainingSample', ('prefix', 'target', 'z'))
TrainingSample.__doc__ = """One move of a finished episode: the prefix the
search started from, the visit frequencies at its root, and the
normalized return of the whole episode."""


def _check_sample(sample):
    target = np.asarray(sample.target, dtype=float)
    if target.shape != (N_GATES,) or abs(target.sum() - 1.0) > 1e-6:
        raise ArgumentError('policy target must be a distribution over '
                            '%d gates' % N_GATES)
    if not -1.0 <= sample.z <= 1.0:
        raise ArgumentError('return %r outside [-1, 1]' % sample.z)


def _to_state(samples):
    return [[list(s.prefix), [float(p) for p in s.target], float(s.z)]
            for s in samples]


def _from_state(items):
    return [TrainingSample(tuple(p), np.asarray(t), z) for p, t, z in items]


class ReplayBuffer(object):
    """Ring buffer of :class:`TrainingSample`; the oldest samples are
    dropped first once ``capacity`` is reached."""

    def __init__(self, capacity):
        if capacity < 1:
            raise ArgumentError('replay capacity must be positive')
        self.capacity = int(capacity)
        self._items = deque(maxlen=self.capacity)

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    def extend(self, samples):
        for sample in samples:
            _check_sample(sample)
            self._items.append(sample)

    def sample(self, rng, k):
        """``k`` samples drawn uniformly with replacement."""
        if not self._items or k <= 0:
            return []
        idx = rng.integers(0, len(self._items), size=k)
        return [self._items[i] for i in idx]

    def state_dict(self):
        return {'capacity': self.capacity, 'items': _to_state(self._items)}

    def load_state_dict(self, state):
        self.capacity = state['capacity']
        self._items = deque(_from_state(state['items']), maxlen=self.capacity)


class BestGameBuffer(object):
    """Keeps whole episodes ranked by raw reward.

    Only episodes with a raw reward above zero are admitted. ``capacity``
    counts samples, not episodes: when an admission would exceed it, the
    lowest reward episodes are evicted (oldest first among equal rewards),
    and an episode that ranks below everything retained is turned away.
    """

    def __init__(self, capacity):
        if capacity < 1:
            raise ArgumentError('best-game capacity must be positive')
        self.capacity = int(capacity)
        self._games = []
        self._order = itertools.count()
        self._n_samples = 0
        self._flat = None

    def __len__(self):
        return self._n_samples

    @property
    def n_games(self):
        return len(self._games)

    @property
    def min_reward(self):
        """Lowest raw reward retained, ``None`` when empty."""
        return self._games[0][0] if self._games else None

    def rewards(self):
        return sorted(g[0] for g in self._games)

    def admit(self, reward, samples):
        """Offer the samples of one episode. Returns ``True`` if they were
        stored."""
        samples = list(samples)
        if not reward > 0 or not samples:
            return False
        if len(samples) > self.capacity:
            samples = samples[-self.capacity:]
        full = self._n_samples + len(samples) > self.capacity
        if full and self._games and reward < self.min_reward:
            return False
        for sample in samples:
            _check_sample(sample)
        heapq.heappush(self._games, (reward, next(self._order), samples))
        self._n_samples += len(samples)
        while self._n_samples > self.capacity:
            evicted = heapq.heappop(self._games)
            self._n_samples -= len(evicted[2])
            log.debug('evicted best game with R=%.4g', evicted[0])
        self._flat = None
        return True

    def _samples(self):
        if self._flat is None:
            self._flat = [s for _, _, game in sorted(self._games)
                          for s in game]
        return self._flat

    def __iter__(self):
        return iter(self._samples())

    def sample(self, rng, k):
        flat = self._samples()
        if not flat or k <= 0:
            return []
        idx = rng.integers(0, len(flat), size=k)
        return [flat[i] for i in idx]

    def state_dict(self):
        return {'capacity': self.capacity,
                'games': [[r, _to_state(g)] for r, _, g in sorted(self._games)]}

    def load_state_dict(self, state):
        self.capacity = state['capacity']
        self._games = []
        self._order = itertools.count()
        self._n_samples = 0
        for reward, items in state['games']:
            game = _from_state(items)
            heapq.heappush(self._games, (reward, next(self._order), game))
            self._n_samples += len(game)
        self._flat = None


def sample_ratio(episodes, replay_start=300, mix_start=600,
                 best_fraction=0.1):
    """The (replay, best-game) share of a batch after ``episodes``
    collected episodes: ``(0, 0)`` means no training yet."""
    if episodes < replay_start:
        return 0.0, 0.0
    if episodes < mix_start:
        return 1.0, 0.0
    return 1.0 - best_fraction, best_fraction


def mixed_batch(rng, replay, best, batch_size, ratio):
    """Draw one batch. Each element comes from the best-game buffer with
    probability ``ratio[1]`` (so the share holds in expectation), or from
    the replay buffer if the best-game buffer is still empty."""
    replay_share, best_share = ratio
    if replay_share + best_share <= 0:
        return []
    n_best = int(rng.binomial(batch_size, best_share)) if len(best) else 0
    return replay.sample(rng, batch_size - n_best) + best.sample(rng, n_best)
