"""The evaluation cache remembers the reward of every prefix configuration
that was simulated, so that repeated configurations are neither simulated
nor charged against the evaluation budget again.

Workers share one cache; all methods are safe to call from several
threads.
"""

import threading
from collections import OrderedDict

from .utils import RegistryMetaclass


__all__ = ('BaseCache', 'MemoryCache', 'EvaluationCounter', 'get_cache',
           'DEFAULT_CAPACITY')


DEFAULT_CAPACITY = 2000000


class BaseCache(metaclass=RegistryMetaclass(
        base=lambda: BaseCache, desc='an evaluation cache')):
    """Abstract base class.

    Keys are tuples of gate ids (the prefix padded to the full slot
    count), values are raw rewards.
    """

    def get(self, key):
        """Should return the cached value, or ``None``."""
        raise NotImplementedError()

    def add(self, key, value):
        """Insert ``value`` unless ``key`` is already present. Returns
        ``True`` only the first time ``key`` is ever added, so that a
        configuration is counted once even if it was evicted since."""
        raise NotImplementedError()

    def __len__(self):
        raise NotImplementedError()

    def state_dict(self):
        raise NotImplementedError()

    def load_state_dict(self, state):
        raise NotImplementedError()


class MemoryCache(BaseCache):
    """Caches rewards in process memory, evicting the least recently
    inserted entries beyond ``capacity``.

    Evicted keys are remembered without their values, so that adding one
    again is not reported as a new configuration.
    """

    id = 'memory'

    def __init__(self, capacity=DEFAULT_CAPACITY):
        self.capacity = int(capacity)
        self._lock = threading.Lock()
        self.cache = OrderedDict()
        self._evicted = set()

    def get(self, key):
        with self._lock:
            return self.cache.get(key)

    def add(self, key, value):
        with self._lock:
            if key in self.cache:
                return False
            first = key not in self._evicted
            self.cache[key] = value
            while len(self.cache) > self.capacity:
                self._evicted.add(self.cache.popitem(last=False)[0])
            return first

    def __len__(self):
        with self._lock:
            return len(self.cache)

    def state_dict(self):
        with self._lock:
            return {'capacity': self.capacity,
                    'items': [[list(k), v] for k, v in self.cache.items()],
                    'evicted': [list(k) for k in self._evicted]}

    def load_state_dict(self, state):
        with self._lock:
            self.capacity = state['capacity']
            self.cache = OrderedDict(
                (tuple(k), v) for k, v in state['items'])
            self._evicted = set(tuple(k) for k in state.get('evicted', ()))


class EvaluationCounter(object):
    """Counts distinct circuit simulations, split by the phase that first
    triggered them (``'train'``, ``'eval'``, ``'ga'`` ...)."""

    def __init__(self):
        self._lock = threading.Lock()
        self.counts = {}

    def increment(self, tag='train'):
        with self._lock:
            self.counts[tag] = self.counts.get(tag, 0) + 1

    @property
    def total(self):
        with self._lock:
            return sum(self.counts.values())

    def get(self, tag):
        with self._lock:
            return self.counts.get(tag, 0)

    def state_dict(self):
        with self._lock:
            return dict(self.counts)

    def load_state_dict(self, state):
        with self._lock:
            self.counts = dict(state)


def get_cache(option):
    """Return a cache instance based on ``option``.

    ``True`` gives a :class:`MemoryCache` of default capacity, an integer
    a cache of that capacity, ``"memory:N"`` likewise. ``False`` and
    ``None`` disable caching.
    """
    if option is None or option is False:
        return None
    if option is True:
        return MemoryCache()
    if isinstance(option, int):
        return MemoryCache(option)
    if isinstance(option, str) and option.isdigit():
        return MemoryCache(int(option))
    return BaseCache.resolve(option)
