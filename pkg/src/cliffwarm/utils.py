import math

import numpy as np

from .exceptions import ArgumentError


__all__ = ('make_option_resolver', 'RegistryMetaclass', 'spawn_rng',
           'geometric_mean', 'arithmetic_mean', 'mean_std')


def make_option_resolver(base=None, classes=None, allow_none=True,
                         desc=None):
    """Returns a function that turns a configuration value into an object.

    Accepted values are an instance of ``base()``, a subclass of it (which
    is instantiated without arguments), or a string ``"<id>[:<arg>]"``
    naming a class in the ``classes`` registry; ``arg`` is passed on to
    the constructor. ``base`` is a callable so that the resolver can be
    built before the base class exists.
    """
    assert base or classes
    suffix = ' to %s' % desc if desc else ''

    def resolve_option(option):
        if option is None or option is False:
            if allow_none:
                return None
        clazz = base() if base else None
        if clazz is not None:
            if isinstance(option, clazz):
                return option
            if isinstance(option, type) and issubclass(option, clazz):
                return option()
        if isinstance(option, str):
            key, _, arg = option.partition(':')
            if key in classes:
                return classes[key](*([arg] if arg else []))
        raise ValueError('%s cannot be resolved%s' % (option, suffix))
    resolve_option.__doc__ = 'Resolve ``option``%s.' % suffix

    return resolve_option


def RegistryMetaclass(base=None, allow_none=True, desc=None):
    """Returns a metaclass that registers every class defined with it under
    the class's ``id``, and has a ``resolve`` method built with
    :func:`make_option_resolver` over that registry.
    """
    class Metaclass(type):
        REGISTRY = {}

        def __new__(mcs, name, bases, attrs):
            new_klass = type.__new__(mcs, name, bases, attrs)
            if getattr(new_klass, 'id', None):
                mcs.REGISTRY[new_klass.id] = new_klass
            return new_klass

        resolve = staticmethod(make_option_resolver(
            base=base, classes=REGISTRY, allow_none=allow_none, desc=desc))
    return Metaclass


def spawn_rng(seed, *keys):
    """Return a ``numpy.random.Generator`` for the stream ``keys`` of the
    master ``seed``.

    Streams with different keys are independent, and the same (seed, keys)
    pair always gives the same stream, no matter in which order or on
    which thread the streams are created.
    """
    entropy = 0 if seed is None else int(seed)
    ss = np.random.SeedSequence(entropy, spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(ss)


def geometric_mean(values):
    """Geometric mean of positive ratios."""
    values = [float(v) for v in values]
    if not values:
        raise ArgumentError('geometric mean of an empty sequence')
    if any(not v > 0 for v in values):
        raise ArgumentError('geometric mean needs positive values: %r' % values)
    return math.exp(sum(math.log(v) for v in values) / len(values))


def arithmetic_mean(values):
    values = [float(v) for v in values]
    if not values:
        raise ArgumentError('mean of an empty sequence')
    return sum(values) / len(values)


def mean_std(values):
    """Return ``(mean, std)`` with the population standard deviation, the
    way per-seed results are summarized.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ArgumentError('no values to summarize')
    return float(arr.mean()), float(arr.std())
