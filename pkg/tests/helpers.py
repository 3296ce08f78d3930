from pytest import raises

from cliffwarm.test import TempDirHelper, TempRunHelper, TINY_CONFIG


__all__ = ('TempDirHelper', 'TempRunHelper', 'TINY_CONFIG',
           'assert_raises_regex', 'circuit_ops')


def assert_raises_regex(expected, regexp, callable, *a, **kw):
    raises(expected, callable, *a, **kw).match(regexp)


def circuit_ops(rng, n_qubits, length):
    """A random list of ``('c1', gate, qubit)`` and ``('cx', c, t)`` ops."""
    ops = []
    for _ in range(length):
        if n_qubits > 1 and rng.random() < 0.4:
            c, t = rng.choice(n_qubits, size=2, replace=False)
            ops.append(('cx', int(c), int(t)))
        else:
            ops.append(('c1', int(rng.integers(24)),
                        int(rng.integers(n_qubits))))
    return ops
