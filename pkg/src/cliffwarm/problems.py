"""Benchmark Hamiltonians and the exact oracles for their ground energies.

Every Hamiltonian here is a weighted sum of Pauli strings with phase +1;
signs live in the coefficients. The problem classes at the bottom wrap
the builders so instances can be generated, written to and read from
JSON files, and extended with custom problem types.
"""

import math
import logging

import numpy as np
from scipy import linalg

from .clifford import PauliString
from .exceptions import ArgumentError, ResourceError
from .utils import RegistryMetaclass, spawn_rng


__all__ = ('Hamiltonian', 'WeightedGraph', 'KnapsackInstance',
           'maxcut_hamiltonian', 'knapsack_hamiltonian', 'qubo_to_hamiltonian',
           'tfim_hamiltonian', 'xxz_hamiltonian', 'exact_ground_energy',
           'Problem', 'get_problem_class', 'problem_from_dict',
           'MAX_DENSE_QUBITS', 'MAX_DIAGONAL_QUBITS')


log = logging.getLogger(__name__)

MAX_DENSE_QUBITS = 14
MAX_DIAGONAL_QUBITS = 26
MAX_SLACK_BITS = 30

# Basis states per block when enumerating diagonal energies.
_CHUNK = 1 << 14


class Hamiltonian(object):
    """``sum_i c_i P_i`` on ``n_qubits``.

    Terms with the same Pauli letters are merged by summing their
    coefficients; a ``-1`` phase on an input term is folded into its
    coefficient. Insertion order of the first occurrence is kept.
    """

    def __init__(self, n_qubits, terms=(), label=None):
        self.n_qubits = int(n_qubits)
        self.label = label
        merged = {}
        for coeff, pauli in terms:
            if isinstance(pauli, str):
                pauli = PauliString.from_label(pauli)
            if pauli.n_qubits != self.n_qubits:
                raise ArgumentError('term %s does not act on %d qubits' % (
                    pauli, self.n_qubits))
            if not pauli.is_hermitian():
                raise ArgumentError('term %s has an imaginary phase' % pauli)
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise ArgumentError('coefficient of %s is not finite' % pauli)
            if pauli.phase == 2:
                coeff = -coeff
            key = pauli.key()
            if key in merged:
                merged[key] = (merged[key][0] + coeff, merged[key][1])
            else:
                merged[key] = (coeff, pauli.with_phase(0))
        self.terms = list(merged.values())
        self._arrays = None

    @classmethod
    def from_labels(cls, terms, label=None):
        """``Hamiltonian.from_labels([(0.5, 'II'), (0.5, 'ZZ')])``"""
        terms = [(c, PauliString.from_label(p)) for c, p in terms]
        if not terms:
            raise ArgumentError('need at least one term to infer the size')
        return cls(terms[0][1].n_qubits, terms, label=label)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other):
        if self.n_qubits != other.n_qubits:
            raise ArgumentError('cannot add Hamiltonians on %d and %d qubits' % (
                self.n_qubits, other.n_qubits))
        return Hamiltonian(self.n_qubits, self.terms + other.terms)

    def __mul__(self, scalar):
        return Hamiltonian(self.n_qubits, [
            (scalar * c, p) for c, p in self.terms], label=self.label)
    __rmul__ = __mul__

    def __repr__(self):
        return '<Hamiltonian %s on %d qubits, %d terms>' % (
            self.label or '', self.n_qubits, len(self.terms))

    def term_arrays(self):
        """``(coefficients, codes, phases)`` of the terms as stacked numpy
        arrays, built on first use."""
        if self._arrays is None:
            self._arrays = (
                np.array([c for c, _ in self.terms]),
                np.stack([p.codes for _, p in self.terms]),
                np.array([p.phase for _, p in self.terms]))
        return self._arrays

    def is_diagonal(self):
        return all(p.is_diagonal() for _, p in self.terms)

    @property
    def constant(self):
        return sum(c for c, p in self.terms if p.is_identity())

    def non_identity_terms(self):
        return [(c, p) for c, p in self.terms if not p.is_identity()]

    def to_dict(self):
        return {'n_qubits': self.n_qubits,
                'terms': [[float(c), p.to_label()] for c, p in self.terms]}

    @classmethod
    def from_dict(cls, data):
        return cls(data['n_qubits'], [
            (c, PauliString.from_label(p)) for c, p in data['terms']])

    def _z_matrix(self):
        zmat = np.zeros((len(self.terms), self.n_qubits), dtype=np.float32)
        for k, (_, p) in enumerate(self.terms):
            zmat[k] = p.z_bits
        return zmat

    def diagonal_energies(self, start=0, stop=None):
        """Energies of the basis states ``start .. stop-1``.

        Basis index bit ``k`` is the value of qubit ``k``.
        """
        if not self.is_diagonal():
            raise ArgumentError('Hamiltonian has off-diagonal terms')
        stop = 1 << self.n_qubits if stop is None else stop
        idx = np.arange(start, stop, dtype=np.int64)
        bits = ((idx[:, None] >> np.arange(self.n_qubits)) & 1).astype(np.float32)
        parity = (bits @ self._z_matrix().T).astype(np.int64) & 1
        coeffs = np.array([c for c, _ in self.terms])
        return (1 - 2 * parity) @ coeffs

    def to_matrix(self):
        """Dense matrix, qubit 0 as the least significant bit."""
        if self.n_qubits > MAX_DENSE_QUBITS:
            raise ResourceError('dense matrix on %d qubits exceeds the limit '
                                'of %d' % (self.n_qubits, MAX_DENSE_QUBITS))
        dim = 1 << self.n_qubits
        real = all(int(np.sum(p.codes == 3)) % 2 == 0 for _, p in self.terms)
        mat = np.zeros((dim, dim), dtype=float if real else complex)
        basis = np.arange(dim, dtype=np.int64)
        shifts = np.arange(self.n_qubits)
        for coeff, pauli in self.terms:
            xmask = int(np.dot(pauli.x_bits.astype(np.int64), 1 << shifts))
            zmask = int(np.dot(pauli.z_bits.astype(np.int64), 1 << shifts))
            n_y = int(np.sum(pauli.codes == 3))
            signs = 1 - 2 * (((basis & zmask)[:, None] >> shifts).sum(axis=1) & 1)
            value = coeff * (1j ** n_y) * signs
            mat[basis ^ xmask, basis] += value.real if real else value
        return mat


class WeightedGraph(object):
    """Undirected graph with real edge weights; edges are stored as
    ``(i, j, w)`` with ``i < j``."""

    def __init__(self, n_vertices, edges):
        self.n_vertices = int(n_vertices)
        seen = set()
        self.edges = []
        for i, j, w in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ArgumentError('self-loop on vertex %d' % i)
            i, j = min(i, j), max(i, j)
            if i < 0 or j >= self.n_vertices:
                raise ArgumentError('edge (%d, %d) out of range' % (i, j))
            if (i, j) in seen:
                raise ArgumentError('duplicate edge (%d, %d)' % (i, j))
            seen.add((i, j))
            self.edges.append((i, j, float(w)))

    @classmethod
    def complete(cls, n_vertices, rng, low=1, high=10):
        """Complete graph with integer weights uniform in ``[low, high]``."""
        if n_vertices < 2:
            raise ArgumentError('a graph needs at least 2 vertices')
        edges = [(i, j, int(rng.integers(low, high + 1)))
                 for i in range(n_vertices) for j in range(i + 1, n_vertices)]
        return cls(n_vertices, edges)

    def is_complete(self):
        n = self.n_vertices
        return len(self.edges) == n * (n - 1) // 2

    def cut_weight(self, assignment):
        return sum(w for i, j, w in self.edges
                   if assignment[i] != assignment[j])


class KnapsackInstance(object):

    def __init__(self, values, weights, capacity, penalty=None):
        if len(values) != len(weights):
            raise ArgumentError('values and weights differ in length')
        if not values:
            raise ArgumentError('knapsack instance has no items')
        self.values = [float(v) for v in values]
        self.weights = [int(w) for w in weights]
        self.capacity = int(capacity)
        if any(v <= 0 for v in self.values):
            raise ArgumentError('item values must be positive')
        if any(w <= 0 for w in self.weights):
            raise ArgumentError('item weights must be positive integers')
        if self.capacity < 1:
            raise ArgumentError('capacity must be at least 1')
        total = sum(self.values)
        self.penalty = 2.0 * total if penalty is None else float(penalty)
        if not self.penalty > total:
            raise ArgumentError(
                'penalty %g does not dominate the total value %g' % (
                    self.penalty, total))

    @property
    def n_items(self):
        return len(self.values)

    @property
    def n_slack(self):
        return self.capacity.bit_length()

    @property
    def n_qubits(self):
        return self.n_items + self.n_slack

    def cost(self, items, slack):
        """Classical cost ``f(x, y)`` of an item and slack assignment."""
        load = sum(w * x for w, x in zip(self.weights, items))
        load += sum((1 << k) * y for k, y in enumerate(slack))
        return -sum(v * x for v, x in zip(self.values, items)) + \
            self.penalty * (load - self.capacity) ** 2


def qubo_to_hamiltonian(n_qubits, linear, quadratic, offset=0.0, label=None):
    """Map ``offset + sum_i a_i x_i + sum_{i<j} b_ij x_i x_j`` over binary
    ``x`` onto Z operators via ``x = (1 - Z)/2``.

    ``linear`` maps qubits to ``a_i``, ``quadratic`` maps ``(i, j)`` pairs
    to ``b_ij``.
    """
    def z(*qubits):
        codes = np.zeros(n_qubits, dtype=np.uint8)
        codes[list(qubits)] = 2
        return PauliString(codes)

    terms = [(offset, z())]
    for i, a in dict(linear).items():
        terms += [(a / 2, z()), (-a / 2, z(i))]
    for (i, j), b in dict(quadratic).items():
        if i == j:
            terms += [(b / 2, z()), (-b / 2, z(i))]
            continue
        terms += [(b / 4, z()), (-b / 4, z(i)), (-b / 4, z(j)),
                  (b / 4, z(i, j))]
    return Hamiltonian(n_qubits, terms, label=label)


def maxcut_hamiltonian(graph):
    """``-sum_(i,j) w_ij (I - Z_i Z_j) / 2``, whose ground energy is minus
    the weight of the maximum cut."""
    if not graph.edges:
        raise ArgumentError('graph has no edges')
    n = graph.n_vertices
    terms = []
    for i, j, w in graph.edges:
        codes = np.zeros(n, dtype=np.uint8)
        terms.append((-w / 2, PauliString(codes)))
        codes = codes.copy()
        codes[[i, j]] = 2
        terms.append((w / 2, PauliString(codes)))
    return Hamiltonian(n, terms, label='maxcut_%d' % n)


def knapsack_hamiltonian(instance):
    """Penalty encoding with binary slack.

    Qubits ``0 .. n_items-1`` select items, the remaining
    ``ceil(log2(W+1))`` qubits hold the slack, least significant bit first.
    """
    if instance.n_slack > MAX_SLACK_BITS:
        raise ArgumentError('capacity %d needs %d slack bits, more than %d' % (
            instance.capacity, instance.n_slack, MAX_SLACK_BITS))
    lam, cap = instance.penalty, instance.capacity
    coeffs = list(instance.weights) + [1 << k for k in range(instance.n_slack)]
    gains = list(instance.values) + [0.0] * instance.n_slack
    n = len(coeffs)

    linear = {k: lam * (coeffs[k] ** 2 - 2 * cap * coeffs[k]) - gains[k]
              for k in range(n)}
    quadratic = {(k, l): 2 * lam * coeffs[k] * coeffs[l]
                 for k in range(n) for l in range(k + 1, n)}
    return qubo_to_hamiltonian(n, linear, quadratic, offset=lam * cap ** 2,
                               label='knapsack_%d' % instance.n_items)


def _chain_term(n, letters):
    codes = np.zeros(n, dtype=np.uint8)
    for q, letter in letters:
        codes[q] = 'IXZY'.index(letter)
    return PauliString(codes)


def tfim_hamiltonian(n, J):
    """Open chain ``J sum X_i X_{i+1} + sum Z_i``."""
    if n < 2:
        raise ArgumentError('a chain needs at least 2 sites, got %d' % n)
    terms = [(J, _chain_term(n, [(i, 'X'), (i + 1, 'X')])) for i in range(n - 1)]
    terms += [(1.0, _chain_term(n, [(i, 'Z')])) for i in range(n)]
    return Hamiltonian(n, terms, label='ising_%s' % J)


def xxz_hamiltonian(n, J):
    """Open chain ``sum J (X_i X_{i+1} + Y_i Y_{i+1}) + Z_i Z_{i+1}``."""
    if n < 2:
        raise ArgumentError('a chain needs at least 2 sites, got %d' % n)
    terms = []
    for i in range(n - 1):
        terms.append((J, _chain_term(n, [(i, 'X'), (i + 1, 'X')])))
        terms.append((J, _chain_term(n, [(i, 'Y'), (i + 1, 'Y')])))
        terms.append((1.0, _chain_term(n, [(i, 'Z'), (i + 1, 'Z')])))
    return Hamiltonian(n, terms, label='xxz_%s' % J)


def exact_ground_energy(hamiltonian):
    """Smallest eigenvalue of ``hamiltonian``.

    Diagonal Hamiltonians up to 26 qubits are minimized over all basis
    states, block by block. Anything else is diagonalized densely, up to
    14 qubits.
    """
    n = hamiltonian.n_qubits
    if hamiltonian.is_diagonal():
        if n > MAX_DIAGONAL_QUBITS:
            raise ResourceError('%d qubits exceed the enumeration limit of %d' % (
                n, MAX_DIAGONAL_QUBITS))
        best = math.inf
        dim = 1 << n
        for start in range(0, dim, _CHUNK):
            best = min(best, float(hamiltonian.diagonal_energies(
                start, min(start + _CHUNK, dim)).min()))
        return best

    if n > MAX_DENSE_QUBITS:
        raise ResourceError('%d qubits exceed the dense limit of %d' % (
            n, MAX_DENSE_QUBITS))
    log.debug('diagonalizing %r densely', hamiltonian)
    values = linalg.eigh(hamiltonian.to_matrix(), eigvals_only=True,
                         subset_by_index=[0, 0])
    return float(values[0])


class Problem(metaclass=RegistryMetaclass(
        base=lambda: Problem, desc='a problem type')):
    """A benchmark instance: knows its Hamiltonian, the ansatz it is
    solved with, and how to persist itself.

    Subclasses register themselves under their ``id``; this is also how
    custom problem types loaded by dotted name become available to the
    instance files.
    """

    id = None
    seed = None

    def hamiltonian(self):
        raise NotImplementedError()

    def default_ansatz(self, reps=1):
        """The skeleton this problem is solved with. ``reps`` only applies
        to layered ansatzes."""
        from .ansatz import build_maqaoa_skeleton
        return build_maqaoa_skeleton(self.hamiltonian())

    @classmethod
    def generate(cls, n, seed=0, **kwargs):
        raise NotImplementedError()

    def _data(self):
        raise NotImplementedError()

    @classmethod
    def _from_data(cls, data):
        raise NotImplementedError()

    def to_dict(self, e_opt=None):
        data = {'type': self.id, 'n': self.n, 'seed': self.seed}
        data.update(self._data())
        if e_opt is not None:
            data['computed_E_opt'] = e_opt
        return data

    @classmethod
    def from_dict(cls, data):
        problem = cls._from_data(data)
        problem.seed = data.get('seed')
        return problem

    def exact_ground_energy(self):
        return exact_ground_energy(self.hamiltonian())

    @property
    def name(self):
        return '%s_%s' % (self.id, self.n)


class MaxCutProblem(Problem):
    id = 'maxcut'

    def __init__(self, graph):
        self.graph = graph

    @property
    def n(self):
        return self.graph.n_vertices

    @classmethod
    def generate(cls, n, seed=0, **kwargs):
        if n < 2:
            raise ArgumentError('maxcut needs at least 2 vertices, got %d' % n)
        problem = cls(WeightedGraph.complete(n, spawn_rng(seed)))
        problem.seed = seed
        return problem

    def hamiltonian(self):
        return maxcut_hamiltonian(self.graph)

    def _data(self):
        return {'edges': [[i, j, w] for i, j, w in self.graph.edges]}

    @classmethod
    def _from_data(cls, data):
        return cls(WeightedGraph(data['n'], data['edges']))


class KnapsackProblem(Problem):
    id = 'knapsack'

    def __init__(self, instance):
        self.instance = instance

    @property
    def n(self):
        return self.instance.n_items

    @classmethod
    def generate(cls, n, seed=0, **kwargs):
        """Random items with values in ``[1, 20]`` and weights in
        ``[1, 10]``; the capacity is half the total weight."""
        if n < 1:
            raise ArgumentError('knapsack needs at least one item')
        rng = spawn_rng(seed)
        values = [int(v) for v in rng.integers(1, 21, size=n)]
        weights = [int(w) for w in rng.integers(1, 11, size=n)]
        capacity = max(1, sum(weights) // 2)
        problem = cls(KnapsackInstance(values, weights, capacity))
        problem.seed = seed
        return problem

    def hamiltonian(self):
        return knapsack_hamiltonian(self.instance)

    def _data(self):
        inst = self.instance
        return {'items': [{'value': v, 'weight': w}
                          for v, w in zip(inst.values, inst.weights)],
                'capacity': inst.capacity,
                'penalty': inst.penalty}

    @classmethod
    def _from_data(cls, data):
        items = data['items']
        return cls(KnapsackInstance(
            [i['value'] for i in items], [i['weight'] for i in items],
            data['capacity'], data.get('penalty')))


class _ChainProblem(Problem):
    builder = None

    def __init__(self, n, J):
        self.n = int(n)
        self.J = float(J)

    @classmethod
    def generate(cls, n, seed=0, J=1.0, **kwargs):
        if n < 2:
            raise ArgumentError('a chain needs at least 2 sites, got %d' % n)
        problem = cls(n, J)
        problem.seed = seed
        return problem

    def hamiltonian(self):
        return type(self).builder(self.n, self.J)

    def default_ansatz(self, reps=1):
        from .ansatz import build_hea_skeleton
        return build_hea_skeleton(self.n, reps)

    def _data(self):
        return {'J': self.J}

    @classmethod
    def _from_data(cls, data):
        return cls(data['n'], data['J'])

    @property
    def name(self):
        return '%s_%s' % (self.id, self.J)


class TFIMProblem(_ChainProblem):
    id = 'tfim'
    builder = staticmethod(tfim_hamiltonian)


class XXZProblem(_ChainProblem):
    id = 'xxz'
    builder = staticmethod(xxz_hamiltonian)


def get_problem_class(type_id):
    try:
        return Problem.REGISTRY[type_id]
    except KeyError:
        raise ArgumentError('unsupported problem type: %s (known: %s)' % (
            type_id, ', '.join(sorted(Problem.REGISTRY))))


def problem_from_dict(data):
    return get_problem_class(data.get('type')).from_dict(data)
