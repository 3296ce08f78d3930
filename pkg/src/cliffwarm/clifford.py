"""Pauli algebra, the 24 single-qubit Clifford gates and a stabilizer
tableau simulator.

Single-qubit Paulis are stored as two-bit codes ``x + 2*z``, so that
``0, 1, 2, 3`` stand for ``I, X, Z, Y``. A string over ``n`` qubits is a
``uint8`` array of those codes plus a phase exponent ``p``; the operator it
stands for is ``i**p`` times the tensor product of the letters, where the
letter ``Y`` is the Hermitian Pauli matrix. Multiplying two letters only
needs the product code (``c1 ^ c2``) and an extra power of ``i``, which
is looked up in ``_G``.

The tableau keeps ``2n`` such rows, destabilizers first, which lets
:meth:`StabilizerTableau.pauli_expectation` decompose an observable over
the stabilizer generators without Gaussian elimination.
"""

from collections import deque

import numpy as np

from .exceptions import ArgumentError


__all__ = ('PauliString', 'CliffordGate', 'clifford_table', 'gate_id',
           'compose', 'StabilizerTableau', 'hamiltonian_energy',
           'run_circuit', 'N_GATES', 'IDENTITY')


N_GATES = 24
IDENTITY = 0

_LETTERS = 'IXZY'
_CODES = {'I': 0, 'X': 1, 'Z': 2, 'Y': 3}

# _G[c1, c2] is the exponent of i picked up by letter(c1) * letter(c2).
_G = np.array([
    [0, 0, 0, 0],
    [0, 0, 3, 1],     # X*Z = -iY, X*Y = iZ
    [0, 1, 0, 3],     # Z*X = iY, Z*Y = -iX
    [0, 3, 1, 0],     # Y*X = -iZ, Y*Z = iX
], dtype=np.uint8)

# _ANTI[c1, c2] is 1 iff the two letters anticommute.
_ANTI = np.array([[int(a != 0 and b != 0 and a != b) for b in range(4)]
                  for a in range(4)], dtype=np.uint8)

_SIGNS = {'': 0, '+': 0, '+i': 1, 'i': 1, '-': 2, '-i': 3}
_SIGN_LABELS = ('', 'i', '-', '-i')

_LETTER_MATRICES = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
)


class PauliString(object):
    """A Pauli operator ``i**phase * P_0 (x) P_1 (x) ...`` on ``n_qubits``.

    Build them from labels, where character ``k`` acts on qubit ``k``::

        PauliString.from_label('-XZIY')
    """

    __slots__ = ('codes', 'phase')

    def __init__(self, codes, phase=0):
        self.codes = np.asarray(codes, dtype=np.uint8)
        if self.codes.ndim != 1:
            raise ArgumentError('codes must be a flat array')
        self.phase = int(phase) % 4

    @classmethod
    def from_label(cls, label):
        label = label.strip()
        body = label.lstrip('+-i')
        sign = label[:len(label) - len(body)]
        try:
            phase = _SIGNS[sign]
        except KeyError:
            raise ArgumentError('invalid sign in Pauli label %r' % label)
        try:
            codes = [_CODES[c] for c in body.upper()]
        except KeyError as e:
            raise ArgumentError('invalid Pauli letter %s in %r' % (e, label))
        return cls(codes, phase)

    @classmethod
    def from_bits(cls, x_bits, z_bits, phase=0):
        x = np.asarray(x_bits, dtype=np.uint8)
        z = np.asarray(z_bits, dtype=np.uint8)
        if x.shape != z.shape:
            raise ArgumentError('bitmask lengths differ')
        return cls(x | (z << 1), phase)

    @classmethod
    def identity(cls, n_qubits):
        return cls(np.zeros(n_qubits, dtype=np.uint8))

    @classmethod
    def single(cls, n_qubits, qubit, letter, phase=0):
        if not 0 <= qubit < n_qubits:
            raise IndexError('qubit %d out of range for %d qubits' % (
                qubit, n_qubits))
        codes = np.zeros(n_qubits, dtype=np.uint8)
        codes[qubit] = _CODES[letter.upper()]
        return cls(codes, phase)

    @property
    def n_qubits(self):
        return len(self.codes)

    @property
    def x_bits(self):
        return self.codes & 1

    @property
    def z_bits(self):
        return self.codes >> 1

    @property
    def support(self):
        return tuple(int(q) for q in np.flatnonzero(self.codes))

    def is_identity(self):
        return not self.codes.any()

    def is_hermitian(self):
        return self.phase % 2 == 0

    def is_diagonal(self):
        return not (self.codes & 1).any()

    def commutes(self, other):
        self._check_size(other)
        return not int(_ANTI[self.codes, other.codes].sum()) & 1

    def with_phase(self, phase):
        return PauliString(self.codes.copy(), phase)

    def to_label(self):
        return _SIGN_LABELS[self.phase] + ''.join(
            _LETTERS[c] for c in self.codes)

    def to_matrix(self):
        """Dense matrix, with qubit 0 as the least significant bit of the
        basis index."""
        mat = np.ones((1, 1), dtype=complex)
        for c in self.codes:
            mat = np.kron(_LETTER_MATRICES[c], mat)
        return (1j ** self.phase) * mat

    def key(self):
        """Hashable key of the letters, ignoring the phase."""
        return self.codes.tobytes()

    def _check_size(self, other):
        if self.n_qubits != other.n_qubits:
            raise ArgumentError('Pauli strings act on %d and %d qubits' % (
                self.n_qubits, other.n_qubits))

    def __mul__(self, other):
        self._check_size(other)
        phase = self.phase + other.phase + int(
            _G[self.codes, other.codes].sum())
        return PauliString(self.codes ^ other.codes, phase)

    def __neg__(self):
        return PauliString(self.codes.copy(), self.phase + 2)

    def __eq__(self, other):
        if not isinstance(other, PauliString):
            return NotImplemented
        return self.phase == other.phase and \
            np.array_equal(self.codes, other.codes)

    def __hash__(self):
        return hash((self.codes.tobytes(), self.phase))

    def __repr__(self):
        return '<PauliString %s>' % self.to_label()

    def __str__(self):
        return self.to_label()


def _conjugate_letter(new_codes, new_phases, code, phase):
    return int(new_codes[code]), (phase + int(new_phases[code])) % 4


class CliffordGate(object):
    """One of the 24 single-qubit Cliffords, up to global phase.

    ``image_x`` and ``image_z`` are ``(code, phase)`` pairs describing
    ``U X U^dagger`` and ``U Z U^dagger``. ``name`` is the shortest word
    over ``H`` and ``S`` that realizes the gate, in circuit order.
    """

    def __init__(self, id, name, image_x, image_z):
        self.id = id
        self.name = name
        self.image_x = image_x
        self.image_z = image_z
        (cx, ex), (cz, ez) = image_x, image_z
        ey = (1 + ex + ez + int(_G[cx, cz])) % 4
        self.new_codes = np.array([0, cx, cz, cx ^ cz], dtype=np.uint8)
        self.new_phases = np.array([0, ex, ez, ey], dtype=np.uint8)

    def conjugate(self, code, phase=0):
        """Image ``(code, phase)`` of a single-qubit signed Pauli."""
        return _conjugate_letter(self.new_codes, self.new_phases, code, phase)

    def unitary(self):
        mat = np.eye(2, dtype=complex)
        for letter in self.name.replace('I', ''):
            mat = _WORD_MATRICES[letter] @ mat
        return mat

    def images(self):
        """Images of X and Z as signed single-qubit :class:`PauliString`."""
        return (PauliString([self.image_x[0]], self.image_x[1]),
                PauliString([self.image_z[0]], self.image_z[1]))

    def __repr__(self):
        x, z = self.images()
        return '<CliffordGate %d %s: X->%s, Z->%s>' % (
            self.id, self.name, x, z)


_WORD_MATRICES = {
    'H': np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    'S': np.array([[1, 0], [0, 1j]], dtype=complex),
}


def _enumerate_cliffords():
    """Breadth-first search over words in H and S, deduplicated by their
    conjugation action, sorted by ``(image of X, image of Z)`` with the
    identity pinned to id 0.
    """
    generators = {
        'H': CliffordGate(None, 'H', (2, 0), (1, 0)),
        'S': CliffordGate(None, 'S', (3, 0), (2, 0)),
    }
    start = ((1, 0), (2, 0))
    found = {start: 'I'}
    queue = deque([start])
    while queue:
        images = queue.popleft()
        word = found[images]
        for letter, gen in generators.items():
            new = (gen.conjugate(*images[0]), gen.conjugate(*images[1]))
            if new not in found:
                found[new] = letter if word == 'I' else word + letter
                queue.append(new)

    ordered = sorted(found, key=lambda im: (im != start,) + im[0] + im[1])
    return tuple(CliffordGate(i, found[im], im[0], im[1])
                 for i, im in enumerate(ordered))


_TABLE = _enumerate_cliffords()
assert len(_TABLE) == N_GATES

_BY_IMAGES = {(g.image_x, g.image_z): g.id for g in _TABLE}

# Lookup tables used by the tableau: row codes in column q go through
# _NEW_CODES[gate] and pick up _NEW_PHASES[gate] as extra powers of i.
_NEW_CODES = np.stack([g.new_codes for g in _TABLE])
_NEW_PHASES = np.stack([g.new_phases for g in _TABLE])


def _compose_ids(first, second):
    a, b = _TABLE[first], _TABLE[second]
    return _BY_IMAGES[(b.conjugate(*a.image_x), b.conjugate(*a.image_z))]


_COMPOSE = np.array([[_compose_ids(a, b) for b in range(N_GATES)]
                     for a in range(N_GATES)], dtype=np.int64)

_NAMED_IMAGES = {
    'I': ((1, 0), (2, 0)),
    'H': ((2, 0), (1, 0)),
    'S': ((3, 0), (2, 0)),
    'SDG': ((3, 2), (2, 0)),
    'X': ((1, 0), (2, 2)),
    'Y': ((1, 2), (2, 2)),
    'Z': ((1, 2), (2, 0)),
    'SX': ((1, 0), (3, 2)),
    'SXDG': ((1, 0), (3, 0)),
}


def clifford_table():
    """Return the 24 gates in canonical order; ``clifford_table()[0]`` is
    the identity."""
    return list(_TABLE)


def gate_id(name):
    """Return the id of a named gate like ``'H'``, ``'S'`` or ``'X'``."""
    try:
        return _BY_IMAGES[_NAMED_IMAGES[name.upper()]]
    except KeyError:
        raise ArgumentError('unknown gate name: %s' % name)


def compose(first, second):
    """Id of the gate that applies ``first`` and then ``second``."""
    return int(_COMPOSE[_check_gate(first), _check_gate(second)])


def _check_gate(gate):
    gate = int(gate)
    if not 0 <= gate < N_GATES:
        raise ArgumentError('gate id %d is not in [0, %d)' % (gate, N_GATES))
    return gate


class StabilizerTableau(object):
    """The state as ``n`` destabilizer and ``n`` stabilizer generators.

    ``codes[i]`` is row ``i`` as a Pauli code array and ``phases[i]`` its
    power of ``i``. Rows ``0 .. n-1`` are the destabilizers, rows
    ``n .. 2n-1`` the stabilizers.
    """

    __slots__ = ('n_qubits', 'codes', 'phases')

    def __init__(self, n_qubits):
        if n_qubits < 1:
            raise ArgumentError('need at least one qubit')
        self.n_qubits = n = int(n_qubits)
        self.codes = np.zeros((2 * n, n), dtype=np.uint8)
        idx = np.arange(n)
        self.codes[idx, idx] = _CODES['X']
        self.codes[n + idx, idx] = _CODES['Z']
        self.phases = np.zeros(2 * n, dtype=np.uint8)

    def copy(self):
        new = StabilizerTableau.__new__(StabilizerTableau)
        new.n_qubits = self.n_qubits
        new.codes = self.codes.copy()
        new.phases = self.phases.copy()
        return new

    def _check_qubit(self, qubit):
        if not 0 <= qubit < self.n_qubits:
            raise IndexError('qubit %d out of range for %d qubits' % (
                qubit, self.n_qubits))

    def apply_single_qubit(self, gate, qubit):
        gate = _check_gate(gate)
        self._check_qubit(qubit)
        if gate == IDENTITY:
            return self
        col = self.codes[:, qubit]
        self.phases = (self.phases + _NEW_PHASES[gate][col]) & 3
        self.codes[:, qubit] = _NEW_CODES[gate][col]
        return self

    def apply_cnot(self, control, target):
        self._check_qubit(control)
        self._check_qubit(target)
        if control == target:
            raise ArgumentError('CNOT needs two distinct qubits, got %d' % control)
        cc = self.codes[:, control]
        tc = self.codes[:, target]
        xc, zc = cc & 1, cc >> 1
        xt, zt = tc & 1, tc >> 1
        flip = xc & zt & (xt ^ zc ^ 1)
        self.phases = (self.phases + 2 * flip) & 3
        xt = xt ^ xc
        zc = zc ^ zt
        self.codes[:, control] = xc | (zc << 1)
        self.codes[:, target] = xt | (zt << 1)
        return self

    def destabilizers(self):
        n = self.n_qubits
        return [PauliString(self.codes[i].copy(), self.phases[i])
                for i in range(n)]

    def stabilizers(self):
        n = self.n_qubits
        return [PauliString(self.codes[i].copy(), self.phases[i])
                for i in range(n, 2 * n)]

    def is_valid(self):
        """Check the symplectic structure: stabilizers commute with each
        other, destabilizers commute with each other, and destabilizer
        ``i`` anticommutes exactly with stabilizer ``i``.

        This implies the generator matrix is invertible over GF(2).
        """
        n = self.n_qubits
        anti = _ANTI[self.codes[:, None, :], self.codes[None, :, :]]
        gram = anti.sum(axis=2) & 1
        expected = np.zeros((2 * n, 2 * n), dtype=gram.dtype)
        idx = np.arange(n)
        expected[idx, n + idx] = 1
        expected[n + idx, idx] = 1
        return bool(np.array_equal(gram, expected)) and \
            bool(np.all(self.phases % 2 == 0))

    def _expectation_codes(self, codes, phase):
        n = self.n_qubits
        stab = self.codes[n:]
        if (_ANTI[stab, codes].sum(axis=1) & 1).any():
            return 0
        rows = np.flatnonzero(_ANTI[self.codes[:n], codes].sum(axis=1) & 1)
        acc = np.zeros(n, dtype=np.uint8)
        acc_phase = 0
        for i in rows:
            row = self.codes[n + i]
            acc_phase += int(self.phases[n + i]) + int(_G[acc, row].sum())
            acc ^= row
        # The state is the +1 eigenstate of i**acc_phase * P, and the
        # observable is i**phase * P.
        return 1 if (phase - acc_phase) % 4 == 0 else -1

    def pauli_expectation(self, observable):
        """Exact ``<psi|P|psi>``, always one of -1, 0 or +1."""
        if observable.n_qubits != self.n_qubits:
            raise ArgumentError('observable acts on %d qubits, state has %d' % (
                observable.n_qubits, self.n_qubits))
        if not observable.is_hermitian():
            raise ArgumentError(
                'observable %s has an imaginary phase' % observable)
        return self._expectation_codes(observable.codes, observable.phase)

    def expectations(self, codes, phases):
        """Expectations of many Hermitian Paulis at once, given as a
        ``(m, n)`` code matrix and ``m`` phases."""
        n = self.n_qubits
        codes = np.asarray(codes, dtype=np.uint8)
        out = np.zeros(len(codes), dtype=np.int64)
        if not len(codes):
            return out
        stab = self.codes[n:]
        anti = _ANTI[codes[:, None, :], stab[None, :, :]].sum(axis=2) & 1
        for k in np.flatnonzero(~anti.any(axis=1)):
            out[k] = self._expectation_codes(codes[k], int(phases[k]))
        return out

    def __eq__(self, other):
        if not isinstance(other, StabilizerTableau):
            return NotImplemented
        return self.n_qubits == other.n_qubits and \
            np.array_equal(self.codes, other.codes) and \
            np.array_equal(self.phases, other.phases)

    def __repr__(self):
        return '<StabilizerTableau %s>' % ', '.join(
            str(s) for s in self.stabilizers())


def hamiltonian_energy(tableau, hamiltonian):
    """``sum_i c_i <P_i>`` over the terms of ``hamiltonian``."""
    if hamiltonian.n_qubits != tableau.n_qubits:
        raise ArgumentError('Hamiltonian acts on %d qubits, state has %d' % (
            hamiltonian.n_qubits, tableau.n_qubits))
    if not hamiltonian.terms:
        return 0.0
    coeffs, codes, phases = hamiltonian.term_arrays()
    values = tableau.expectations(codes, phases)
    # Identity terms commute with everything and decompose to +1.
    return float(coeffs @ values)


def run_circuit(n_qubits, ops, tableau=None):
    """Apply ``ops`` to ``|0...0>`` (or to ``tableau``, in place).

    ``ops`` is a sequence of ``('c1', gate, qubit)`` and
    ``('cx', control, target)`` tuples.
    """
    if tableau is None:
        tableau = StabilizerTableau(n_qubits)
    for op in ops:
        kind = op[0]
        if kind == 'c1':
            tableau.apply_single_qubit(op[1], op[2])
        elif kind == 'cx':
            tableau.apply_cnot(op[1], op[2])
        else:
            raise ArgumentError('unknown circuit op: %r' % (op,))
    return tableau
