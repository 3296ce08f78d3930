"""Circuit skeletons: the fixed Clifford structure of an ansatz with all
rotations at angle zero, plus one prefix slot in front of every rotation.

At angle zero each rotation is the identity, so the only non-trivial
single-qubit gates left in a circuit are the fixed Cliffords and
whatever the prefix slots are filled with.
"""

from collections import namedtuple

from .clifford import StabilizerTableau, gate_id, IDENTITY
from .exceptions import ArgumentError


__all__ = ('FixedClifford', 'PrefixSlot', 'CircuitSkeleton',
           'build_maqaoa_skeleton', 'build_hea_skeleton')


FixedClifford = namedtuple('FixedClifford', ('gate', 'qubits'))
FixedClifford.__doc__ = """A fixed gate: ``'cx'`` on ``(control, target)``
or a named single-qubit Clifford like ``'h'`` on ``(qubit,)``."""

PrefixSlot = namedtuple('PrefixSlot', ('slot_index', 'qubit'))


class CircuitSkeleton(object):
    """An ordered list of :class:`FixedClifford` and :class:`PrefixSlot`
    elements on ``n_qubits``.

    Skeletons are immutable once built and can be shared by workers.
    """

    def __init__(self, n_qubits, ops, name=None):
        self.n_qubits = int(n_qubits)
        self.ops = tuple(ops)
        self.name = name
        compiled = []
        slot_qubits = []
        for op in self.ops:
            if isinstance(op, PrefixSlot):
                if op.slot_index != len(slot_qubits):
                    raise ArgumentError(
                        'slot %d out of order, expected %d' % (
                            op.slot_index, len(slot_qubits)))
                self._check_qubit(op.qubit)
                slot_qubits.append(op.qubit)
                compiled.append(('slot', op.slot_index, op.qubit))
            elif op.gate == 'cx':
                control, target = op.qubits
                self._check_qubit(control)
                self._check_qubit(target)
                if control == target:
                    raise ArgumentError('CNOT on a single qubit %d' % control)
                compiled.append(('cx', control, target))
            else:
                (qubit,) = op.qubits
                self._check_qubit(qubit)
                compiled.append(('c1', gate_id(op.gate), qubit))
        self.slot_qubits = tuple(slot_qubits)
        self._compiled = tuple(compiled)

    def _check_qubit(self, qubit):
        if not 0 <= qubit < self.n_qubits:
            raise IndexError('qubit %d out of range for %d qubits' % (
                qubit, self.n_qubits))

    @property
    def n_slots(self):
        return len(self.slot_qubits)

    def circuit_ops(self, prefix):
        """The gate list with ``prefix`` in the first slots and the
        identity everywhere else, as ``('c1', ...)``/``('cx', ...)``
        tuples."""
        if len(prefix) > self.n_slots:
            raise ArgumentError('prefix of length %d does not fit %d slots' % (
                len(prefix), self.n_slots))
        t = len(prefix)
        ops = []
        for op in self._compiled:
            if op[0] != 'slot':
                ops.append(op)
            elif op[1] < t and prefix[op[1]] != IDENTITY:
                ops.append(('c1', int(prefix[op[1]]), op[2]))
        return ops

    def prepare(self, prefix):
        """Return the stabilizer state the skeleton produces with
        ``prefix`` substituted."""
        tableau = StabilizerTableau(self.n_qubits)
        t = len(prefix)
        if t > self.n_slots:
            raise ArgumentError('prefix of length %d does not fit %d slots' % (
                t, self.n_slots))
        for kind, a, b in self._compiled:
            if kind == 'slot':
                if a < t:
                    tableau.apply_single_qubit(prefix[a], b)
            elif kind == 'cx':
                tableau.apply_cnot(a, b)
            else:
                tableau.apply_single_qubit(a, b)
        return tableau

    def __repr__(self):
        return '<CircuitSkeleton %s: %d qubits, %d slots>' % (
            self.name or '', self.n_qubits, self.n_slots)


def _term_order(term):
    support = term[1].support
    return len(support), support


def build_maqaoa_skeleton(hamiltonian):
    """Multi-angle QAOA with one layer.

    Hadamards on every qubit, then one rotation per non-identity cost
    term in order of (support size, qubits), then one mixer rotation per
    qubit. A k-body ``Z`` term is a CNOT ladder onto its last qubit
    around the slot; for ``Z_i Z_j`` this is ``CNOT(i,j) slot(j)
    CNOT(i,j)``.
    """
    if not hamiltonian.is_diagonal():
        raise ArgumentError('ma-QAOA needs a diagonal cost Hamiltonian')
    n = hamiltonian.n_qubits
    ops = [FixedClifford('h', (q,)) for q in range(n)]
    slot = 0
    for _, pauli in sorted(hamiltonian.non_identity_terms(), key=_term_order):
        support = pauli.support
        ladder = [FixedClifford('cx', (a, b))
                  for a, b in zip(support, support[1:])]
        ops.extend(ladder)
        ops.append(PrefixSlot(slot, support[-1]))
        ops.extend(reversed(ladder))
        slot += 1
    for q in range(n):
        ops.append(PrefixSlot(slot, q))
        slot += 1
    return CircuitSkeleton(n, ops, name='maqaoa')


def build_hea_skeleton(n, reps=1):
    """Circular hardware-efficient ansatz starting from ``|0...0>``.

    Each repetition is a layer of Ry slots, a layer of Rz slots and a CNOT
    ring ``0->1, ..., n-1->0``; a final Ry/Rz layer closes the circuit,
    so there are ``2n(reps+1)`` slots.
    """
    if n < 2:
        raise ArgumentError('hardware-efficient ansatz needs 2 qubits, got %d' % n)
    if reps < 1:
        raise ArgumentError('need at least one repetition')
    ops = []
    slot = 0

    def rotation_layers():
        nonlocal slot
        for _ in range(2):
            for q in range(n):
                ops.append(PrefixSlot(slot, q))
                slot += 1

    for _ in range(reps):
        rotation_layers()
        for q in range(n):
            ops.append(FixedClifford('cx', (q, (q + 1) % n)))
    rotation_layers()
    return CircuitSkeleton(n, ops, name='hea')
