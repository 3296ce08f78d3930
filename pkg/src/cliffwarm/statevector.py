"""Dense statevector simulation, used as a reference for the stabilizer
simulator and the circuit evaluator.
"""

import numpy as np

from .clifford import clifford_table
from .exceptions import ArgumentError, ResourceError


__all__ = ('StatevectorSimulator', 'statevector_reference',
           'MAX_STATEVECTOR_QUBITS')


MAX_STATEVECTOR_QUBITS = 10


class StatevectorSimulator(object):
    """``2**n`` amplitudes; basis index bit ``k`` is qubit ``k``."""

    def __init__(self, n_qubits):
        if n_qubits > MAX_STATEVECTOR_QUBITS:
            raise ResourceError('statevector on %d qubits exceeds the limit '
                                'of %d' % (n_qubits, MAX_STATEVECTOR_QUBITS))
        self.n_qubits = n_qubits
        self.state = np.zeros(1 << n_qubits, dtype=complex)
        self.state[0] = 1.0
        self._unitaries = [g.unitary() for g in clifford_table()]

    def _check_qubit(self, qubit):
        if not 0 <= qubit < self.n_qubits:
            raise IndexError('qubit %d out of range' % qubit)

    def apply_unitary(self, matrix, qubit):
        self._check_qubit(qubit)
        psi = self.state.reshape(-1, 2, 1 << qubit)
        self.state = np.einsum('ab,ibj->iaj', matrix, psi).reshape(-1)
        return self

    def apply_single_qubit(self, gate, qubit):
        return self.apply_unitary(self._unitaries[gate], qubit)

    def apply_cnot(self, control, target):
        self._check_qubit(control)
        self._check_qubit(target)
        if control == target:
            raise ArgumentError('CNOT needs two distinct qubits')
        idx = np.arange(len(self.state))
        src = np.where((idx >> control) & 1, idx ^ (1 << target), idx)
        self.state = self.state[src]
        return self

    def apply_pauli(self, pauli):
        """Return ``P|psi>`` without changing the state."""
        idx = np.arange(len(self.state))
        shifts = 1 << np.arange(self.n_qubits)
        xmask = int(np.dot(pauli.x_bits.astype(np.int64), shifts))
        zmask = int(np.dot(pauli.z_bits.astype(np.int64), shifts))
        n_y = int(np.sum(pauli.codes == 3))
        parity = np.zeros(len(idx), dtype=np.int64)
        masked = idx & zmask
        for q in range(self.n_qubits):
            parity ^= (masked >> q) & 1
        out = np.zeros_like(self.state)
        out[idx ^ xmask] = (1j ** (pauli.phase + n_y)) * \
            (1 - 2 * parity) * self.state
        return out

    def expectation(self, pauli):
        if pauli.n_qubits != self.n_qubits:
            raise ArgumentError('observable size mismatch')
        return float(np.vdot(self.state, self.apply_pauli(pauli)).real)

    def energy(self, hamiltonian):
        return sum(c * self.expectation(p) for c, p in hamiltonian.terms)


def statevector_reference(n_qubits, ops):
    """Simulate ``ops`` (``('c1', gate, qubit)`` and ``('cx', control,
    target)`` tuples, as for :func:`cliffwarm.clifford.run_circuit`) on a
    dense state and return the simulator, ready for ``expectation()``.
    """
    sim = StatevectorSimulator(n_qubits)
    for op in ops:
        if op[0] == 'c1':
            sim.apply_single_qubit(op[1], op[2])
        elif op[0] == 'cx':
            sim.apply_cnot(op[1], op[2])
        else:
            raise ArgumentError('unknown circuit op: %r' % (op,))
    return sim
