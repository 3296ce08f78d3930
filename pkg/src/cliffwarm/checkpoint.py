"""Reading and writing trainer checkpoints.

A checkpoint is a single ``torch.save`` file holding plain containers
only (dicts, lists, numbers and tensors), so it can be loaded with
``weights_only=True``.
"""

import os
import logging

import torch

from .exceptions import LoaderError
from .network import NetConfig, PolicyValueNet


__all__ = ('FORMAT_VERSION', 'save_checkpoint', 'load_checkpoint',
           'load_network')


log = logging.getLogger(__name__)


FORMAT_VERSION = 1


def _float32(state_dict):
    return {k: v.to(torch.float32) if v.is_floating_point() else v
            for k, v in state_dict.items()}


def save_checkpoint(filename, state):
    """Write ``state`` to ``filename``.

    ``state`` must hold ``net_config`` (a :class:`NetConfig`) and ``model``
    (the network's state dict); everything else is stored as given. The
    file is replaced atomically.
    """
    payload = dict(state)
    payload['format_version'] = FORMAT_VERSION
    payload['net_config'] = payload['net_config'].to_dict()
    payload['model'] = _float32(payload['model'])
    dirname = os.path.dirname(filename)
    if dirname and not os.path.exists(dirname):
        os.makedirs(dirname)
    tmp = filename + '.tmp'
    torch.save(payload, tmp)
    os.replace(tmp, filename)
    log.debug('wrote checkpoint %s', filename)


def load_checkpoint(filename):
    """Return the state written by :func:`save_checkpoint`, with
    ``net_config`` turned back into a :class:`NetConfig`."""
    if not os.path.exists(filename):
        raise LoaderError('checkpoint %s does not exist' % filename)
    try:
        state = torch.load(filename, map_location='cpu', weights_only=True)
    except Exception as e:
        raise LoaderError('cannot read checkpoint %s: %s' % (filename, e))
    version = state.get('format_version') if isinstance(state, dict) else None
    if version != FORMAT_VERSION:
        raise LoaderError('checkpoint %s has format version %r, expected %d' % (
            filename, version, FORMAT_VERSION))
    state['net_config'] = NetConfig.from_dict(state['net_config'])
    return state


def load_network(filename, hamiltonian=None):
    """Rebuild the policy/value network stored in a checkpoint."""
    state = load_checkpoint(filename)
    net = PolicyValueNet(state['net_config'])
    net.load_state_dict(state['model'])
    if hamiltonian is not None:
        net.set_hamiltonian(hamiltonian)
    return net, state
