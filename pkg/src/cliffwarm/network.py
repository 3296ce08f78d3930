"""The policy/value network.

Tokens are ``START`` followed by the gate ids placed so far. Each token is
embedded (32 wide) and concatenated with a sinusoidal encoding of its
position inside the context window (96 wide). A vector describing the
Hamiltonian is added to every token, the sequence goes through a small
pre-norm Transformer encoder, and the heads read the last position.
"""

import math
import copy
import logging
from dataclasses import dataclass, asdict

import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from .clifford import N_GATES
from .exceptions import ArgumentError, TrainingError


__all__ = ('NetConfig', 'PolicyValueNet', 'NetworkOptimizer',
           'encode_hamiltonian', 'policy_value_loss', 'START', 'PAD',
           'N_TOKENS')


log = logging.getLogger(__name__)

START = 0
PAD = N_GATES + 1
N_TOKENS = N_GATES + 2

# One-hot slot of each Pauli code (I, X, Z, Y) in the order I, X, Y, Z.
_ONE_HOT_INDEX = np.array([0, 1, 3, 2])


@dataclass(frozen=True)
class NetConfig(object):
    layers: int = 2
    heads: int = 4
    model_dim: int = 128
    ff_dim: int = 256
    state_embed_dim: int = 32
    pos_embed_dim: int = 96
    context_len: int = 64
    policy_head: tuple = (128, 128, N_GATES)
    value_head: tuple = (256, 128, 64, 1)
    ham_mlp: tuple = (256, 128)
    max_qubits: int = 32

    def __post_init__(self):
        if self.state_embed_dim + self.pos_embed_dim != self.model_dim:
            raise ArgumentError(
                'state (%d) and positional (%d) embeddings must add up to '
                'the model width %d' % (self.state_embed_dim,
                                        self.pos_embed_dim, self.model_dim))
        if self.model_dim % self.heads:
            raise ArgumentError('model width %d not divisible by %d heads' % (
                self.model_dim, self.heads))
        if self.pos_embed_dim % 2:
            raise ArgumentError('positional embedding width must be even')
        if tuple(self.policy_head)[-1] != N_GATES:
            raise ArgumentError('policy head must end in %d outputs' % N_GATES)
        if tuple(self.value_head)[-1] != 1:
            raise ArgumentError('value head must end in a single output')
        if tuple(self.ham_mlp)[-1] != self.model_dim:
            raise ArgumentError('Hamiltonian MLP must end in the model width')
        for name in ('policy_head', 'value_head', 'ham_mlp'):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    def to_dict(self):
        return {k: list(v) if isinstance(v, tuple) else v
                for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def encode_hamiltonian(hamiltonian, max_qubits):
    """Per-term features: a one-hot over ``I, X, Y, Z`` for every qubit
    (padded or truncated to ``max_qubits``), followed by the coefficient
    divided by the largest absolute coefficient.

    Returns a ``(terms, 4 * max_qubits + 1)`` float array.
    """
    terms = hamiltonian.terms
    feats = np.zeros((len(terms), 4 * max_qubits + 1), dtype=np.float32)
    scale = max((abs(c) for c, _ in terms), default=0.0) or 1.0
    for k, (coeff, pauli) in enumerate(terms):
        codes = pauli.codes[:max_qubits]
        rows = np.arange(len(codes))
        onehot = np.zeros((max_qubits, 4), dtype=np.float32)
        onehot[rows, _ONE_HOT_INDEX[codes]] = 1.0
        feats[k, :-1] = onehot.reshape(-1)
        feats[k, -1] = coeff / scale
    return feats


def _mlp(in_dim, widths):
    layers = []
    for i, width in enumerate(widths):
        layers.append(nn.Linear(in_dim, width))
        if i < len(widths) - 1:
            layers.append(nn.GELU())
        in_dim = width
    return nn.Sequential(*layers)


def sinusoidal_encoding(positions, dim):
    """Sinusoidal encodings for an integer tensor of positions."""
    half = torch.arange(dim // 2, dtype=torch.float64, device=positions.device)
    freq = torch.exp(-math.log(10000.0) * 2 * half / dim)
    angles = positions.to(torch.float64).unsqueeze(-1) * freq
    enc = torch.stack((torch.sin(angles), torch.cos(angles)), dim=-1)
    return enc.flatten(-2)


class PolicyValueNet(nn.Module):

    def __init__(self, config=None):
        super().__init__()
        self.config = config = config or NetConfig()
        self.token_embedding = nn.Embedding(N_TOKENS, config.state_embed_dim)
        self.ham_mlp = _mlp(4 * config.max_qubits + 1, config.ham_mlp)
        self.ham_scale = nn.Parameter(torch.tensor(1.0))
        layer = nn.TransformerEncoderLayer(
            config.model_dim, config.heads, dim_feedforward=config.ff_dim,
            dropout=0.0, activation='gelu', batch_first=True, norm_first=True)
        self.encoder = nn.TransformerEncoder(
            layer, config.layers, norm=nn.LayerNorm(config.model_dim),
            enable_nested_tensor=False)
        self.policy_head = _mlp(config.model_dim, config.policy_head)
        self.value_head = _mlp(config.model_dim + config.state_embed_dim,
                               config.value_head)
        self.register_buffer(
            'ham_features',
            torch.zeros(0, 4 * config.max_qubits + 1), persistent=False)

    def set_hamiltonian(self, hamiltonian):
        feats = encode_hamiltonian(hamiltonian, self.config.max_qubits)
        param = next(self.parameters())
        self.ham_features = torch.as_tensor(feats).to(param.dtype)
        return self

    def hamiltonian_vector(self):
        """Mean of the per-term MLP outputs, times the learnable scale."""
        if not len(self.ham_features):
            raise ArgumentError('no Hamiltonian set on the network')
        return self.ham_mlp(self.ham_features).mean(dim=0) * self.ham_scale

    def tokenize(self, prefixes):
        """Left-padded ``(batch, length)`` token tensor and the padding
        mask for a list of gate-id sequences, each truncated to the last
        ``context_len`` tokens."""
        ctx = self.config.context_len
        seqs = [([START] + [int(g) + 1 for g in p])[-ctx:] for p in prefixes]
        width = max(len(s) for s in seqs)
        tokens = torch.full((len(seqs), width), PAD, dtype=torch.long)
        for row, seq in enumerate(seqs):
            tokens[row, width - len(seq):] = torch.tensor(seq, dtype=torch.long)
        return tokens, tokens == PAD

    def forward(self, prefixes):
        """Return ``(policy, value)``: ``(batch, 24)`` probabilities and
        ``(batch,)`` values in ``[-1, 1]``."""
        tokens, pad_mask = self.tokenize(prefixes)
        dtype = self.ham_scale.dtype
        n_pad = pad_mask.sum(dim=1, keepdim=True)
        positions = (torch.arange(tokens.shape[1]).unsqueeze(0) - n_pad).clamp(min=0)
        state = self.token_embedding(tokens)
        pos = sinusoidal_encoding(positions, self.config.pos_embed_dim).to(dtype)
        x = torch.cat((state, pos), dim=-1) + self.hamiltonian_vector()
        x = self.encoder(x, src_key_padding_mask=pad_mask if pad_mask.any() else None)
        h = x[:, -1]
        policy = F.softmax(self.policy_head(h), dim=-1)
        value = torch.tanh(self.value_head(
            torch.cat((h, state[:, -1]), dim=-1))).squeeze(-1)
        return policy, value

    @torch.no_grad()
    def predict(self, prefix):
        """Priors over the 24 gates and the value of a single prefix, as
        numpy/float."""
        policy, value = self([prefix])
        priors = policy[0].to(torch.float64).numpy()
        return priors / priors.sum(), float(value[0])

    def snapshot(self):
        """Frozen copy in eval mode, for the workers of one round."""
        frozen = copy.deepcopy(self)
        frozen.eval()
        for p in frozen.parameters():
            p.requires_grad_(False)
        return frozen


def policy_value_loss(net, prefixes, targets, returns, value_coef=2.0):
    """``L_p + c_v * L_v``: cross entropy against the search policy plus a
    Huber loss (threshold 1) against the episode return.

    Returns ``(total, policy_loss, value_loss)`` tensors.
    """
    dtype = net.ham_scale.dtype
    targets = torch.as_tensor(np.asarray(targets), dtype=dtype)
    returns = torch.as_tensor(np.asarray(returns), dtype=dtype)
    sums = targets.sum(dim=-1)
    if not torch.all(torch.abs(sums - 1) <= 1e-6):
        raise ArgumentError('policy targets must sum to 1')
    policy, value = net(prefixes)
    policy_loss = -(targets * torch.log(policy + 1e-10)).sum(dim=-1).mean()
    value_loss = F.huber_loss(value, returns, delta=1.0)
    return policy_loss + value_coef * value_loss, policy_loss, value_loss


class NetworkOptimizer(object):
    """AdamW with decoupled weight decay, a linear warmup of the learning
    rate, and global gradient-norm clipping.

    Update ``k`` (counting from 1) runs at ``peak * min(1, k / warmup)``.
    """

    def __init__(self, net, peak_lr=1e-4, weight_decay=1e-6,
                 warmup_steps=0, clip_norm=1.0):
        self.net = net
        self.peak_lr = peak_lr
        self.warmup_steps = int(warmup_steps)
        self.clip_norm = clip_norm
        self.optimizer = torch.optim.AdamW(
            net.parameters(), lr=peak_lr, weight_decay=weight_decay)
        self.scheduler = torch.optim.lr_scheduler.LambdaLR(
            self.optimizer, lambda index: self._lr_factor(index))
        self.step_count = 0

    def _lr_factor(self, index):
        if self.warmup_steps <= 0:
            return 1.0
        return min(1.0, (index + 1) / self.warmup_steps)

    def lr_at(self, step):
        """Learning rate of update number ``step``."""
        if step <= 0:
            return 0.0
        return self.peak_lr * self._lr_factor(step - 1)

    @property
    def current_lr(self):
        return self.optimizer.param_groups[0]['lr']

    def step(self, loss):
        """Backpropagate ``loss`` and apply one update. Returns the
        gradient norm before clipping."""
        if not torch.isfinite(loss):
            raise TrainingError('non-finite loss: %s' % loss.item())
        self.optimizer.zero_grad(set_to_none=True)
        loss.backward()
        params = [p for p in self.net.parameters() if p.grad is not None]
        if not all(torch.isfinite(p.grad).all() for p in params):
            raise TrainingError('non-finite gradient')
        norm = nn.utils.clip_grad_norm_(params, self.clip_norm)
        self.optimizer.step()
        self.scheduler.step()
        self.step_count += 1
        return float(norm)

    def state_dict(self):
        return {'optimizer': self.optimizer.state_dict(),
                'scheduler': self.scheduler.state_dict(),
                'step': self.step_count,
                'warmup_steps': self.warmup_steps}

    def load_state_dict(self, state):
        self.optimizer.load_state_dict(state['optimizer'])
        self.scheduler.load_state_dict(state['scheduler'])
        self.step_count = state['step']
        self.warmup_steps = state['warmup_steps']
