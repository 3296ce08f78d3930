"""Neural-guided Monte Carlo tree search over prefix sequences.

Each node keeps per-action arrays for the 24 gates: visit counts ``N``,
total values ``W`` and priors ``P``. Selection maximizes
``Q + c_puct * P * sqrt(N(s)) / (1 + N(s, a))``; leaves are expanded with
the network's priors and value, or scored with the normalized reward of
the finished circuit when the prefix has reached the horizon.
"""

import math
import logging
from dataclasses import dataclass

import numpy as np

from .clifford import N_GATES
from .exceptions import ArgumentError, SearchError


__all__ = ('SearchConfig', 'SearchNode', 'SearchContext', 'MCTS',
           'run_search', 'sample_action', 'temperature_at', 'reroot',
           'puct_scores', 'visit_distribution')


log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchConfig(object):
    c_puct: float = 1.0
    simulations: int = 100
    dirichlet_alpha: float = 0.15
    dirichlet_eps: float = 0.2
    tau_init: float = 1.0
    tau_final: float = 0.75
    decay_start: int = 25
    decay_fraction: float = 0.75
    boost_tau: float = 1.2

    def __post_init__(self):
        if self.simulations < 1:
            raise ArgumentError('need at least one simulation')
        if not 0.0 <= self.dirichlet_eps <= 1.0:
            raise ArgumentError('dirichlet_eps must be in [0, 1]')
        if min(self.tau_init, self.tau_final, self.boost_tau) <= 0:
            raise ArgumentError('temperatures must be positive')

    def replace(self, **changes):
        values = dict(self.__dict__)
        values.update(changes)
        return SearchConfig(**values)


class SearchNode(object):
    """A prefix in the search tree.

    ``visits`` is ``sum(N) + 1`` once the node is expanded: the node's own
    expansion counts as one visit.
    """

    __slots__ = ('prefix', 'horizon', 'N', 'W', 'P', 'raw_priors',
                 'children', 'expanded', 'terminal_value')

    def __init__(self, prefix=(), horizon=1):
        self.prefix = tuple(prefix)
        self.horizon = horizon
        self.N = np.zeros(N_GATES, dtype=np.int64)
        self.W = np.zeros(N_GATES)
        self.P = np.zeros(N_GATES)
        self.raw_priors = None
        self.children = {}
        self.expanded = False
        self.terminal_value = None

    @property
    def depth(self):
        return len(self.prefix)

    @property
    def is_terminal(self):
        return len(self.prefix) >= self.horizon

    @property
    def visits(self):
        return int(self.N.sum()) + (1 if self.expanded else 0)

    @property
    def Q(self):
        return np.divide(self.W, self.N, out=np.zeros(N_GATES),
                         where=self.N > 0)

    def expand(self, priors):
        priors = np.asarray(priors, dtype=float)
        self.raw_priors = priors
        self.P = priors.copy()
        self.expanded = True

    def child(self, action):
        node = self.children.get(action)
        if node is None:
            node = SearchNode(self.prefix + (int(action),), self.horizon)
            self.children[action] = node
        return node

    def size(self):
        """Number of nodes in this subtree."""
        return 1 + sum(c.size() for c in self.children.values())

    def __repr__(self):
        return '<SearchNode depth=%d visits=%d>' % (self.depth, self.visits)


class SearchContext(object):
    """What a search needs from the environment: the evaluator for finished
    prefixes, and the frozen normalizer that maps their raw rewards onto
    the value scale."""

    def __init__(self, evaluator, normalizer, tag='train'):
        self.evaluator = evaluator
        self.normalizer = normalizer
        self.tag = tag

    def terminal_value(self, prefix):
        reward = self.evaluator.evaluate(prefix, tag=self.tag)
        return self.normalizer.normalize(reward)


def puct_scores(node, c_puct):
    total = math.sqrt(node.visits)
    return node.Q + c_puct * node.P * total / (1.0 + node.N)


class MCTS(object):
    """Runs searches with one configuration and one random stream.

    ``net`` is anything with ``predict(prefix) -> (priors, value)``.
    """

    def __init__(self, config, rng):
        self.config = config
        self.rng = rng

    def _evaluate_leaf(self, node, context, net):
        if node.is_terminal:
            if node.terminal_value is None:
                node.terminal_value = context.terminal_value(node.prefix)
            return node.terminal_value
        priors, value = net.predict(node.prefix)
        node.expand(priors)
        return float(value)

    def _mix_noise(self, root):
        cfg = self.config
        if cfg.dirichlet_eps <= 0:
            root.P = root.raw_priors.copy()
            return
        noise = self.rng.dirichlet([cfg.dirichlet_alpha] * N_GATES)
        root.P = (1 - cfg.dirichlet_eps) * root.raw_priors + \
            cfg.dirichlet_eps * noise

    def run_search(self, root, context, net):
        """Run ``simulations`` simulations from ``root`` and return its
        per-action visit counts."""
        if root.is_terminal:
            raise ArgumentError('cannot search from a terminal node')
        remaining = self.config.simulations
        if not root.expanded:
            self._evaluate_leaf(root, context, net)
            remaining -= 1
        self._mix_noise(root)

        for _ in range(remaining):
            node, path = root, []
            while node.expanded and not node.is_terminal:
                # np.argmax picks the lowest index among ties.
                action = int(np.argmax(puct_scores(node, self.config.c_puct)))
                path.append((node, action))
                node = node.child(action)
            value = self._evaluate_leaf(node, context, net)
            for parent, action in path:
                parent.N[action] += 1
                parent.W[action] += value
        return root.N.copy()


def run_search(root, context, net, config, rng):
    return MCTS(config, rng).run_search(root, context, net)


def sample_action(visits, tau, rng=None):
    """Sample a gate with probability proportional to ``visits ** (1/tau)``.

    ``tau`` of ``0`` or ``None`` is greedy: the most visited gate, lowest
    index among ties.
    """
    visits = np.asarray(visits, dtype=float)
    if not visits.sum() > 0:
        raise SearchError('no visits to sample from; run a search first')
    if not tau:
        return int(np.argmax(visits))
    probs = visit_distribution(visits, tau)
    return int(rng.choice(len(visits), p=probs))


def visit_distribution(visits, tau=1.0):
    visits = np.asarray(visits, dtype=float)
    probs = np.zeros_like(visits)
    mask = visits > 0
    logs = np.log(visits[mask])
    weights = np.exp((logs - logs.max()) / tau)
    probs[mask] = weights / weights.sum()
    return probs


def temperature_at(step, horizon, config, boost=False):
    """Sampling temperature for move ``step`` of an episode.

    Constant ``tau_init`` before ``decay_start``, then an exponential decay
    that reaches ``tau_final`` exactly at ``ceil(decay_fraction *
    horizon)`` and stays there. ``boost`` overrides all of it with
    ``boost_tau``.
    """
    if boost:
        return config.boost_tau
    if step < config.decay_start:
        return config.tau_init
    threshold = math.ceil(config.decay_fraction * horizon)
    span = threshold - config.decay_start
    if step >= threshold or span <= 0:
        return config.tau_final
    ratio = config.tau_final / config.tau_init
    return config.tau_init * ratio ** ((step - config.decay_start) / span)


def reroot(root, action):
    """Make the child for ``action`` the new root, dropping its siblings.

    A child that was never expanded is replaced by a fresh node.
    """
    child = root.children.get(action)
    if child is None or not (child.expanded or child.is_terminal):
        child = SearchNode(root.prefix + (int(action),), root.horizon)
    root.children = {}
    return child
