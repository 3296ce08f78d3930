import math

import numpy as np
import pytest

from cliffwarm.ansatz import build_maqaoa_skeleton
from cliffwarm.cache import MemoryCache
from cliffwarm.episode import CircuitEvaluator, RewardNormalizer
from cliffwarm.exceptions import ArgumentError, SearchError
from cliffwarm.mcts import (SearchConfig, SearchNode, SearchContext, MCTS,
                            run_search, puct_scores, sample_action,
                            visit_distribution, temperature_at, reroot)
from cliffwarm.problems import WeightedGraph, maxcut_hamiltonian
from cliffwarm.utils import spawn_rng

from .helpers import assert_raises_regex


class UniformNet(object):
    """Uniform priors and a constant value."""

    def __init__(self, value=0.0):
        self.value = value
        self.calls = 0

    def predict(self, prefix):
        self.calls += 1
        return np.full(24, 1 / 24), self.value


class PreferringNet(object):
    """Puts most of the prior on one gate."""

    def __init__(self, gate):
        self.gate = gate

    def predict(self, prefix):
        priors = np.full(24, 0.2 / 23)
        priors[self.gate] = 0.8
        return priors, 0.0


def make_context(n=2):
    h = maxcut_hamiltonian(WeightedGraph(n, [(0, 1, 1)]))
    evaluator = CircuitEvaluator(build_maqaoa_skeleton(h), h,
                                 cache=MemoryCache())
    return SearchContext(evaluator, RewardNormalizer.from_stats(0.5, 0.5))


NO_NOISE = SearchConfig(dirichlet_eps=0.0)


class TestPUCT(object):

    def test_hand_computed(self):
        node = SearchNode((), 10)
        node.expand(np.zeros(24))
        node.P[0], node.P[1] = 0.5, 0.6
        node.N[0], node.W[0] = 1, 0.5
        # N(s) = sum N + 1 = 2; make it 4 with two more visits elsewhere
        node.N[2], node.W[2] = 2, -2.0
        assert node.visits == 4
        scores = puct_scores(node, 1.0)
        assert scores[0] == pytest.approx(1.0)
        assert scores[1] == pytest.approx(1.2)
        assert int(np.argmax(scores)) == 1

    def test_ties_go_to_lowest_index(self):
        root = SearchNode((), 5)
        MCTS(NO_NOISE.replace(simulations=2), spawn_rng(0)).run_search(
            root, make_context(), UniformNet())
        assert root.N[0] == 1
        assert root.N.sum() == 1

    def test_q_times_n_is_w(self):
        root = SearchNode((), 3)
        run_search(root, make_context(), UniformNet(0.3),
                   SearchConfig(simulations=50), spawn_rng(1))
        stack = [root]
        while stack:
            node = stack.pop()
            assert np.allclose(node.Q * node.N, node.W)
            stack.extend(node.children.values())


class TestSearch(object):

    def test_single_simulation(self):
        root = SearchNode((), 5)
        net = UniformNet()
        visits = MCTS(SearchConfig(simulations=1), spawn_rng(2)).run_search(
            root, make_context(), net)
        assert root.expanded
        assert root.visits == 1
        assert visits.sum() == 0
        assert net.calls == 1

    def test_visit_bookkeeping(self):
        root = SearchNode((), 5)
        visits = MCTS(SearchConfig(simulations=40), spawn_rng(3)).run_search(
            root, make_context(), UniformNet())
        assert visits.sum() == 39
        assert root.visits == 40

        def check(node):
            if node.expanded:
                for action, child in node.children.items():
                    if child.expanded:
                        assert node.N[action] == child.visits
                    check(child)
        check(root)

    def test_uniform_stub(self):
        root = SearchNode((), 300)
        visits = MCTS(NO_NOISE.replace(simulations=240),
                      spawn_rng(4)).run_search(root, make_context(),
                                               UniformNet())
        mean = visits.sum() / 24
        assert np.all(np.abs(visits - mean) <= 1)

    def test_priors_sum_to_one(self):
        root = SearchNode((), 5)
        MCTS(SearchConfig(simulations=10), spawn_rng(5)).run_search(
            root, make_context(), UniformNet())
        assert root.P.sum() == pytest.approx(1.0)
        assert not np.allclose(root.P, root.raw_priors)

    def test_noise_redrawn_every_search(self):
        root = SearchNode((), 5)
        mcts = MCTS(SearchConfig(simulations=5), spawn_rng(6))
        context, net = make_context(), UniformNet()
        mcts.run_search(root, context, net)
        first = root.P.copy()
        mcts.run_search(root, context, net)
        assert not np.allclose(first, root.P)

    def test_terminal_leaves(self):
        context = make_context()
        root = SearchNode((), 1)
        visits = MCTS(NO_NOISE.replace(simulations=30),
                      spawn_rng(7)).run_search(root, context, UniformNet())
        assert visits.sum() == 29
        for action, child in root.children.items():
            assert child.terminal_value == pytest.approx(
                context.normalizer.normalize(
                    context.evaluator.evaluate([action])))
            assert root.W[action] == pytest.approx(
                root.N[action] * child.terminal_value)

    def test_terminal_root(self):
        assert_raises_regex(ArgumentError, 'terminal', run_search,
                            SearchNode((0,), 1), make_context(), UniformNet(),
                            SearchConfig(), spawn_rng(8))

    def test_deterministic(self):
        results = []
        for _ in range(2):
            root = SearchNode((), 3)
            results.append(run_search(root, make_context(), UniformNet(),
                                      SearchConfig(simulations=60),
                                      spawn_rng(9)))
        assert np.array_equal(results[0], results[1])


class TestSampling(object):

    def test_degenerate(self):
        visits = np.zeros(24)
        visits[0] = 10
        rng = spawn_rng(10)
        assert all(sample_action(visits, 1.0, rng) == 0 for _ in range(20))

    def test_proportional(self):
        visits = np.zeros(24)
        visits[:2] = [8, 2]
        assert visit_distribution(visits, 1.0)[:2] == pytest.approx([0.8, 0.2])

    def test_sharpened(self):
        visits = np.zeros(24)
        visits[:2] = [8, 2]
        probs = visit_distribution(visits, 0.5)
        assert probs[:2] == pytest.approx([64 / 68, 4 / 68])
        assert probs[0] == pytest.approx(0.941, abs=1e-3)

    def test_sampling_frequencies(self):
        visits = np.zeros(24)
        visits[:2] = [8, 2]
        rng = spawn_rng(11)
        draws = [sample_action(visits, 1.0, rng) for _ in range(4000)]
        assert set(draws) == {0, 1}
        assert draws.count(0) / 4000 == pytest.approx(0.8, abs=0.03)

    def test_greedy(self):
        visits = np.zeros(24)
        visits[[3, 7]] = 5
        visits[1] = 4
        assert sample_action(visits, 0) == 3
        assert sample_action(visits, None) == 3

    def test_no_visits(self):
        assert_raises_regex(SearchError, 'run a search', sample_action,
                            np.zeros(24), 1.0, spawn_rng(12))


class TestTemperature(object):

    def test_before_decay(self):
        assert temperature_at(10, 100, SearchConfig()) == 1.0
        assert temperature_at(24, 100, SearchConfig()) == 1.0

    def test_decay(self):
        assert temperature_at(50, 100, SearchConfig()) == pytest.approx(
            0.75 ** 0.5)
        assert temperature_at(50, 100, SearchConfig()) == pytest.approx(
            0.866, abs=1e-3)
        assert temperature_at(25, 100, SearchConfig()) == pytest.approx(1.0)

    def test_after_threshold(self):
        for step in (75, 76, 99):
            assert temperature_at(step, 100, SearchConfig()) == 0.75

    def test_short_horizon(self):
        # ceil(0.75 * 30) = 23 comes before the decay start
        assert temperature_at(26, 30, SearchConfig()) == 0.75
        assert temperature_at(3, 30, SearchConfig()) == 1.0

    def test_monotone(self):
        taus = [temperature_at(s, 137, SearchConfig()) for s in range(137)]
        assert all(a >= b for a, b in zip(taus, taus[1:]))
        assert taus[-1] == 0.75
        assert taus[103] == 0.75 and taus[102] > 0.75
        assert math.ceil(0.75 * 137) == 103

    def test_boost(self):
        assert temperature_at(80, 100, SearchConfig(), boost=True) == 1.2


class TestReroot(object):

    def test_keeps_statistics(self):
        root = SearchNode((), 3)
        mcts = MCTS(NO_NOISE.replace(simulations=100), spawn_rng(13))
        context, net = make_context(), PreferringNet(4)
        mcts.run_search(root, context, net)
        child = root.children[4]
        visits = child.N.copy()
        new_root = reroot(root, 4)
        assert new_root is child
        assert new_root.prefix == (4,)
        assert np.array_equal(new_root.N, visits)
        assert root.children == {}
        before = new_root.N.sum()
        mcts.run_search(new_root, context, net)
        assert new_root.N.sum() == before + 100

    def test_unexpanded_child(self):
        root = SearchNode((), 5)
        MCTS(SearchConfig(simulations=1), spawn_rng(14)).run_search(
            root, make_context(), UniformNet())
        child = reroot(root, 9)
        assert child.prefix == (9,)
        assert not child.expanded
        assert child.visits == 0

    def test_terminal_child(self):
        root = SearchNode((), 1)
        MCTS(NO_NOISE.replace(simulations=3), spawn_rng(15)).run_search(
            root, make_context(), UniformNet())
        child = reroot(root, 0)
        assert child.is_terminal
        assert child.terminal_value is not None

    def test_prunes_siblings(self):
        root = SearchNode((), 3)
        MCTS(SearchConfig(simulations=80), spawn_rng(16)).run_search(
            root, make_context(), UniformNet())
        size = root.size()
        action = max(root.children, key=lambda a: root.children[a].size())
        child = reroot(root, action)
        assert child.size() < size
