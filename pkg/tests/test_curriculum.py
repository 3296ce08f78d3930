import math

import numpy as np
import pytest

from cliffwarm.ansatz import CircuitSkeleton, PrefixSlot
from cliffwarm.clifford import gate_id
from cliffwarm.curriculum import CurriculumSchedule, Expansion, horizon_at
from cliffwarm.episode import CircuitEvaluator
from cliffwarm.exceptions import ArgumentError
from cliffwarm.problems import Hamiltonian
from cliffwarm.trainer import Trainer
from cliffwarm.utils import spawn_rng

from .helpers import TempRunHelper, assert_raises_regex


class TestHorizon(object):

    @pytest.mark.parametrize('episode,horizon', [
        (0, 25), (100, 25), (249, 25), (250, 50), (300, 50), (499, 50),
        (500, 100), (600, 100), (999, 100)])
    def test_stages(self, episode, horizon):
        assert horizon_at(episode, 1000, 100) == horizon

    def test_disabled(self):
        assert horizon_at(0, 1000, 100, enabled=False) == 100

    def test_rounds_up(self):
        assert horizon_at(0, 1000, 137) == 35
        assert horizon_at(400, 1000, 137) == 69

    def test_boundaries(self):
        rng = spawn_rng(5)
        for _ in range(100):
            total = int(rng.integers(4, 100000))
            first, second = -(-total // 4), -(-total // 2)
            assert horizon_at(first - 1, total, 100) == 25
            assert horizon_at(first, total, 100) == 50 or first == second
            assert horizon_at(second - 1, total, 100) <= 50
            assert horizon_at(second, total, 100) == 100


class TestSchedule(object):

    def test_expansions(self):
        schedule = CurriculumSchedule(1000, 100)
        assert schedule.expansions == [Expansion(250, 25, 50),
                                       Expansion(500, 50, 100)]
        assert schedule.boost_length == 50

    def test_boost_windows(self):
        schedule = CurriculumSchedule(1000, 100)
        assert schedule.boost_window(249) is None
        assert schedule.boost_window(250).horizon == 50
        assert schedule.boost_window(299).horizon == 50
        assert schedule.boost_window(300) is None
        assert schedule.boost_window(549).horizon == 100
        assert schedule.boost_window(550) is None

    def test_boost_only_on_new_steps(self):
        schedule = CurriculumSchedule(1000, 100)
        assert not schedule.is_boosted(260, 24)
        assert schedule.is_boosted(260, 25)
        assert schedule.is_boosted(510, 50)
        assert not schedule.is_boosted(510, 49)
        assert not schedule.is_boosted(700, 99)

    def test_disabled(self):
        schedule = CurriculumSchedule(1000, 100, enabled=False)
        assert schedule.expansions == []
        assert schedule.horizon(0) == 100
        assert schedule.boost_from(250) is None

    def test_short_run(self):
        schedule = CurriculumSchedule(4, 4)
        assert [schedule.horizon(e) for e in range(4)] == [1, 2, 4, 4]
        assert [e.episode for e in schedule.expansions] == [1, 2]
        # the first window stops where the second stage begins
        assert schedule.boost_window(1).episode == 1
        assert schedule.boost_window(2).episode == 2

    def test_invalid(self):
        assert_raises_regex(ArgumentError, 'positive', CurriculumSchedule,
                            0, 100)
        assert_raises_regex(ArgumentError, 'boost fraction',
                            CurriculumSchedule, 100, 100, boost_fraction=1.0)


def sparse_fixture(n=8, heavy=10.0):
    """Slot ``k`` acts on qubit ``k`` alone, starting from ``|0>``. The
    reward is positive only while every heavy qubit keeps ``<Z> = +1``:
    an identity-padded short prefix does, a random full prefix almost
    never does."""
    skeleton = CircuitSkeleton(n, [PrefixSlot(k, k) for k in range(n)],
                               name='sparse')
    weights = [1.0, 1.0] + [heavy] * (n - 2)
    terms = [(sum(weights) - 2.5, 'I' * n)]
    terms += [(-w, 'I' * k + 'Z' + 'I' * (n - k - 1))
              for k, w in enumerate(weights)]
    return skeleton, Hamiltonian.from_labels(terms)


class TestSparseRewards(TempRunHelper):

    def test_fixture(self):
        skeleton, h = sparse_fixture()
        evaluator = CircuitEvaluator(skeleton, h)
        assert evaluator.evaluate([]) == pytest.approx(2.5)
        # X flips a heavy qubit, S keeps it in |0>
        assert evaluator.evaluate([0, 0, gate_id('X')]) < 0
        assert evaluator.evaluate([gate_id('S')] * 8) == pytest.approx(2.5)

    def first_positive_episode(self, seed, curriculum):
        self.env.config['curriculum'] = curriculum
        skeleton, h = sparse_fixture()
        trainer = Trainer(h, skeleton, self.env.train_config(seed),
                          self.env.search_config(), self.env.net_config(),
                          cache=self.env.cache, threads=self.env.threads)
        trainer.run()
        return trainer.first_positive_episode

    def test_first_positive_episode_comes_earlier(self):
        def median(episodes):
            return float(np.median([math.inf if e is None else e
                                    for e in episodes]))
        seeds = [0, 1, 2]
        with_curriculum = [self.first_positive_episode(s, True)
                           for s in seeds]
        without = [self.first_positive_episode(s, False) for s in seeds]
        # the first round plays horizon 2 under the curriculum
        assert median(with_curriculum) < self.env.config['episodes_per_round']
        assert median(with_curriculum) < median(without)
