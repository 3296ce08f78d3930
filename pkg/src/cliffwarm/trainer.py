"""Self-play training.

Every round, a batch of workers each play one episode against a frozen
snapshot of the network: at every move a search runs from the current
prefix, a gate is sampled from the root visit counts, and the tree is
re-rooted at that gate. The finished episodes update the reward
statistics and fill the sample buffers, then the network is trained for a
fixed number of mini-batch updates.
"""

import os
import csv
import copy
import json
import math
import logging
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np
import torch

from .buffers import (TrainingSample, ReplayBuffer, BestGameBuffer,
                      mixed_batch, sample_ratio)
from .cache import EvaluationCounter, get_cache
from .checkpoint import save_checkpoint, load_checkpoint
from .curriculum import CurriculumSchedule
from .episode import CircuitEvaluator, EpisodeState, RewardNormalizer
from .exceptions import ArgumentError, TrainingError
from .mcts import (MCTS, SearchConfig, SearchContext, SearchNode, reroot,
                   sample_action, temperature_at, visit_distribution)
from .network import NetConfig, NetworkOptimizer, PolicyValueNet, \
    policy_value_loss
from .utils import spawn_rng


__all__ = ('TrainRunConfig', 'Trainer', 'RoundReport', 'BudgetReport',
           'EpisodeResult', 'EvalResult', 'play_episode', 'evaluate_policy',
           'ROUND_COLUMNS')


log = logging.getLogger(__name__)


# Stream keys for spawn_rng; worker streams add the worker index.
_WORKER_STREAM = 0
_BATCH_STREAM = 1
_EVAL_STREAM = 2
_INIT_STREAM = 3

ROUND_COLUMNS = ('round', 'episodes', 'best_R', 'mean_R', 'loss_p',
                 'loss_v', 'evals', 'accuracy', 'best_E')


@dataclass(frozen=True)
class TrainRunConfig(object):
    total_episodes: int = 60000
    workers: int = 30
    episodes_per_round: int = 30
    warmup_simulations: int = 50
    simulations: int = 100
    eval_simulations: int = 100
    warmup_fraction: float = 0.1
    epochs: int = 16
    batch_size: int = 1024
    learning_rate: float = 1e-4
    weight_decay: float = 1e-6
    value_coef: float = 2.0
    clip_norm: float = 1.0
    replay_capacity: int = 500000
    best_capacity: int = 1000
    replay_start: int = 300
    mix_start: int = 600
    best_fraction: float = 0.1
    curriculum: bool = True
    boost_fraction: float = 0.05
    eval_period: int = 10
    eval_dirichlet_alpha: float = 0.15
    eval_dirichlet_eps: float = 0.1
    checkpoint_period: int = 10
    seed: int = 0

    def __post_init__(self):
        for name in ('total_episodes', 'workers', 'episodes_per_round',
                     'warmup_simulations', 'simulations', 'eval_simulations',
                     'epochs', 'batch_size', 'replay_capacity',
                     'best_capacity', 'eval_period', 'checkpoint_period'):
            if getattr(self, name) < 1:
                raise ArgumentError('%s must be positive' % name)
        if not 0.0 <= self.warmup_fraction <= 1.0:
            raise ArgumentError('warmup_fraction must be in [0, 1]')
        if not 0.0 <= self.best_fraction <= 1.0:
            raise ArgumentError('best_fraction must be in [0, 1]')
        if self.mix_start < self.replay_start:
            raise ArgumentError('mixing cannot start before training')

    @property
    def warmup_episodes(self):
        return self.warmup_fraction * self.total_episodes

    @property
    def warmup_steps(self):
        """Learning-rate warmup in optimizer updates: the warmup episodes
        converted to rounds, times the updates per round."""
        rounds = self.warmup_episodes / self.episodes_per_round
        return int(round(rounds * self.epochs))

    def to_dict(self):
        return asdict(self)


RoundReport = namedtuple('RoundReport', (
    'round', 'episodes', 'horizon', 'best_R', 'mean_R', 'loss_p', 'loss_v',
    'evals', 'accuracy', 'best_E', 'steps', 'aborted'))

BudgetReport = namedtuple('BudgetReport', (
    'evaluations', 'rounds', 'episodes', 'evaluations_without_eval'))
BudgetReport.__doc__ = """Counters a baseline is matched against.
``evaluations`` includes simulations first triggered by greedy evaluation
episodes, ``evaluations_without_eval`` leaves them out."""

EpisodeResult = namedtuple('EpisodeResult', ('prefix', 'reward', 'steps'))
EvalResult = namedtuple('EvalResult', ('prefix', 'reward', 'energy',
                                       'accuracy'))


def accuracy_of(energy, e_opt):
    """``E / E_opt``; ``None`` without a reference energy."""
    if e_opt is None or energy is None or e_opt == 0:
        return None
    return energy / e_opt


def play_episode(net, evaluator, normalizer, search, horizon, full_horizon,
                 rng, boost_from=None, tag='train'):
    """Play one episode and return an :class:`EpisodeResult` whose
    ``steps`` are ``(prefix, visit frequencies)`` pairs, one per move."""
    mcts = MCTS(search, rng)
    context = SearchContext(evaluator, normalizer, tag=tag)
    state = EpisodeState(horizon)
    root = SearchNode(state.prefix, state.horizon)
    steps = []
    while not state.is_terminal:
        visits = mcts.run_search(root, context, net)
        step = len(state)
        boost = boost_from is not None and step >= boost_from
        tau = temperature_at(step, full_horizon, search, boost=boost)
        action = sample_action(visits, tau, rng)
        steps.append((state.prefix, visit_distribution(visits)))
        state = state.step(action)
        root = reroot(root, action)
    reward = evaluator.evaluate_state(state, tag=tag)
    return EpisodeResult(state.prefix, reward, steps)


def evaluate_policy(net, evaluator, normalizer, search, horizon, rng,
                    e_opt=None):
    """One greedy episode over the full ``horizon``: at every move the most
    visited gate is taken. Returns an :class:`EvalResult`."""
    mcts = MCTS(search, rng)
    context = SearchContext(evaluator, normalizer, tag='eval')
    state = EpisodeState(horizon)
    root = SearchNode(state.prefix, state.horizon)
    while not state.is_terminal:
        visits = mcts.run_search(root, context, net)
        action = sample_action(visits, 0)
        state = state.step(action)
        root = reroot(root, action)
    reward = evaluator.evaluate_state(state, tag='eval')
    return EvalResult(state.prefix, reward, -reward,
                      accuracy_of(-reward, e_opt))


class Trainer(object):
    """Owns the network, the optimizer, the buffers, the reward statistics
    and the evaluation cache of one training run.

    ``directory``, if given, receives ``config.json``, ``rounds.csv``,
    ``best_prefix.json`` and ``checkpoints/``.
    """

    def __init__(self, hamiltonian, skeleton, config=None, search=None,
                 net_config=None, e_opt=None, cache=True, directory=None,
                 threads=None, metadata=None):
        self.hamiltonian = hamiltonian
        self.skeleton = skeleton
        self.config = config = config or TrainRunConfig()
        self.search = search or SearchConfig()
        self.net_config = net_config or NetConfig()
        self.e_opt = e_opt
        self.directory = directory
        self.threads = int(threads or config.workers)
        self.metadata = dict(metadata or {})

        if hamiltonian.n_qubits > self.net_config.max_qubits:
            raise ArgumentError('%d qubits exceed the network limit of %d' % (
                hamiltonian.n_qubits, self.net_config.max_qubits))
        self.full_horizon = skeleton.n_slots
        self.curriculum = CurriculumSchedule(
            config.total_episodes, self.full_horizon, config.curriculum,
            config.boost_fraction)

        self.counter = EvaluationCounter()
        self.cache = get_cache(cache)
        self.evaluator = CircuitEvaluator(skeleton, hamiltonian,
                                          cache=self.cache,
                                          counter=self.counter)
        with torch.random.fork_rng():
            torch.manual_seed(int(spawn_rng(config.seed, _INIT_STREAM)
                                  .integers(2 ** 31)))
            self.net = PolicyValueNet(self.net_config)
        self.net.set_hamiltonian(hamiltonian)
        self.optimizer = NetworkOptimizer(
            self.net, peak_lr=config.learning_rate,
            weight_decay=config.weight_decay,
            warmup_steps=config.warmup_steps, clip_norm=config.clip_norm)
        self.normalizer = RewardNormalizer()
        self.replay = ReplayBuffer(config.replay_capacity)
        self.best_games = BestGameBuffer(config.best_capacity)

        self.rounds = 0
        self.episodes = 0
        self.best_reward = -math.inf
        self.best_prefix = None
        self.first_positive_episode = None
        self.history = []
        self.evaluations_log = []

    # Budget

    def budget_report(self):
        total = self.counter.total
        return BudgetReport(total, self.rounds, self.episodes,
                            total - self.counter.get('eval'))

    @property
    def finished(self):
        return self.episodes >= self.config.total_episodes

    @property
    def best_energy(self):
        if self.best_prefix is None:
            return None
        return -self.best_reward

    @property
    def accuracy(self):
        return accuracy_of(self.best_energy, self.e_opt)

    def _record_best(self, prefix, reward):
        if reward > self.best_reward:
            self.best_reward = reward
            self.best_prefix = self.evaluator.key(prefix)
            return True
        return False

    # Episodes

    def simulations_at(self, episode):
        if episode < self.config.warmup_episodes:
            return self.config.warmup_simulations
        return self.config.simulations

    def _play(self, net, normalizer, round_index, worker, episode):
        rng = spawn_rng(self.config.seed, _WORKER_STREAM, round_index, worker)
        search = self.search.replace(simulations=self.simulations_at(episode))
        horizon = self.curriculum.horizon(episode)
        boost_from = self.curriculum.boost_from(episode)
        return play_episode(net, self.evaluator, normalizer, search, horizon,
                            self.full_horizon, rng, boost_from=boost_from)

    def collect(self):
        """Play the episodes of the next round in parallel and return them
        in worker order."""
        n = min(self.config.episodes_per_round,
                self.config.total_episodes - self.episodes)
        net = self.net.snapshot()
        normalizer = self.normalizer.snapshot()
        round_index = self.rounds
        start = self.episodes
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            futures = [pool.submit(self._play, net, normalizer, round_index,
                                   w, start + w) for w in range(n)]
            return [f.result() for f in futures]

    def _admit(self, results):
        for i, result in enumerate(results):
            episode = self.episodes + i
            self.normalizer.update(result.reward)
            z = self.normalizer.normalize(result.reward)
            samples = [TrainingSample(prefix, target, z)
                       for prefix, target in result.steps]
            self.replay.extend(samples)
            self.best_games.admit(result.reward, samples)
            self._record_best(result.prefix, result.reward)
            if result.reward > 0 and self.first_positive_episode is None:
                self.first_positive_episode = episode
            log.debug('episode %d: R=%.4g, %d moves', episode,
                      result.reward, len(result.steps))
        self.episodes += len(results)

    # Optimization

    def _good_state(self):
        return (copy.deepcopy(self.net.state_dict()),
                copy.deepcopy(self.optimizer.state_dict()))

    def _restore(self, state):
        self.net.load_state_dict(state[0])
        self.optimizer.load_state_dict(state[1])

    def optimize(self):
        """Run this round's updates. Returns ``(policy loss, value loss,
        steps, aborted)`` with the losses averaged over the updates."""
        cfg = self.config
        ratio = sample_ratio(self.episodes, cfg.replay_start, cfg.mix_start,
                             cfg.best_fraction)
        if sum(ratio) <= 0 or not len(self.replay):
            return None, None, 0, False
        rng = spawn_rng(cfg.seed, _BATCH_STREAM, self.rounds)
        good = self._good_state()
        self.net.train()
        losses_p, losses_v = [], []
        try:
            for _ in range(cfg.epochs):
                batch = mixed_batch(rng, self.replay, self.best_games,
                                    cfg.batch_size, ratio)
                total, lp, lv = policy_value_loss(
                    self.net, [s.prefix for s in batch],
                    np.stack([s.target for s in batch]),
                    [s.z for s in batch], value_coef=cfg.value_coef)
                self.optimizer.step(total)
                losses_p.append(lp.item())
                losses_v.append(lv.item())
        except TrainingError as e:
            log.warning('round %d aborted: %s; restoring the last good state',
                        self.rounds, e)
            self._restore(good)
            return None, None, 0, True
        finally:
            self.net.eval()
        return (float(np.mean(losses_p)), float(np.mean(losses_v)),
                len(losses_p), False)

    def run_round(self):
        """Collect one round of episodes, train on them and return a
        :class:`RoundReport`."""
        if self.finished:
            raise ArgumentError('all %d episodes have been played' %
                                self.config.total_episodes)
        horizon = self.curriculum.horizon(self.episodes)
        results = self.collect()
        self._admit(results)
        loss_p, loss_v, steps, aborted = self.optimize()
        rewards = [r.reward for r in results]
        self.rounds += 1
        report = RoundReport(
            self.rounds, self.episodes, horizon, float(max(rewards)),
            float(np.mean(rewards)), loss_p, loss_v, self.counter.total,
            self.accuracy, self.best_energy, steps, aborted)
        self.history.append(report)
        log.info('round %d: %d episodes, best R %.4g, mean R %.4g, '
                 'loss %s/%s, %d evaluations', report.round, report.episodes,
                 report.best_R, report.mean_R, _fmt(loss_p), _fmt(loss_v),
                 report.evals)
        return report

    def evaluate(self):
        """Greedy evaluation of the current network over the full
        horizon."""
        cfg = self.config
        search = self.search.replace(
            simulations=cfg.eval_simulations,
            dirichlet_alpha=cfg.eval_dirichlet_alpha,
            dirichlet_eps=cfg.eval_dirichlet_eps)
        rng = spawn_rng(cfg.seed, _EVAL_STREAM, self.rounds)
        result = evaluate_policy(self.net.snapshot(), self.evaluator,
                                 self.normalizer.snapshot(), search,
                                 self.full_horizon, rng, e_opt=self.e_opt)
        self._record_best(result.prefix, result.reward)
        self.evaluations_log.append((self.rounds, result.reward))
        log.info('evaluation after round %d: E=%.6g, accuracy %s',
                 self.rounds, result.energy, _fmt(result.accuracy))
        return result

    def run(self, max_rounds=None):
        """Train until the episode budget is used up (or ``max_rounds``
        more rounds have run). Returns the round reports of this call."""
        if self.directory:
            self._write_config()
        reports = []
        while not self.finished:
            if max_rounds is not None and len(reports) >= max_rounds:
                break
            reports.append(self.run_round())
            if self.rounds % self.config.eval_period == 0:
                self.evaluate()
            if self.directory:
                self._write_history()
                if self.rounds % self.config.checkpoint_period == 0:
                    self.save()
        if self.finished and self.rounds % self.config.eval_period:
            self.evaluate()
        if self.directory:
            self._write_history()
            self.save()
        return reports

    # Persistence

    def state_dict(self):
        return {
            'net_config': self.net_config,
            'model': self.net.state_dict(),
            'optimizer': self.optimizer.state_dict(),
            'normalizer': self.normalizer.state_dict(),
            'replay': self.replay.state_dict(),
            'best_games': self.best_games.state_dict(),
            'cache': self.cache.state_dict() if self.cache is not None else None,
            'counter': self.counter.state_dict(),
            'train_config': self.config.to_dict(),
            'search_config': asdict(self.search),
            'rounds': self.rounds,
            'episodes': self.episodes,
            'best_reward': self.best_reward,
            'best_prefix': list(self.best_prefix) if self.best_prefix else None,
            'first_positive_episode': self.first_positive_episode,
            'history': [list(r) for r in self.history],
            'evaluations_log': [list(e) for e in self.evaluations_log],
            'e_opt': self.e_opt,
            'hamiltonian': self.hamiltonian.to_dict(),
        }

    def load_state_dict(self, state):
        self.net.load_state_dict(state['model'])
        self.optimizer.load_state_dict(state['optimizer'])
        self.normalizer.load_state_dict(state['normalizer'])
        self.replay.load_state_dict(state['replay'])
        self.best_games.load_state_dict(state['best_games'])
        if self.cache is not None and state['cache'] is not None:
            self.cache.load_state_dict(state['cache'])
        self.counter.load_state_dict(state['counter'])
        self.rounds = state['rounds']
        self.episodes = state['episodes']
        self.best_reward = state['best_reward']
        self.best_prefix = tuple(state['best_prefix']) \
            if state['best_prefix'] else None
        self.first_positive_episode = state['first_positive_episode']
        self.history = [RoundReport(*r) for r in state['history']]
        self.evaluations_log = [tuple(e) for e in state['evaluations_log']]

    @property
    def checkpoint_path(self):
        if not self.directory:
            raise ArgumentError('trainer has no run directory')
        return os.path.join(self.directory, 'checkpoints', 'latest.pt')

    def save(self, filename=None):
        filename = filename or self.checkpoint_path
        save_checkpoint(filename, self.state_dict())
        self._write_best()
        return filename

    def resume(self, filename=None):
        """Continue from a checkpoint written by :meth:`save`."""
        state = load_checkpoint(filename or self.checkpoint_path)
        if state['net_config'] != self.net_config:
            raise ArgumentError('checkpoint was written for a different '
                                'network configuration')
        self.load_state_dict(state)
        log.info('resumed after round %d (%d episodes)', self.rounds,
                 self.episodes)
        return self

    def _path(self, name):
        if not os.path.exists(self.directory):
            os.makedirs(self.directory)
        return os.path.join(self.directory, name)

    def _write_config(self):
        data = dict(self.metadata)
        data.update({'train': self.config.to_dict(),
                     'search': asdict(self.search),
                     'net': self.net_config.to_dict(),
                     'n_qubits': self.hamiltonian.n_qubits,
                     'n_slots': self.full_horizon,
                     'E_opt': self.e_opt})
        with open(self._path('config.json'), 'w') as f:
            json.dump(data, f, indent=4, sort_keys=True)

    def _write_history(self):
        with open(self._path('rounds.csv'), 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(ROUND_COLUMNS)
            for r in self.history:
                writer.writerow([r.round, r.episodes, _csv(r.best_R),
                                 _csv(r.mean_R), _csv(r.loss_p),
                                 _csv(r.loss_v), r.evals, _csv(r.accuracy),
                                 _csv(r.best_E)])

    def _write_best(self):
        if self.best_prefix is None:
            return
        data = {'prefix': list(self.best_prefix),
                'reward': self.best_reward,
                'energy': self.best_energy,
                'accuracy': self.accuracy,
                'first_positive_episode': self.first_positive_episode}
        with open(self._path('best_prefix.json'), 'w') as f:
            json.dump(data, f, indent=4, sort_keys=True)


def _fmt(value):
    return 'n/a' if value is None else '%.4g' % value


def _csv(value):
    return '' if value is None else repr(float(value))
