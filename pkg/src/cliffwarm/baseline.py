"""A genetic-algorithm baseline over complete prefix assignments.

Genomes assign one gate to every prefix slot. Fitness is the raw reward
of the configuration, evaluated through the same cache-aware evaluator as
training, so both spend from budgets counted the same way.

Operators: elitism (the top 5 survive unchanged), tournament selection of
size 3, uniform crossover with rate 0.9 and per-gene mutation with rate
``1/D``. Generation 0 holds the all-identity genome plus distinct random
genomes.
"""

import csv
import logging
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cache import EvaluationCounter, get_cache
from .clifford import N_GATES, IDENTITY
from .episode import CircuitEvaluator
from .exceptions import ArgumentError
from .utils import spawn_rng


__all__ = ('GAConfig', 'GeneticSearch', 'GAResult', 'Generation',
           'ga_search', 'write_generations', 'GENERATION_COLUMNS')


log = logging.getLogger(__name__)


GENERATION_COLUMNS = ('generation', 'best_R', 'generation_best_R', 'mean_R',
                      'evals')

Generation = namedtuple('Generation', (
    'generation', 'best_R', 'generation_best_R', 'mean_R', 'evals'))

GAResult = namedtuple('GAResult', (
    'genome', 'reward', 'history', 'evaluations', 'generations'))


@dataclass(frozen=True)
class GAConfig(object):
    population_size: int = 100
    elite_size: int = 5
    tournament_size: int = 3
    crossover_rate: float = 0.9
    # None means 1/D
    mutation_rate: float = None
    # generations in a row without a new evaluation before giving up
    stall_limit: int = 100
    threads: int = 8

    def __post_init__(self):
        if self.population_size < 2:
            raise ArgumentError('population needs at least 2 genomes')
        if not 0 <= self.elite_size < self.population_size:
            raise ArgumentError('elite size must be below the population size')
        if self.tournament_size < 1:
            raise ArgumentError('tournament size must be positive')
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ArgumentError('crossover rate must be in [0, 1]')


class GeneticSearch(object):
    """Runs the genetic algorithm against one evaluator.

    Use :meth:`run` with an evaluation budget, a generation budget, or
    both; the search stops at whichever runs out first.
    """

    tag = 'ga'

    def __init__(self, evaluator, config=None, seed=0):
        if evaluator.cache is None:
            raise ArgumentError('the genetic search needs an evaluation cache')
        self.evaluator = evaluator
        self.config = config or GAConfig()
        self.rng = spawn_rng(seed)
        self.n_genes = evaluator.n_slots
        rate = self.config.mutation_rate
        self.mutation_rate = 1.0 / self.n_genes if rate is None else rate
        self.best_genome = None
        self.best_reward = -np.inf
        self.history = []

    @property
    def evaluations(self):
        return self.evaluator.counter.total

    def initial_population(self):
        size, d = self.config.population_size, self.n_genes
        identity = (IDENTITY,) * d
        population = [identity]
        seen = {identity}
        distinct = min(size, N_GATES ** d) if d < 8 else size
        while len(population) < distinct:
            genome = tuple(int(g) for g in self.rng.integers(0, N_GATES, d))
            if genome not in seen:
                seen.add(genome)
                population.append(genome)
        while len(population) < size:
            population.append(
                tuple(int(g) for g in self.rng.integers(0, N_GATES, d)))
        return population

    def _is_cached(self, genome):
        return self.evaluator.cache.get(genome) is not None

    def evaluate(self, population, max_evaluations=None, pool=None):
        """Fitness of each genome, in population order. With a budget,
        evaluation stops before the first uncached genome that would
        exceed it; the remaining entries are ``None``."""
        def evaluate(genome):
            return self.evaluator.evaluate(genome, tag=self.tag)

        new = {g for g in population if not self._is_cached(g)}
        remaining = None if max_evaluations is None else \
            max_evaluations - self.evaluations
        if remaining is None or len(new) <= remaining:
            if pool is not None:
                return list(pool.map(evaluate, population))
            return [evaluate(g) for g in population]

        fitness = []
        for genome in population:
            if not self._is_cached(genome) and \
                    self.evaluations >= max_evaluations:
                fitness.extend([None] * (len(population) - len(fitness)))
                break
            fitness.append(evaluate(genome))
        return fitness

    def _tournament(self, fitness):
        contenders = self.rng.integers(0, len(fitness),
                                       self.config.tournament_size)
        # highest fitness, lowest index among ties
        return max(contenders, key=lambda i: (fitness[i], -i))

    def _crossover(self, a, b):
        if self.rng.random() >= self.config.crossover_rate:
            return np.array(a), np.array(b)
        mask = self.rng.random(self.n_genes) < 0.5
        a, b = np.array(a), np.array(b)
        return np.where(mask, a, b), np.where(mask, b, a)

    def _mutate(self, genome):
        hits = self.rng.random(self.n_genes) < self.mutation_rate
        shift = self.rng.integers(1, N_GATES, self.n_genes)
        genome = np.where(hits, (genome + shift) % N_GATES, genome)
        return tuple(int(g) for g in genome)

    def next_generation(self, population, fitness):
        order = sorted(range(len(population)),
                       key=lambda i: (-fitness[i], i))
        children = [population[i] for i in order[:self.config.elite_size]]
        while len(children) < len(population):
            a = population[self._tournament(fitness)]
            b = population[self._tournament(fitness)]
            for child in self._crossover(a, b):
                if len(children) < len(population):
                    children.append(self._mutate(child))
        return children

    def run(self, max_evaluations=None, max_generations=None):
        """Returns a :class:`GAResult`."""
        if max_evaluations is None and max_generations is None:
            raise ArgumentError('give an evaluation or a generation budget')
        if max_evaluations == 0 or max_generations == 0:
            return self._identity_only()

        population = self.initial_population()
        stalled = 0
        with ThreadPoolExecutor(max_workers=self.config.threads) as pool:
            while True:
                before = self.evaluations
                fitness = self.evaluate(population, max_evaluations, pool)
                scored = [(f, g) for f, g in zip(fitness, population)
                          if f is not None]
                if scored:
                    self._record(len(self.history), scored)
                complete = len(scored) == len(population)
                if not complete:
                    break
                if max_generations is not None and \
                        len(self.history) >= max_generations:
                    break
                if max_evaluations is not None and \
                        self.evaluations >= max_evaluations:
                    break
                stalled = stalled + 1 if self.evaluations == before else 0
                if stalled >= self.config.stall_limit:
                    log.info('no new configurations for %d generations, '
                             'stopping at %d evaluations', stalled,
                             self.evaluations)
                    break
                population = self.next_generation(population, fitness)

        log.info('genetic search: %d generations, %d evaluations, best R %.6g',
                 len(self.history), self.evaluations, self.best_reward)
        return GAResult(self.best_genome, self.best_reward, self.history,
                        self.evaluations, len(self.history))

    def _record(self, index, scored):
        gen_best = max(f for f, _ in scored)
        for f, genome in scored:
            if f > self.best_reward:
                self.best_reward, self.best_genome = f, genome
        entry = Generation(index, self.best_reward, gen_best,
                           float(np.mean([f for f, _ in scored])),
                           self.evaluations)
        self.history.append(entry)
        log.debug('generation %d: best %.6g, mean %.6g, %d evaluations',
                  index, entry.best_R, entry.mean_R, entry.evals)

    def _identity_only(self):
        genome = (IDENTITY,) * self.n_genes
        reward = self.evaluator.evaluate(genome, count=False)
        self.best_genome, self.best_reward = genome, reward
        return GAResult(genome, reward, [], self.evaluations, 0)


def ga_search(skeleton, hamiltonian, evaluations=None, generations=None,
              config=None, seed=0, cache=True):
    """Run the genetic baseline on a fresh cache and counter.

    ``evaluations`` matches a distinct-evaluation budget, ``generations``
    a number of training rounds.
    """
    evaluator = CircuitEvaluator(skeleton, hamiltonian,
                                 cache=get_cache(cache),
                                 counter=EvaluationCounter())
    return GeneticSearch(evaluator, config, seed).run(evaluations, generations)


def write_generations(filename, history):
    with open(filename, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(GENERATION_COLUMNS)
        for g in history:
            writer.writerow([g.generation, repr(float(g.best_R)),
                             repr(float(g.generation_best_R)),
                             repr(float(g.mean_R)), g.evals])
