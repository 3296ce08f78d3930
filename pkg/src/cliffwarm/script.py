import os
import sys
import json
import logging

from .baseline import GAConfig, GeneticSearch, write_generations
from .cache import EvaluationCounter
from .checkpoint import load_network
from .env import Environment
from .episode import CircuitEvaluator, RewardNormalizer
from .exceptions import ArgumentError, CliffwarmError, CommandError, \
    EnvironmentError, LoaderError, ResourceError
from .loaders import InstanceLoader, YAMLLoader
from .manifest import RunManifest
from .mcts import SearchConfig
from .problems import get_problem_class
from .report import (SUMMARY_COLUMNS, COMPARE_COLUMNS, summary_rows,
                     compare_row, aggregate_rows, write_csv, write_budget,
                     read_budget)
from .trainer import Trainer, evaluate_policy, accuracy_of
from .utils import spawn_rng


__all__ = ('CommandError', 'CommandLineEnvironment', 'main')


# The CLI reports progress at INFO, the logging default is WARNING.
logging.getLogger('cliffwarm.script').setLevel(logging.INFO)


# Exit codes
USAGE_ERROR = 2
RUNTIME_ERROR = 3


class Command(object):
    """Base-class for a command used by :class:`CommandLineEnvironment`.
    Subclass it to customize a command.
    """

    def __init__(self, cmd_env):
        self.cmd = cmd_env

    def __getattr__(self, name):
        return getattr(self.cmd, name)

    def __call__(self, *args, **kwargs):
        raise NotImplementedError()

    def load_instance(self, filename):
        try:
            return InstanceLoader(filename).load_problem()
        except LoaderError as e:
            raise CommandError(str(e))


class GenInstanceCommand(Command):

    def __call__(self, type, n, J=None, seed=0, out=None):
        """Generate a benchmark instance and write it as JSON, including
        the exact ground energy.

        ``type``
            One of the registered problem types: ``maxcut``, ``knapsack``,
            ``tfim``, ``xxz``, or a custom one.

        ``J``
            Coupling of the spin-chain models.

        ``out``
            Output filename; defaults to ``<name>_seed<seed>.json`` in the
            working directory.
        """
        try:
            problem_class = get_problem_class(type)
            kwargs = {} if J is None else {'J': J}
            problem = problem_class.generate(n, seed=seed, **kwargs)
            e_opt = problem.exact_ground_energy()
            skeleton = problem.default_ansatz(
                self.environment.config['hea_reps'])
        except (ArgumentError, ResourceError) as e:
            raise CommandError(str(e))

        out = out or '%s_seed%d.json' % (problem.name, seed)
        if os.path.dirname(out) and not os.path.exists(os.path.dirname(out)):
            os.makedirs(os.path.dirname(out))
        data = problem.to_dict(e_opt)
        data['n_qubits'] = problem.hamiltonian().n_qubits
        data['n_params'] = skeleton.n_slots
        with open(out, 'w') as f:
            json.dump(data, f, indent=4, sort_keys=True)
        RunManifest.create(
            os.path.dirname(out), 'gen-instance',
            name=os.path.splitext(os.path.basename(out))[0] + '.manifest.json',
            instance=os.path.abspath(out), seeds=[seed]).finish()
        self.log.info('Wrote %s: %d qubits, %d parameters, E_opt = %.6f' % (
            out, data['n_qubits'], data['n_params'], e_opt))
        return data


class TrainCommand(Command):

    def __call__(self, instance, config=None, seeds=None, out='runs',
                 resume=False):
        """Train on ``instance``, once per seed.

        ``config``
            A YAML/JSON config file; the current environment is used if
            not given.

        ``seeds``
            Comma separated seeds; defaults to the configured ``seeds``.

        ``out``
            Output directory. Every seed gets a ``seed_<n>`` run directory;
            ``summary.csv`` and ``manifest.json`` go to ``out`` itself.

        ``resume``
            Continue runs that left a checkpoint behind.
        """
        env = self.environment
        if config:
            try:
                env = YAMLLoader(config).load_environment()
            except LoaderError as e:
                raise CommandError(str(e))
        seeds = _parse_seeds(seeds) if seeds else env.seeds
        problem, e_opt = self.load_instance(instance)
        hamiltonian = problem.hamiltonian()
        skeleton = problem.default_ansatz(env.config['hea_reps'])
        if e_opt is None:
            try:
                e_opt = problem.exact_ground_energy()
            except ResourceError as e:
                self.log.warning('No reference energy, accuracy will not be '
                                 'reported: %s' % e)

        manifest = RunManifest.create(
            out, 'train', instance=os.path.abspath(instance),
            config=os.path.abspath(config) if config else None,
            seeds=seeds, settings=_jsonable(env.to_dict()))
        rows = []
        try:
            for seed in seeds:
                run_dir = os.path.join(out, 'seed_%d' % seed)
                self.log.info('Training %s with seed %d (%d slots) in %s' % (
                    problem.name, seed, skeleton.n_slots, run_dir))
                trainer = Trainer(
                    hamiltonian, skeleton, env.train_config(seed),
                    env.search_config(), env.net_config(), e_opt=e_opt,
                    cache=env.cache, directory=run_dir, threads=env.threads,
                    metadata={'instance': os.path.abspath(instance),
                              'task': problem.name, 'seed': seed})
                if resume and os.path.exists(trainer.checkpoint_path):
                    trainer.resume()
                trainer.run()
                budget = trainer.budget_report()
                write_budget(run_dir, {
                    'instance': os.path.abspath(instance),
                    'task': problem.name, 'n': problem.n,
                    'n_params': skeleton.n_slots, 'E_opt': e_opt,
                    'seed': seed, 'hea_reps': env.config['hea_reps'],
                    'evaluations': budget.evaluations,
                    'evaluations_without_eval':
                        budget.evaluations_without_eval,
                    'rounds': budget.rounds, 'episodes': budget.episodes,
                    'E_best': trainer.best_energy,
                    'accuracy': trainer.accuracy})
                rows.append({'seed': seed, 'E_best': trainer.best_energy,
                             'accuracy': trainer.accuracy,
                             'rounds': budget.rounds,
                             'episodes': budget.episodes,
                             'evaluations': budget.evaluations})
                self.log.info('Seed %d: E_best = %s, accuracy %s' % (
                    seed, trainer.best_energy, trainer.accuracy))
        finally:
            if rows:
                write_csv(os.path.join(out, 'summary.csv'), SUMMARY_COLUMNS,
                          summary_rows(rows))
            manifest.finish(0 if len(rows) == len(seeds) else RUNTIME_ERROR)
        return rows


class CompareCommand(Command):

    modes = ('evals', 'rounds', 'both')

    def __call__(self, runs, mode='both', out='compare'):
        """Run the genetic baseline at the budgets of finished training
        runs and write ``compare.csv``.

        ``runs``
            Output directories of ``train``, one per task.

        ``mode``
            ``evals`` matches the number of distinct circuit evaluations,
            ``rounds`` gives the baseline one generation per training
            round, ``both`` runs both.
        """
        if mode not in self.modes:
            raise CommandError('unknown mode: %s' % mode)
        env = self.environment
        manifest = RunManifest.create(
            out, 'compare', runs=[os.path.abspath(r) for r in runs],
            mode=mode)
        ga_dir = os.path.join(out, 'ga')
        if not os.path.exists(ga_dir):
            os.makedirs(ga_dir)

        rows = []
        for run in runs:
            budgets = self._budgets(run)
            first = budgets[0]
            problem, _ = self.load_instance(first['instance'])
            hamiltonian = problem.hamiltonian()
            skeleton = problem.default_ansatz(first.get('hea_reps', 1))
            e_opt = first['E_opt']
            if e_opt is None:
                raise CommandError('%s has no reference energy' % run)

            results = {'evals': [], 'rounds': []}
            for budget in budgets:
                for m in ('evals', 'rounds'):
                    if mode not in (m, 'both'):
                        continue
                    result = self._run_ga(env, hamiltonian, skeleton,
                                          budget, m)
                    write_generations(os.path.join(
                        ga_dir, '%s_seed%d_%s.csv' % (
                            budget['task'], budget['seed'], m)),
                        result.history)
                    results[m].append(accuracy_of(-result.reward, e_opt))
            rows.append(compare_row(
                first['task'], first['n'], first['n_params'], e_opt,
                [b['accuracy'] for b in budgets],
                results['evals'] if mode != 'rounds' else None,
                results['rounds'] if mode != 'evals' else None))

        filename = os.path.join(out, 'compare.csv')
        write_csv(filename, COMPARE_COLUMNS, rows + aggregate_rows(rows))
        manifest.finish()
        self.log.info('Wrote %s' % filename)
        return rows

    def _budgets(self, run):
        dirs = [run] + [os.path.join(run, d) for d in sorted(os.listdir(run))
                        if d.startswith('seed_')] \
            if os.path.isdir(run) else []
        budgets = [b for b in map(read_budget, dirs) if b is not None]
        if not budgets:
            raise CommandError('no budget counters found in %s; is it a '
                               'finished training run?' % run)
        return budgets

    def _run_ga(self, env, hamiltonian, skeleton, budget, mode):
        evaluator = CircuitEvaluator(skeleton, hamiltonian, cache=env.cache,
                                     counter=EvaluationCounter())
        config = GAConfig(population_size=env.config['ga_population'],
                          threads=env.config['ga_threads'],
                          stall_limit=env.config['ga_stall_limit'])
        search = GeneticSearch(evaluator, config, seed=budget['seed'])
        if mode == 'evals':
            result = search.run(max_evaluations=budget['evaluations'])
        else:
            result = search.run(max_generations=budget['rounds'])
        self.log.info('GA on %s, seed %d, %s-matched: %d evaluations, '
                      '%d generations, E = %.6f' % (
                          budget['task'], budget['seed'], mode,
                          result.evaluations, result.generations,
                          -result.reward))
        return result


class EvalCommand(Command):

    def __call__(self, checkpoint, instance, simulations=None, seed=0):
        """Greedy evaluation of a trained network on ``instance``.

        ``simulations``
            Searches per move; defaults to the evaluation budget the
            network was trained with.
        """
        problem, e_opt = self.load_instance(instance)
        hamiltonian = problem.hamiltonian()
        try:
            net, state = load_network(checkpoint, hamiltonian)
        except LoaderError as e:
            raise CommandError(str(e))
        trained_qubits = state['hamiltonian']['n_qubits']
        if trained_qubits != hamiltonian.n_qubits:
            raise CommandError(
                'network was trained on %d qubits, the instance has %d' % (
                    trained_qubits, hamiltonian.n_qubits))
        net.eval()
        skeleton = problem.default_ansatz(self.environment.config['hea_reps'])
        evaluator = CircuitEvaluator(skeleton, hamiltonian,
                                     cache=self.environment.cache)
        normalizer = RewardNormalizer()
        normalizer.load_state_dict(state['normalizer'])
        train = state['train_config']
        search = SearchConfig(**state['search_config']).replace(
            simulations=simulations or train['eval_simulations'],
            dirichlet_alpha=train['eval_dirichlet_alpha'],
            dirichlet_eps=train['eval_dirichlet_eps'])
        if e_opt is None:
            try:
                e_opt = problem.exact_ground_energy()
            except ResourceError:
                pass
        result = evaluate_policy(net, evaluator, normalizer.snapshot(),
                                 search, skeleton.n_slots, spawn_rng(seed),
                                 e_opt=e_opt)
        self.log.info('E = %.6f, accuracy %s, prefix %s' % (
            result.energy, result.accuracy, list(result.prefix)))
        return result


class CommandLineEnvironment(object):
    """Holds the commands of the command line interface, independent of
    argparse, so that a notebook or a job scheduler can drive them too.
    """

    def __init__(self, env, log, commands=None):
        self.environment = env
        self.log = log

        command_def = self.DefaultCommands.copy()
        command_def.update(commands or {})
        self.commands = {}
        for name, construct in command_def.items():
            if not construct:
                continue
            if not isinstance(construct, (list, tuple)):
                construct = [construct, (), {}]
            self.commands[name] = construct[0](
                self, *construct[1], **construct[2])

    def __getattr__(self, item):
        if item in self.commands:
            return self.commands[item]
        raise AttributeError(item)

    def invoke(self, command, args):
        """Run the command named ``command`` with keyword ``args``."""
        try:
            function = self.commands[command]
        except KeyError as e:
            raise CommandError('unknown command: %s' % e)
        else:
            return function(**args)

    DefaultCommands = {
        'gen-instance': GenInstanceCommand,
        'train': TrainCommand,
        'compare': CompareCommand,
        'eval': EvalCommand,
    }


class GenericArgparseImplementation(object):
    """Generic command line utility to interact with a cliffwarm
    environment.

    Parses ``argv`` with argparse and hands the result to a
    :class:`CommandLineEnvironment`.
    """

    def __init__(self, env=None, log=None, prog=None):
        import argparse
        self.argparse = argparse
        self.env = env
        self.log = log
        self._construct_parser(prog)

    def _construct_parser(self, prog=None):
        self.parser = parser = self.argparse.ArgumentParser(
            description="Warm-start variational circuits with "
                        "Clifford prefixes.",
            prog=prog)

        # Start with the base arguments that are valid for any command.
        parser.add_argument("-v", dest="verbose", action="store_true",
            help="be verbose")
        parser.add_argument("-q", action="store_true", dest="quiet",
            help="be quiet")

        # Add subparsers.
        subparsers = parser.add_subparsers(dest='command')
        subparsers.required = True
        for command in CommandLineEnvironment.DefaultCommands.keys():
            command_parser = subparsers.add_parser(command)
            maker = getattr(self, 'make_%s_parser' % command.replace('-', '_'),
                            False)
            if maker:
                maker(command_parser)

    @staticmethod
    def make_gen_instance_parser(parser):
        parser.add_argument('--type', required=True,
            help='Problem type: maxcut, knapsack, tfim or xxz.')
        parser.add_argument('--n', type=int, required=True,
            help='Number of vertices, items or spins.')
        parser.add_argument('--J', type=float, default=None,
            help='Coupling of the tfim and xxz chains.')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--out', default=None,
            help='Output file.')

    @staticmethod
    def make_train_parser(parser):
        parser.add_argument('--instance', required=True,
            help='Instance file written by gen-instance.')
        parser.add_argument('--config', default=None,
            help='YAML or JSON config file.')
        parser.add_argument('--seeds', default=None,
            help='Comma separated seeds, e.g. 0,1,2.')
        parser.add_argument('--out', default='runs',
            help='Output directory.')
        parser.add_argument('--resume', action='store_true',
            help='Continue from existing checkpoints.')

    @staticmethod
    def make_compare_parser(parser):
        parser.add_argument('--runs', nargs='+', required=True,
            help='Output directories of train, one per task.')
        parser.add_argument('--mode', choices=CompareCommand.modes,
            default='both',
            help='Match the baseline by evaluations, rounds, or both.')
        parser.add_argument('--out', default='compare',
            help='Output directory.')

    @staticmethod
    def make_eval_parser(parser):
        parser.add_argument('--checkpoint', required=True)
        parser.add_argument('--instance', required=True)
        parser.add_argument('--simulations', type=int, default=None)
        parser.add_argument('--seed', type=int, default=0)

    def _setup_logging(self, ns):
        if self.log:
            log = self.log
        else:
            log = logging.getLogger('cliffwarm.script')
            if not log.handlers:
                handler = logging.StreamHandler()
                log.addHandler(handler)
                # filter on the handler; the logger level belongs to the user
                handler.setLevel(logging.DEBUG if ns.verbose else (
                    logging.WARNING if ns.quiet else logging.INFO))
        return log

    def _setup_env(self, ns):
        return self.env if self.env is not None else Environment()

    def _setup_cmd_env(self, env, log, ns):
        return CommandLineEnvironment(env, log)

    def _prepare_command_args(self, ns):
        # drop the global options, commands only take their own
        args = vars(ns).copy()
        for action in self.parser._actions:
            dest = action.dest
            if dest in args:
                del args[dest]
        return args

    def run_with_ns(self, ns):
        log = self._setup_logging(ns)
        env = self._setup_env(ns)
        cmd = self._setup_cmd_env(env, log, ns)

        args = self._prepare_command_args(ns)
        cmd.invoke(ns.command, args)
        return 0

    def run_with_argv(self, argv):
        try:
            ns = self.parser.parse_args(argv)
        except SystemExit as e:
            # only run() exits the process
            return e.args[0] if e.args else 0

        return self.run_with_ns(ns)

    def main(self, argv):
        """Run the command line ``argv`` (without the program name) and
        return the exit code."""
        try:
            return self.run_with_argv(argv)
        except (CommandError, EnvironmentError) as e:
            print(e)
            return USAGE_ERROR
        except (CliffwarmError, OSError, RuntimeError) as e:
            logging.getLogger('cliffwarm.script').error('Failed: %s' % e)
            return RUNTIME_ERROR


def _parse_seeds(value):
    try:
        return [int(s) for s in str(value).split(',') if s.strip()]
    except ValueError:
        raise CommandError('invalid seed list: %s' % value)


def _jsonable(data):
    return json.loads(json.dumps(data, default=str))


def main(argv, env=None):
    """Run the command line interface on ``argv`` and return the exit
    code. ``env`` replaces the default :class:`Environment`.
    """
    return GenericArgparseImplementation(env).main(argv)


def run():
    """Console entry point."""
    sys.exit(main(sys.argv[1:]) or 0)


if __name__ == '__main__':
    run()
