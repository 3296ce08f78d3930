"""Full-stack tests of the commands, on a tiny network and budget."""

import os
import logging

import pytest

from cliffwarm.exceptions import TrainingError
from cliffwarm.manifest import RunManifest
from cliffwarm.report import read_csv, read_budget, COMPARE_COLUMNS
from cliffwarm.script import (
    main, CommandLineEnvironment, CommandError, GenericArgparseImplementation,
    USAGE_ERROR, RUNTIME_ERROR)

from .helpers import TempRunHelper


def test_script():
    """Test simply that the main script can be invoked."""
    assert main([]) == USAGE_ERROR


class TestCLI(TempRunHelper):

    def setup_method(self):
        super().setup_method()
        self.cmd_env = CommandLineEnvironment(self.env, logging)

    def main(self, *argv):
        return main(list(argv), env=self.env)


class TestGenInstanceCommand(TestCLI):

    def test_tfim(self):
        data = self.cmd_env.invoke('gen-instance', {
            'type': 'tfim', 'n': 10, 'J': 0.5,
            'out': self.path('inst/tfim.json')})
        assert data['computed_E_opt'] == pytest.approx(-10.570, abs=1e-3)
        assert data['n_params'] == 40
        stored = self.get_json('inst/tfim.json')
        assert stored['J'] == 0.5
        assert stored['computed_E_opt'] == data['computed_E_opt']
        manifest = RunManifest(self.path('inst/tfim.manifest.json'))
        assert manifest['command'] == 'gen-instance'
        assert manifest['status'] == 0

    def test_maxcut(self):
        assert self.main('gen-instance', '--type', 'maxcut', '--n', '4',
                         '--seed', '3', '--out', self.path('m.json')) == 0
        data = self.get_json('m.json')
        assert data['type'] == 'maxcut'
        assert data['seed'] == 3
        assert len(data['edges']) == 6
        assert data['n_params'] == 10

    def test_invalid_size(self):
        assert self.main('gen-instance', '--type', 'maxcut', '--n', '1',
                         '--out', self.path('m.json')) == USAGE_ERROR
        assert not self.exists('m.json')

    def test_unknown_type(self):
        pytest.raises(CommandError, self.cmd_env.invoke, 'gen-instance',
                      {'type': 'sudoku', 'n': 3})


class TestTrainCommand(TestCLI):

    def test_train(self):
        instance, problem, e_opt = self.make_instance(n=3, seed=2)
        rows = self.cmd_env.train(instance, out=self.path('runs'))
        assert [r['seed'] for r in rows] == [0, 1]

        summary = read_csv(self.path('runs/summary.csv'))
        assert [r['seed'] for r in summary] == ['0', '1', 'mean', 'std',
                                                'best']
        best = max(rows, key=lambda r: r['accuracy'])
        assert float(summary[-1]['accuracy']) == best['accuracy']

        budget = read_budget(self.path('runs/seed_0'))
        assert budget['E_opt'] == e_opt
        assert budget['n_params'] == 6
        assert budget['rounds'] == 4 and budget['episodes'] == 24
        assert budget['evaluations'] >= budget['evaluations_without_eval']
        for name in ('config.json', 'rounds.csv', 'best_prefix.json',
                     'checkpoints/latest.pt'):
            assert self.exists(os.path.join('runs/seed_1', name))

        manifest = RunManifest(self.path('runs/manifest.json'))
        assert manifest['seeds'] == [0, 1]
        assert manifest['status'] == 0
        assert manifest['instance'] == os.path.abspath(instance)

    def test_seeds_option(self):
        instance, _, _ = self.make_instance()
        assert self.main('train', '--instance', instance, '--seeds', '4',
                         '--out', self.path('runs')) == 0
        assert self.exists('runs/seed_4/budget.json')
        assert not self.exists('runs/seed_0')

    def test_config_file(self):
        instance, _, _ = self.make_instance()
        config = dict(self.default_config, seeds=[2])
        self.create_files({'tiny.yaml': '\n'.join(
            '%s: %s' % (k, v) for k, v in config.items())})
        self.env.config['seeds'] = [0]
        rows = self.cmd_env.train(instance, config=self.path('tiny.yaml'),
                                  out=self.path('runs'))
        assert [r['seed'] for r in rows] == [2]

    def test_resume(self):
        instance, _, _ = self.make_instance()
        first = self.cmd_env.train(instance, seeds='0', out=self.path('a'))
        again = self.cmd_env.train(instance, seeds='0', out=self.path('a'),
                                   resume=True)
        # the finished run is picked up as it is
        assert again == first

    def test_missing_instance(self):
        assert self.main('train', '--instance', self.path('none.json'),
                         '--out', self.path('runs')) == USAGE_ERROR

    def test_invalid_seeds(self):
        instance, _, _ = self.make_instance()
        pytest.raises(CommandError, self.cmd_env.train, instance,
                      seeds='0,x')

    def test_failure(self, monkeypatch):
        """A training failure gives the runtime exit code and is recorded
        in the manifest."""
        def failing_run(self, max_rounds=None):
            raise TrainingError('loss is nan')
        monkeypatch.setattr('cliffwarm.trainer.Trainer.run', failing_run)
        instance, _, _ = self.make_instance()
        assert self.main('train', '--instance', instance,
                         '--out', self.path('runs')) == RUNTIME_ERROR
        assert RunManifest(self.path('runs/manifest.json'))['status'] == \
            RUNTIME_ERROR

    @pytest.mark.parametrize('error', [
        PermissionError('run directory is read-only'),
        RuntimeError('CUDA out of memory')])
    def test_system_errors(self, monkeypatch, caplog, error):
        def failing_run(self, max_rounds=None):
            raise error
        monkeypatch.setattr('cliffwarm.trainer.Trainer.run', failing_run)
        instance, _, _ = self.make_instance()
        assert self.main('train', '--instance', instance,
                         '--out', self.path('runs')) == RUNTIME_ERROR
        assert str(error) in caplog.text


class TestCompareCommand(TestCLI):

    def setup_method(self):
        super().setup_method()
        self.instance, self.problem, self.e_opt = self.make_instance(
            n=3, seed=5)
        self.cmd_env.train(self.instance, out=self.path('runs'))

    def test_both_modes(self):
        rows = self.cmd_env.compare([self.path('runs')],
                                    out=self.path('cmp'))
        assert len(rows) == 1
        row = rows[0]
        assert row['task'] == 'maxcut_3'
        assert row['N_params'] == 6
        assert row['E_opt'] == self.e_opt
        for column in COMPARE_COLUMNS[4:]:
            assert row[column] is not None, column
        assert row['ratio_mean_evals'] == pytest.approx(
            row['search_mean'] / row['ga_evals_mean'])

        table = read_csv(self.path('cmp/compare.csv'))
        assert [r['task'] for r in table] == ['maxcut_3', 'GeoMean',
                                              'ArithMean']
        # one task: both aggregates equal the single ratio
        assert float(table[1]['ratio_best_rounds']) == pytest.approx(
            row['ratio_best_rounds'])
        for seed in (0, 1):
            for mode in ('evals', 'rounds'):
                assert self.exists('cmp/ga/maxcut_3_seed%d_%s.csv' % (
                    seed, mode))

    def test_evaluation_budget_is_matched(self):
        self.cmd_env.compare([self.path('runs')], mode='evals',
                             out=self.path('cmp'))
        budget = read_budget(self.path('runs/seed_0'))
        generations = read_csv(self.path('cmp/ga/maxcut_3_seed0_evals.csv'))
        assert int(generations[-1]['evals']) <= budget['evaluations']
        assert not self.exists('cmp/ga/maxcut_3_seed0_rounds.csv')

    def test_rounds_mode(self):
        rows = self.cmd_env.compare([self.path('runs')], mode='rounds',
                                    out=self.path('cmp'))
        assert rows[0].get('ga_evals_mean') is None
        generations = read_csv(self.path('cmp/ga/maxcut_3_seed1_rounds.csv'))
        assert len(generations) <= 4

    def test_unknown_mode(self):
        pytest.raises(CommandError, self.cmd_env.compare,
                      [self.path('runs')], mode='all')

    def test_not_a_run(self):
        os.makedirs(self.path('empty'))
        assert self.main('compare', '--runs', self.path('empty'),
                         '--out', self.path('cmp')) == USAGE_ERROR


class TestEvalCommand(TestCLI):

    def setup_method(self):
        super().setup_method()
        self.instance, _, self.e_opt = self.make_instance(n=3, seed=6)
        self.cmd_env.train(self.instance, seeds='0', out=self.path('runs'))
        self.checkpoint = self.path('runs/seed_0/checkpoints/latest.pt')

    def test_eval(self):
        result = self.cmd_env.invoke('eval', {
            'checkpoint': self.checkpoint, 'instance': self.instance})
        assert len(result.prefix) == 6
        assert result.energy >= self.e_opt - 1e-9
        assert result.accuracy == pytest.approx(result.energy / self.e_opt)
        assert self.main('eval', '--checkpoint', self.checkpoint,
                         '--instance', self.instance,
                         '--simulations', '3') == 0

    def test_deterministic(self):
        args = {'checkpoint': self.checkpoint, 'instance': self.instance,
                'seed': 4}
        assert self.cmd_env.eval(**args) == self.cmd_env.eval(**args)

    def test_other_size(self):
        other, _, _ = self.make_instance('other.json', n=4)
        assert self.main('eval', '--checkpoint', self.checkpoint,
                         '--instance', other) == USAGE_ERROR

    def test_missing_checkpoint(self):
        pytest.raises(CommandError, self.cmd_env.eval,
                      self.path('none.pt'), self.instance)


class TestArgparseImpl(TempRunHelper):

    def test_no_env(self):
        """[Regression] If no env is hardcoded, nor one given via
        a config file, an empty default environment is used."""
        impl = GenericArgparseImplementation(env=None)
        assert impl._setup_env(None).config['seeds'] == [0, 1, 2]

    def test_unknown_command(self):
        cmd_env = CommandLineEnvironment(self.env, logging)
        pytest.raises(CommandError, cmd_env.invoke, 'build', {})

    def test_help(self):
        assert main(['--help']) == 0
        assert main(['train']) == USAGE_ERROR
