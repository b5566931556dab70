"""
Tests of the command line interface
"""
import os
import json
import pytest
import main
from core.controller.run_controller import (ATTENTION_FILE,
                                            ERRORS_FILE,
                                            GATE_REPORT_FILE,
                                            MANIFEST_FILE,
                                            METRICS_FILE,
                                            PREDICTIONS_FILE,
                                            VALIDATION_FILE,
                                            checkpoint_file_name)
from core.utils.report_writer import file_sha256, read_json, read_jsonl
from conftest import FAST_TRAIN, POI_COUNTS, TINY_SYNTH


def write_config(directory, name, document):
    """
    Write a run config JSON file and return its path
    """
    path = os.path.join(str(directory), name)
    with open(path, 'w') as config_file:
        json.dump({'schema_version': 1, **document}, config_file)

    return path


class CLI:
    """
    Runs main() with a test env config and collects output
    """

    def __init__(self, env_config, capsys, tmp_path):
        self.env_config = env_config
        self.capsys = capsys
        self.tmp_path = tmp_path

    def __call__(self, *argv):
        code = main.main([*argv, '--env-config', self.env_config])
        captured = self.capsys.readouterr()
        return code, captured.out.strip(), captured.err.strip()

    def path(self, name):
        """
        Path inside the temporary directory
        """
        return str(self.tmp_path / name)

    def synth(self, name='data', **synth):
        """
        Generate a tiny dataset, return its directory
        """
        config = write_config(self.tmp_path, f'{name}.json', {'synth': {**TINY_SYNTH, **synth}})
        code, _, err = self('synth', '--config', config, '--out', self.path(name))
        assert code == 0, err
        return self.path(name)

    def train(self, model, dataset, out, *extra):
        """
        Train with fast settings, return exit code and output
        """
        config = write_config(self.tmp_path,
                              f'{out}.json',
                              {'model': model,
                               'dataset': dataset,
                               'train': {**FAST_TRAIN, 'max_epochs': 2},
                               'model_config': {'d': 4, 'd_proj': 4}})
        return self('train', '--config', config, '--out', self.path(out), *extra)


@pytest.fixture
def cli(env_config, capsys, tmp_path):
    """
    CLI runner
    """
    return CLI(env_config, capsys, tmp_path)


@pytest.fixture
def gate_run(cli):
    """
    Dataset and trained gate model
    """
    dataset = cli.synth()
    code, out, err = cli.train('mm-gate', dataset, 'gate')
    assert code == 0, err
    assert out.startswith('F1 ')
    return dataset, cli.path('gate')


class TestSynthAndValidate:
    """
    synth and ingest-validate commands
    """

    def test_same_seed_gives_same_features(self, cli):
        first = cli.synth('first')
        second = cli.synth('second')
        assert file_sha256(os.path.join(first, 'features.bin')) == \
            file_sha256(os.path.join(second, 'features.bin'))
        other = cli.synth('other', seed=8)
        assert file_sha256(os.path.join(first, 'features.bin')) != \
            file_sha256(os.path.join(other, 'features.bin'))

    def test_existing_output_needs_force(self, cli):
        dataset = cli.synth()
        config = cli.path('data.json')
        code, _, err = cli('synth', '--config', config, '--out', dataset)
        assert code == 1
        assert err.startswith('OutputExistsError: ')
        assert len(err.splitlines()) == 1
        code, _, _ = cli('synth', '--config', config, '--out', dataset, '--force')
        assert code == 0

    def test_ingest_validate(self, cli):
        dataset = cli.synth()
        code, out, _ = cli('ingest-validate', '--dataset', dataset, '--out', cli.path('report'))
        assert code == 0
        summary = json.loads(out)
        assert summary['valid']
        assert summary['records'] == 54
        assert read_json(os.path.join(cli.path('report'), VALIDATION_FILE))['valid']

    def test_missing_dataset(self, cli):
        code, _, err = cli('ingest-validate', '--dataset', cli.path('nowhere'))
        assert code == 1
        assert err.startswith('ConfigError: ')


class TestTrainAndEvaluate:
    """
    train and evaluate commands
    """

    def test_train_artifacts(self, gate_run):
        dataset, out = gate_run
        metrics = read_json(os.path.join(out, METRICS_FILE))
        assert metrics['schema'] == 'mmfuse.metrics/1'
        assert metrics['model'] == 'mm-gate'
        assert [entry['seed'] for entry in metrics['seeds']] == [1]
        assert metrics['summary']['f1']['std'] == 0.0
        assert len(read_jsonl(os.path.join(out, PREDICTIONS_FILE))) == TINY_SYNTH['test_size']
        manifest = read_json(os.path.join(out, MANIFEST_FILE))
        assert sorted(manifest['artifacts']) == sorted([checkpoint_file_name(1),
                                                        METRICS_FILE,
                                                        PREDICTIONS_FILE])
        for name, digest in manifest['artifacts'].items():
            assert file_sha256(os.path.join(out, name)) == digest

        assert manifest['config']['dataset'] == dataset
        assert manifest['config']['train']['precision'] == 'double'

    def test_evaluate_reproduces_train_metrics(self, cli, gate_run):
        dataset, out = gate_run
        code, _, err = cli('evaluate',
                           '--checkpoint', os.path.join(out, checkpoint_file_name(1)),
                           '--dataset', dataset,
                           '--out', cli.path('evaluation'))
        assert code == 0, err
        trained = read_json(os.path.join(out, METRICS_FILE))
        evaluated = read_json(os.path.join(cli.path('evaluation'), METRICS_FILE))
        assert evaluated['seeds'][0]['metrics'] == trained['seeds'][0]['metrics']
        assert evaluated['regime'] == 'all'

    def test_rerun_is_deterministic(self, cli, gate_run):
        dataset, out = gate_run
        code, _, err = cli.train('mm-gate', dataset, 'again')
        assert code == 0, err
        for name in (METRICS_FILE, PREDICTIONS_FILE, checkpoint_file_name(1)):
            assert file_sha256(os.path.join(out, name)) == \
                file_sha256(os.path.join(cli.path('again'), name))

    def test_manifest_reproduces_run(self, cli, gate_run):
        _, out = gate_run
        code, _, err = cli('train',
                           '--config', os.path.join(out, MANIFEST_FILE),
                           '--out', cli.path('reproduced'))
        assert code == 0, err
        assert read_json(os.path.join(out, METRICS_FILE)) == \
            read_json(os.path.join(cli.path('reproduced'), METRICS_FILE))

    def test_existing_run_needs_force(self, cli, gate_run):
        dataset, _ = gate_run
        code, _, err = cli.train('mm-gate', dataset, 'gate')
        assert code == 1
        assert err.startswith('OutputExistsError: ')
        code, _, _ = cli.train('mm-gate', dataset, 'gate', '--force')
        assert code == 0

    def test_seed_overrides(self, cli):
        dataset = cli.synth()
        code, _, err = cli.train('text', dataset, 'seeds', '--seeds', '2,3')
        assert code == 0, err
        assert sorted(os.listdir(cli.path('seeds'))) == sorted([checkpoint_file_name(2),
                                                                checkpoint_file_name(3),
                                                                MANIFEST_FILE,
                                                                METRICS_FILE,
                                                                PREDICTIONS_FILE])

    def test_majority(self, cli):
        dataset = cli.synth()
        code, out, err = cli.train('majority', dataset, 'majority')
        assert code == 0, err
        assert out.startswith('F1 ')
        rows = read_jsonl(os.path.join(cli.path('majority'), PREDICTIONS_FILE))
        assert len({row['predicted'] for row in rows}) == 1

    def test_paired_all_without_images(self, cli):
        dataset = cli.synth(image_fraction=0.0)
        code, out, err = cli.train('mm-gate', dataset, 'paired', '--regime', 'paired-all')
        assert code == 1
        assert out == ''
        assert err.startswith('EmptySplitError: ')
        assert len(err.splitlines()) == 1

    def test_unknown_model(self, cli):
        dataset = cli.synth()
        code, _, err = cli.train('mm-fancy', dataset, 'fancy')
        assert code == 1
        assert err.startswith('ConfigError: ')


class TestAnalyses:
    """
    analyze-gate, dump-attention and errors commands
    """

    def test_gate_report(self, cli, gate_run):
        dataset, out = gate_run
        code, _, err = cli('analyze-gate',
                           '--checkpoint', os.path.join(out, checkpoint_file_name(1)),
                           '--dataset', dataset,
                           '--group-by', 'gold',
                           '--out', cli.path('gate_report'))
        assert code == 0, err
        report = read_json(os.path.join(cli.path('gate_report'), GATE_REPORT_FILE))
        assert report['group_by'] == 'gold'
        assert report['overall']['count'] == TINY_SYNTH['test_size']
        assert 0.0 <= report['overall']['text_share'] <= 100.0

    def test_gate_report_needs_gate(self, cli):
        dataset = cli.synth()
        code, _, err = cli.train('mm-xatt', dataset, 'xatt')
        assert code == 0, err
        code, _, err = cli('analyze-gate',
                           '--checkpoint', os.path.join(cli.path('xatt'), checkpoint_file_name(1)),
                           '--dataset', dataset,
                           '--out', cli.path('no_gate'))
        assert code == 1
        assert err.startswith('UnsupportedOperationError: ')
        assert not os.path.exists(cli.path('no_gate'))
        code, _, err = cli('dump-attention',
                           '--checkpoint', os.path.join(cli.path('xatt'), checkpoint_file_name(1)),
                           '--dataset', dataset,
                           '--out', cli.path('attention'))
        assert code == 0, err
        rows = read_jsonl(os.path.join(cli.path('attention'), ATTENTION_FILE))
        assert len(rows) == TINY_SYNTH['test_size']
        assert all(row['t2v'] == [[1.0]] for row in rows)

    def test_attention_of_posts_helped_by_the_image(self, cli):
        dataset = cli.synth()
        for model in ('mm-xatt', 'text'):
            code, _, err = cli.train(model, dataset, model)
            assert code == 0, err

        checkpoint = os.path.join(cli.path('mm-xatt'), checkpoint_file_name(1))
        text_rows = read_jsonl(os.path.join(cli.path('text'), PREDICTIONS_FILE))
        text_wrong = {row['id'] for row in text_rows if row['gold'] != row['predicted']}
        code, _, err = cli('dump-attention',
                           '--checkpoint', checkpoint,
                           '--dataset', dataset,
                           '--compare-checkpoint',
                           os.path.join(cli.path('text'), checkpoint_file_name(1)),
                           '--min-image-share', '10',
                           '--out', cli.path('helped'))
        assert code == 0, err
        for row in read_jsonl(os.path.join(cli.path('helped'), ATTENTION_FILE)):
            assert row['id'] in text_wrong
            assert row['predicted'] == row['gold']
            assert row['image_share'] >= 10.0

        code, _, err = cli('dump-attention',
                           '--checkpoint', checkpoint,
                           '--dataset', dataset,
                           '--compare-checkpoint', checkpoint,
                           '--min-image-share', '150',
                           '--out', cli.path('too_much'))
        assert code == 1
        assert err.startswith('ConfigError: ')

    def test_errors_from_predictions(self, cli, gate_run):
        dataset, out = gate_run
        checkpoint = os.path.join(out, checkpoint_file_name(1))
        code, _, err = cli('errors',
                           '--checkpoint', checkpoint,
                           '--predictions', os.path.join(out, PREDICTIONS_FILE),
                           '--out', cli.path('from_predictions'))
        assert code == 0, err
        code, _, err = cli('errors',
                           '--checkpoint', checkpoint,
                           '--dataset', dataset,
                           '--out', cli.path('from_dataset'))
        assert code == 0, err
        from_predictions = read_json(os.path.join(cli.path('from_predictions'), ERRORS_FILE))
        from_dataset = read_json(os.path.join(cli.path('from_dataset'), ERRORS_FILE))
        assert from_predictions['cells'] == from_dataset['cells']
        assert from_predictions['total'] == TINY_SYNTH['test_size']


class TestBaseline:
    """
    baseline command on the POI counts
    """

    def test_poi_majority(self, cli):
        code, out, _ = cli('baseline', '--fixture', POI_COUNTS, '--out', cli.path('baseline'))
        assert code == 0
        assert out == 'F1 5.30 PRECISION 3.36 RECALL 12.50'
        result = read_json(os.path.join(cli.path('baseline'), METRICS_FILE))
        assert result['metrics']['macro_percent'] == {'f1': 5.3, 'precision': 3.36, 'recall': 12.5}
        assert result['paired']['train']['paired_percent'] == 46.28


def test_logs_go_to_file(cli, tmp_path):
    cli.synth()
    with open(tmp_path / 'logs' / 'test.log') as log_file:
        lines = log_file.read().splitlines()

    assert any('[synth][INFO] Running synth' in line for line in lines)


@pytest.mark.parametrize('name', ['desk.json', 'poi.json'])
def test_shipped_configs_are_valid(name):
    args = vars(main.make_parser().parse_args(['train',
                                               '--config',
                                               os.path.join(main.BASE_DIR, 'configs', name)]))
    run_config = main.build_run_config(args)
    assert run_config.get('model') == 'mm-gated-xatt'
    assert run_config.get_train_config().get('seeds') == [1, 2, 3]


def directory_digest(path):
    """
    File names and SHA-256 of every file under a directory
    """
    digests = {}
    for root, _, files in os.walk(path):
        for name in files:
            full_path = os.path.join(root, name)
            digests[os.path.relpath(full_path, path)] = file_sha256(full_path)

    return digests


class TestMalformedInput:
    """
    Malformed files fail with exit code 1 and a single stderr line
    """

    def test_manifest_line_is_not_an_object(self, cli):
        dataset = cli.synth()
        with open(os.path.join(dataset, 'manifest.jsonl'), 'a') as manifest:
            manifest.write('[1, 2]\n')

        code, out, err = cli('ingest-validate', '--dataset', dataset)
        assert code == 1
        assert out == ''
        assert err.startswith('FormatError: ')
        assert len(err.splitlines()) == 1

    def test_prediction_label_outside_catalog(self, cli, gate_run):
        _, out = gate_run
        rows = read_jsonl(os.path.join(out, PREDICTIONS_FILE))
        rows[0]['gold'] = 'nope'
        predictions = cli.path('broken.jsonl')
        with open(predictions, 'w') as predictions_file:
            predictions_file.write(''.join(json.dumps(row) + '\n' for row in rows))

        code, _, err = cli('errors',
                           '--checkpoint', os.path.join(out, checkpoint_file_name(1)),
                           '--predictions', predictions,
                           '--out', cli.path('broken_errors'))
        assert code == 1
        assert err.startswith('UnknownLabelError: ')
        assert "'nope'" in err
        assert len(err.splitlines()) == 1

    def test_prediction_row_without_keys(self, cli, gate_run):
        _, out = gate_run
        predictions = cli.path('partial.jsonl')
        with open(predictions, 'w') as predictions_file:
            predictions_file.write('{"id": "a"}\n')

        code, _, err = cli('errors',
                           '--checkpoint', os.path.join(out, checkpoint_file_name(1)),
                           '--predictions', predictions,
                           '--out', cli.path('partial_errors'))
        assert code == 1
        assert err.startswith('FormatError: ')

    def test_unexpected_error_is_one_line(self, cli, monkeypatch):
        def fail(*_):
            raise RuntimeError('disk\nfull')

        monkeypatch.setattr(main.RunController, 'cmd_synth', fail)
        code, out, err = cli('synth', '--out', cli.path('data'))
        assert code == 1
        assert out == ''
        assert err == 'RuntimeError: disk full'


def test_commands_do_not_modify_dataset(cli, gate_run):
    dataset, out = gate_run
    before = directory_digest(dataset)
    checkpoint = os.path.join(out, checkpoint_file_name(1))
    assert cli.train('mm-gate', dataset, 'second')[0] == 0
    assert cli('evaluate', '--checkpoint', checkpoint, '--dataset', dataset,
               '--out', cli.path('evaluation'))[0] == 0
    for command in ('analyze-gate', 'errors'):
        assert cli(command, '--checkpoint', checkpoint, '--dataset', dataset,
                   '--out', cli.path(command))[0] == 0

    assert cli('ingest-validate', '--dataset', dataset)[0] == 0
    assert directory_digest(dataset) == before


def test_debug_logs_stay_off_stdout(cli, tmp_path):
    dataset = cli.synth()
    env_config = tmp_path / 'debug.cfg'
    env_config.write_text('[dev]\ndevelopment = True\n')
    code = main.main(['ingest-validate', '--dataset', dataset, '--env-config', str(env_config)])
    captured = cli.capsys.readouterr()
    assert code == 0
    assert json.loads(captured.out)['records'] == 54
    assert '[ingest-validate][INFO] Running ingest-validate' in captured.err
