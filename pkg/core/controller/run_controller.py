"""
Module that contains RunController class
It wires datasets, training, evaluation and analyses into command runs that
write fixed artifact files into an output directory
"""
import os
import time
import datetime
import numpy as np
from core import __version__
from core.controller.controller_base import ControllerBase
from core.controller.dataset_controller import DatasetController
from core.controller.train_controller import TrainController
from core.controller.evaluation_controller import EvaluationController, compute_metrics
from core.controller.analysis_controller import AnalysisController
from core.fusion.classifiers import CLASSIFIERS
from core.model.dataset import SPLITS
from core.model.reports import (summarize_seeds,
                                METRICS_SCHEMA,
                                GATE_REPORT_SCHEMA,
                                ATTENTION_SCHEMA,
                                ERRORS_SCHEMA,
                                MANIFEST_SCHEMA,
                                VALIDATION_SCHEMA)
from core.utils.checkpoint_store import read_checkpoint, write_checkpoint
from core.utils.feature_store import prepare_output_dir
from core.utils.report_writer import (write_json,
                                      write_jsonl,
                                      read_jsonl,
                                      file_sha256,
                                      percent)
from core.utils.errors import ConfigError, FormatError, UnknownLabelError


METRICS_FILE = 'metrics.json'
GATE_REPORT_FILE = 'gate_report.json'
ATTENTION_FILE = 'attention.jsonl'
ERRORS_FILE = 'errors.json'
PREDICTIONS_FILE = 'predictions.jsonl'
MANIFEST_FILE = 'run_manifest.json'
VALIDATION_FILE = 'validation.json'
ANALYSES = ('gate', 'attention', 'errors')
PREDICTION_KEYS = ('id', 'gold', 'predicted')


def checkpoint_file_name(seed):
    """
    File name of the checkpoint of one seed
    """
    return f'checkpoint_seed{seed}.mmck'


def parse_prediction_rows(rows, classes, source):
    """
    Ids, gold and predicted class indices of predictions.jsonl rows
    """
    ids, golds, preds = [], [], []
    for number, row in enumerate(rows, start=1):
        if not isinstance(row, dict) or not all(key in row for key in PREDICTION_KEYS):
            raise FormatError(f'{source} row {number} needs id, gold and predicted')

        for key in ('gold', 'predicted'):
            if row[key] not in classes:
                raise UnknownLabelError(f'{source} row {number}: {key} label {row[key]!r} '
                                        f'is not in the class catalog')

        ids.append(row['id'])
        golds.append(classes.index(row['gold']))
        preds.append(classes.index(row['predicted']))

    return ids, golds, preds


def seed_entry(seed, checkpoint, evaluation):
    """
    Per-seed section of metrics.json
    """
    return {'seed': seed,
            'best_epoch': checkpoint.get('best_epoch'),
            'best_dev_loss': checkpoint.get('best_dev_loss'),
            'history': checkpoint.get('history'),
            'records': len(evaluation.ids),
            'metrics': evaluation.metrics.get_json()}


class RunController(ControllerBase):
    """
    Controller behind every command line command
    """

    def __init__(self):
        ControllerBase.__init__(self)
        self.dataset_controller = DatasetController()
        self.train_controller = TrainController()
        self.evaluation_controller = EvaluationController()
        self.analysis_controller = AnalysisController()
        self.started = time.time()

    @staticmethod
    def require_path(path, what, directory=False):
        """
        Raise ConfigError if a referenced path does not exist
        """
        if not path:
            raise ConfigError(f'{what} is not set')

        exists = os.path.isdir(path) if directory else os.path.isfile(path)
        if not exists:
            raise ConfigError(f'{what} {path} does not exist')

        return path

    def write_manifest(self, out, command, config, artifacts, extra=None):
        """
        Write run_manifest.json with hashes of all artifacts, written last
        """
        hashes = {}
        for name in sorted(artifacts):
            hashes[name] = file_sha256(os.path.join(out, name))

        manifest = {'command': command,
                    'version': __version__,
                    'config': config,
                    'artifacts': hashes,
                    'finished': datetime.datetime.now().isoformat(timespec='seconds'),
                    'wall_clock_seconds': round(time.time() - self.started, 3)}
        if extra:
            manifest.update(extra)

        return write_json(os.path.join(out, MANIFEST_FILE), manifest, MANIFEST_SCHEMA)

    def cmd_synth(self, run_config, out, force=False):
        """
        Generate a synthetic dataset into out
        """
        synth_config = run_config.get_synth_config()
        dataset = self.dataset_controller.synth_generate(synth_config)
        self.dataset_controller.write(dataset, out, force)
        return {'dataset': out, 'records': len(dataset), 'paired': dataset.paired_count()}

    def cmd_ingest_validate(self, dataset_path, out=None, force=False):
        """
        Validate a dataset directory, write validation.json if out is given
        """
        self.require_path(dataset_path, 'Dataset directory', directory=True)
        report = self.dataset_controller.validate(dataset_path)
        if out:
            prepare_output_dir(out, force)
            write_json(os.path.join(out, VALIDATION_FILE), report, VALIDATION_SCHEMA)

        return report

    def cmd_train(self, run_config, force=False):
        """
        Filter by regime, impute, train every seed, write checkpoints,
        test metrics, predictions and the run manifest
        """
        kind = run_config.get('model')
        regime = run_config.get('regime')
        out = run_config.get('out')
        if not out:
            raise ConfigError('Output directory is not set, use --out')

        dataset_path = self.require_path(run_config.get('dataset'),
                                         'Dataset directory',
                                         directory=True)
        train_config = run_config.get_train_config()
        dataset = self.dataset_controller.load(dataset_path)
        model_config = run_config.get_model_config(dataset.header)
        needs_image = kind in CLASSIFIERS and CLASSIFIERS[kind].needs_image
        prepare_output_dir(out, force)
        prepared = self.dataset_controller.prepare(dataset,
                                                   regime,
                                                   needs_image,
                                                   train_config.get('imputation'))
        if not prepared.split('test'):
            raise ConfigError(f'Test split is empty in regime {regime}')

        seeds = train_config.get('seeds')
        runs = self.train_controller.run_seeds(kind,
                                               prepared,
                                               train_config,
                                               model_config,
                                               seeds,
                                               regime)
        artifacts = []
        prediction_rows = []
        classes = dataset.header.get('classes')
        for run in runs.runs:
            name = checkpoint_file_name(run.seed)
            write_checkpoint(os.path.join(out, name), run.checkpoint)
            artifacts.append(name)
            for row in run.evaluation.prediction_rows(classes):
                prediction_rows.append({'seed': run.seed, **row})

        metrics = {'model': kind,
                   'regime': regime,
                   'dataset': dataset_path,
                   'split': 'test',
                   'seeds': [seed_entry(run.seed, run.checkpoint, run.evaluation)
                             for run in runs.runs],
                   'summary': runs.summary()}
        write_json(os.path.join(out, METRICS_FILE), metrics, METRICS_SCHEMA)
        write_jsonl(os.path.join(out, PREDICTIONS_FILE), prediction_rows)
        artifacts.extend([METRICS_FILE, PREDICTIONS_FILE])
        config = run_config.resolved(dataset.header)
        config['out'] = out
        config['dataset'] = dataset_path
        self.write_manifest(out,
                            'train',
                            config,
                            artifacts,
                            {'dataset_summary': prepared.summary()})
        return metrics

    def cmd_evaluate(self, checkpoint_path, dataset_path, out, regime=None, split='test',
                     force=False):
        """
        Evaluate a checkpoint on a dataset split
        """
        self.require_path(checkpoint_path, 'Checkpoint')
        self.require_path(dataset_path, 'Dataset directory', directory=True)
        checkpoint = read_checkpoint(checkpoint_path)
        dataset = self.dataset_controller.load(dataset_path)
        prepare_output_dir(out, force)
        evaluation = self.evaluation_controller.evaluate(checkpoint, dataset, split, regime)
        metrics = {'model': checkpoint.get('kind'),
                   'regime': regime or checkpoint.get('regime'),
                   'dataset': dataset_path,
                   'checkpoint': checkpoint_path,
                   'split': split,
                   'seeds': [seed_entry(checkpoint.get('seed'), checkpoint, evaluation)],
                   'summary': summarize_seeds([evaluation.metrics])}
        write_json(os.path.join(out, METRICS_FILE), metrics, METRICS_SCHEMA)
        rows = evaluation.prediction_rows(checkpoint.get('classes'))
        write_jsonl(os.path.join(out, PREDICTIONS_FILE), rows)
        self.write_manifest(out,
                            'evaluate',
                            {'checkpoint': checkpoint_path,
                             'dataset': dataset_path,
                             'regime': metrics['regime'],
                             'split': split,
                             'out': out},
                            [METRICS_FILE, PREDICTIONS_FILE])
        return metrics

    def cmd_analyze(self, which, checkpoint_path, dataset_path, out, regime=None, split='test',
                    group_by='predicted', predictions_path=None, force=False,
                    compare_path=None, min_image_share=0.0):
        """
        Run gate, attention or errors analysis and write its report
        """
        if which not in ANALYSES:
            raise ConfigError(f'Unknown analysis "{which}", expected one of {", ".join(ANALYSES)}')

        self.require_path(checkpoint_path, 'Checkpoint')
        checkpoint = read_checkpoint(checkpoint_path)
        if which == 'errors' and predictions_path:
            self.require_path(predictions_path, 'Predictions file')
            dataset = None
        else:
            self.require_path(dataset_path, 'Dataset directory', directory=True)
            dataset = self.dataset_controller.load(dataset_path)

        if which == 'gate':
            report = self.analysis_controller.gate_contribution(checkpoint,
                                                                dataset,
                                                                split,
                                                                group_by,
                                                                regime)
            prepare_output_dir(out, force)
            artifact = write_json(os.path.join(out, GATE_REPORT_FILE),
                                  {'model': checkpoint.get('kind'),
                                   'split': split,
                                   **report.get_json()},
                                  GATE_REPORT_SCHEMA)
            result = report.get_json()
        elif which == 'attention':
            if not 0.0 <= min_image_share <= 100.0:
                raise ConfigError(f'Minimum image share {min_image_share} is outside [0, 100]')

            compare = None
            if compare_path:
                self.require_path(compare_path, 'Compare checkpoint')
                compare = read_checkpoint(compare_path)

            dump = self.analysis_controller.dump_attention(checkpoint,
                                                           dataset,
                                                           split,
                                                           None,
                                                           regime,
                                                           compare,
                                                           min_image_share / 100.0)
            prepare_output_dir(out, force)
            rows = [{'schema': ATTENTION_SCHEMA, **record.get_json()} for record in dump]
            artifact = write_jsonl(os.path.join(out, ATTENTION_FILE), rows)
            result = {'records': len(rows)}
        else:
            report = self.errors(checkpoint, dataset, split, regime, predictions_path)
            prepare_output_dir(out, force)
            artifact = write_json(os.path.join(out, ERRORS_FILE),
                                  {'model': checkpoint.get('kind'),
                                   'split': split,
                                   **report.get_json()},
                                  ERRORS_SCHEMA)
            result = report.get_json()

        self.write_manifest(out,
                            f'analyze-{which}',
                            {'checkpoint': checkpoint_path,
                             'dataset': dataset_path,
                             'predictions': predictions_path,
                             'compare_checkpoint': compare_path,
                             'min_image_share': min_image_share if compare_path else None,
                             'regime': regime or checkpoint.get('regime'),
                             'split': split,
                             'group_by': group_by,
                             'out': out},
                            [os.path.basename(artifact)])
        return result

    def errors(self, checkpoint, dataset, split, regime, predictions_path=None):
        """
        Error report from a predictions file or by predicting the split
        """
        classes = checkpoint.get('classes')
        if predictions_path:
            rows = read_jsonl(predictions_path)
            seeds = sorted({row['seed'] for row in rows if isinstance(row, dict) and 'seed' in row})
            if seeds:
                seed = checkpoint.get('seed') if checkpoint.get('seed') in seeds else seeds[0]
                rows = [row for row in rows if isinstance(row, dict) and row.get('seed') == seed]

            ids, golds, preds = parse_prediction_rows(rows, classes, predictions_path)
            metrics = compute_metrics(preds, golds, classes)
        else:
            evaluation = self.evaluation_controller.evaluate(checkpoint, dataset, split, regime)
            ids = evaluation.ids
            golds = evaluation.golds
            preds = evaluation.preds
            metrics = evaluation.metrics

        return self.analysis_controller.error_report(metrics, preds, golds, ids)

    def cmd_baseline(self, fixture_path, out=None, force=False):
        """
        Majority baseline on per-class counts, no features needed
        """
        self.require_path(fixture_path, 'Counts fixture')
        counts = self.dataset_controller.load_poi_counts(fixture_path)
        classes = counts['classes']
        tweets = counts['tweets']
        majority = self.dataset_controller.majority_class(tweets['train'])
        golds = np.repeat(np.arange(len(classes)), tweets['test'])
        preds = self.dataset_controller.majority_baseline(tweets['train'], golds.size)
        metrics = compute_metrics(preds, golds, classes)
        totals = counts.get('totals', {})
        paired = {}
        for split in SPLITS:
            records = totals.get('tweets', {}).get(split, int(np.sum(tweets[split])))
            images = totals.get('images', {}).get(split, int(np.sum(counts['images'][split])))
            paired[split] = {'records': records,
                             'paired': images,
                             'paired_percent': percent(images / records) if records else None}

        result = {'model': 'majority',
                  'fixture': fixture_path,
                  'majority_class': classes[majority],
                  'split': 'test',
                  'records': int(golds.size),
                  'metrics': metrics.get_json(),
                  'paired': paired}
        self.logger.info('Majority baseline: F1 %.2f, P %.2f, R %.2f',
                         100 * metrics.macro_f1,
                         100 * metrics.macro_precision,
                         100 * metrics.macro_recall)
        if out:
            prepare_output_dir(out, force)
            write_json(os.path.join(out, METRICS_FILE), result, METRICS_SCHEMA)
            self.write_manifest(out,
                                'baseline',
                                {'fixture': fixture_path, 'out': out},
                                [METRICS_FILE])

        return result
