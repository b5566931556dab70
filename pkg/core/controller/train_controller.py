"""
Module that contains TrainController class
"""
import math
import numpy as np
from core.controller.controller_base import ControllerBase
from core.controller.dataset_controller import DatasetController
from core.controller.evaluation_controller import EvaluationController
from core.fusion.classifiers import get_classifier
from core.kernel import ops
from core.kernel.tape import Tape
from core.model.checkpoint import Checkpoint
from core.model.model_config import ModelConfig
from core.model.train_config import TrainConfig
from core.model.reports import summarize_seeds
from core.utils.early_stopping import EarlyStopping
from core.utils.optimizer import AdamState, adam_step
from core.utils.random_streams import make_stream, SHUFFLE_STREAM, DROPOUT_STREAM
from core.utils.errors import ConfigError, EmptySplitError, NonFiniteError


class SeedRun:
    """
    Checkpoint and test evaluation of one seed
    """

    def __init__(self, seed, checkpoint, evaluation):
        self.seed = seed
        self.checkpoint = checkpoint
        self.evaluation = evaluation


class SeedRuns:
    """
    Runs of all seeds with mean and sample standard deviation of macro scores
    """

    def __init__(self, runs):
        self.runs = runs

    def summary(self):
        """
        Mean and standard deviation of macro F1, precision and recall
        """
        return summarize_seeds([run.evaluation.metrics for run in self.runs])


class TrainController(ControllerBase):
    """
    Controller that trains models with Adam and early stopping on dev loss
    """

    def __init__(self):
        ControllerBase.__init__(self)
        self.dataset_controller = DatasetController()
        self.evaluation_controller = EvaluationController()

    @staticmethod
    def batch_loss(classifier, tape, nodes, records, class_weights, training, generator):
        """
        Mean weighted cross entropy of records, summed in record order
        """
        total = None
        for record in records:
            output = classifier.forward(tape,
                                        nodes,
                                        record.get('text_feats'),
                                        record.get('image_feats'),
                                        training,
                                        generator)
            loss = ops.weighted_cross_entropy(output.logits, record.get('label'), class_weights)
            total = loss if total is None else ops.add(total, loss)

        return ops.scale(total, 1.0 / len(records))

    def mean_loss(self, classifier, params, records, class_weights, precision):
        """
        Mean weighted cross entropy without dropout
        """
        losses = []
        for record in records:
            tape = Tape(precision)
            nodes = {name: tape.constant(value, name=name) for name, value in params.items()}
            loss = self.batch_loss(classifier, tape, nodes, [record], class_weights, False, None)
            losses.append(float(loss.value[0, 0]))

        return float(np.mean(losses))

    def majority_checkpoint(self, dataset, model_config, train_config, regime):
        """
        Majority baseline needs no optimization
        """
        majority_class = self.dataset_controller.majority_class(dataset.label_counts('train'))
        self.logger.info('Majority class is %s', dataset.header.get('classes')[majority_class])
        return Checkpoint({'kind': 'majority',
                           'classes': dataset.header.get('classes'),
                           'model_config': model_config.get_json(),
                           'train_config': train_config.get_json(),
                           'regime': regime,
                           'seed': train_config.get('seed'),
                           'majority_class': majority_class})

    def check_config(self, dataset, model_config):
        """
        Model dimensions must agree with the dataset header
        """
        header = dataset.header
        for key in ('d_t', 'd_v'):
            if model_config.get(key) != header.get(key):
                raise ConfigError(f'Model {key}={model_config.get(key)} does not match '
                                  f'dataset {key}={header.get(key)}')

        if model_config.get('classes') != header.class_count():
            raise ConfigError(f'Model has {model_config.get("classes")} classes, '
                              f'dataset has {header.class_count()}')

    def train_model(self, kind, dataset, train_config, model_config, regime='all'):
        """
        Train one model on a prepared dataset with the seed of train_config
        Return checkpoint with parameters of the epoch with the lowest dev loss
        """
        if not isinstance(train_config, TrainConfig):
            train_config = TrainConfig(train_config)

        if not isinstance(model_config, ModelConfig):
            model_config = ModelConfig(model_config)

        train = dataset.split('train')
        dev = dataset.split('dev')
        if not train:
            raise EmptySplitError('Train split is empty')

        if kind == 'majority':
            return self.majority_checkpoint(dataset, model_config, train_config, regime)

        if not dev:
            raise EmptySplitError('Dev split is empty, it is needed for early stopping')

        self.check_config(dataset, model_config)
        seed = train_config.get('seed')
        precision = train_config.get('precision')
        batch_size = train_config.get('batch_size')
        learning_rate = train_config.get('learning_rate')
        adam_options = {'beta1': train_config.get('beta1'),
                        'beta2': train_config.get('beta2'),
                        'epsilon': train_config.get('epsilon')}
        class_weights = self.dataset_controller.class_weights(dataset.label_counts('train'),
                                                              train_config.get('class_weighting'))
        classifier = get_classifier(kind, model_config)
        params = classifier.init_params(seed)
        best_params = params
        state = AdamState.for_params(params)
        shuffle_stream = make_stream(seed, SHUFFLE_STREAM)
        dropout_stream = make_stream(seed, DROPOUT_STREAM)
        stopping = EarlyStopping(train_config.get('patience'), train_config.get('min_delta'))
        history = []
        self.logger.info('Training %s on %s train and %s dev records, seed %s',
                         kind,
                         len(train),
                         len(dev),
                         seed)
        for epoch in range(1, train_config.get('max_epochs') + 1):
            order = shuffle_stream.permutation(len(train))
            batch_losses = []
            for start in range(0, len(train), batch_size):
                batch = [train[index] for index in order[start:start + batch_size]]
                tape = Tape(precision)
                nodes = {name: tape.parameter(name, params[name]) for name in sorted(params)}
                loss = self.batch_loss(classifier,
                                       tape,
                                       nodes,
                                       batch,
                                       class_weights,
                                       True,
                                       dropout_stream)
                value = float(loss.value[0, 0])
                if not math.isfinite(value):
                    raise NonFiniteError(f'Training loss is {value} in epoch {epoch}')

                gradients = tape.backward(loss)
                params, state = adam_step(params, gradients, state, learning_rate, **adam_options)
                batch_losses.append(value)

            train_loss = float(np.mean(batch_losses))
            dev_loss = self.mean_loss(classifier, params, dev, class_weights, precision)
            if not math.isfinite(dev_loss):
                raise NonFiniteError(f'Dev loss is {dev_loss} in epoch {epoch}')

            history.append({'epoch': epoch, 'train_loss': train_loss, 'dev_loss': dev_loss})
            if stopping(epoch, dev_loss):
                best_params = params

            self.logger.info('Epoch %s: train loss %.6f, dev loss %.6f, best epoch %s',
                             epoch,
                             train_loss,
                             dev_loss,
                             stopping.best_epoch)
            if stopping.early_stop:
                self.logger.info('No dev loss improvement for %s epochs, stopping',
                                 stopping.patience)
                break

        return Checkpoint({'kind': kind,
                           'classes': dataset.header.get('classes'),
                           'model_config': model_config.get_json(),
                           'train_config': train_config.get_json(),
                           'regime': regime,
                           'seed': seed,
                           'best_epoch': stopping.best_epoch,
                           'best_dev_loss': stopping.best_loss,
                           'class_weights': class_weights.tolist(),
                           'history': history,
                           'params': best_params,
                           'average_image': dataset.average_image})

    def run_seeds(self, kind, dataset, train_config, model_config, seeds=None, regime='all'):
        """
        Train and evaluate on test once per seed
        """
        if not isinstance(train_config, TrainConfig):
            train_config = TrainConfig(train_config)

        seeds = list(seeds or train_config.get('seeds'))
        if not seeds:
            raise ConfigError('At least one seed is needed')

        runs = []
        for seed in seeds:
            with self.run_context(f'{kind}/seed={seed}'):
                seed_config = TrainConfig(train_config.get_json())
                seed_config.set('seed', seed)
                checkpoint = self.train_model(kind, dataset, seed_config, model_config, regime)
                evaluation = self.evaluation_controller.evaluate(checkpoint,
                                                                 dataset,
                                                                 'test',
                                                                 regime)
                runs.append(SeedRun(seed, checkpoint, evaluation))

        return SeedRuns(runs)
