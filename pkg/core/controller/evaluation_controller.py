"""
Module that contains EvaluationController class
"""
import numpy as np
from core.controller.controller_base import ControllerBase
from core.controller.dataset_controller import DatasetController
from core.fusion.fusion import predict
from core.model.reports import Metrics
from core.utils.errors import (EmptySplitError,
                               ShapeMismatchError,
                               UnknownLabelError,
                               ConfigError)


class Evaluation:
    """
    Predictions of one checkpoint on one split with their metrics
    """

    def __init__(self, split, ids, golds, preds, metrics):
        self.split = split
        self.ids = ids
        self.golds = golds
        self.preds = preds
        self.metrics = metrics

    def prediction_rows(self, classes):
        """
        Rows of predictions.jsonl
        """
        return [{'id': record_id,
                 'gold': classes[int(gold)],
                 'predicted': classes[int(pred)]}
                for record_id, gold, pred in zip(self.ids, self.golds, self.preds)]


def compute_metrics(preds, golds, classes):
    """
    Per-class and macro precision, recall and F1
    classes is the class count or the list of class names
    Undefined ratios (0/0) count as 0
    """
    if isinstance(classes, int):
        classes = [str(index) for index in range(classes)]

    count = len(classes)
    preds = np.asarray(preds, dtype=np.int64).reshape(-1)
    golds = np.asarray(golds, dtype=np.int64).reshape(-1)
    if preds.shape != golds.shape:
        raise ShapeMismatchError(f'Got {preds.size} predictions and {golds.size} gold labels')

    for name, labels in (('prediction', preds), ('gold label', golds)):
        if labels.size and (labels.min() < 0 or labels.max() >= count):
            raise UnknownLabelError(f'A {name} is outside of class range 0..{count - 1}')

    confusion = np.zeros((count, count), dtype=np.int64)
    np.add.at(confusion, (golds, preds), 1)
    true_positive = np.diag(confusion).astype(np.float64)
    predicted = confusion.sum(axis=0).astype(np.float64)
    support = confusion.sum(axis=1)
    precision = np.divide(true_positive,
                          predicted,
                          out=np.zeros(count),
                          where=predicted > 0)
    recall = np.divide(true_positive,
                       support.astype(np.float64),
                       out=np.zeros(count),
                       where=support > 0)
    total = precision + recall
    f1 = np.divide(2 * precision * recall, total, out=np.zeros(count), where=total > 0)
    return Metrics(list(classes), precision, recall, f1, support, confusion)


class EvaluationController(ControllerBase):
    """
    Controller that runs checkpoints on datasets and scores the predictions
    """

    def __init__(self):
        ControllerBase.__init__(self)
        self.dataset_controller = DatasetController()

    def prepare(self, checkpoint, dataset, regime=None):
        """
        Filter dataset by regime and impute missing images with the stored average image
        or, for nearest imputation, with images of train posts of the dataset
        """
        regime = regime or checkpoint.get('regime')
        if regime == 'paired-all':
            dataset = self.dataset_controller.apply_regime(dataset, regime)

        if checkpoint.is_majority() or not checkpoint.get_classifier().needs_image:
            return dataset

        average_image = checkpoint.get('average_image')
        if average_image is None:
            raise ConfigError('Checkpoint has no average image to impute missing images')

        if checkpoint.get_train_config().get('imputation') == 'nearest':
            return self.dataset_controller.impute_nearest(dataset,
                                                          dataset.split('train'),
                                                          average_image)

        return self.dataset_controller.impute_missing(dataset, average_image)

    def outputs(self, checkpoint, records):
        """
        Yield (record, FusionOutput) for every record
        """
        classifier = checkpoint.get_classifier()
        params = checkpoint.get_params()
        precision = checkpoint.get_train_config().get('precision')
        for record in records:
            yield record, classifier.infer(params,
                                           record.get('text_feats'),
                                           record.get('image_feats'),
                                           precision)

    def predict_records(self, checkpoint, records):
        """
        Predicted class index of every record
        """
        if checkpoint.is_majority():
            return np.full(len(records), checkpoint.get('majority_class'), dtype=np.int64)

        preds = [predict(output.logits) for _, output in self.outputs(checkpoint, records)]
        return np.array(preds, dtype=np.int64)

    def evaluate(self, checkpoint, dataset, split='test', regime=None):
        """
        Predict a split and compute metrics
        """
        if dataset.header.get('classes') != checkpoint.get('classes'):
            raise ConfigError('Dataset class catalog differs from the checkpoint class catalog')

        dataset = self.prepare(checkpoint, dataset, regime)
        records = dataset.split(split)
        if not records:
            raise EmptySplitError(f'Split {split} is empty')

        preds = self.predict_records(checkpoint, records)
        golds = np.array([r.get('label') for r in records], dtype=np.int64)
        metrics = compute_metrics(preds, golds, checkpoint.get('classes'))
        self.logger.info('%s on %s %s records: macro F1 %.4f, P %.4f, R %.4f',
                         checkpoint.get('kind'),
                         len(records),
                         split,
                         metrics.macro_f1,
                         metrics.macro_precision,
                         metrics.macro_recall)
        return Evaluation(split, [r.get_id() for r in records], golds, preds, metrics)
