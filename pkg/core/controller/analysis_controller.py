"""
Module that contains AnalysisController class
"""
import numpy as np
from core.controller.controller_base import ControllerBase
from core.controller.evaluation_controller import EvaluationController
from core.fusion.classifiers import CLASSIFIERS
from core.fusion.fusion import predict
from core.model.reports import GateReport, AttentionRecord, ErrorReport
from core.utils.errors import UnsupportedOperationError, ConfigError, EmptySplitError


GATE_KINDS = tuple(kind for kind, cls in CLASSIFIERS.items() if cls.has_gate)
ATTENTION_KINDS = tuple(kind for kind, cls in CLASSIFIERS.items() if cls.has_attention)


def modality_share(output):
    """
    Text share of one example
    Gate models: mean of z over gate entries
    Attention models: norm of the image->text context over the sum of both context norms
    """
    if output.z is not None:
        return float(np.mean(output.z.value))

    text = float(np.linalg.norm(output.pooled_v2t.value))
    image = float(np.linalg.norm(output.pooled_t2v.value))
    if text + image == 0.0:
        return 0.5

    return text / (text + image)


class AnalysisController(ControllerBase):
    """
    Controller that has gate, attention and misclassification analyses
    """

    def __init__(self):
        ControllerBase.__init__(self)
        self.evaluation_controller = EvaluationController()

    def records(self, checkpoint, dataset, split, regime=None):
        """
        Prepared records of a split
        """
        dataset = self.evaluation_controller.prepare(checkpoint, dataset, regime)
        records = dataset.split(split)
        if not records:
            raise EmptySplitError(f'Split {split} is empty')

        return records

    def gate_contribution(self, checkpoint, dataset, split='test', group_by='predicted',
                          regime=None):
        """
        Mean text share (mean of z) per category, image share is 1 - text share
        Examples are grouped by predicted or gold category
        """
        kind = checkpoint.get('kind')
        if kind not in GATE_KINDS:
            raise UnsupportedOperationError(f'Gate analysis is not available for {kind}, '
                                            f'supported models: {", ".join(GATE_KINDS)}')

        if group_by not in ('predicted', 'gold'):
            raise ConfigError(f'Unknown grouping "{group_by}", expected predicted or gold')

        classes = checkpoint.get('classes')
        records = self.records(checkpoint, dataset, split, regime)
        sums = np.zeros(len(classes), dtype=np.float64)
        counts = np.zeros(len(classes), dtype=np.int64)
        shares = []
        examples = []
        for record, output in self.evaluation_controller.outputs(checkpoint, records):
            share = modality_share(output)
            gold = record.get('label')
            pred = predict(output.logits)
            category = pred if group_by == 'predicted' else gold
            sums[category] += share
            counts[category] += 1
            shares.append(share)
            examples.append({'id': record.get_id(),
                             'gold': classes[gold],
                             'predicted': classes[pred],
                             'text_share': round(100.0 * share, 2),
                             'z_min': float(np.min(output.z.value)),
                             'z_max': float(np.max(output.z.value))})

        text_share = [float(sums[index] / counts[index]) if counts[index] else None
                      for index in range(len(classes))]
        report = GateReport(classes,
                            group_by,
                            text_share,
                            counts.tolist(),
                            float(np.mean(shares)),
                            examples)
        self.logger.info('Gate analysis of %s %s records: mean text share %.2f%%',
                         len(records),
                         split,
                         100.0 * report.overall_text_share)
        return report

    def misclassified_by(self, compare, dataset, split, regime, records):
        """
        Records whose label the compare checkpoint does not predict
        """
        compare_records = self.records(compare, dataset, split, regime)
        preds = self.evaluation_controller.predict_records(compare, compare_records)
        wrong = {r.get_id() for r, pred in zip(compare_records, preds) if pred != r.get('label')}
        self.logger.info('%s of %s %s records are misclassified by the compared %s model',
                         len(wrong),
                         len(compare_records),
                         split,
                         compare.get('kind'))
        return [r for r in records if r.get_id() in wrong]

    def dump_attention(self, checkpoint, dataset, split='test', ids=None, regime=None,
                       compare=None, min_image_share=0.0):
        """
        Attention weights of both directions for every example or only the given ids
        With a compare checkpoint only examples that it misclassifies, this checkpoint
        classifies correctly and whose image share is at least min_image_share are kept
        """
        kind = checkpoint.get('kind')
        if kind not in ATTENTION_KINDS:
            raise UnsupportedOperationError(f'Attention dump is not available for {kind}, '
                                            f'supported models: {", ".join(ATTENTION_KINDS)}')

        classes = checkpoint.get('classes')
        records = self.records(checkpoint, dataset, split, regime)
        if ids:
            wanted = set(ids)
            records = [r for r in records if r.get_id() in wanted]

        if compare is not None and compare.get('classes') != classes:
            raise ConfigError('Compared checkpoints have different class catalogs')

        if compare is not None:
            records = self.misclassified_by(compare, dataset, split, regime, records)

        dump = []
        for record, output in self.evaluation_controller.outputs(checkpoint, records):
            dump.append(AttentionRecord(record.get_id(),
                                        classes[record.get('label')],
                                        classes[predict(output.logits)],
                                        output.attn_t2v.value.astype(np.float64).tolist(),
                                        output.attn_v2t.value.astype(np.float64).tolist(),
                                        modality_share(output)))

        if compare is not None:
            dump = [item for item in dump
                    if item.predicted == item.gold and 1.0 - item.text_share >= min_image_share]

        self.logger.info('Dumped attention of %s records', len(dump))
        return dump

    def error_report(self, metrics, preds, golds, ids):
        """
        Off-diagonal confusion cells sorted by count (descending), then gold and
        predicted index, with ids of the examples in each cell
        """
        classes = metrics.classes
        cell_ids = {}
        for record_id, gold, pred in zip(ids, golds, preds):
            if gold != pred:
                cell_ids.setdefault((int(gold), int(pred)), []).append(record_id)

        cells = []
        for (gold, pred), cell in sorted(cell_ids.items(),
                                         key=lambda item: (-len(item[1]), item[0])):
            cells.append({'gold': classes[gold],
                          'predicted': classes[pred],
                          'gold_index': gold,
                          'predicted_index': pred,
                          'count': int(metrics.confusion[gold, pred]),
                          'ids': cell})

        total_errors = int(metrics.confusion.sum() - np.trace(metrics.confusion))
        return ErrorReport(cells, total_errors, int(metrics.confusion.sum()))
