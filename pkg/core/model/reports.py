"""
Module that contains report objects: Metrics, GateReport, AttentionRecord and ErrorReport
Fractions are kept in [0, 1], JSON output adds percentages with 2 decimal places
"""
import numpy as np
from core.utils.report_writer import percent


METRICS_SCHEMA = 'mmfuse.metrics/1'
GATE_REPORT_SCHEMA = 'mmfuse.gate_report/1'
ATTENTION_SCHEMA = 'mmfuse.attention/1'
ERRORS_SCHEMA = 'mmfuse.errors/1'
MANIFEST_SCHEMA = 'mmfuse.run_manifest/1'
VALIDATION_SCHEMA = 'mmfuse.validation/1'


class Metrics:
    """
    Per-class and macro precision, recall and F1 with the confusion matrix
    confusion[gold, predicted]
    """

    def __init__(self, classes, precision, recall, f1, support, confusion):
        self.classes = classes
        self.precision = precision
        self.recall = recall
        self.f1 = f1
        self.support = support
        self.confusion = confusion

    @property
    def macro_precision(self):
        """
        Unweighted mean of per-class precision
        """
        return float(np.mean(self.precision))

    @property
    def macro_recall(self):
        """
        Unweighted mean of per-class recall
        """
        return float(np.mean(self.recall))

    @property
    def macro_f1(self):
        """
        Unweighted mean of per-class F1
        """
        return float(np.mean(self.f1))

    @property
    def accuracy(self):
        """
        Fraction of correct predictions, 0 for no predictions
        """
        total = int(self.confusion.sum())
        return float(np.trace(self.confusion)) / total if total else 0.0

    def macro(self):
        """
        Macro scores as fractions
        """
        return {'f1': self.macro_f1,
                'precision': self.macro_precision,
                'recall': self.macro_recall}

    def get_json(self):
        """
        JSON-friendly dictionary
        """
        macro = self.macro()
        return {'macro': macro,
                'macro_percent': {key: percent(value) for key, value in macro.items()},
                'accuracy': self.accuracy,
                'per_class': [{'class': name,
                               'precision': float(self.precision[index]),
                               'recall': float(self.recall[index]),
                               'f1': float(self.f1[index]),
                               'support': int(self.support[index])}
                              for index, name in enumerate(self.classes)],
                'confusion': self.confusion.tolist()}


def summarize_seeds(per_seed):
    """
    Mean and sample standard deviation of macro scores over seeds
    One seed gives standard deviation 0
    """
    summary = {}
    for key in ('f1', 'precision', 'recall'):
        values = np.array([metrics.macro()[key] for metrics in per_seed], dtype=np.float64)
        std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
        summary[key] = {'mean': float(np.mean(values)),
                        'std': std,
                        'mean_percent': percent(np.mean(values)),
                        'std_percent': percent(std)}

    return summary


class GateReport:
    """
    Mean text and image share of the gate per category
    Shares of categories without examples are None
    """

    def __init__(self, classes, group_by, text_share, counts, overall_text_share, examples=None):
        self.classes = classes
        self.group_by = group_by
        self.text_share = text_share
        self.counts = counts
        self.overall_text_share = overall_text_share
        self.examples = examples or []

    def get_json(self):
        """
        JSON-friendly dictionary, shares in percent
        """
        categories = []
        for index, name in enumerate(self.classes):
            text = percent(self.text_share[index])
            image = None if text is None else round(100.0 - text, 2)
            categories.append({'class': name,
                               'count': self.counts[index],
                               'text_share': text,
                               'image_share': image})

        overall = percent(self.overall_text_share)
        return {'group_by': self.group_by,
                'categories': categories,
                'overall': {'text_share': overall,
                            'image_share': None if overall is None else round(100.0 - overall, 2),
                            'count': sum(self.counts)},
                'examples': self.examples}


class AttentionRecord:
    """
    Attention weights of both directions for one example
    """

    def __init__(self, record_id, gold, predicted, t2v, v2t, text_share):
        self.id = record_id
        self.gold = gold
        self.predicted = predicted
        self.t2v = t2v
        self.v2t = v2t
        self.text_share = text_share

    def get_json(self):
        """
        JSON-friendly dictionary, shares in percent
        """
        text = percent(self.text_share)
        return {'id': self.id,
                'gold': self.gold,
                'predicted': self.predicted,
                't2v': self.t2v,
                'v2t': self.v2t,
                'text_share': text,
                'image_share': round(100.0 - text, 2),
                'caption': f'Txt: {text:.0f}% - Img: {100.0 - text:.0f}%'}


class ErrorReport:
    """
    Off-diagonal confusion cells ranked by count
    """

    def __init__(self, cells, total_errors, total):
        self.cells = cells
        self.total_errors = total_errors
        self.total = total

    def get_json(self):
        """
        JSON-friendly dictionary
        """
        return {'total': self.total,
                'total_errors': self.total_errors,
                'cells': self.cells}
