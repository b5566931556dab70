"""
Module that contains SynthConfig class
"""
from core.model.model_base import ModelBase


class SynthConfig(ModelBase):
    """
    Parameters of the synthetic multimodal generator
    """

    _ModelBase__schema = {
        # Number of classes
        'classes': 2,
        # Records per split
        'train_size': 2000,
        'dev_size': 500,
        'test_size': 500,
        # Feature widths
        'd_t': 16,
        'd_v': 16,
        # pooled or sequence, rows per modality in sequence mode
        'granularity': 'pooled',
        'text_rows': 1,
        'image_rows': 1,
        # Mean magnitude and stdev of the informative modality
        'mu': 1.0,
        'sigma_s': 0.5,
        # Stdev of the uninformative modality
        'sigma_n': 1.0,
        # Probability that text carries the signal
        'rho': 0.5,
        # Fraction of records that have an image
        'image_fraction': 1.0,
        'seed': 1,
    }

    lambda_checks = {
        'classes': lambda c: 2 <= c <= 64,
        'train_size': lambda s: s >= 0,
        'dev_size': lambda s: s >= 0,
        'test_size': lambda s: s >= 0,
        'd_t': ModelBase.lambda_check('dimension'),
        'd_v': ModelBase.lambda_check('dimension'),
        'granularity': ModelBase.lambda_check('granularity'),
        'text_rows': lambda r: r >= 1,
        'image_rows': lambda r: r >= 1,
        'mu': lambda mu: mu > 0.0,
        'sigma_s': lambda s: s > 0.0,
        'sigma_n': lambda s: s >= 0.0,
        'rho': ModelBase.lambda_check('probability'),
        'image_fraction': ModelBase.lambda_check('probability'),
        'seed': ModelBase.lambda_check('seed'),
    }

    def get_rows(self):
        """
        Rows of text and image matrices
        """
        if self.get('granularity') == 'pooled':
            return 1, 1

        return self.get('text_rows'), self.get('image_rows')
