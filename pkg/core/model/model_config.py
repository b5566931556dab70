"""
Module that contains ModelConfig class
"""
from core.model.model_base import ModelBase


class ModelConfig(ModelBase):
    """
    Dimensions and options of a fusion classifier
    """

    _ModelBase__schema = {
        # Text feature width
        'd_t': 768,
        # Image feature width
        'd_v': 2048,
        # Width of the fused representation h of gate models
        'd': 200,
        # Attention projection width, 0 means same as d
        'd_proj': 0,
        # Number of classes
        'classes': 8,
        # Dropout probability applied to h before the classification layer
        'dropout': 0.0,
        # Gate z is a vector of width d or one scalar
        'gate_mode': 'vector',
        # Attention over token/region sequences or over pooled vectors
        'granularity': 'sequence',
    }

    lambda_checks = {
        'd_t': ModelBase.lambda_check('dimension'),
        'd_v': ModelBase.lambda_check('dimension'),
        'd': ModelBase.lambda_check('dimension'),
        'd_proj': lambda d: isinstance(d, int) and d >= 0,
        'classes': lambda m: isinstance(m, int) and m >= 2,
        'dropout': lambda p: 0.0 <= p < 1.0,
        'gate_mode': lambda g: g in ('vector', 'scalar'),
        'granularity': ModelBase.lambda_check('granularity'),
    }

    def get_d_proj(self):
        """
        Attention projection width with the default resolved
        """
        return self.get('d_proj') or self.get('d')

    def get_gate_width(self):
        """
        Number of gate entries, d in vector mode and 1 in scalar mode
        """
        return self.get('d') if self.get('gate_mode') == 'vector' else 1
