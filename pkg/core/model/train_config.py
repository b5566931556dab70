"""
Module that contains TrainConfig class
"""
from core.model.model_base import ModelBase


IMPUTATIONS = ('average', 'nearest')


class TrainConfig(ModelBase):
    """
    Optimizer and training loop settings
    """

    _ModelBase__schema = {
        # Adam learning rate
        'learning_rate': 1e-3,
        # Examples per mini-batch
        'batch_size': 32,
        # Upper bound of epochs
        'max_epochs': 100,
        # Epochs without dev loss improvement before stopping
        'patience': 5,
        # Dev loss must drop by more than this to count as improvement
        'min_delta': 0.0,
        # Seed of a single run
        'seed': 1,
        # Seeds of a multi-seed run
        'seeds': [1, 2, 3],
        # Adam moment decay rates and epsilon
        'beta1': 0.9,
        'beta2': 0.999,
        'epsilon': 1e-8,
        # Floating point mode of training
        'precision': 'single',
        # "balanced" uses N / (M * N_c) class weights, "none" uses 1 for all classes
        'class_weighting': 'balanced',
        # Image of posts without one: "average" train image or "nearest", the image of
        # the train post whose text features are most cosine-similar
        'imputation': 'average',
    }

    lambda_checks = {
        'learning_rate': lambda lr: lr >= 0.0,
        'batch_size': lambda b: b >= 1,
        'max_epochs': lambda e: e >= 1,
        'patience': lambda p: p >= 1,
        'min_delta': lambda d: d >= 0.0,
        'seed': ModelBase.lambda_check('seed'),
        'seeds': lambda s: len(s) >= 1,
        '__seeds': ModelBase.lambda_check('seed'),
        'beta1': lambda b: 0.0 <= b < 1.0,
        'beta2': lambda b: 0.0 <= b < 1.0,
        'epsilon': lambda e: e > 0.0,
        'precision': ModelBase.lambda_check('precision'),
        'class_weighting': lambda w: w in ('balanced', 'none'),
        'imputation': lambda i: i in IMPUTATIONS,
    }
