"""
Shared fixtures: tiny synthetic datasets, configs and a quiet env config
"""
import os
import logging
import numpy as np
import pytest
from core.controller.dataset_controller import DatasetController
from core.kernel.matrix import Matrix, Precision
from core.kernel.tape import Tape
from core.model.model_config import ModelConfig
from core.utils.global_config import Config
from core.utils.run_filter import RunFilter


ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
POI_COUNTS = os.path.join(ROOT, 'fixtures', 'poi_counts.json')

TINY_SYNTH = {'classes': 3,
              'train_size': 30,
              'dev_size': 12,
              'test_size': 12,
              'd_t': 6,
              'd_v': 5,
              'image_fraction': 0.7,
              'seed': 7}

FAST_TRAIN = {'learning_rate': 0.01,
              'batch_size': 8,
              'max_epochs': 3,
              'patience': 2,
              'seeds': [1],
              'precision': 'double'}


def model_config_for(dataset, **overrides):
    """
    Small ModelConfig that matches a dataset header
    """
    header = dataset.header
    json_input = {'d_t': header.get('d_t'),
                  'd_v': header.get('d_v'),
                  'd': 4,
                  'd_proj': 4,
                  'classes': header.class_count(),
                  'granularity': header.get('granularity')}
    json_input.update(overrides)
    return ModelConfig(json_input)


def constants(tape, arrays):
    """
    Put a dictionary of arrays on a tape as constants
    """
    return {name: tape.constant(np.asarray(value, dtype=np.float64), name=name)
            for name, value in arrays.items()}


def double_tape():
    """
    Tape in double precision
    """
    return Tape(Precision.DOUBLE)


def matrix(values):
    """
    Double precision Matrix from nested lists
    """
    return Matrix(np.asarray(values, dtype=np.float64), Precision.DOUBLE)


@pytest.fixture(autouse=True)
def reset_globals():
    """
    Forget env config and run name between tests
    """
    Config.clear()
    RunFilter.set_run('-')
    yield
    Config.clear()
    RunFilter.set_run('-')
    logging.getLogger().handlers.clear()


@pytest.fixture
def dataset_controller():
    """
    DatasetController object
    """
    return DatasetController()


@pytest.fixture
def tiny_dataset(dataset_controller):
    """
    Pooled synthetic dataset with some missing images
    """
    return dataset_controller.synth_generate(TINY_SYNTH)


@pytest.fixture
def sequence_dataset(dataset_controller):
    """
    Synthetic dataset with 3 text rows and 2 image rows per record
    """
    return dataset_controller.synth_generate({**TINY_SYNTH,
                                              'granularity': 'sequence',
                                              'text_rows': 3,
                                              'image_rows': 2})


@pytest.fixture
def env_config(tmp_path):
    """
    Env config file that logs to a file in a temporary directory
    """
    path = tmp_path / 'test.cfg'
    path.write_text('[dev]\n'
                    'port = 8002\n'
                    'host = 127.0.0.1\n'
                    'development = False\n'
                    f'log_dir = {tmp_path / "logs"}\n'
                    'log_file = test.log\n')
    return str(path)
