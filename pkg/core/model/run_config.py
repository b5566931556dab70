"""
Module that contains RunConfig class
"""
import json
from core.model.model_base import ModelBase
from core.model.model_config import ModelConfig
from core.model.train_config import TrainConfig
from core.model.synth_config import SynthConfig
from core.utils.errors import ConfigError


SCHEMA_VERSION = 1


class RunConfig(ModelBase):
    """
    Everything that defines one experiment run
    """

    _ModelBase__schema = {
        # Version of this configuration format
        'schema_version': SCHEMA_VERSION,
        # Model kind
        'model': 'mm-gated-xatt',
        # MMFV1 dataset directory
        'dataset': '',
        # all, paired-all or paired-train
        'regime': 'all',
        # Output directory
        'out': '',
        # Split that is evaluated or analyzed
        'split': 'test',
        # Gate analysis grouping, predicted or gold
        'group_by': 'predicted',
        # TrainConfig, ModelConfig and SynthConfig attributes
        'train': {},
        'model_config': {},
        'synth': {},
    }

    lambda_checks = {
        'schema_version': lambda version: version == SCHEMA_VERSION,
        'model': ModelBase.lambda_check('model'),
        'regime': ModelBase.lambda_check('regime'),
        'split': ModelBase.lambda_check('split'),
        'group_by': lambda group_by: group_by in ('predicted', 'gold'),
        'train': lambda train: isinstance(train, dict),
        'model_config': lambda model_config: isinstance(model_config, dict),
        'synth': lambda synth: isinstance(synth, dict),
    }

    @classmethod
    def from_file(cls, path):
        """
        Read a run config, or the config section of a run manifest
        """
        try:
            with open(path) as config_file:
                json_input = json.load(config_file)
        except OSError as ex:
            raise ConfigError(f'Could not read config {path}: {ex}') from ex
        except json.JSONDecodeError as ex:
            raise ConfigError(f'Config {path} is not valid JSON: {ex}') from ex

        if isinstance(json_input, dict) and 'config' in json_input and 'artifacts' in json_input:
            json_input = json_input['config']

        if not isinstance(json_input, dict):
            raise ConfigError(f'Config {path} must be a JSON object')

        if 'schema_version' not in json_input:
            raise ConfigError(f'Config {path} has no schema_version')

        return cls(json_input)

    def get_train_config(self):
        """
        TrainConfig object, validated
        """
        return TrainConfig(self.get('train'))

    def get_synth_config(self):
        """
        SynthConfig object, validated
        """
        return SynthConfig(self.get('synth'))

    def get_model_config(self, header=None):
        """
        ModelConfig object, widths, classes and granularity come from the dataset header
        """
        json_input = dict(self.get('model_config'))
        if header is not None:
            for key in ('d_t', 'd_v', 'granularity'):
                if key in json_input and json_input[key] != header.get(key):
                    raise ConfigError(f'model_config {key}={json_input[key]} does not match '
                                      f'dataset {key}={header.get(key)}')

                json_input[key] = header.get(key)

            json_input['classes'] = header.class_count()

        return ModelConfig(json_input)

    def resolved(self, header=None):
        """
        Configuration with all defaults filled in, as written to the run manifest
        """
        json_output = self.get_json()
        json_output['train'] = self.get_train_config().get_json()
        json_output['model_config'] = self.get_model_config(header).get_json()
        if self.get('synth'):
            json_output['synth'] = self.get_synth_config().get_json()

        return json_output
