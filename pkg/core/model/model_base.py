"""
Module that contains ModelBase class
"""
import re
import logging
from copy import deepcopy
from core.utils.errors import ConfigError


def make_regex_matcher(pattern):
    """
    Return a function that checks if whole string matches given pattern
    """
    compiled = re.compile(pattern)
    return lambda value: isinstance(value, str) and compiled.fullmatch(value) is not None


class ModelBase():
    """
    Base class for all configuration and record objects
    Has a schema with default values and a dictionary of lambda checks
    Keys of lambda_checks:
      'name' - check the value of attribute
      '__name' - check every item of a list attribute
      '_name' - dictionary of checks for keys of a dict attribute
    """

    __schema = {}
    lambda_checks = {}

    class_name_check = make_regex_matcher('[^\\n]{1,100}')
    record_id_check = make_regex_matcher('[a-zA-Z0-9_\\-\\.:]{1,128}')
    model_kind_check = make_regex_matcher('majority|text|image|concat|selfattn|'
                                          'mm-gate|mm-xatt|mm-gated-xatt')

    default_lambda_checks = {
        'dimension': lambda d: isinstance(d, int) and d >= 1,
        'granularity': lambda g: g in ('pooled', 'sequence'),
        'model': model_kind_check,
        'precision': lambda p: p in ('single', 'double'),
        'probability': lambda p: 0.0 <= p <= 1.0,
        'regime': lambda r: r in ('all', 'paired-all', 'paired-train'),
        'seed': lambda s: isinstance(s, int) and s >= 0,
        'split': lambda s: s in ('train', 'dev', 'test'),
    }

    def __init__(self, json_input=None, check_attributes=True):
        self.logger = logging.getLogger()
        self.initialized = False
        self.__json = {}
        if json_input is None:
            json_input = {}

        unknown = sorted(set(json_input.keys()) - set(self.__schema.keys()))
        if unknown:
            raise ConfigError(f'Unknown {self.__class__.__name__} attributes: '
                              f'{", ".join(unknown)}')

        for key, default_value in self.__schema.items():
            if key in json_input:
                value = self.cast_value_to_correct_type(key, json_input[key])
            else:
                value = deepcopy(default_value)

            if check_attributes:
                self.check_attribute(key, value)

            self.__json[key] = value

        self.initialized = True

    @classmethod
    def lambda_check(cls, attribute_name):
        """
        Return one of the default lambda checks
        """
        return cls.default_lambda_checks.get(attribute_name)

    def cast_value_to_correct_type(self, attribute_name, attribute_value):
        """
        Cast a value to the type of the default value in schema
        Only plain numbers are cast, everything else is kept as is
        """
        expected = self.__schema.get(attribute_name)
        if attribute_value is None or expected is None:
            return attribute_value

        expected_type = type(expected)
        try:
            if expected_type is bool:
                if not isinstance(attribute_value, bool):
                    raise ValueError('not a boolean')

                return attribute_value

            if expected_type is float and isinstance(attribute_value, (int, float)):
                if isinstance(attribute_value, bool):
                    raise ValueError('boolean is not a number')

                return float(attribute_value)

            if expected_type is int and isinstance(attribute_value, (int, float)):
                if isinstance(attribute_value, bool) or int(attribute_value) != attribute_value:
                    raise ValueError('not an integer')

                return int(attribute_value)

            if expected_type is str and not isinstance(attribute_value, str):
                raise ValueError('not a string')

        except (ValueError, OverflowError) as ex:
            raise ConfigError(f'Invalid {self.__class__.__name__} {attribute_name} '
                              f'value {attribute_value!r}: {ex}') from ex

        return attribute_value

    def check_attribute(self, attribute_name, attribute_value):
        """
        Run lambda checks of an attribute, raise ConfigError if any fails
        """
        class_name = self.__class__.__name__
        if attribute_name in self.lambda_checks:
            if not self.__run_check(self.lambda_checks[attribute_name], attribute_value):
                raise ConfigError(f'Invalid {class_name} {attribute_name} '
                                  f'value {attribute_value!r}')

        if f'__{attribute_name}' in self.lambda_checks:
            check = self.lambda_checks[f'__{attribute_name}']
            if not isinstance(attribute_value, list):
                raise ConfigError(f'Expected {class_name} {attribute_name} to be a list')

            for item in attribute_value:
                if not self.__run_check(check, item):
                    raise ConfigError(f'Invalid item {item!r} in {class_name} {attribute_name}')

        if f'_{attribute_name}' in self.lambda_checks:
            checks = self.lambda_checks[f'_{attribute_name}']
            if not isinstance(attribute_value, dict):
                raise ConfigError(f'Expected {class_name} {attribute_name} to be a dict')

            for key, check in checks.items():
                if key in attribute_value and not self.__run_check(check, attribute_value[key]):
                    raise ConfigError(f'Invalid {class_name} {attribute_name}.{key} '
                                      f'value {attribute_value[key]!r}')

        return True

    @staticmethod
    def __run_check(check, value):
        try:
            return bool(check(value))
        except (TypeError, ValueError):
            return False

    def get(self, attribute):
        """
        Get attribute value
        """
        return self.__json[attribute]

    def set(self, attribute, value):
        """
        Check and set attribute value
        """
        if attribute not in self.__json:
            raise ConfigError(f'{self.__class__.__name__} has no attribute {attribute}')

        value = self.cast_value_to_correct_type(attribute, value)
        self.check_attribute(attribute, value)
        self.__json[attribute] = value
        return value

    def get_json(self):
        """
        Return a copy of all attributes as a dictionary
        """
        return deepcopy(self.__json)

    def __eq__(self, other):
        if not isinstance(other, ModelBase):
            return False

        return self.__class__ == other.__class__ and self.__json == other.__json

    def __repr__(self):
        return f'{self.__class__.__name__}({self.__json})'
