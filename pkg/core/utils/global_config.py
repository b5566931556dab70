"""
Module that holds the environment configuration loaded from config.cfg
"""
import configparser
from core.utils.errors import ConfigError


class Config():
    """
    Global configuration holder
    Values are loaded once from one section of an INI file
    """

    __config = {}

    @classmethod
    def load(cls, filename, section):
        """
        Load a section of the given INI file, convert booleans and integers
        """
        parser = configparser.ConfigParser()
        if not parser.read(filename):
            raise ConfigError(f'Could not read config file {filename}')

        if section not in parser:
            raise ConfigError(f'Config file {filename} has no section [{section}]')

        config = {}
        for key, value in parser.items(section):
            config[key] = cls.__convert(value)

        cls.__config = config
        return config

    @staticmethod
    def __convert(value):
        """
        Turn "True"/"False" and integer strings into Python values
        """
        if value.lower() in ('true', 'false'):
            return value.lower() == 'true'

        try:
            return int(value)
        except ValueError:
            return value

    @classmethod
    def get(cls, key, default=None):
        """
        Get a value from the loaded configuration
        """
        return cls.__config.get(key, default)

    @classmethod
    def set(cls, key, value):
        """
        Set a value, used by tests and command line overrides
        """
        cls.__config[key] = value

    @classmethod
    def clear(cls):
        """
        Forget all loaded values
        """
        cls.__config = {}
