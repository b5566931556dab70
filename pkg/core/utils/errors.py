"""
Module that contains all mmfuse exceptions
Every exception has a stable error class name that is printed by the CLI
"""


class MMFuseError(Exception):
    """
    Base class for all errors raised by mmfuse
    """

    @property
    def error_class(self):
        """
        Machine parsable name of the error
        """
        return self.__class__.__name__

    def one_line(self):
        """
        Return "<error_class>: <message>" without line breaks
        """
        message = ' '.join(str(self).split())
        return f'{self.error_class}: {message}'


class ShapeMismatchError(MMFuseError):
    """
    Dimensions of operands do not agree
    """


class NonFiniteError(MMFuseError):
    """
    NaN or Inf found in input, loss or gradient
    """


class NotScalarError(MMFuseError):
    """
    Backward pass was started from a node that is not 1x1
    """


class ConfigError(MMFuseError):
    """
    Invalid configuration value or invalid combination of values
    """


class FormatError(MMFuseError):
    """
    Base class for on-disk format errors
    """


class MagicMismatchError(FormatError):
    """
    File does not start with or declare the expected format magic
    """


class TruncatedBlobError(FormatError):
    """
    Offsets point past the end of a binary blob
    """


class WidthMismatchError(FormatError):
    """
    Feature widths of a record disagree with the dataset header
    """


class UnknownLabelError(FormatError):
    """
    Label is not part of the class catalog
    """


class EmptySplitError(MMFuseError):
    """
    A split that is needed is empty
    """


class UnsupportedOperationError(MMFuseError):
    """
    Operation is not available for the given model kind
    """


class OutputExistsError(MMFuseError):
    """
    Output location is not empty and --force was not given
    """
