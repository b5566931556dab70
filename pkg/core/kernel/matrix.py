"""
Module that contains Matrix and Precision classes
"""
from enum import Enum
import numpy as np
from core.utils.errors import NonFiniteError, ShapeMismatchError


class Precision(Enum):
    """
    Floating point mode of a whole computation graph
    """

    SINGLE = 'single'
    DOUBLE = 'double'

    @property
    def dtype(self):
        """
        Numpy dtype of this precision
        """
        return np.float32 if self is Precision.SINGLE else np.float64

    @classmethod
    def parse(cls, value):
        """
        Accept Precision, "single" or "double"
        """
        if isinstance(value, Precision):
            return value

        return cls(value)

    @classmethod
    def of(cls, array):
        """
        Precision of a numpy array, everything that is not float32 counts as double
        """
        return cls.SINGLE if np.asarray(array).dtype == np.float32 else cls.DOUBLE


class Matrix():
    """
    Immutable dense row-major matrix of finite real numbers
    """

    __slots__ = ('_data',)

    def __init__(self, data, precision=None, name='matrix'):
        if isinstance(data, Matrix):
            data = data.data

        if precision is None:
            precision = Precision.of(data) if isinstance(data, np.ndarray) else Precision.DOUBLE

        array = np.array(data, dtype=Precision.parse(precision).dtype, copy=True)
        if array.ndim != 2:
            raise ShapeMismatchError(f'{name} must be two dimensional, got shape {array.shape}')

        if array.shape[0] < 1 or array.shape[1] < 1:
            raise ShapeMismatchError(f'{name} must have at least one row and column, '
                                     f'got shape {array.shape}')

        if not np.all(np.isfinite(array)):
            raise NonFiniteError(f'{name} contains NaN or Inf values')

        array.setflags(write=False)
        self._data = array

    @property
    def data(self):
        """
        Read-only numpy view of the values
        """
        return self._data

    @property
    def rows(self):
        """
        Number of rows
        """
        return self._data.shape[0]

    @property
    def cols(self):
        """
        Number of columns
        """
        return self._data.shape[1]

    @property
    def shape(self):
        """
        Tuple (rows, cols)
        """
        return self._data.shape

    @property
    def precision(self):
        """
        Precision of stored values
        """
        return Precision.of(self._data)

    def astype(self, precision):
        """
        Copy of this matrix in another precision
        """
        precision = Precision.parse(precision)
        if precision is self.precision:
            return self

        return Matrix(self._data, precision)

    def row_mean(self):
        """
        1 x cols matrix with the mean of all rows
        """
        if self.rows == 1:
            return self

        return Matrix(self._data.mean(axis=0, keepdims=True), self.precision)

    def to_list(self):
        """
        Values as nested Python lists
        """
        return self._data.tolist()

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented

        return (self._data.dtype == other.data.dtype
                and self._data.shape == other.data.shape
                and self._data.tobytes() == other.data.tobytes())

    __hash__ = None

    def __deepcopy__(self, memo):
        return self

    def __repr__(self):
        return f'Matrix({self.rows}x{self.cols}, {self.precision.value})'
