"""
Module that contains parameter groups of fusion classifiers
Parameters of a classifier live in one flat dictionary with names like
"gate.w_t". Groups below give typed access to one prefix of that dictionary,
the values can be numpy arrays or tape nodes.
"""
import math
import numpy as np
from core.utils.errors import ShapeMismatchError
from core.utils.random_streams import make_stream, INIT_STREAM


class ParamGroup:
    """
    Base of parameter groups, values are given by keyword and read as attributes
    """

    names = ()

    def __init__(self, **values):
        missing = [name for name in self.names if name not in values]
        unknown = sorted(set(values) - set(self.names))
        if missing or unknown:
            raise ShapeMismatchError(f'{self.__class__.__name__} needs {", ".join(self.names)}, '
                                     f'missing {missing}, unknown {unknown}')

        for name in self.names:
            setattr(self, name, values[name])


class GateParams(ParamGroup):
    """
    h_t = tanh(W_t f_t + b_t), h_v = tanh(W_v f_v + b_v), z = sigmoid(W_z [f_t; f_v] + b_z)
    """

    names = ('w_t', 'b_t', 'w_v', 'b_v', 'w_z', 'b_z')

    @staticmethod
    def shapes(d_t, d_v, d, gate_width):
        """
        Shapes of all gate matrices
        """
        return {'w_t': (d, d_t), 'b_t': (d, 1),
                'w_v': (d, d_v), 'b_v': (d, 1),
                'w_z': (gate_width, d_t + d_v), 'b_z': (gate_width, 1)}


class XAttParams(ParamGroup):
    """
    Text-side and image-side linear projections to the common attention width
    """

    names = ('w_t', 'b_t', 'w_v', 'b_v')

    @staticmethod
    def shapes(in_t, in_v, d_proj):
        """
        Shapes of both projections
        """
        return {'w_t': (d_proj, in_t), 'b_t': (d_proj, 1),
                'w_v': (d_proj, in_v), 'b_v': (d_proj, 1)}


class LinearParams(ParamGroup):
    """
    One linear layer, used to project image features to text width in Concat
    """

    names = ('w', 'b')

    @staticmethod
    def shapes(in_width, out_width):
        """
        Shapes of weight and bias
        """
        return {'w': (out_width, in_width), 'b': (out_width, 1)}


class HeadParams(ParamGroup):
    """
    Softmax classification layer
    """

    names = ('w_out', 'b_out')

    @staticmethod
    def shapes(h_dim, classes):
        """
        Shapes of the classification layer
        """
        return {'w_out': (classes, h_dim), 'b_out': (classes, 1)}


def prefixed(prefix, shapes):
    """
    Add "prefix." to all names of a shapes dictionary
    """
    return {f'{prefix}.{name}': shape for name, shape in shapes.items()}


def group(params, prefix, group_class):
    """
    Build a parameter group from entries of a flat dictionary
    """
    missing = [f'{prefix}.{name}' for name in group_class.names if f'{prefix}.{name}' not in params]
    if missing:
        raise ShapeMismatchError(f'Missing parameters {", ".join(missing)}')

    return group_class(**{name: params[f'{prefix}.{name}'] for name in group_class.names})


def glorot_limit(shape):
    """
    sqrt(6 / (fan_in + fan_out)) of a [fan_out x fan_in] weight
    """
    fan_out, fan_in = shape
    return math.sqrt(6.0 / (fan_in + fan_out))


def init_arrays(shapes, seed):
    """
    Glorot-uniform weights and zero biases in float64
    Biases are the names whose last part starts with "b"
    Names are visited in sorted order so the result depends only on shapes and seed
    """
    generator = make_stream(seed, INIT_STREAM)
    arrays = {}
    for name in sorted(shapes):
        shape = tuple(shapes[name])
        if name.split('.')[-1].startswith('b'):
            arrays[name] = np.zeros(shape, dtype=np.float64)
        else:
            limit = glorot_limit(shape)
            arrays[name] = generator.uniform(-limit, limit, size=shape)

    return arrays
