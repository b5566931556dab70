"""
Module with all differentiable operations
Every function takes nodes of one tape, records the result on the same tape and
returns the new node
"""
import math
import numpy as np
from core.utils.errors import ShapeMismatchError, UnknownLabelError, ConfigError


LOG_CLAMP = 1e-12


def _tape_of(*nodes):
    tape = nodes[0].tape
    for node in nodes[1:]:
        if node.tape is not tape:
            raise ShapeMismatchError(f'{node} and {nodes[0]} are on different tapes')

    return tape


def _broadcast_shape(operation, a_shape, b_shape):
    """
    Shapes broadcast only along axes where one side is 1
    """
    result = []
    for a_dim, b_dim in zip(a_shape, b_shape):
        if a_dim != b_dim and 1 not in (a_dim, b_dim):
            raise ShapeMismatchError(f'{operation}: cannot broadcast {a_shape[0]}x{a_shape[1]} '
                                     f'with {b_shape[0]}x{b_shape[1]}')

        result.append(max(a_dim, b_dim))

    return tuple(result)


def _unbroadcast(gradient, shape):
    """
    Sum gradient over axes that were broadcast
    """
    if gradient.shape == shape:
        return gradient

    for axis in (0, 1):
        if shape[axis] == 1 and gradient.shape[axis] != 1:
            gradient = gradient.sum(axis=axis, keepdims=True)

    return gradient


def add(a, b):
    """
    Elementwise sum, 1-row or 1-column operands are broadcast
    """
    tape = _tape_of(a, b)
    _broadcast_shape('add', a.shape, b.shape)
    value = a.value + b.value
    return tape.record(value,
                       (a, b),
                       lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b):
    """
    Elementwise difference with broadcasting
    """
    tape = _tape_of(a, b)
    _broadcast_shape('sub', a.shape, b.shape)
    value = a.value - b.value
    return tape.record(value,
                       (a, b),
                       lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a, b):
    """
    Elementwise (Hadamard) product with broadcasting
    """
    tape = _tape_of(a, b)
    _broadcast_shape('mul', a.shape, b.shape)
    value = a.value * b.value
    return tape.record(value,
                       (a, b),
                       lambda g: (_unbroadcast(g * b.value, a.shape),
                                  _unbroadcast(g * a.value, b.shape)))


def scale(a, factor):
    """
    Multiply by a constant
    """
    factor = float(factor)
    value = a.value * a.value.dtype.type(factor)
    return a.tape.record(value, (a,), lambda g: (g * g.dtype.type(factor),))


def one_minus(a):
    """
    1 - a elementwise
    """
    value = a.value.dtype.type(1.0) - a.value
    return a.tape.record(value, (a,), lambda g: (-g,))


def matmul(a, b):
    """
    Matrix product of [m x k] and [k x n]
    """
    tape = _tape_of(a, b)
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f'matmul: inner dimensions of {a.shape[0]}x{a.shape[1]} '
                                 f'and {b.shape[0]}x{b.shape[1]} do not agree')

    value = a.value @ b.value
    return tape.record(value, (a, b), lambda g: (g @ b.value.T, a.value.T @ g))


def transpose(a):
    """
    Transposed copy
    """
    value = np.ascontiguousarray(a.value.T)
    return a.tape.record(value, (a,), lambda g: (np.ascontiguousarray(g.T),))


def tanh_map(a):
    """
    Elementwise tanh
    """
    value = np.tanh(a.value)
    return a.tape.record(value, (a,), lambda g: (g * (1 - value * value),))


def sigmoid_map(a):
    """
    Elementwise logistic sigmoid, written with tanh so it never overflows
    """
    half = a.value.dtype.type(0.5)
    value = half + half * np.tanh(half * a.value)
    return a.tape.record(value, (a,), lambda g: (g * value * (1 - value),))


def softmax_rows(a):
    """
    Softmax of every row with row maximum subtracted first
    """
    shifted = a.value - a.value.max(axis=1, keepdims=True)
    exponent = np.exp(shifted)
    value = exponent / exponent.sum(axis=1, keepdims=True)

    def backward(g):
        inner = (g * value).sum(axis=1, keepdims=True)
        return (value * (g - inner),)

    return a.tape.record(value, (a,), backward)


def mean_rows(a):
    """
    1 x n mean of all rows
    """
    rows = a.shape[0]
    value = a.value.mean(axis=0, keepdims=True)
    return a.tape.record(value,
                         (a,),
                         lambda g: (np.repeat(g / g.dtype.type(rows), rows, axis=0),))


def sum_all(a):
    """
    1 x 1 sum of all entries
    """
    value = a.value.sum().reshape(1, 1)
    return a.tape.record(value, (a,), lambda g: (np.full(a.shape, g[0, 0], dtype=g.dtype),))


def concat_cols(a, b):
    """
    [a, b] side by side, both must have the same number of rows
    """
    tape = _tape_of(a, b)
    if a.shape[0] != b.shape[0]:
        raise ShapeMismatchError(f'concat_cols: {a.shape[0]}x{a.shape[1]} and '
                                 f'{b.shape[0]}x{b.shape[1]} have different row counts')

    split = a.shape[1]
    value = np.concatenate((a.value, b.value), axis=1)
    return tape.record(value, (a, b), lambda g: (g[:, :split], g[:, split:]))


def stack_rows(nodes):
    """
    Stack nodes with equal widths on top of each other
    """
    tape = _tape_of(*nodes)
    widths = {node.shape[1] for node in nodes}
    if len(widths) != 1:
        shapes = ', '.join(f'{n.shape[0]}x{n.shape[1]}' for n in nodes)
        raise ShapeMismatchError(f'stack_rows: widths differ ({shapes})')

    bounds = np.cumsum([0] + [node.shape[0] for node in nodes])
    value = np.concatenate([node.value for node in nodes], axis=0)
    return tape.record(value,
                       tuple(nodes),
                       lambda g: tuple(g[bounds[i]:bounds[i + 1]] for i in range(len(nodes))))


def linear(x, weight, bias):
    """
    Rows of x mapped by weight [out x in] plus bias [out x 1], i.e. x W^T + b^T
    """
    if x.shape[1] != weight.shape[1]:
        raise ShapeMismatchError(f'linear: input {x.shape[0]}x{x.shape[1]} does not match '
                                 f'weight {weight.shape[0]}x{weight.shape[1]}')

    if bias.shape != (weight.shape[0], 1):
        raise ShapeMismatchError(f'linear: bias {bias.shape[0]}x{bias.shape[1]} does not match '
                                 f'weight {weight.shape[0]}x{weight.shape[1]}')

    return add(matmul(x, transpose(weight)), transpose(bias))


def scaled_dot_attention(query, key, value):
    """
    softmax(Q K^T / sqrt(d_p)) V
    Return attention output [n_q x d_p] and weights [n_q x n_k]
    """
    d_proj = query.shape[1]
    if key.shape[1] != d_proj or value.shape[1] != d_proj:
        raise ShapeMismatchError(f'attention: Q {query.shape[0]}x{query.shape[1]}, '
                                 f'K {key.shape[0]}x{key.shape[1]}, '
                                 f'V {value.shape[0]}x{value.shape[1]} must share width')

    if key.shape[0] != value.shape[0]:
        raise ShapeMismatchError(f'attention: K {key.shape[0]}x{key.shape[1]} and '
                                 f'V {value.shape[0]}x{value.shape[1]} have different row counts')

    logits = scale(matmul(query, transpose(key)), 1.0 / math.sqrt(d_proj))
    weights = softmax_rows(logits)
    return matmul(weights, value), weights


def weighted_cross_entropy(logits, gold, class_weights):
    """
    -w_gold * log(softmax(logits)_gold) for one example, log argument clamped at 1e-12
    """
    classes = logits.shape[1]
    if logits.shape[0] != 1:
        raise ShapeMismatchError(f'cross entropy expects 1x{classes} logits, '
                                 f'got {logits.shape[0]}x{classes}')

    if not 0 <= gold < classes:
        raise UnknownLabelError(f'Gold class {gold} is out of range 0..{classes - 1}')

    weights = np.asarray(class_weights, dtype=np.float64)
    if weights.shape != (classes,):
        raise ShapeMismatchError(f'Expected {classes} class weights, got {weights.shape[0]}')

    if not np.all(weights > 0):
        raise ConfigError('Class weights must be strictly positive')

    dtype = logits.value.dtype
    weight = dtype.type(weights[gold])
    row = logits.value[0]
    shifted = row - row.max()
    log_normalizer = np.log(np.exp(shifted).sum())
    log_probability = shifted[gold] - log_normalizer
    clamped = log_probability < math.log(LOG_CLAMP)
    if clamped:
        log_probability = dtype.type(math.log(LOG_CLAMP))

    value = np.array([[-weight * log_probability]], dtype=dtype)

    def backward(g):
        if clamped:
            return (np.zeros_like(logits.value),)

        probabilities = np.exp(shifted - log_normalizer).reshape(1, classes)
        probabilities[0, gold] -= 1
        return (g * weight * probabilities,)

    return logits.tape.record(value, (logits,), backward)
