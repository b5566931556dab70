"""
Module that contains AdamState class and adam_step function
"""
import numpy as np
from core.utils.errors import NonFiniteError, ShapeMismatchError


class AdamState:
    """
    First and second moment buffers of every parameter and the step counter
    """

    def __init__(self, m=None, v=None, t=0):
        self.m = m or {}
        self.v = v or {}
        self.t = t

    @classmethod
    def for_params(cls, params):
        """
        Zero buffers shaped like given parameters
        """
        return cls({name: np.zeros_like(value) for name, value in params.items()},
                   {name: np.zeros_like(value) for name, value in params.items()},
                   0)


def adam_step(params, grads, state, learning_rate, beta1=0.9, beta2=0.999, epsilon=1e-8):
    """
    One Adam update, return new parameters and new state
    Inputs are not modified
    """
    for name in sorted(grads):
        gradient = grads[name]
        if name not in params:
            raise ShapeMismatchError(f'Gradient of unknown parameter {name}')

        if gradient.shape != params[name].shape:
            raise ShapeMismatchError(f'Gradient of {name} is {gradient.shape}, '
                                     f'parameter is {params[name].shape}')

        if not np.all(np.isfinite(gradient)):
            raise NonFiniteError(f'Gradient of {name} contains NaN or Inf values')

    t = state.t + 1
    correction1 = 1.0 - beta1 ** t
    correction2 = 1.0 - beta2 ** t
    new_params = {}
    new_m = {}
    new_v = {}
    for name, value in params.items():
        gradient = grads.get(name)
        m = state.m.get(name, np.zeros_like(value))
        v = state.v.get(name, np.zeros_like(value))
        if gradient is None:
            gradient = np.zeros_like(value)

        m = beta1 * m + (1.0 - beta1) * gradient
        v = beta2 * v + (1.0 - beta2) * gradient * gradient
        m_hat = m / correction1
        v_hat = v / correction2
        new_params[name] = value - learning_rate * m_hat / (np.sqrt(v_hat) + epsilon)
        new_m[name] = m
        new_v[name] = v

    return new_params, AdamState(new_m, new_v, t)
