"""
Module that compares tape gradients with central finite differences
"""
import logging
import numpy as np
from core.kernel.matrix import Precision
from core.kernel.tape import Tape
from core.utils.errors import ConfigError, NonFiniteError, NotScalarError


logger = logging.getLogger()


def _evaluate(loss_fn, params):
    tape = Tape(Precision.DOUBLE)
    nodes = {name: tape.parameter(name, value) for name, value in params.items()}
    loss = loss_fn(tape, nodes)
    if loss.shape != (1, 1):
        raise NotScalarError(f'Loss must be 1x1, got {loss.shape[0]}x{loss.shape[1]}')

    value = float(loss.value[0, 0])
    if not np.isfinite(value):
        raise NonFiniteError(f'Loss is not finite: {value}')

    return tape, loss, value


def grad_check(loss_fn, params, eps=1e-5):
    """
    Return max relative error between analytic and central difference gradients
    loss_fn(tape, nodes) must build a 1x1 loss from the dict of parameter nodes
    and must be deterministic (no dropout sampling inside)
    Relative error of one entry is |a - n| / max(1e-8, |a| + |n|)
    """
    if not 1e-6 <= eps <= 1e-4:
        raise ConfigError(f'Finite difference step {eps} is outside [1e-6, 1e-4]')

    params = {name: np.array(value, dtype=np.float64) for name, value in params.items()}
    tape, loss, _ = _evaluate(loss_fn, params)
    tape.backward(loss)
    analytic = {name: tape.gradient(name) for name in params}
    worst = 0.0
    worst_name = None
    for name in sorted(params):
        value = params[name]
        for index in np.ndindex(value.shape):
            original = value[index]
            value[index] = original + eps
            _, _, loss_plus = _evaluate(loss_fn, params)
            value[index] = original - eps
            _, _, loss_minus = _evaluate(loss_fn, params)
            value[index] = original
            numeric = (loss_plus - loss_minus) / (2 * eps)
            exact = float(analytic[name][index])
            error = abs(exact - numeric) / max(1e-8, abs(exact) + abs(numeric))
            if error > worst:
                worst = error
                worst_name = f'{name}{list(index)}'

    logger.debug('Gradient check max relative error %.3e at %s', worst, worst_name)
    return worst
