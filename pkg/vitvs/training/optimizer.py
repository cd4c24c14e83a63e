"""AdamW with decoupled weight decay::

    m <- b1 m + (1 - b1) g          m_hat = m / (1 - b1^t)
    v <- b2 v + (1 - b2) g^2        v_hat = v / (1 - b2^t)
    p <- p - lr (m_hat / (sqrt(v_hat) + eps) + wd p)

Vectors (biases, norm gains and offsets) and the positional embedding
are not decayed.
"""

import collections
import logging

import numpy as np

from vitvs.common.exceptions import CheckpointError

logger = logging.getLogger(__name__)

STATE_PREFIX = 'optimizer.'


def decays(name, value):
    """Whether the parameter ``name`` receives weight decay."""
    return np.ndim(value) >= 2 and not name.endswith('pos_embedding')


def init_state(params):
    return {
        'm': {name: np.zeros_like(p) for name, p in params.items()},
        'v': {name: np.zeros_like(p) for name, p in params.items()},
        't': 0,
    }


def adamw_step(params, grads, state, config, decay=decays):
    """One update of every array in ``params``.

    Args:
        params (dict): name to numpy array; left untouched.
        grads (dict): name to gradient array (missing means zero).
        state (dict): ``{'m': {...}, 'v': {...}, 't': int}``.
        config (TrainConfig): learning rate, weight decay, betas and eps.

    Returns:
        tuple: ``(new_params, new_state)``.
    """
    b1, b2 = config.beta1, config.beta2
    lr, eps = config.learning_rate, config.adam_eps
    t = state['t'] + 1
    correction1 = 1.0 - b1 ** t
    correction2 = 1.0 - b2 ** t
    new_params, new_m, new_v = {}, {}, {}
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(p)
        m = b1 * state['m'][name] + (1.0 - b1) * g
        v = b2 * state['v'][name] + (1.0 - b2) * g * g
        update = (m / correction1) / (np.sqrt(v / correction2) + eps)
        if config.weight_decay and decay(name, p):
            update = update + config.weight_decay * p
        new_params[name] = (p - lr * update).astype(p.dtype)
        new_m[name] = m.astype(p.dtype)
        new_v[name] = v.astype(p.dtype)
    return new_params, {'m': new_m, 'v': new_v, 't': t}


class AdamW(object):
    """Applies :func:`adamw_step` to named tensors using their ``grad``."""

    def __init__(self, named_parameters, config):
        self.params = collections.OrderedDict(named_parameters)
        self.config = config
        self.state = init_state({name: p.data for name, p in self.params.items()})

    @property
    def steps(self):
        return self.state['t']

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def step(self):
        values = {name: p.data for name, p in self.params.items()}
        grads = {name: p.grad for name, p in self.params.items() if p.grad is not None}
        updated, self.state = adamw_step(values, grads, self.state, self.config)
        for name, p in self.params.items():
            p.data = updated[name]

    def state_dict(self):
        arrays = collections.OrderedDict()
        for name in self.params:
            arrays[STATE_PREFIX + 'm.' + name] = self.state['m'][name].copy()
            arrays[STATE_PREFIX + 'v.' + name] = self.state['v'][name].copy()
        arrays[STATE_PREFIX + 't'] = np.array([self.state['t']], dtype=np.int64)
        return arrays

    def load_state_dict(self, arrays):
        try:
            self.state = {
                'm': {n: np.asarray(arrays[STATE_PREFIX + 'm.' + n], dtype=p.dtype).copy()
                      for n, p in self.params.items()},
                'v': {n: np.asarray(arrays[STATE_PREFIX + 'v.' + n], dtype=p.dtype).copy()
                      for n, p in self.params.items()},
                't': int(np.asarray(arrays[STATE_PREFIX + 't']).reshape(-1)[0]),
            }
        except KeyError as exc:
            raise CheckpointError('optimizer state is missing {}'.format(exc)) from None
        logger.debug('restored optimizer state at step %d', self.state['t'])
        return self
