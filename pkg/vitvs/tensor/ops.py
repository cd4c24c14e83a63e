"""Differentiable primitives.

Each function computes its forward value with numpy and hands
:func:`~vitvs.tensor.core.make_result` a closure returning the gradient of
every input. Shape mismatches raise :class:`ShapeError` naming the shapes
involved; apart from leading-dimension batch broadcast nothing is
broadcast implicitly.
"""

import builtins

import numpy as np
from scipy import special

from vitvs.common.exceptions import InvalidInputError, ShapeError
from vitvs.tensor.core import as_tensor, broadcast_shape, make_result, unbroadcast

_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _axis(axis, ndim, op):
    if not -ndim <= axis < ndim:
        raise InvalidInputError('{}: axis {} out of range for {} dimensions'.format(op, axis, ndim))
    return axis % ndim


# elementwise

def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    broadcast_shape('add', a.shape, b.shape)

    def _backward(grad):
        return unbroadcast(grad, a.shape), unbroadcast(grad, b.shape)

    return make_result('add', a.data + b.data, (a, b), _backward)


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    broadcast_shape('sub', a.shape, b.shape)

    def _backward(grad):
        return unbroadcast(grad, a.shape), -unbroadcast(grad, b.shape)

    return make_result('sub', a.data - b.data, (a, b), _backward)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    broadcast_shape('mul', a.shape, b.shape)

    def _backward(grad):
        return unbroadcast(grad * b.data, a.shape), unbroadcast(grad * a.data, b.shape)

    return make_result('mul', a.data * b.data, (a, b), _backward)


def scale(x, factor):
    x = as_tensor(x)
    factor = x.dtype.type(factor)

    def _backward(grad):
        return (grad * factor,)

    return make_result('scale', x.data * factor, (x,), _backward)


def neg(x):
    return scale(x, -1.0)


# linear algebra

def matmul(a, b):
    """Matrix product over the last two dimensions.

    Leading (batch) dimensions must agree up to leading-dimension
    broadcast, e.g. ``(B, N, D) @ (D, E)`` or ``(B, H, N, K) @ (B, H, K, M)``.
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError('matmul: cannot multiply shapes {} and {}'.format(a.shape, b.shape))
    broadcast_shape('matmul', a.shape[:-2], b.shape[:-2])

    def _backward(grad):
        grad_a = np.matmul(grad, np.swapaxes(b.data, -1, -2))
        grad_b = np.matmul(np.swapaxes(a.data, -1, -2), grad)
        return unbroadcast(grad_a, a.shape), unbroadcast(grad_b, b.shape)

    return make_result('matmul', np.matmul(a.data, b.data), (a, b), _backward)


def linear(x, w, b=None):
    """``x @ w + b`` with ``w`` of shape (in, out) and ``b`` of shape (out,)."""
    x, w = as_tensor(x), as_tensor(w)
    if w.ndim != 2 or x.ndim < 1 or x.shape[-1] != w.shape[0]:
        raise ShapeError('linear: input {} does not fit weight {}'.format(x.shape, w.shape))
    out = matmul(x, w)
    if b is None:
        return out
    b = as_tensor(b)
    if b.shape != (w.shape[1],):
        raise ShapeError('linear: bias {} does not fit weight {}'.format(b.shape, w.shape))
    return add(out, b)


# shape primitives

def reshape(x, shape):
    x = as_tensor(x)
    shape = tuple(int(s) for s in shape)
    try:
        data = x.data.reshape(shape)
    except ValueError:
        raise ShapeError('reshape: cannot reshape {} into {}'.format(x.shape, shape)) from None

    def _backward(grad):
        return (grad.reshape(x.shape),)

    return make_result('reshape', data, (x,), _backward)


def transpose(x, axes=None):
    """Permute dimensions; ``axes=None`` reverses them."""
    x = as_tensor(x)
    if axes is None:
        axes = tuple(reversed(range(x.ndim)))
    axes = tuple(int(a) % builtins.max(x.ndim, 1) for a in axes)
    if sorted(axes) != list(range(x.ndim)):
        raise ShapeError('transpose: {} is not a permutation of {} dimensions'.format(axes, x.ndim))
    inverse = tuple(np.argsort(axes))

    def _backward(grad):
        return (np.transpose(grad, inverse),)

    return make_result('transpose', np.transpose(x.data, axes), (x,), _backward)


def swapaxes(x, axis1, axis2):
    x = as_tensor(x)
    axes = list(range(x.ndim))
    axes[axis1], axes[axis2] = axes[axis2], axes[axis1]
    return transpose(x, axes)


def concat(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise InvalidInputError('concat: nothing to concatenate')
    ndim = tensors[0].ndim
    axis = _axis(axis, ndim, 'concat')
    for t in tensors[1:]:
        if t.ndim != ndim or t.shape[:axis] + t.shape[axis + 1:] != \
                tensors[0].shape[:axis] + tensors[0].shape[axis + 1:]:
            raise ShapeError('concat: shapes {} disagree outside axis {}'.format(
                [u.shape for u in tensors], axis))
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def _backward(grad):
        return tuple(np.split(grad, bounds, axis=axis))

    return make_result('concat', np.concatenate([t.data for t in tensors], axis=axis),
                       tensors, _backward)


def slice(x, key):
    """Basic (non-fancy) indexing: ints, slices and ``Ellipsis``."""
    x = as_tensor(x)
    if not isinstance(key, tuple):
        key = (key,)
    for k in key:
        if not isinstance(k, (int, np.integer, type(Ellipsis), builtins.slice)):
            raise InvalidInputError('slice: unsupported index {!r}'.format(k))

    def _backward(grad):
        full = np.zeros_like(x.data)
        full[key] = grad
        return (full,)

    return make_result('slice', np.array(x.data[key]), (x,), _backward)


# reductions

def _reduced_grad(grad, shape, axis, keepdims):
    if axis is not None and not keepdims:
        axes = (axis,) if np.isscalar(axis) else tuple(axis)
        axes = tuple(a % len(shape) for a in axes)
        for a in sorted(axes):
            grad = np.expand_dims(grad, a)
    return np.broadcast_to(grad, shape).copy()


def sum(x, axis=None, keepdims=False):
    x = as_tensor(x)

    def _backward(grad):
        return (_reduced_grad(grad, x.shape, axis, keepdims),)

    data = np.asarray(x.data.sum(axis=axis, keepdims=keepdims), dtype=x.dtype)
    return make_result('sum', data, (x,), _backward)


def mean(x, axis=None, keepdims=False):
    x = as_tensor(x)
    count = x.size if axis is None else int(np.prod([x.shape[a] for a in np.atleast_1d(axis)]))

    def _backward(grad):
        return (_reduced_grad(grad, x.shape, axis, keepdims) / count,)

    data = np.asarray(x.data.mean(axis=axis, keepdims=keepdims), dtype=x.dtype)
    return make_result('mean', data, (x,), _backward)


def gather(x, index):
    """Pick ``x[..., index[...]]`` along the last dimension.

    ``index`` is an integer array with ``x``'s shape minus the last dimension.
    """
    x = as_tensor(x)
    index = np.asarray(index)
    if not np.issubdtype(index.dtype, np.integer) or index.shape != x.shape[:-1]:
        raise ShapeError('gather: index {} {} does not fit {}'.format(
            index.shape, index.dtype, x.shape))
    if index.size and (index.min() < 0 or index.max() >= x.shape[-1]):
        raise InvalidInputError('gather: index out of range [0, {})'.format(x.shape[-1]))
    expanded = index[..., None]

    def _backward(grad):
        full = np.zeros_like(x.data)
        np.put_along_axis(full, expanded, grad[..., None], axis=-1)
        return (full,)

    data = np.take_along_axis(x.data, expanded, axis=-1)[..., 0]
    return make_result('gather', data, (x,), _backward)


# activations and normalizations

def softmax(x, axis=-1):
    x = as_tensor(x)
    axis = _axis(axis, x.ndim, 'softmax')
    shifted = np.exp(x.data - x.data.max(axis=axis, keepdims=True))
    y = shifted / shifted.sum(axis=axis, keepdims=True)

    def _backward(grad):
        return (y * (grad - (grad * y).sum(axis=axis, keepdims=True)),)

    return make_result('softmax', y, (x,), _backward)


def log_softmax(x, axis=-1):
    x = as_tensor(x)
    axis = _axis(axis, x.ndim, 'log_softmax')
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    y = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))

    def _backward(grad):
        return (grad - np.exp(y) * grad.sum(axis=axis, keepdims=True),)

    return make_result('log_softmax', y, (x,), _backward)


def gelu(x):
    """Exact GELU, ``x * Phi(x)``."""
    x = as_tensor(x)
    cdf = 0.5 * (1.0 + special.erf(x.data / _SQRT2))

    def _backward(grad):
        pdf = _INV_SQRT_2PI * np.exp(-0.5 * x.data * x.data)
        return (grad * (cdf + x.data * pdf),)

    return make_result('gelu', (x.data * cdf).astype(x.dtype), (x,), _backward)


def _normalize_backward(grad_xhat, xhat, inv_std, axes):
    # d/dx of (x - mean) * inv_std over ``axes``
    return inv_std * (grad_xhat
                      - grad_xhat.mean(axis=axes, keepdims=True)
                      - xhat * (grad_xhat * xhat).mean(axis=axes, keepdims=True))


def layer_norm(x, gamma, beta, eps=1e-5):
    """Normalize every vector along the last dimension, then apply
    ``gamma``/``beta``."""
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    if x.ndim < 1 or gamma.shape != x.shape[-1:] or beta.shape != x.shape[-1:]:
        raise ShapeError('layer_norm: gamma {} / beta {} do not fit input {}'.format(
            gamma.shape, beta.shape, x.shape))
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv_std
    lead = tuple(range(x.ndim - 1))

    def _backward(grad):
        grad_x = _normalize_backward(grad * gamma.data, xhat, inv_std, -1)
        return grad_x, (grad * xhat).sum(axis=lead), grad.sum(axis=lead)

    return make_result('layer_norm', (xhat * gamma.data + beta.data).astype(x.dtype),
                       (x, gamma, beta), _backward)


class BatchNormState(object):
    """Running statistics of a batch-norm layer, one entry per channel."""

    def __init__(self, num_features, momentum=0.1, dtype=np.float64):
        self.running_mean = np.zeros(num_features, dtype=dtype)
        self.running_var = np.ones(num_features, dtype=dtype)
        self.momentum = momentum

    def update(self, batch_mean, batch_var, count):
        unbiased = batch_var * count / (count - 1) if count > 1 else batch_var
        m = self.momentum
        self.running_mean = (1.0 - m) * self.running_mean + m * batch_mean
        self.running_var = (1.0 - m) * self.running_var + m * unbiased


def batch_norm(x, gamma, beta, state, mode='train', eps=1e-5):
    """Channel-wise normalization over every axis but the last.

    In ``train`` mode the batch statistics are used and folded into
    ``state``; in ``eval`` mode ``state``'s running statistics are used.
    """
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    if x.ndim < 2 or gamma.shape != x.shape[-1:] or beta.shape != x.shape[-1:]:
        raise ShapeError('batch_norm: gamma {} / beta {} do not fit input {}'.format(
            gamma.shape, beta.shape, x.shape))
    if mode not in ('train', 'eval'):
        raise InvalidInputError('batch_norm: unknown mode `{}`'.format(mode))
    axes = tuple(range(x.ndim - 1))
    if mode == 'train':
        mu = x.data.mean(axis=axes)
        var = x.data.var(axis=axes)
        state.update(mu, var, x.size // x.shape[-1])
    else:
        mu = state.running_mean.astype(x.dtype)
        var = state.running_var.astype(x.dtype)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv_std

    def _backward(grad):
        grad_xhat = grad * gamma.data
        if mode == 'train':
            grad_x = _normalize_backward(grad_xhat, xhat, inv_std, axes)
        else:
            grad_x = grad_xhat * inv_std
        return grad_x, (grad * xhat).sum(axis=axes), grad.sum(axis=axes)

    return make_result('batch_norm', (xhat * gamma.data + beta.data).astype(x.dtype),
                       (x, gamma, beta), _backward)
