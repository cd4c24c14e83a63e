"""Central finite-difference checks of tape gradients.

Run these at ``float64`` precision; at ``float32`` the differences are
dominated by rounding.
"""

import logging

import numpy as np

from vitvs.tensor.core import backward, no_grad

logger = logging.getLogger(__name__)


def numeric_gradient(func, tensor, eps=1e-5, indices=None):
    """Estimate d func() / d tensor by central differences.

    ``func`` is re-evaluated with single elements of ``tensor.data``
    perturbed in place and must return a scalar tensor or number.

    Args:
        indices: flat element indices to perturb; all elements by default.

    Returns:
        numpy.ndarray: the estimate, zero at elements that were not perturbed.
    """
    if not tensor.data.flags.c_contiguous:
        tensor.data = np.ascontiguousarray(tensor.data)
    flat = tensor.data.reshape(-1)
    estimate = np.zeros(flat.shape, dtype=np.float64)
    if indices is None:
        indices = range(flat.size)
    for i in indices:
        original = flat[i]
        with no_grad():
            flat[i] = original + eps
            plus = float(np.asarray(_value(func())).reshape(()))
            flat[i] = original - eps
            minus = float(np.asarray(_value(func())).reshape(()))
        flat[i] = original
        estimate[i] = (plus - minus) / (2.0 * eps)
    return estimate.reshape(tensor.shape)


def _value(result):
    return getattr(result, 'data', result)


def relative_errors(analytic, numeric, floor=1e-8):
    """Per-element ``|a - n| / max(|a|, |n|)`` on elements where either
    magnitude exceeds ``floor``."""
    analytic = np.asarray(analytic, dtype=np.float64).reshape(-1)
    numeric = np.asarray(numeric, dtype=np.float64).reshape(-1)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    keep = scale > floor
    return np.abs(analytic - numeric)[keep] / scale[keep]


def check_gradients(func, tensors, eps=1e-5, floor=1e-8, samples=None, rng=None):
    """Compare tape gradients of ``func()`` against finite differences.

    Args:
        func: zero-argument callable building a scalar loss from ``tensors``.
        tensors (list): leaf tensors with ``requires_grad=True``.
        samples (int): perturb only this many randomly chosen elements in total
            (spread across ``tensors``); all elements when ``None``.
        rng (numpy.random.Generator): source of the sampled positions.

    Returns:
        float: the largest relative error seen (0.0 if nothing was compared).
    """
    for t in tensors:
        t.zero_grad()
    backward(func())
    analytic = [t.grad.copy() for t in tensors]

    picked = [None] * len(tensors)
    if samples is not None:
        rng = rng or np.random.default_rng(0)
        sizes = np.array([t.size for t in tensors])
        picks = rng.choice(sizes.sum(), size=min(samples, sizes.sum()), replace=False)
        owner = np.searchsorted(np.cumsum(sizes), picks, side='right')
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        picked = [sorted(int(p - offsets[k]) for p, o in zip(picks, owner) if o == k)
                  for k in range(len(tensors))]

    worst = 0.0
    for t, grad, idx in zip(tensors, analytic, picked):
        if idx is not None and not idx:
            continue
        numeric = numeric_gradient(func, t, eps=eps, indices=idx)
        if idx is not None:
            grad = grad.reshape(-1)[idx]
            numeric = numeric.reshape(-1)[idx]
        errors = relative_errors(grad, numeric, floor=floor)
        if errors.size:
            worst = max(worst, float(errors.max()))
    logger.debug('gradient check over %d tensors, worst relative error %.3g', len(tensors), worst)
    return worst
