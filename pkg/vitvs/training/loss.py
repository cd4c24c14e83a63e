import numpy as np

from vitvs.common.exceptions import InvalidInputError, ShapeError
from vitvs.tensor import as_tensor, gather, log_softmax, mean, neg


def nll_loss(logits, target):
    """Mean negative log-softmax probability of the true class per pixel.

    Args:
        logits: ``(..., H, W, C)`` tensor.
        target: a :class:`~vitvs.dsp.types.Mask`, a list of masks (one per
            batch item) or an integer label array of shape ``(..., H, W)``.

    Raises:
        InvalidInputError: if a label lies outside ``[0, C)``.
    """
    logits = as_tensor(logits)
    labels = _labels(target)
    if labels.shape != logits.shape[:-1]:
        raise ShapeError('target {} does not match logits {}'.format(labels.shape, logits.shape))
    if labels.size and (labels.min() < 0 or labels.max() >= logits.shape[-1]):
        raise InvalidInputError('labels must lie in [0, {})'.format(logits.shape[-1]))
    return neg(mean(gather(log_softmax(logits, axis=-1), labels)))


def _labels(target):
    if isinstance(target, (list, tuple)):
        return np.stack([_labels(item) for item in target])
    labels = getattr(target, 'labels', target)
    labels = np.asarray(labels)
    if not np.issubdtype(labels.dtype, np.integer):
        raise InvalidInputError('labels must be integers, got {}'.format(labels.dtype))
    return labels.astype(np.int64)
