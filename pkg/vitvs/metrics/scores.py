"""Pixel-level scores of binary masks, class 1 positive.

Scores are fractions multiplied by ``scale`` (100 by default, so a perfect
prediction scores 100.0). When neither mask marks any pixel positive the
prediction counts as perfect.
"""

from dataclasses import dataclass

import numpy as np

from vitvs.common.exceptions import InvalidInputError

PERCENT = 100.0


@dataclass(frozen=True)
class ConfusionCounts(object):
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for name in ('tp', 'fp', 'fn', 'tn'):
            if int(getattr(self, name)) < 0:
                raise InvalidInputError('{} must be >= 0'.format(name))
            object.__setattr__(self, name, int(getattr(self, name)))

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn

    @property
    def union(self):
        return self.tp + self.fp + self.fn

    def __add__(self, other):
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, self.tn + other.tn)


def confusion(pred, truth):
    """Count agreement of two :class:`~vitvs.dsp.types.Mask` objects."""
    if pred.shape != truth.shape:
        raise InvalidInputError('prediction {} and truth {} differ in shape'.format(
            pred.shape, truth.shape))
    p = pred.labels.astype(bool)
    t = truth.labels.astype(bool)
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=p.size - tp - fp - fn)


def iou(c, scale=PERCENT):
    if c.union == 0:
        return 1.0 * scale
    return c.tp / c.union * scale


def dice(c, scale=PERCENT):
    if c.union == 0:
        return 1.0 * scale
    return 2.0 * c.tp / (2.0 * c.tp + c.fp + c.fn) * scale


def precision(c, scale=PERCENT):
    if c.tp + c.fp == 0:
        return (1.0 if c.fn == 0 else 0.0) * scale
    return c.tp / (c.tp + c.fp) * scale


def recall(c, scale=PERCENT):
    if c.tp + c.fn == 0:
        return (1.0 if c.fp == 0 else 0.0) * scale
    return c.tp / (c.tp + c.fn) * scale


def f1(c, scale=PERCENT):
    """Harmonic mean of precision and recall."""
    if c.union == 0:
        return 1.0 * scale
    p, r = precision(c, scale=1.0), recall(c, scale=1.0)
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r) * scale
