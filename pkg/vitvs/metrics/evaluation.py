import logging
from dataclasses import dataclass, field

import numpy as np

import vitvs
from vitvs.common.exceptions import ConfigurationError
from vitvs.dsp.transform import apply_mask, istft, sdr, stft
from vitvs.dsp.types import StftParams
from vitvs.metrics.scores import confusion, dice, f1, iou

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SampleScores(object):
    id: str
    f1: float
    iou: float
    dice: float
    sdr: float = None


@dataclass
class MetricSummary(object):
    """Per-sample scores of one method on one split, with their means."""

    method: str
    split: str
    records: list = field(default_factory=list)

    def _mean(self, name):
        values = [getattr(r, name) for r in self.records if getattr(r, name) is not None]
        if not values:
            return None
        return float(np.mean(values))

    @property
    def f1(self):
        return self._mean('f1')

    @property
    def iou(self):
        return self._mean('iou')

    @property
    def dice(self):
        return self._mean('dice')

    @property
    def sdr(self):
        return self._mean('sdr')

    def row(self):
        return {
            'method': self.method,
            'split': self.split,
            'F1': self.f1,
            'IoU': self.iou,
            'Dice': self.dice,
            'SDR': self.sdr,
        }


def sample_sdr(sample, predicted_full, params):
    """SDR of the predicted-mask reconstruction against the reconstruction
    through the ground-truth mask."""
    spec = stft(sample.audio, params)
    rate = sample.audio.sample_rate
    reference = istft(apply_mask(spec, sample.full_mask), sample_rate=rate)
    estimate = istft(apply_mask(spec, predicted_full), sample_rate=rate)
    if not np.any(reference.samples):
        logger.warning('sample %s has an empty reference, skipping its SDR', sample.id)
        return None
    return sdr(reference, estimate)


def evaluate_dataset(predictor, samples, with_sdr=False, params=None, split=''):
    """Score ``predictor`` on ``samples``, averaging per sample.

    Raises:
        ConfigurationError: if SDR is requested for samples without audio.
    """
    if params is None:
        params = StftParams.from_dict(vitvs.config['stft'])
    if with_sdr and any(s.audio is None for s in samples):
        raise ConfigurationError('SDR requested but some samples carry no audio')

    summary = MetricSummary(method=predictor.name, split=split)
    for sample, pred in zip(samples, predictor.predict(samples)):
        counts = confusion(pred, sample.mask)
        score = None
        if with_sdr:
            score = sample_sdr(sample, predictor.spectrogram_mask(sample, pred), params)
        summary.records.append(SampleScores(
            id=sample.id, f1=f1(counts), iou=iou(counts), dice=dice(counts), sdr=score))
    logger.info('%s on %s: F1 %.2f IoU %.2f Dice %.2f over %d samples', summary.method,
                split or '-', summary.f1 or 0.0, summary.iou or 0.0, summary.dice or 0.0,
                len(summary.records))
    return summary
