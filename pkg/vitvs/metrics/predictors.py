"""Sources of predicted masks for evaluation.

A predictor maps samples to masks at model resolution and decides which
mask to apply to the full-size spectrogram when denoising.
"""

import numpy as np

from vitvs.dsp.transform import resize_mask, to_model_input
from vitvs.dsp.types import Mask


class Predictor(object):
    name = 'predictor'

    def predict(self, samples):
        """Return one model-resolution :class:`Mask` per sample."""
        raise NotImplementedError

    def spectrogram_mask(self, sample, mask):
        return resize_mask(mask, *sample.full_mask.shape)


class ModelPredictor(Predictor):
    """Argmax masks of a trained network, evaluated in batches."""

    name = 'ViTVS'

    def __init__(self, model, batch_size=8, name=None):
        self.model = model
        self.batch_size = max(1, int(batch_size))
        if name:
            self.name = name

    def predict(self, samples):
        self.model.eval()
        masks = []
        for start in range(0, len(samples), self.batch_size):
            chunk = samples[start:start + self.batch_size]
            batch = np.stack([to_model_input(s.image) for s in chunk])
            masks.extend(self.model.predict_mask(batch))
        return masks


class OraclePredictor(Predictor):
    """Returns the ground truth itself."""

    name = 'oracle'

    def predict(self, samples):
        return [s.mask for s in samples]

    def spectrogram_mask(self, sample, mask):
        return sample.full_mask


class ConstantPredictor(Predictor):
    """Marks every pixel with the same label."""

    def __init__(self, label):
        self.label = int(label)
        self.name = 'constant-{}'.format(self.label)

    def _fill(self, shape):
        return Mask(np.full(shape, self.label, dtype=np.uint8))

    def predict(self, samples):
        return [self._fill(s.mask.shape) for s in samples]

    def spectrogram_mask(self, sample, mask):
        return self._fill(sample.full_mask.shape)
