"""Time/frequency conversion, audio images and mask-guided filtering.

The pipeline is: ``stft`` the noisy signal, take ``magnitude_image`` as
model input, zero the bins a predicted mask marks as noise with
``apply_mask`` (the complex values of kept bins, phase included, are left
untouched), and ``istft`` back to audio.
"""

import logging

import numpy as np

import vitvs
from vitvs.common.exceptions import InvalidInputError, ShapeError
from vitvs.dsp.types import AudioImage, AudioSignal, Mask, Spectrogram

logger = logging.getLogger(__name__)

# ``istft`` leaves samples alone where the window envelope is below this
_TINY_ENVELOPE = 1e-11


def stft(signal, params):
    """Short-time Fourier transform with centered reflect padding.

    Raises:
        InvalidInputError: if the signal is too short to be reflect-padded
            by ``n_fft / 2`` samples.
    """
    x = signal.samples
    pad = params.n_fft // 2
    if x.shape[0] <= pad:
        raise InvalidInputError('signal of {} samples is shorter than half a window ({})'.format(
            x.shape[0], pad))
    padded = np.pad(x, pad, mode='reflect')
    frames = np.lib.stride_tricks.sliding_window_view(padded, params.n_fft)[::params.hop]
    bins = np.fft.rfft(frames * params.window_array(), axis=-1).T
    return Spectrogram(bins=bins, params=params, original_length=x.shape[0])


def istft(spec, sample_rate=None):
    """Weighted overlap-add inverse of :func:`stft`.

    The result has exactly ``spec.original_length`` samples.
    """
    params = spec.params
    n_frames = spec.bins.shape[1]
    if n_frames != params.n_frames(spec.original_length):
        raise ShapeError('{} frames inconsistent with length {}'.format(n_frames, spec.original_length))
    window = params.window_array()
    frames = np.fft.irfft(spec.bins.T, n=params.n_fft, axis=-1) * window

    total = params.n_fft + params.hop * (n_frames - 1)
    out = np.zeros(total)
    envelope = np.zeros(total)
    squared = window * window
    for t in range(n_frames):
        start = t * params.hop
        out[start:start + params.n_fft] += frames[t]
        envelope[start:start + params.n_fft] += squared
    covered = envelope > _TINY_ENVELOPE
    out[covered] /= envelope[covered]

    pad = params.n_fft // 2
    samples = out[pad:pad + spec.original_length]
    if samples.shape[0] < spec.original_length:
        samples = np.pad(samples, (0, spec.original_length - samples.shape[0]))
    return AudioSignal(samples, sample_rate or vitvs.config['synth']['sample_rate'])


def magnitude_image(spec, scale='linear'):
    """``|bins|``, optionally ``log1p``-compressed."""
    pixels = np.abs(spec.bins)
    if scale == 'log1p':
        pixels = np.log1p(pixels)
    elif scale != 'linear':
        raise InvalidInputError('unknown image scale `{}`'.format(scale))
    return AudioImage(pixels, scale=scale)


def apply_mask(spec, mask):
    """Zero every bin whose label is 0; kept bins are bit-identical."""
    if mask.shape != spec.shape:
        raise ShapeError('mask {} does not match spectrogram {}; resize it first'.format(
            mask.shape, spec.shape))
    bins = np.where(mask.labels.astype(bool), spec.bins, 0.0 + 0.0j)
    return Spectrogram(bins=bins, params=spec.params, original_length=spec.original_length)


def _check_target(target_h, target_w):
    if int(target_h) < 1 or int(target_w) < 1:
        raise InvalidInputError('target size must be positive, got {}x{}'.format(target_h, target_w))
    return int(target_h), int(target_w)


def _bilinear_axis(src, dst):
    """Source rows and weights for half-pixel-centered linear interpolation.

    Destination cell ``i`` is centered on source coordinate
    ``(i + 1/2) * src / dst - 1/2``, clamped to the edges. The two rows it
    blends always include the row :func:`resize_mask` picks for ``i``.
    """
    pos = np.clip((np.arange(dst) + 0.5) * (src / dst) - 0.5, 0.0, src - 1)
    lo = np.minimum(np.floor(pos).astype(int), src - 1)
    hi = np.minimum(lo + 1, src - 1)
    return lo, hi, pos - lo


def resize_image(img, target_h, target_w):
    """Bilinear resize on the same cell centers as :func:`resize_mask`."""
    target_h, target_w = _check_target(target_h, target_w)
    pixels = img.pixels
    if pixels.shape == (target_h, target_w):
        return AudioImage(pixels.copy(), scale=img.scale)
    h_lo, h_hi, h_w = _bilinear_axis(pixels.shape[0], target_h)
    w_lo, w_hi, w_w = _bilinear_axis(pixels.shape[1], target_w)
    rows = pixels[h_lo] * (1.0 - h_w)[:, None] + pixels[h_hi] * h_w[:, None]
    out = rows[:, w_lo] * (1.0 - w_w)[None, :] + rows[:, w_hi] * w_w[None, :]
    return AudioImage(out, scale=img.scale)


def _nearest_axis(src, dst):
    # center of destination cell i lands in source cell floor((i + 1/2) * src / dst)
    return ((2 * np.arange(dst) + 1) * src) // (2 * dst)


def resize_mask(mask, target_h, target_w):
    """Nearest-neighbor resize; labels stay binary."""
    target_h, target_w = _check_target(target_h, target_w)
    labels = mask.labels
    rows = _nearest_axis(labels.shape[0], target_h)
    cols = _nearest_axis(labels.shape[1], target_w)
    return Mask(labels[np.ix_(rows, cols)])


def normalize_image(img):
    """Min-max normalize to [0, 1]; a constant image becomes all zeros."""
    pixels = img.pixels
    lo, hi = float(pixels.min()), float(pixels.max())
    if hi - lo <= 0.0:
        return AudioImage(np.zeros_like(pixels), scale=img.scale)
    return AudioImage(np.clip((pixels - lo) / (hi - lo), 0.0, 1.0), scale=img.scale)


def to_model_input(img):
    """Replicate a single-channel image into an ``H x W x 3`` array."""
    return np.repeat(img.pixels[:, :, None], 3, axis=2)


def audio_to_image(signal, params, size, scale='log1p'):
    """The model-ready image of ``signal``: stft, magnitude, normalize,
    resize to ``size x size``."""
    spec = stft(signal, params)
    image = normalize_image(magnitude_image(spec, scale=scale))
    return spec, resize_image(image, size, size)


def sdr(reference, estimate, cap=None):
    """Signal-to-distortion ratio in dB, capped for (near-)exact estimates.

    Raises:
        InvalidInputError: on length/rate mismatch or an all-zero reference.
    """
    if cap is None:
        cap = vitvs.config['dsp']['sdr_cap']
    if len(reference) != len(estimate):
        raise InvalidInputError('sdr: lengths differ ({} vs {})'.format(len(reference), len(estimate)))
    if reference.sample_rate != estimate.sample_rate:
        raise InvalidInputError('sdr: sample rates differ ({} vs {})'.format(
            reference.sample_rate, estimate.sample_rate))
    ref = reference.samples
    energy = float(np.dot(ref, ref))
    if energy == 0.0:
        raise InvalidInputError('sdr: reference signal is all zeros')
    error = ref - estimate.samples
    distortion = float(np.dot(error, error))
    if distortion < 1e-12 * energy:
        return float(cap)
    return float(10.0 * np.log10(energy / distortion))
