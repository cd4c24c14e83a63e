"""WAV and PNG reading/writing.

WAV: mono PCM 16-bit or IEEE float-32 on output; 8/16/32-bit integer and
float input, multi-channel input downmixed by averaging.

PNG: 8-bit grayscale. Masks map 0 -> 0 and 1 -> 255; audio images are
min-max scaled to 0..255. Row 0 of every PNG is frequency bin 0.
"""

import logging

import numpy as np
import png
from scipy.io import wavfile

from vitvs.common.exceptions import DataIOError, InvalidInputError
from vitvs.dsp.types import AudioSignal, Mask

logger = logging.getLogger(__name__)

PCM16 = 'pcm16'
FLOAT32 = 'float32'


def read_wav(path):
    """Read a WAV file as a mono :class:`AudioSignal` scaled to [-1, 1]."""
    try:
        sample_rate, data = wavfile.read(path)
    except (OSError, ValueError) as exc:
        raise DataIOError('Cannot read WAV `{}`: {}'.format(path, exc)) from exc

    if data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        samples = data.astype(np.float64) / 2147483648.0
    elif np.issubdtype(data.dtype, np.floating):
        samples = data.astype(np.float64)
    else:
        raise DataIOError('Unsupported WAV sample type {} in `{}`'.format(data.dtype, path))

    if samples.ndim == 2:
        logger.debug('downmixing %d channels of %s', samples.shape[1], path)
        samples = samples.mean(axis=1)
    if samples.size == 0:
        raise DataIOError('WAV `{}` holds no samples'.format(path))
    return AudioSignal(samples, sample_rate)


def write_wav(path, signal, encoding=PCM16):
    """Write ``signal`` as a mono WAV file (``pcm16`` or ``float32``)."""
    samples = signal.samples
    if encoding == PCM16:
        data = np.round(np.clip(samples, -1.0, 32767.0 / 32768.0) * 32768.0).astype('<i2')
    elif encoding == FLOAT32:
        data = samples.astype('<f4')
    else:
        raise InvalidInputError('unknown WAV encoding `{}`'.format(encoding))
    try:
        wavfile.write(path, signal.sample_rate, data)
    except OSError as exc:
        raise DataIOError('Cannot write WAV `{}`: {}'.format(path, exc)) from exc


def write_png(path, gray):
    """Write a 2-D uint8 array as an 8-bit grayscale PNG."""
    gray = np.asarray(gray)
    if gray.ndim != 2 or gray.dtype != np.uint8:
        raise InvalidInputError('write_png needs a 2-D uint8 array, got {} {}'.format(
            gray.shape, gray.dtype))
    height, width = gray.shape
    writer = png.Writer(width=width, height=height, greyscale=True, bitdepth=8)
    try:
        with open(path, 'wb') as f:
            writer.write(f, gray.tolist())
    except OSError as exc:
        raise DataIOError('Cannot write PNG `{}`: {}'.format(path, exc)) from exc


def read_png(path):
    """Read a PNG as a 2-D uint8 gray array.

    Color images are averaged over RGB, alpha is dropped and 16-bit
    samples are scaled down to 8 bits.
    """
    try:
        width, height, rows, info = png.Reader(filename=path).asDirect()
        pixels = np.vstack([np.asarray(row, dtype=np.float64) for row in rows])
    except (OSError, png.Error) as exc:
        raise DataIOError('Cannot read PNG `{}`: {}'.format(path, exc)) from exc
    planes = info['planes']
    pixels = pixels.reshape(height, width, planes)
    if planes in (2, 4):
        pixels = pixels[:, :, :planes - 1]
    pixels = pixels.mean(axis=2)
    max_value = float(2 ** info['bitdepth'] - 1)
    if max_value != 255.0:
        pixels = pixels * (255.0 / max_value)
    return np.round(pixels).astype(np.uint8)


def mask_to_gray(mask):
    return (mask.labels * 255).astype(np.uint8)


def gray_to_mask(gray, threshold=128, source=None):
    """Binarize a gray array: values >= ``threshold`` become label 1."""
    gray = np.asarray(gray)
    if not np.all((gray == 0) | (gray == 255)):
        logger.warning('mask %s holds non-binary values, thresholding at %d',
                       source or '<array>', threshold)
    return Mask((gray >= threshold).astype(np.uint8))


def image_to_gray(img):
    """Scale an :class:`AudioImage` to 0..255; a constant image is black."""
    pixels = img.pixels
    lo, hi = float(pixels.min()), float(pixels.max())
    if hi - lo <= 0.0:
        return np.zeros(pixels.shape, dtype=np.uint8)
    return np.round((pixels - lo) / (hi - lo) * 255.0).astype(np.uint8)


def write_mask_png(path, mask):
    write_png(path, mask_to_gray(mask))


def read_mask_png(path, threshold=128):
    return gray_to_mask(read_png(path), threshold=threshold, source=path)


def write_image_png(path, img):
    write_png(path, image_to_gray(img))
