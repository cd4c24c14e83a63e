"""Value types flowing through the audio pipeline."""

from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

from vitvs.common.exceptions import ConfigurationError, InvalidInputError, ShapeError

WINDOWS = ('hann', 'hamming')
SCALES = ('linear', 'log1p')


@dataclass(frozen=True)
class AudioSignal(object):
    """Mono time-domain samples, nominally in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ShapeError('AudioSignal needs 1-D samples, got shape {}'.format(samples.shape))
        if int(self.sample_rate) <= 0:
            raise InvalidInputError('sample_rate must be positive, got {}'.format(self.sample_rate))
        object.__setattr__(self, 'samples', samples)
        object.__setattr__(self, 'sample_rate', int(self.sample_rate))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self):
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class StftParams(object):
    """Framing of the short-time Fourier transform.

    The window/hop pair must satisfy the constant-overlap-add condition.
    """

    n_fft: int = 1024
    hop: int = 256
    window: str = 'hann'

    def __post_init__(self):
        n_fft, hop = int(self.n_fft), int(self.hop)
        if n_fft <= 0 or n_fft & (n_fft - 1):
            raise ConfigurationError('n_fft must be a positive power of two, got {}'.format(n_fft))
        if not 0 < hop <= n_fft:
            raise ConfigurationError('hop must be in (0, n_fft], got {}'.format(hop))
        if self.window not in WINDOWS:
            raise ConfigurationError('window must be one of {}, got `{}`'.format(WINDOWS, self.window))
        if not sps.check_COLA(self.window_array(), n_fft, n_fft - hop):
            raise ConfigurationError('{} window with n_fft={} and hop={} is not COLA'.format(
                self.window, n_fft, hop))
        object.__setattr__(self, 'n_fft', n_fft)
        object.__setattr__(self, 'hop', hop)

    @classmethod
    def from_dict(cls, config):
        return cls(n_fft=config['n_fft'], hop=config['hop'], window=config['window'])

    def to_dict(self):
        return {'n_fft': self.n_fft, 'hop': self.hop, 'window': self.window}

    @property
    def n_bins(self):
        return self.n_fft // 2 + 1

    def window_array(self):
        # periodic windows are the COLA ones
        return sps.get_window(self.window, int(self.n_fft), fftbins=True)

    def n_frames(self, length):
        """Frame count for ``length`` samples under centered padding."""
        pad = self.n_fft // 2
        return (length + 2 * pad - self.n_fft) // self.hop + 1


@dataclass(frozen=True)
class Spectrogram(object):
    """Complex STFT bins, ``(n_fft/2 + 1) x n_frames``."""

    bins: np.ndarray
    params: StftParams
    original_length: int

    def __post_init__(self):
        bins = np.asarray(self.bins, dtype=np.complex128)
        expected = (self.params.n_bins, self.params.n_frames(int(self.original_length)))
        if bins.shape != expected or expected[1] < 1:
            raise ShapeError('Spectrogram bins {} inconsistent with {} and length {} (expected {})'.format(
                bins.shape, self.params, self.original_length, expected))
        object.__setattr__(self, 'bins', bins)
        object.__setattr__(self, 'original_length', int(self.original_length))

    @property
    def shape(self):
        return self.bins.shape


@dataclass(frozen=True)
class AudioImage(object):
    """Real magnitude image (frequency rows x time columns)."""

    pixels: np.ndarray
    scale: str = 'linear'

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim != 2:
            raise ShapeError('AudioImage needs a 2-D array, got shape {}'.format(pixels.shape))
        if self.scale not in SCALES:
            raise InvalidInputError('scale must be one of {}, got `{}`'.format(SCALES, self.scale))
        if self.scale == 'linear' and not (np.all(np.isfinite(pixels)) and np.all(pixels >= 0)):
            raise InvalidInputError('linear AudioImage pixels must be finite and >= 0')
        object.__setattr__(self, 'pixels', pixels)

    @property
    def shape(self):
        return self.pixels.shape


@dataclass(frozen=True)
class Mask(object):
    """Binary label grid: 1 keeps a bin (signal), 0 removes it (noise)."""

    labels: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise ShapeError('Mask needs a 2-D array, got shape {}'.format(labels.shape))
        if labels.size and not np.all((labels == 0) | (labels == 1)):
            raise InvalidInputError('Mask entries must be 0 or 1')
        object.__setattr__(self, 'labels', labels.astype(np.uint8))

    @property
    def shape(self):
        return self.labels.shape

    @classmethod
    def ones(cls, shape):
        return cls(np.ones(shape, dtype=np.uint8))

    @classmethod
    def zeros(cls, shape):
        return cls(np.zeros(shape, dtype=np.uint8))
