"""Synthetic noisy bird-call corpora with known masks.

Every clip is a sum of windowed frequency sweeps (the clean call) plus one
kind of environmental noise mixed at a drawn signal-to-noise ratio. The
ground-truth mask marks the bins where the clean call's log-magnitude
spectrogram exceeds ``mask_threshold`` times its maximum.

A corpus directory holds, per split, ``<split>.tsv`` plus
``<split>/<id>.wav`` (noisy), ``<id>.clean.wav`` and ``<id>.mask.png``,
and the effective settings in ``synth.conf``.
"""

import logging
import math
import multiprocessing as mp
import os
from dataclasses import asdict, dataclass, fields

import logstats
import numpy as np
from scipy import signal as sps

import vitvs
from vitvs import config_utils
from vitvs.common.exceptions import ConfigurationError, DataIOError
from vitvs.data.dataset import SPLITS, DatasetEntry, DatasetManifest, write_manifest
from vitvs.dsp.media import write_mask_png, write_wav
from vitvs.dsp.transform import stft
from vitvs.dsp.types import AudioSignal, Mask, StftParams

logger = logging.getLogger(__name__)

NOISE_KINDS = ('white', 'pink', 'wind_lowfreq', 'rain_impulsive')
WIND_CUTOFF_HZ = 500.0
RAIN_RATE_HZ = 150.0
RAIN_DECAY_S = 0.004
CHIRP_DURATION_S = (0.1, 0.5)
PEAK = 0.9


@dataclass(frozen=True)
class SynthConfig(object):
    train_samples: int = 128
    val_samples: int = 32
    test_samples: int = 32
    min_duration: float = 1.0
    max_duration: float = 3.0
    sample_rate: int = 16000
    min_chirps: int = 1
    max_chirps: int = 4
    min_freq: float = 1500.0
    max_freq: float = 7000.0
    noise_kinds: tuple = NOISE_KINDS
    min_snr: float = 0.0
    max_snr: float = 15.0
    mask_threshold: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, 'noise_kinds', tuple(self.noise_kinds))
        for split in SPLITS:
            if self.samples(split) < 0:
                raise ConfigurationError('{}_samples must be >= 0'.format(split))
        if not 0 < self.min_duration <= self.max_duration:
            raise ConfigurationError('need 0 < min_duration <= max_duration, got {} and {}'.format(
                self.min_duration, self.max_duration))
        if self.sample_rate <= 0:
            raise ConfigurationError('sample_rate must be positive')
        if not 0 <= self.min_chirps <= self.max_chirps:
            raise ConfigurationError('need 0 <= min_chirps <= max_chirps')
        if not 0 < self.min_freq <= self.max_freq < self.sample_rate / 2:
            raise ConfigurationError('chirp band [{}, {}] Hz must lie inside (0, {}) Hz'.format(
                self.min_freq, self.max_freq, self.sample_rate / 2))
        unknown = set(self.noise_kinds) - set(NOISE_KINDS)
        if unknown or not self.noise_kinds:
            raise ConfigurationError('noise_kinds must be a non-empty subset of {}, got {}'.format(
                NOISE_KINDS, list(self.noise_kinds)))
        if self.min_snr > self.max_snr:
            raise ConfigurationError('min_snr must not exceed max_snr')
        if not math.isfinite(self.max_snr - self.min_snr) and not self.min_snr == self.max_snr == math.inf:
            raise ConfigurationError('an infinite SNR (noise-free corpus) needs min_snr = max_snr = inf')
        if not 0.0 < self.mask_threshold < 1.0:
            raise ConfigurationError('mask_threshold must lie in (0, 1)')

    @classmethod
    def from_dict(cls, config):
        known = {f.name for f in fields(cls)}
        unknown = set(config) - known
        if unknown:
            raise ConfigurationError('Unknown synth settings: {}'.format(', '.join(sorted(unknown))))
        return cls(**config)

    def to_dict(self):
        values = asdict(self)
        values['noise_kinds'] = list(self.noise_kinds)
        return values

    def samples(self, split):
        return getattr(self, '{}_samples'.format(split))

    @property
    def total_samples(self):
        return sum(self.samples(split) for split in SPLITS)


def sample_rng(seed, split, index):
    return np.random.default_rng([int(seed), SPLITS.index(split), int(index)])


# noise models, each scaled to unit RMS

def _unit_rms(x):
    rms = np.sqrt(np.mean(x * x))
    return x / rms if rms > 0 else x


def white_noise(n, sample_rate, rng):
    return _unit_rms(rng.standard_normal(n))


def pink_noise(n, sample_rate, rng):
    """White noise shaped to a 1/f power spectrum."""
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate)
    spectrum[0] = 0.0
    spectrum[1:] /= np.sqrt(freqs[1:])
    return _unit_rms(np.fft.irfft(spectrum, n=n))


def wind_noise(n, sample_rate, rng):
    """Pink noise low-passed at 500 Hz."""
    sos = sps.butter(4, WIND_CUTOFF_HZ, btype='low', fs=sample_rate, output='sos')
    return _unit_rms(sps.sosfilt(sos, pink_noise(n, sample_rate, rng)))


def rain_noise(n, sample_rate, rng):
    """Poisson drop impulses, each ringing out with an exponential decay."""
    drops = rng.poisson(RAIN_RATE_HZ / sample_rate, size=n).astype(np.float64)
    drops *= rng.uniform(-1.0, 1.0, size=n)
    t = np.arange(int(5 * RAIN_DECAY_S * sample_rate)) / sample_rate
    kernel = np.exp(-t / RAIN_DECAY_S)
    return _unit_rms(sps.oaconvolve(drops, kernel)[:n])


NOISES = {
    'white': white_noise,
    'pink': pink_noise,
    'wind_lowfreq': wind_noise,
    'rain_impulsive': rain_noise,
}


def chirp_call(n, sample_rate, config, rng):
    """Sum of ``min_chirps..max_chirps`` Hann-windowed sweeps inside the band."""
    clean = np.zeros(n)
    count = int(rng.integers(config.min_chirps, config.max_chirps + 1))
    for _ in range(count):
        length = min(n, int(rng.uniform(*CHIRP_DURATION_S) * sample_rate))
        start = int(rng.integers(0, n - length + 1))
        f0, f1 = rng.uniform(config.min_freq, config.max_freq, size=2)
        method = 'quadratic' if rng.random() < 0.5 else 'linear'
        t = np.arange(length) / sample_rate
        sweep = sps.chirp(t, f0=f0, t1=t[-1] if length > 1 else 1.0, f1=f1, method=method)
        amplitude = rng.uniform(0.3, 1.0)
        clean[start:start + length] += amplitude * sweep * sps.get_window('hann', length)
    return clean, count


def mask_from_clean(clean, params, threshold):
    """1 where ``log1p|STFT(clean)|`` exceeds ``threshold`` times its max."""
    level = np.log1p(np.abs(stft(clean, params).bins))
    peak = level.max()
    if peak <= 0.0:
        return Mask(np.zeros(level.shape, dtype=np.uint8))
    return Mask((level > threshold * peak).astype(np.uint8))


def generate_sample(config, params, seed, split, index):
    """Draw one clip.

    Returns:
        tuple: ``(noisy, clean, mask, info)`` where ``mask`` covers the
        full spectrogram of ``noisy``.
    """
    rng = sample_rng(seed, split, index)
    rate = config.sample_rate
    n = int(round(rng.uniform(config.min_duration, config.max_duration) * rate))
    if n <= params.n_fft // 2:
        raise ConfigurationError('{} s clips are too short for n_fft={}'.format(
            n / rate, params.n_fft))

    clean, chirps = chirp_call(n, rate, config, rng)
    kind = config.noise_kinds[int(rng.integers(len(config.noise_kinds)))]
    if math.isinf(config.max_snr):
        snr = math.inf
    else:
        snr = float(rng.uniform(config.min_snr, config.max_snr))
    noise = NOISES[kind](n, rate, rng)

    clean_rms = np.sqrt(np.mean(clean * clean))
    if math.isinf(snr):
        noisy = clean.copy()
    elif clean_rms > 0:
        noisy = clean + noise * (clean_rms / 10.0 ** (snr / 20.0))
    else:
        noisy = 0.1 * noise

    peak = np.max(np.abs(noisy))
    if peak > 0:
        gain = PEAK / peak
        noisy, clean = noisy * gain, clean * gain

    clean_signal = AudioSignal(clean, rate)
    mask = mask_from_clean(clean_signal, params, config.mask_threshold)
    info = {
        'chirps': chirps,
        'noise': kind,
        'snr': snr if math.isfinite(snr) else None,
        'duration': n / rate,
        'positive_fraction': float(mask.labels.mean()),
    }
    return AudioSignal(noisy, rate), clean_signal, mask, info


def sample_id(split, index):
    return '{}-{:05d}'.format(split, index)


def _write_sample(job):
    config, params, seed, split, index, out_dir = job
    noisy, clean, mask, info = generate_sample(config, params, seed, split, index)
    sid = sample_id(split, index)
    rel_audio = os.path.join(split, sid + '.wav')
    rel_mask = os.path.join(split, sid + '.mask.png')
    write_wav(os.path.join(out_dir, rel_audio), noisy)
    write_wav(os.path.join(out_dir, split, sid + '.clean.wav'), clean)
    write_mask_png(os.path.join(out_dir, rel_mask), mask)
    return split, sid, rel_audio, rel_mask, info


def synthesize(config, seed, out_dir, params=None, processes=1, stats=None, monitor=None):
    """Write a corpus for every split of ``config`` into ``out_dir``.

    Args:
        processes (int): worker processes; samples are drawn from
            per-sample generators so the output does not depend on it.
        stats: ``logstats.Logstats`` (or any dict-like) counting samples.
        monitor (Monitor): statsd client receiving ``synth.samples``.

    Returns:
        tuple: ``(manifests, infos)``, split name to :class:`DatasetManifest`
        and sample id to the drawn chirp count, noise kind, SNR and duration.

    Raises:
        DataIOError: if ``out_dir`` cannot be written.
    """
    if params is None:
        params = StftParams.from_dict(vitvs.config['stft'])
    if stats is None:
        stats = logstats.Logstats()
    try:
        for split in SPLITS:
            os.makedirs(os.path.join(out_dir, split), exist_ok=True)
    except OSError as exc:
        raise DataIOError('Cannot create corpus directory `{}`: {}'.format(out_dir, exc)) from exc

    jobs = [(config, params, seed, split, index, out_dir)
            for split in SPLITS for index in range(config.samples(split))]
    logger.info('synthesizing %d samples into %s with %d process(es)',
                len(jobs), out_dir, processes)

    entries = {split: [] for split in SPLITS}
    infos = {}
    if processes > 1:
        with mp.Pool(processes) as pool:
            results = list(_counted(pool.imap(_write_sample, jobs), stats, monitor))
    else:
        results = list(_counted(map(_write_sample, jobs), stats, monitor))
    for split, sid, rel_audio, rel_mask, info in results:
        entries[split].append(DatasetEntry(
            id=sid,
            audio=os.path.join(out_dir, rel_audio),
            mask=os.path.join(out_dir, rel_mask)))
        infos[sid] = info

    manifests = {}
    for split in SPLITS:
        manifest = DatasetManifest(split=split, entries=entries[split], seed=seed, root=out_dir)
        write_manifest(manifest, os.path.join(out_dir, '{}.tsv'.format(split)))
        manifests[split] = manifest
    config_utils.write_config({'synth': config.to_dict()}, os.path.join(out_dir, 'synth.conf'))
    return manifests, infos


def _counted(results, stats, monitor):
    for result in results:
        stats['samples'] += 1
        if monitor is not None:
            monitor.incr('synth.samples', rate=monitor.rate)
        yield result
