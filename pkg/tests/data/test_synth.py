import math
import os

import numpy as np
import pytest

from vitvs.common.exceptions import ConfigurationError, DataIOError
from vitvs.data import SPLITS, SynthConfig, generate_sample, synthesize
from vitvs.data.synth import NOISES, sample_id
from vitvs.dsp import AudioSignal, StftParams, apply_mask, istft, sdr, stft
from vitvs.dsp.media import read_mask_png

PARAMS = StftParams()


def test_generation_is_deterministic():
    config = SynthConfig()
    a = generate_sample(config, PARAMS, 11, 'train', 3)
    b = generate_sample(config, PARAMS, 11, 'train', 3)
    assert np.array_equal(a[0].samples, b[0].samples)
    assert np.array_equal(a[2].labels, b[2].labels)
    assert a[3] == b[3]
    c = generate_sample(config, PARAMS, 11, 'val', 3)
    assert not np.array_equal(a[0].samples[:100], c[0].samples[:100])


def test_sample_properties():
    config = SynthConfig(min_duration=1.0, max_duration=2.0)
    for index in range(5):
        noisy, clean, mask, info = generate_sample(config, PARAMS, 0, 'train', index)
        assert 1.0 <= noisy.duration <= 2.0
        assert len(clean) == len(noisy)
        assert np.max(np.abs(noisy.samples)) == pytest.approx(0.9)
        assert mask.shape == stft(noisy, PARAMS).shape
        assert 1 <= info['chirps'] <= 4
        assert 0.0 <= info['snr'] <= 15.0
        assert info['noise'] in NOISES


def test_no_chirps_means_empty_mask():
    config = SynthConfig(min_chirps=0, max_chirps=0)
    noisy, clean, mask, info = generate_sample(config, PARAMS, 0, 'test', 0)
    assert info['chirps'] == 0
    assert not np.any(clean.samples)
    assert not np.any(mask.labels)
    assert np.any(noisy.samples)


def test_noise_free_mask_recovers_the_call():
    config = SynthConfig(min_snr=math.inf, max_snr=math.inf)
    for index in range(3):
        noisy, clean, mask, info = generate_sample(config, PARAMS, 5, 'train', index)
        assert info['snr'] is None
        assert np.array_equal(noisy.samples, clean.samples)
        estimate = istft(apply_mask(stft(noisy, PARAMS), mask), sample_rate=noisy.sample_rate)
        assert sdr(clean, estimate) >= 20.0


def test_noise_models(rng):
    rate = 16000
    for kind, make in NOISES.items():
        noise = make(rate, rate, rng)
        assert noise.shape == (rate,)
        assert np.sqrt(np.mean(noise ** 2)) == pytest.approx(1.0)
    wind = NOISES['wind_lowfreq'](rate, rate, rng)
    power = np.abs(np.fft.rfft(wind)) ** 2
    freqs = np.fft.rfftfreq(rate, 1.0 / rate)
    assert power[freqs > 2000].sum() < 0.01 * power.sum()


@pytest.mark.parametrize('changes', [
    {'min_freq': 7000.0, 'max_freq': 9000.0},
    {'min_duration': 2.0, 'max_duration': 1.0},
    {'noise_kinds': ['thunder']},
    {'min_snr': 5.0, 'max_snr': math.inf},
    {'mask_threshold': 1.5},
    {'train_samples': -1},
])
def test_invalid_synth_config(changes):
    with pytest.raises(ConfigurationError):
        SynthConfig(**changes)


def test_synthesize_writes_reproducible_corpus(tmp_path, small_synth_config):
    first, second = str(tmp_path / 'a'), str(tmp_path / 'b')
    manifests, infos = synthesize(small_synth_config, 9, first)
    synthesize(small_synth_config, 9, second)

    assert {split: len(m) for split, m in manifests.items()} == {'train': 4, 'val': 2, 'test': 2}
    assert len(infos) == 8
    for split in SPLITS:
        assert os.path.exists(os.path.join(first, '{}.tsv'.format(split)))
    assert os.path.exists(os.path.join(first, 'synth.conf'))

    sid = sample_id('val', 1)
    for name in (sid + '.wav', sid + '.clean.wav', sid + '.mask.png'):
        with open(os.path.join(first, 'val', name), 'rb') as f, \
                open(os.path.join(second, 'val', name), 'rb') as g:
            assert f.read() == g.read()

    noisy, _, mask, _ = generate_sample(small_synth_config, PARAMS, 9, 'val', 1)
    stored = read_mask_png(os.path.join(first, 'val', sid + '.mask.png'))
    assert np.array_equal(stored.labels, mask.labels)


def test_synthesize_counts_samples(tmp_path, small_synth_config):
    stats = {'samples': 0}
    synthesize(small_synth_config, 0, str(tmp_path), stats=stats)
    assert stats['samples'] == small_synth_config.total_samples


def test_synthesize_into_a_file_fails(tmp_path, small_synth_config):
    target = tmp_path / 'taken'
    target.write_text('')
    with pytest.raises(DataIOError):
        synthesize(small_synth_config, 0, str(target))


def test_short_clips_are_rejected():
    config = SynthConfig(min_duration=0.01, max_duration=0.01)
    with pytest.raises(ConfigurationError):
        generate_sample(config, PARAMS, 0, 'train', 0)


def test_audio_signal_validation():
    with pytest.raises(ValueError):
        AudioSignal(np.zeros((2, 2)), 16000)
