import numpy as np
import png
import pytest
from scipy.io import wavfile

from vitvs.common.exceptions import DataIOError, InvalidInputError
from vitvs.dsp import AudioImage, AudioSignal, Mask
from vitvs.dsp.media import (
    gray_to_mask,
    image_to_gray,
    read_mask_png,
    read_png,
    read_wav,
    write_image_png,
    write_mask_png,
    write_png,
    write_wav,
)


def test_wav_pcm16_round_trip(tmp_path, rng):
    signal = AudioSignal(rng.uniform(-0.9, 0.9, 1000), 16000)
    path = str(tmp_path / 'a.wav')
    write_wav(path, signal)
    back = read_wav(path)
    assert back.sample_rate == 16000
    np.testing.assert_allclose(back.samples, signal.samples, atol=1.0 / 32768)


def test_wav_float32_round_trip(tmp_path, rng):
    signal = AudioSignal(rng.uniform(-1, 1, 1000), 22050)
    path = str(tmp_path / 'a.wav')
    write_wav(path, signal, encoding='float32')
    np.testing.assert_allclose(read_wav(path).samples, signal.samples, atol=1e-7)


def test_wav_stereo_is_downmixed(tmp_path):
    data = np.stack([np.full(100, 16384, dtype=np.int16), np.zeros(100, dtype=np.int16)], axis=1)
    path = str(tmp_path / 'stereo.wav')
    wavfile.write(path, 8000, data)
    np.testing.assert_allclose(read_wav(path).samples, 0.25)


def test_wav_errors(tmp_path):
    with pytest.raises(DataIOError):
        read_wav(str(tmp_path / 'missing.wav'))
    bogus = tmp_path / 'bogus.wav'
    bogus.write_bytes(b'not a wav file at all')
    with pytest.raises(DataIOError):
        read_wav(str(bogus))
    with pytest.raises(InvalidInputError):
        write_wav(str(tmp_path / 'x.wav'), AudioSignal(np.zeros(4), 8000), encoding='mp3')


def test_mask_png_round_trip(tmp_path, rng):
    mask = Mask((rng.random((513, 40)) < 0.3).astype(np.uint8))
    path = str(tmp_path / 'm.png')
    write_mask_png(path, mask)
    assert np.array_equal(read_mask_png(path).labels, mask.labels)
    # row 0 of the file is frequency bin 0
    assert np.array_equal(read_png(path)[0], mask.labels[0] * 255)


def test_gray_threshold():
    mask = gray_to_mask(np.array([[200, 50], [255, 0]], dtype=np.uint8))
    assert mask.labels.tolist() == [[1, 0], [1, 0]]


def test_read_rgb_png(tmp_path):
    path = str(tmp_path / 'rgb.png')
    rows = [[255, 255, 255, 0, 0, 0]]
    with open(path, 'wb') as f:
        png.Writer(width=2, height=1, greyscale=False, bitdepth=8).write(f, rows)
    assert read_png(path).tolist() == [[255, 0]]


def test_image_to_gray():
    assert not np.any(image_to_gray(AudioImage(np.zeros((4, 4)))))
    gray = image_to_gray(AudioImage(np.array([[0.0, 1.0], [2.0, 4.0]])))
    assert gray.tolist() == [[0, 64], [128, 255]]


def test_write_png_checks_input(tmp_path):
    with pytest.raises(InvalidInputError):
        write_png(str(tmp_path / 'x.png'), np.zeros((2, 2)))
    with pytest.raises(DataIOError):
        write_image_png(str(tmp_path / 'no' / 'dir.png'), AudioImage(np.zeros((2, 2))))
