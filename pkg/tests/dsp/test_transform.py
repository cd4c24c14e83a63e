import numpy as np
import pytest

from vitvs.common.exceptions import ConfigurationError, InvalidInputError, ShapeError
from vitvs.dsp import (
    AudioImage,
    AudioSignal,
    Mask,
    StftParams,
    apply_mask,
    audio_to_image,
    istft,
    magnitude_image,
    normalize_image,
    resize_image,
    resize_mask,
    sdr,
    stft,
    to_model_input,
)

RATE = 16000


def tone(freq, seconds=1.0, rate=RATE):
    t = np.arange(int(seconds * rate)) / rate
    return AudioSignal(0.5 * np.sin(2 * np.pi * freq * t), rate)


def test_stft_shape():
    spec = stft(AudioSignal(np.zeros(16000), RATE), StftParams())
    assert spec.shape == (513, 63)
    assert spec.original_length == 16000


def test_stft_istft_round_trip(rng):
    params = StftParams()
    for _ in range(100):
        n = int(rng.integers(4000, 64001))
        x = AudioSignal(rng.uniform(-1, 1, size=n), RATE)
        y = istft(stft(x, params), sample_rate=RATE)
        assert len(y) == n
        error = np.linalg.norm(y.samples - x.samples) / np.linalg.norm(x.samples)
        assert error < 1e-6


def test_round_trip_hamming_window(rng):
    params = StftParams(n_fft=512, hop=128, window='hamming')
    x = AudioSignal(rng.uniform(-1, 1, size=5000), RATE)
    np.testing.assert_allclose(istft(stft(x, params)).samples, x.samples, atol=1e-9)


def test_sinusoid_peaks_at_its_bin():
    spec = stft(tone(1000.0), StftParams())
    middle = np.abs(spec.bins[:, spec.shape[1] // 2])
    assert int(np.argmax(middle)) == 64


def test_stft_matches_direct_dft(rng):
    params = StftParams(n_fft=64, hop=16)
    x = rng.standard_normal(300)
    spec = stft(AudioSignal(x, RATE), params)
    padded = np.pad(x, 32, mode='reflect')
    n = np.arange(64)
    basis = np.exp(-2j * np.pi * np.outer(np.arange(33), n) / 64)
    window = 0.5 - 0.5 * np.cos(2 * np.pi * n / 64)
    assert spec.shape == (33, params.n_frames(300))
    for t in range(spec.shape[1]):
        frame = padded[t * 16:t * 16 + 64] * window
        np.testing.assert_allclose(spec.bins[:, t], basis @ frame, atol=1e-9)


def test_stft_is_linear(rng):
    params = StftParams()
    x, y = rng.standard_normal(8000), rng.standard_normal(8000)
    a, b = 0.7, -2.5
    combined = stft(AudioSignal(a * x + b * y, RATE), params).bins
    separate = a * stft(AudioSignal(x, RATE), params).bins + b * stft(AudioSignal(y, RATE), params).bins
    assert np.linalg.norm(combined - separate) <= 1e-9 * np.linalg.norm(separate)


def test_stft_rejects_short_signal():
    with pytest.raises(InvalidInputError):
        stft(AudioSignal(np.zeros(100), RATE), StftParams())


@pytest.mark.parametrize('kwargs', [
    dict(n_fft=1000, hop=250),
    dict(n_fft=1024, hop=2048),
    dict(n_fft=1024, hop=0),
    dict(n_fft=1024, hop=1024),
    dict(window='blackmanharris'),
])
def test_invalid_stft_params(kwargs):
    with pytest.raises(ConfigurationError):
        StftParams(**kwargs)


def test_apply_all_ones_mask_is_identity(rng):
    spec = stft(AudioSignal(rng.uniform(-1, 1, 8000), RATE), StftParams())
    masked = apply_mask(spec, Mask.ones(spec.shape))
    assert np.array_equal(masked.bins, spec.bins)


def test_apply_all_zeros_mask_silences(rng):
    x = AudioSignal(rng.uniform(-1, 1, 8000), RATE)
    spec = stft(x, StftParams())
    out = istft(apply_mask(spec, Mask.zeros(spec.shape)))
    assert len(out) == len(x)
    assert not np.any(out.samples)


def test_apply_mask_keeps_kept_bins_exactly(rng):
    spec = stft(AudioSignal(rng.uniform(-1, 1, 8000), RATE), StftParams())
    mask = Mask((rng.random(spec.shape) < 0.5).astype(np.uint8))
    masked = apply_mask(spec, mask)
    kept = mask.labels.astype(bool)
    assert np.array_equal(masked.bins[kept], spec.bins[kept])
    assert not np.any(masked.bins[~kept])


def test_apply_mask_shape_mismatch():
    spec = stft(AudioSignal(np.zeros(8000), RATE), StftParams())
    with pytest.raises(ShapeError):
        apply_mask(spec, Mask.ones((256, 256)))


def test_resize_mask_round_trip():
    labels = np.arange(35).reshape(7, 5) % 2
    mask = Mask(labels)
    back = resize_mask(resize_mask(mask, 256, 256), 7, 5)
    assert np.array_equal(back.labels, mask.labels)


def test_resize_mask_stays_binary(rng):
    mask = Mask((rng.random((513, 40)) < 0.2).astype(np.uint8))
    resized = resize_mask(mask, 256, 256)
    assert resized.shape == (256, 256)
    assert set(np.unique(resized.labels)) <= {0, 1}


def test_resize_image_same_size_and_constant(rng):
    img = AudioImage(rng.random((10, 12)))
    assert np.array_equal(resize_image(img, 10, 12).pixels, img.pixels)
    flat = resize_image(AudioImage(np.full((7, 9), 0.25)), 32, 32)
    np.testing.assert_allclose(flat.pixels, 0.25)


def test_resize_image_keeps_corners(rng):
    img = AudioImage(rng.random((13, 7)))
    out = resize_image(img, 40, 33).pixels
    for r, c in ((0, 0), (0, -1), (-1, 0), (-1, -1)):
        assert out[r, c] == pytest.approx(img.pixels[r, c])


def test_resize_image_bilinear_by_hand():
    # cell centers of a 4-row image fall on source rows -1/4, 1/4, 3/4, 5/4
    img = AudioImage(np.array([[0.0, 0.0], [1.0, 1.0]]))
    out = resize_image(img, 4, 4).pixels
    expected = np.repeat(np.array([[0.0], [0.25], [0.75], [1.0]]), 4, axis=1)
    np.testing.assert_allclose(out, expected, atol=1e-15)


def test_resized_image_and_mask_share_rows():
    """Each mask row is the source row its image row weighs most."""
    for src in range(513):
        pixels = np.zeros((513, 1))
        pixels[src] = 1.0
        image = resize_image(AudioImage(pixels), 64, 1).pixels[:, 0]
        mask = resize_mask(Mask(pixels.astype(np.uint8)), 64, 1).labels[:, 0]
        assert np.all(image[mask == 1] >= 0.5)


def test_resize_rejects_empty_target(rng):
    with pytest.raises(InvalidInputError):
        resize_image(AudioImage(rng.random((4, 4))), 0, 4)


def test_normalize_image(rng):
    img = normalize_image(AudioImage(rng.random((6, 6)) * 5 + 2))
    assert img.pixels.min() == 0.0 and img.pixels.max() == 1.0
    assert not np.any(normalize_image(AudioImage(np.full((3, 3), 4.0))).pixels)


def test_magnitude_image_of_silence_is_zero():
    spec = stft(AudioSignal(np.zeros(4000), RATE), StftParams())
    assert not np.any(magnitude_image(spec, scale='log1p').pixels)


def test_audio_to_image_and_model_input():
    spec, image = audio_to_image(tone(2000.0), StftParams(), 64)
    assert spec.shape == (513, 63)
    assert image.shape == (64, 64)
    stacked = to_model_input(image)
    assert stacked.shape == (64, 64, 3)
    assert np.array_equal(stacked[:, :, 0], stacked[:, :, 2])


def test_sdr_values():
    ref = tone(440.0)
    assert sdr(ref, ref) == 100.0
    assert sdr(ref, ref, cap=60.0) == 60.0
    assert sdr(ref, AudioSignal(0.9 * ref.samples, RATE)) == pytest.approx(20.0)


def test_sdr_rejects_bad_input():
    ref = tone(440.0)
    with pytest.raises(InvalidInputError):
        sdr(AudioSignal(np.zeros(len(ref)), RATE), ref)
    with pytest.raises(InvalidInputError):
        sdr(ref, AudioSignal(ref.samples[:-1], RATE))
