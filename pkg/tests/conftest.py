import copy

import numpy as np
import pytest

import vitvs
from vitvs.data import Sample, SynthConfig, find_manifests, load_split, synthesize
from vitvs.dsp.types import AudioImage, Mask
from vitvs.model import ModelConfig
from vitvs.tensor import precision

TOY = dict(image_size=32, patch_size=8, embed_dim=16, num_heads=2,
           encoder_depth=2, decoder_depth=2)


@pytest.fixture(autouse=True)
def restore_config():
    vitvs.config = copy.deepcopy(vitvs._config)
    yield
    vitvs.config = copy.deepcopy(vitvs._config)


@pytest.fixture
def float64():
    with precision('float64'):
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def toy_config():
    return ModelConfig(**TOY)


@pytest.fixture
def small_synth_config():
    return SynthConfig(train_samples=4, val_samples=2, test_samples=2,
                       min_duration=0.5, max_duration=0.8)


@pytest.fixture(scope='session')
def corpus_dir(tmp_path_factory):
    """A tiny synthesized corpus shared by the whole session."""
    out = tmp_path_factory.mktemp('corpus')
    config = SynthConfig(train_samples=4, val_samples=2, test_samples=2,
                         min_duration=0.5, max_duration=0.8)
    synthesize(config, seed=7, out_dir=str(out))
    return str(out)


@pytest.fixture
def corpus_samples(corpus_dir, toy_config):
    manifests = find_manifests(corpus_dir)
    return {split: load_split(manifest, toy_config) for split, manifest in manifests.items()}


@pytest.fixture
def make_samples():
    """Build in-memory samples with random images and masks."""

    def _make(rng, count, size=32):
        samples = []
        for i in range(count):
            mask = Mask((rng.random((size, size)) < 0.3).astype(np.uint8))
            samples.append(Sample(id='s{}'.format(i), audio=None,
                                  image=AudioImage(rng.random((size, size))),
                                  mask=mask, full_mask=mask))
        return samples

    return _make
