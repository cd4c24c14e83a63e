"""Manifests and model-ready samples.

A manifest is a text file, one sample per line::

    # split=train seed=7
    <id>\t<audio path>\t<mask path>

Paths are relative to the manifest's directory unless absolute; ``#``
lines carry optional ``key=value`` metadata.
"""

import logging
import os
from dataclasses import dataclass, field

import numpy as np

import vitvs
from vitvs.common.exceptions import DataIOError, DimensionMismatch, InvalidInputError
from vitvs.dsp.media import read_mask_png, read_wav
from vitvs.dsp.transform import audio_to_image, resize_mask
from vitvs.dsp.types import StftParams

logger = logging.getLogger(__name__)

SPLITS = ('train', 'val', 'test')


@dataclass(frozen=True)
class DatasetEntry(object):
    id: str
    audio: str
    mask: str

    @property
    def clean_audio(self):
        """Path of the noise-free clip written next to a synthesized sample."""
        stem, ext = os.path.splitext(self.audio)
        return stem + '.clean' + ext


@dataclass
class DatasetManifest(object):
    split: str
    entries: list = field(default_factory=list)
    seed: int = None
    root: str = '.'

    def __post_init__(self):
        if self.split not in SPLITS:
            raise InvalidInputError('split must be one of {}, got `{}`'.format(SPLITS, self.split))

    def __len__(self):
        return len(self.entries)

    @property
    def ids(self):
        return [entry.id for entry in self.entries]


@dataclass(frozen=True)
class Sample(object):
    """A loaded clip: noisy audio, its model-resolution image and mask,
    and the mask at spectrogram resolution."""

    id: str
    audio: object
    image: object
    mask: object
    full_mask: object

    def __post_init__(self):
        if self.image.shape != self.mask.shape or self.image.shape[0] != self.image.shape[1]:
            raise DimensionMismatch('sample {}: image {} and mask {} must be equal squares'.format(
                self.id, self.image.shape, self.mask.shape))


def write_manifest(manifest, path):
    base = os.path.dirname(os.path.abspath(path))
    lines = ['# split={}{}'.format(
        manifest.split, '' if manifest.seed is None else ' seed={}'.format(manifest.seed))]
    for entry in manifest.entries:
        lines.append('\t'.join([entry.id,
                                os.path.relpath(os.path.abspath(entry.audio), base),
                                os.path.relpath(os.path.abspath(entry.mask), base)]))
    try:
        with open(path, 'w') as f:
            f.write('\n'.join(lines) + '\n')
    except OSError as exc:
        raise DataIOError('Cannot write manifest `{}`: {}'.format(path, exc)) from exc


def load_manifest(path, split=None):
    """Parse a manifest; the split defaults to its ``split=`` header or
    the file name (``val.tsv`` -> ``val``).

    Raises:
        DataIOError: if the file is missing or a line is malformed.
    """
    try:
        with open(path) as f:
            lines = f.read().splitlines()
    except OSError as exc:
        raise DataIOError('Cannot read manifest `{}`: {}'.format(path, exc)) from exc

    base = os.path.dirname(os.path.abspath(path))
    meta = {}
    entries = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if line.startswith('#'):
            for item in line[1:].split():
                key, _, value = item.partition('=')
                meta[key] = value
            continue
        parts = line.split('\t')
        if len(parts) != 3:
            raise DataIOError('{}:{}: expected `id<TAB>audio<TAB>mask`'.format(path, lineno))
        sid, audio, mask = parts
        entries.append(DatasetEntry(id=sid,
                                    audio=os.path.join(base, audio),
                                    mask=os.path.join(base, mask)))

    split = split or meta.get('split') or os.path.splitext(os.path.basename(path))[0]
    seed = int(meta['seed']) if meta.get('seed') else None
    return DatasetManifest(split=split, entries=entries, seed=seed, root=base)


def find_manifests(data_dir):
    """The ``<split>.tsv`` manifests present in ``data_dir``."""
    if not os.path.isdir(data_dir):
        raise DataIOError('data directory `{}` does not exist'.format(data_dir))
    manifests = {}
    for split in SPLITS:
        path = os.path.join(data_dir, '{}.tsv'.format(split))
        if os.path.exists(path):
            manifests[split] = load_manifest(path, split=split)
    if not manifests:
        raise DataIOError('no train/val/test manifests in `{}`'.format(data_dir))
    return manifests


def load_sample(entry, model_config, params=None, scale=None):
    """Read one entry and bring it to model resolution.

    Raises:
        DataIOError: naming the entry, if a file is missing or corrupt.
        DimensionMismatch: if the mask does not match the spectrogram.
    """
    if params is None:
        params = StftParams.from_dict(vitvs.config['stft'])
    scale = scale or vitvs.config['dsp']['image_scale']
    size = model_config.image_size
    try:
        audio = read_wav(entry.audio)
        full_mask = read_mask_png(entry.mask)
    except DataIOError as exc:
        raise DataIOError('sample {}: {}'.format(entry.id, exc)) from exc

    spec, image = audio_to_image(audio, params, size, scale=scale)
    if full_mask.shape != spec.shape:
        raise DimensionMismatch('sample {}: mask {} does not match spectrogram {}'.format(
            entry.id, full_mask.shape, spec.shape))
    return Sample(id=entry.id, audio=audio, image=image,
                  mask=resize_mask(full_mask, size, size), full_mask=full_mask)


def load_split(manifest, model_config, params=None):
    samples = [load_sample(entry, model_config, params=params) for entry in manifest.entries]
    logger.debug('loaded %d %s samples', len(samples), manifest.split)
    return samples


def validate_corpus(manifests, model_config, params=None):
    """Check split disjointness and load every entry.

    Returns:
        dict: split name to number of valid samples.

    Raises:
        InvalidInputError: if an id appears in more than one split.
    """
    seen = {}
    for split, manifest in manifests.items():
        for sid in manifest.ids:
            if sid in seen:
                raise InvalidInputError('sample {} appears in both {} and {}'.format(
                    sid, seen[sid], split))
            seen[sid] = split
    return {split: len(load_split(manifest, model_config, params=params))
            for split, manifest in manifests.items()}


def corpus_stats(manifests, infos=None):
    """Sample counts per split, and drawn properties when ``infos`` (from
    synthesis) is given."""
    stats = {'splits': {split: len(m) for split, m in manifests.items()}}
    stats['total'] = sum(stats['splits'].values())
    if infos:
        values = list(infos.values())
        stats['duration_seconds'] = float(np.sum([v['duration'] for v in values]))
        stats['mean_positive_fraction'] = float(np.mean([v['positive_fraction'] for v in values]))
        kinds = {}
        for v in values:
            kinds[v['noise']] = kinds.get(v['noise'], 0) + 1
        stats['noise_kinds'] = kinds
    return stats
