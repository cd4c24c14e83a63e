from vitvs.data.dataset import (  # noqa
    SPLITS,
    DatasetEntry,
    DatasetManifest,
    Sample,
    corpus_stats,
    find_manifests,
    load_manifest,
    load_sample,
    load_split,
    validate_corpus,
    write_manifest,
)
from vitvs.data.synth import SynthConfig, generate_sample, synthesize  # noqa
