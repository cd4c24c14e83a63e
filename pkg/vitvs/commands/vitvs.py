"""Implementation of the `vitvs` command,
the command-line interface (CLI) for ViTVS.
"""

import argparse
import logging
import os
import sys

import logstats

import vitvs
import vitvs.logger
from vitvs import config_utils
from vitvs.commands import utils
from vitvs.common.exceptions import ConfigurationError, DataIOError
from vitvs.common.util import serialize
from vitvs.data import (
    SPLITS,
    SynthConfig,
    corpus_stats,
    find_manifests,
    load_split,
    synthesize,
)
from vitvs.dsp import (
    StftParams,
    apply_mask,
    audio_to_image,
    istft,
    magnitude_image,
    resize_mask,
    stft,
    to_model_input,
)
from vitvs.dsp.media import read_wav, write_image_png, write_mask_png, write_wav
from vitvs.metrics import (
    ModelPredictor,
    OraclePredictor,
    evaluate_dataset,
    format_table,
    write_csv,
)
from vitvs.model import ModelConfig, ViTVSModel, load_checkpoint
from vitvs.monitor import Monitor
from vitvs.training import TrainConfig, ablate, train
from vitvs.training.ablation import COLUMNS as ABLATION_COLUMNS

logger = logging.getLogger(__name__)

app_setup_name = vitvs.config['app']['setup_name']


def _setup(args, section=None, files=(), overrides=None):
    """Load ``-c`` (keys without a prefix go to ``section``), then the
    per-section ``files``, then flag ``overrides``; start logging."""
    newconfig = {}
    if args.config:
        config_utils.update(newconfig, config_utils.file_config(args.config, section=section))
    for filename, file_section in files:
        if filename:
            config_utils.update(newconfig, config_utils.file_config(filename, section=file_section))
    if overrides:
        config_utils.update(newconfig, overrides)
    config_utils.autoconfigure(config=newconfig, force=True)
    vitvs.logger.configure(log_to_file=not args.no_log_file)
    logger.debug('%s %s', app_setup_name, args.command)


def _flags(section, **values):
    """Config overrides for the flags that were given."""
    given = {key: value for key, value in values.items() if value is not None}
    return {section: given} if given else {}


def _stft_params():
    return StftParams.from_dict(vitvs.config['stft'])


def run_synth(args):
    """Write a synthetic corpus."""
    _setup(args, section='synth')
    config = SynthConfig.from_dict(vitvs.config['synth'])
    stats = logstats.Logstats()
    logstats.thread.start(stats)
    manifests, infos = synthesize(config, args.seed, args.out, params=_stft_params(),
                                  processes=args.multiprocess, stats=stats, monitor=Monitor())
    summary = corpus_stats(manifests, infos)
    summary['seed'] = args.seed
    try:
        with open(os.path.join(args.out, 'stats.json'), 'w') as f:
            f.write(serialize(summary) + '\n')
    except OSError as exc:
        raise DataIOError('Cannot write corpus statistics: {}'.format(exc)) from exc
    for split in SPLITS:
        print(os.path.join(args.out, '{}.tsv'.format(split)))
    print(serialize(summary))


def _load(manifests, split, model_config):
    if split not in manifests:
        raise DataIOError('no `{}` manifest found'.format(split))
    return load_split(manifests[split], model_config, params=_stft_params())


def run_train(args):
    """Train a model on a corpus directory."""
    overrides = _flags('train', epochs=args.epochs, batch_size=args.batch_size,
                       learning_rate=args.lr, seed=args.seed)
    _setup(args, files=[(args.model_config, 'model'), (args.train_config, 'train')],
           overrides=overrides)
    train_config = TrainConfig.from_dict(vitvs.config['train'])

    resume = None
    if args.init_checkpoint:
        model, extra, meta = load_checkpoint(args.init_checkpoint)
        if extra:
            resume = (extra, meta)
    else:
        model = ViTVSModel(ModelConfig.from_dict(vitvs.config['model']), seed=train_config.seed)

    manifests = find_manifests(args.data)
    samples = _load(manifests, 'train', model.config)
    if args.val_data:
        val_samples = _load(find_manifests(args.val_data), 'val', model.config)
    else:
        val_samples = _load(manifests, 'val', model.config) if 'val' in manifests else None

    os.makedirs(args.out, exist_ok=True)
    config_utils.write_config(vitvs.config, os.path.join(args.out, 'vitvs.conf'))
    report = train(model, samples, train_config, val_samples=val_samples, out_dir=args.out,
                   monitor=Monitor(), resume=resume)
    for record in report.records:
        print('epoch {} loss {:.6f} val IoU {} Dice {} F1 {} ({:.1f}s)'.format(
            record.epoch, record.loss,
            *('-' if v is None else '{:.2f}'.format(v)
              for v in (record.val_iou, record.val_dice, record.val_f1)),
            record.seconds))
    print(report.checkpoint)


def run_denoise(args):
    """Remove the noise a trained model finds in one WAV file."""
    _setup(args)
    model, _, _ = load_checkpoint(args.checkpoint)
    audio = read_wav(args.input)
    spec, image = audio_to_image(audio, _stft_params(), model.config.image_size,
                                 scale=vitvs.config['dsp']['image_scale'])
    mask = resize_mask(model.eval().predict_mask(to_model_input(image)), *spec.shape)
    denoised = istft(apply_mask(spec, mask), sample_rate=audio.sample_rate)
    write_wav(args.out, denoised, encoding=args.encoding)
    if args.mask_out:
        write_mask_png(args.mask_out, mask)
    logger.info('kept %.1f%% of %d bins', 100.0 * mask.labels.mean(), mask.labels.size)


def run_eval(args):
    """Score a checkpoint (or the ground truth) on corpus splits."""
    _setup(args)
    if args.oracle:
        predictor = OraclePredictor()
        model_config = ModelConfig.from_dict(vitvs.config['model'])
    elif args.checkpoint:
        model, _, _ = load_checkpoint(args.checkpoint)
        predictor = ModelPredictor(model, batch_size=vitvs.config['train']['batch_size'])
        model_config = model.config
    else:
        raise ConfigurationError('eval needs --checkpoint or --oracle')

    manifests = find_manifests(args.data)
    splits = args.split or [s for s in ('val', 'test') if s in manifests]
    rows = []
    for split in splits:
        summary = evaluate_dataset(predictor, _load(manifests, split, model_config),
                                   with_sdr=args.sdr, params=_stft_params(), split=split)
        rows.append(summary.row())
    print(format_table(rows))
    if args.csv:
        write_csv(args.csv, rows)


def run_ablate(args):
    """Train one variant per block count and tabulate the scores."""
    overrides = _flags('train', epochs=args.epochs, batch_size=args.batch_size,
                       learning_rate=args.lr)
    _setup(args, files=[(args.model_config, 'model'), (args.train_config, 'train')],
           overrides=overrides)
    model_config = ModelConfig.from_dict(vitvs.config['model'])
    train_config = TrainConfig.from_dict(vitvs.config['train'])
    manifests = find_manifests(args.data)
    rows = ablate(model_config, args.depths, train_config,
                  _load(manifests, 'train', model_config),
                  val_samples=_load(manifests, 'val', model_config) if 'val' in manifests else None,
                  test_samples=_load(manifests, 'test', model_config) if 'test' in manifests else None,
                  seeds=args.seeds)
    print(format_table(rows, ABLATION_COLUMNS))
    if args.csv:
        write_csv(args.csv, rows, ABLATION_COLUMNS)


def run_spectrogram(args):
    """Render the log-magnitude image of a WAV file."""
    _setup(args)
    spec = stft(read_wav(args.input), _stft_params())
    write_image_png(args.out, magnitude_image(spec, scale=vitvs.config['dsp']['image_scale']))


def create_parser():
    parser = argparse.ArgumentParser(
        description='Denoise bird sounds with {}.'.format(app_setup_name),
        parents=[utils.base_parser])

    # all the commands are contained in the subparsers object,
    # the command selected by the user will be stored in `args.command`
    # that is used by the `main` function to select which other
    # function to call.
    subparsers = parser.add_subparsers(title='Commands',
                                       dest='command')

    synth_parser = subparsers.add_parser('synth', parents=[utils.command_parser],
                                         help='Write a synthetic corpus')
    synth_parser.add_argument('--out', required=True,
                              help='Corpus directory')
    synth_parser.add_argument('--seed', type=int, default=0,
                              help='Seed of every random draw')
    synth_parser.add_argument('-m', '--multiprocess',
                              nargs='?',
                              type=int,
                              default=False,
                              help='Spawn multiple processes to run the command, '
                                   'if no value is provided, the number of processes '
                                   'is equal to the number of cores of the host machine')

    train_parser = subparsers.add_parser('train', parents=[utils.command_parser],
                                         help='Train a model')
    train_parser.add_argument('--data', required=True,
                              help='Corpus directory with train.tsv (and val.tsv)')
    train_parser.add_argument('--val-data',
                              help='Corpus directory whose val.tsv is used for validation')
    train_parser.add_argument('--out', required=True,
                              help='Directory for checkpoints and report.jsonl')
    train_parser.add_argument('--init-checkpoint',
                              help='Start from (or resume) this checkpoint')
    _add_training_flags(train_parser)
    train_parser.add_argument('--seed', type=int,
                              help='train.seed')

    denoise_parser = subparsers.add_parser('denoise', parents=[utils.command_parser],
                                           help='Denoise one WAV file')
    denoise_parser.add_argument('--in', dest='input', required=True,
                                help='Noisy WAV file')
    denoise_parser.add_argument('--checkpoint', required=True)
    denoise_parser.add_argument('--out', required=True,
                                help='Denoised WAV file')
    denoise_parser.add_argument('--mask-out',
                                help='Also write the predicted mask as a PNG')
    denoise_parser.add_argument('--encoding', choices=('float32', 'pcm16'), default='float32',
                                help='Sample format of the output WAV')

    eval_parser = subparsers.add_parser('eval', parents=[utils.command_parser],
                                        help='Score masks on corpus splits')
    eval_parser.add_argument('--data', required=True)
    eval_parser.add_argument('--checkpoint')
    eval_parser.add_argument('--oracle', action='store_true',
                             help='Score the ground-truth masks themselves')
    eval_parser.add_argument('--split', action='append', choices=SPLITS,
                             help='Split to score (repeatable); val and test by default')
    eval_parser.add_argument('--sdr', action='store_true',
                             help='Also reconstruct audio and report SDR')
    eval_parser.add_argument('--csv',
                             help='Write the table as CSV')

    ablate_parser = subparsers.add_parser('ablate', parents=[utils.command_parser],
                                          help='Compare encoder/decoder block counts')
    ablate_parser.add_argument('--data', required=True)
    ablate_parser.add_argument('--depths', type=utils.int_list, default=[4, 5, 9, 12, 16, 20],
                               help='Comma-separated block counts')
    ablate_parser.add_argument('--seeds', type=utils.int_list,
                               help='Comma-separated seeds to average over')
    ablate_parser.add_argument('--csv')
    _add_training_flags(ablate_parser)

    spectrogram_parser = subparsers.add_parser('spectrogram', parents=[utils.command_parser],
                                               help='Render a WAV file as a PNG image')
    spectrogram_parser.add_argument('--in', dest='input', required=True)
    spectrogram_parser.add_argument('--out', required=True)

    return parser


def _add_training_flags(parser):
    parser.add_argument('--model-config',
                        help='Key-value file read into the model section')
    parser.add_argument('--train-config',
                        help='Key-value file read into the train section')
    parser.add_argument('--epochs', type=int,
                        help='train.epochs')
    parser.add_argument('--batch-size', type=int,
                        help='train.batch_size')
    parser.add_argument('--lr', type=float,
                        help='train.learning_rate')


def main(argv=None):
    sys.exit(utils.start(create_parser(), sys.argv[1:] if argv is None else argv, globals()))
