"""Block-count ablation: one model per depth, same data and seeds."""

import logging

import numpy as np

from vitvs.common.exceptions import ConfigurationError
from vitvs.metrics.evaluation import evaluate_dataset
from vitvs.metrics.predictors import ModelPredictor
from vitvs.model.network import ViTVSModel
from vitvs.training.loop import train

logger = logging.getLogger(__name__)

COLUMNS = ('method', 'val IoU', 'val Dice', 'val F1', 'test IoU', 'test Dice', 'test F1')


def variant_name(depth):
    return 'ViTVS {}-block'.format(depth)


def _scores(model, samples, split, batch_size):
    if not samples:
        return {'{} {}'.format(split, key): None for key in ('IoU', 'Dice', 'F1')}
    summary = evaluate_dataset(ModelPredictor(model, batch_size=batch_size), samples, split=split)
    return {
        '{} IoU'.format(split): summary.iou,
        '{} Dice'.format(split): summary.dice,
        '{} F1'.format(split): summary.f1,
    }


def ablate(model_config, depths, train_config, train_samples, val_samples=None,
           test_samples=None, seeds=None):
    """Train and score one variant per entry of ``depths``.

    The encoder and the decoder both get ``depth`` blocks. Test scores come
    from the epoch with the best validation IoU. With several ``seeds`` each
    cell is the mean over seeds.

    Returns:
        list: one row dict per depth, keyed by :data:`COLUMNS`.
    """
    depths = [int(d) for d in depths]
    if not depths or any(d < 1 for d in depths):
        raise ConfigurationError('ablation depths must all be >= 1, got {}'.format(depths))
    seeds = list(seeds) if seeds else [train_config.seed]

    rows = []
    for depth in depths:
        variant = model_config.replace(encoder_depth=depth, decoder_depth=depth)
        runs = []
        for seed in seeds:
            logger.info('ablation: %s, seed %d', variant_name(depth), seed)
            model = ViTVSModel(variant, seed=seed)
            report = train(model, train_samples, train_config.replace(seed=seed),
                           val_samples=val_samples)
            if report.best_state is not None:
                model.load_state_dict(report.best_state)
            scores = _scores(model, val_samples, 'val', train_config.batch_size)
            scores.update(_scores(model, test_samples, 'test', train_config.batch_size))
            runs.append(scores)
        row = {'method': variant_name(depth), 'depth': depth}
        for column in COLUMNS[1:]:
            values = [run[column] for run in runs if run[column] is not None]
            row[column] = float(np.mean(values)) if values else None
        rows.append(row)
    return rows
