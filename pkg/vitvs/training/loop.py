"""Mini-batch training.

Per epoch the training samples are visited in a shuffled order drawn from
``seed + epoch``; each batch runs forward, loss, backward and one AdamW
step. After each epoch the validation split (if any) is scored, and the
``last`` and ``best`` (by validation IoU) checkpoints are written.
"""

import contextlib
import logging
import math
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from vitvs.common.exceptions import ConfigurationError, DataIOError, DimensionMismatch, NumericalError
from vitvs.common.util import serialize
from vitvs.dsp.transform import to_model_input
from vitvs.metrics.evaluation import evaluate_dataset
from vitvs.metrics.predictors import ModelPredictor
from vitvs.model.network import load_checkpoint, save_checkpoint
from vitvs.tensor import backward
from vitvs.training.loss import nll_loss
from vitvs.training.optimizer import AdamW

logger = logging.getLogger(__name__)

BEST = 'best.ckpt'
LAST = 'last.ckpt'
REPORT = 'report.jsonl'


@dataclass(frozen=True)
class EpochRecord(object):
    epoch: int
    loss: float
    val_iou: float = None
    val_dice: float = None
    val_f1: float = None
    seconds: float = 0.0


@dataclass
class TrainReport(object):
    records: list = field(default_factory=list)
    step_losses: list = field(default_factory=list)
    checkpoint: str = None
    last_checkpoint: str = None
    best_state: dict = field(default=None, repr=False)

    @property
    def losses(self):
        return [r.loss for r in self.records]

    def write_jsonl(self, path):
        try:
            with open(path, 'w') as f:
                for record in self.records:
                    f.write(serialize(asdict(record)) + '\n')
        except OSError as exc:
            raise DataIOError('Cannot write report `{}`: {}'.format(path, exc)) from exc


def epoch_order(n, seed, epoch):
    """Shuffled sample order of one epoch (numpy's Fisher-Yates)."""
    return np.random.default_rng(seed + epoch).permutation(n)


def batches(order, batch_size):
    for start in range(0, len(order), batch_size):
        yield order[start:start + batch_size]


def _check_data(model, samples):
    if not samples:
        raise ConfigurationError('training needs at least one sample')
    size = model.config.image_size
    for sample in samples:
        if sample.image.shape != (size, size):
            raise DimensionMismatch('sample {} is {}, model expects {}x{}'.format(
                sample.id, sample.image.shape, size, size))


def _check_finite(model):
    for name, param in model.named_parameters():
        if not np.all(np.isfinite(param.data)):
            raise NumericalError('parameter {} is not finite after the update'.format(name))


def _restore_best(path):
    """``(model, extra, meta, path)`` of an interrupted run's best
    checkpoint, or None when it is gone."""
    if not path or not os.path.exists(path):
        if path:
            logger.warning('best checkpoint %s of the resumed run is missing', path)
        return None
    return load_checkpoint(path) + (path,)


def _same_file(a, b):
    return os.path.exists(b) and os.path.samefile(a, b)


def train_step(model, optimizer, images, masks):
    """Forward, loss, backward and update on one batch; returns the loss."""
    model.train()
    optimizer.zero_grad()
    loss = nll_loss(model(images), masks)
    backward(loss)
    optimizer.step()
    return float(loss.item())


def train(model, samples, config, val_samples=None, out_dir=None, monitor=None, resume=None):
    """Fit ``model`` to ``samples``.

    Args:
        samples (list): training :class:`~vitvs.data.Sample` objects.
        config (TrainConfig): optimization settings.
        val_samples (list): scored after every epoch when given.
        out_dir (str): where checkpoints and ``report.jsonl`` go.
        monitor (Monitor): receives ``train.step`` timings.
        resume (tuple): ``(extra, meta)`` from
            :func:`~vitvs.model.network.load_checkpoint` of an interrupted
            run; training continues after the stored epoch, and the
            weights of that run's best checkpoint seed ``best_state``.

    Returns:
        TrainReport
    """
    _check_data(model, samples)
    if val_samples:
        _check_data(model, val_samples)
    optimizer = AdamW(model.named_parameters(), config)
    report = TrainReport()
    start_epoch = 0
    best_score = -math.inf
    best = None
    if resume is not None:
        extra, meta = resume
        optimizer.load_state_dict(extra)
        start_epoch = int(meta.get('epoch', 0))
        report.records = [EpochRecord(**r) for r in meta.get('records', [])]
        report.step_losses = list(meta.get('step_losses', []))
        best_score = meta.get('best_score', -math.inf)
        best = _restore_best(meta.get('best_checkpoint'))
        if best is not None:
            report.best_state = best[0].state_dict()
        logger.info('resuming after epoch %d (step %d)', start_epoch, optimizer.steps)

    if out_dir:
        try:
            os.makedirs(out_dir, exist_ok=True)
        except OSError as exc:
            raise DataIOError('Cannot create `{}`: {}'.format(out_dir, exc)) from exc
        report.checkpoint = os.path.join(out_dir, BEST)
        report.last_checkpoint = os.path.join(out_dir, LAST)
        if best is not None and not _same_file(best[3], report.checkpoint):
            save_checkpoint(report.checkpoint, best[0], extra=best[1], meta=best[2])

    logger.info('training %d parameters on %d samples for epochs %d..%d',
                model.parameter_count(), len(samples), start_epoch + 1, config.epochs)
    for epoch in range(start_epoch, config.epochs):
        started = time.perf_counter()
        losses = []
        for index in batches(epoch_order(len(samples), config.seed, epoch), config.batch_size):
            images = np.stack([to_model_input(samples[i].image) for i in index])
            masks = [samples[i].mask for i in index]
            timer = monitor.timer('train.step', rate=monitor.rate) if monitor else contextlib.nullcontext()
            with timer:
                losses.append(train_step(model, optimizer, images, masks))
            _check_finite(model)
        report.step_losses.extend(losses)

        val = None
        if val_samples:
            val = evaluate_dataset(ModelPredictor(model, batch_size=config.batch_size),
                                   val_samples, split='val')
        record = EpochRecord(
            epoch=epoch + 1,
            loss=float(np.mean(losses)),
            val_iou=val.iou if val else None,
            val_dice=val.dice if val else None,
            val_f1=val.f1 if val else None,
            seconds=time.perf_counter() - started)
        report.records.append(record)
        logger.info('epoch %d/%d loss %.6f val IoU %s (%.1fs)', record.epoch, config.epochs,
                    record.loss, '-' if val is None else '{:.2f}'.format(record.val_iou),
                    record.seconds)
        if monitor:
            monitor.gauge('train.loss', record.loss)
            if val:
                monitor.gauge('train.val_iou', record.val_iou)

        # without validation the lowest epoch loss selects the best model
        score = record.val_iou if val else -record.loss
        improved = score > best_score
        if improved:
            best_score = score
            report.best_state = model.state_dict()
        if out_dir:
            meta = {
                'epoch': epoch + 1,
                'records': [asdict(r) for r in report.records],
                'step_losses': report.step_losses,
                'best_score': best_score,
                'best_checkpoint': os.path.abspath(report.checkpoint),
                'train_config': config.to_dict(),
            }
            save_checkpoint(report.last_checkpoint, model, extra=optimizer.state_dict(), meta=meta)
            if improved:
                save_checkpoint(report.checkpoint, model, extra=optimizer.state_dict(), meta=meta)
            report.write_jsonl(os.path.join(out_dir, REPORT))
    return report
