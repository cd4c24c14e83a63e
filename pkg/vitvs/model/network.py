"""The segmentation network.

Images are channel-last. A forward pass runs::

    batch norm -> patches -> linear embedding (+ positional embedding)
      -> encoder blocks -> decoder blocks -> linear head -> fold

and yields per-pixel class logits with the input's height and width.
"""

import collections
import logging
import math

import numpy as np

import vitvs
from vitvs import config_utils
from vitvs.common.exceptions import CheckpointError, DimensionMismatch, ShapeError
from vitvs.dsp.types import Mask
from vitvs.model.config import ModelConfig
from vitvs.model.layers import (
    BatchNorm,
    DecoderBlock,
    EncoderBlock,
    Layer,
    Linear,
    trunc_normal,
)
from vitvs.tensor import Tensor, as_tensor, no_grad, reshape, transpose
from vitvs.tensor.checkpoint import load_tensors, save_tensors

logger = logging.getLogger(__name__)

RUNNING_MEAN = 'norm.running_mean'
RUNNING_VAR = 'norm.running_var'


def image_to_patches(img, patch_size):
    """Cut ``(..., H, W, C)`` into row-major non-overlapping patches.

    Returns a ``(..., N, p*p*C)`` tensor; every patch is flattened in
    (row, column, channel) order.
    """
    img = as_tensor(img)
    if img.ndim < 3:
        raise ShapeError('image_to_patches needs (..., H, W, C), got {}'.format(img.shape))
    p = int(patch_size)
    lead = img.shape[:-3]
    h, w, c = img.shape[-3:]
    if p < 1 or h % p or w % p:
        raise ShapeError('image {}x{} is not divisible into {}x{} patches'.format(h, w, p, p))
    k = len(lead)
    x = reshape(img, lead + (h // p, p, w // p, p, c))
    x = transpose(x, tuple(range(k)) + (k, k + 2, k + 1, k + 3, k + 4))
    return reshape(x, lead + ((h // p) * (w // p), p * p * c))


def patches_to_image(patches, patch_size, grid=None):
    """Inverse of :func:`image_to_patches`.

    Args:
        grid (tuple): patch rows and columns; a square grid by default.
    """
    patches = as_tensor(patches)
    if patches.ndim < 2:
        raise ShapeError('patches_to_image needs (..., N, p*p*C), got {}'.format(patches.shape))
    p = int(patch_size)
    lead = patches.shape[:-2]
    n, width = patches.shape[-2:]
    if p < 1 or width % (p * p):
        raise ShapeError('patch length {} is not a multiple of {}'.format(width, p * p))
    c = width // (p * p)
    if grid is None:
        side = math.isqrt(n)
        grid = (side, side)
    gh, gw = grid
    if gh * gw != n:
        raise ShapeError('{} patches do not form a {}x{} grid'.format(n, gh, gw))
    k = len(lead)
    x = reshape(patches, lead + (gh, gw, p, p, c))
    x = transpose(x, tuple(range(k)) + (k, k + 2, k + 1, k + 3, k + 4))
    return reshape(x, lead + (gh * p, gw * p, c))


class ViTVSModel(Layer):
    """Vision-transformer encoder/decoder producing per-pixel logits.

    Args:
        config (ModelConfig): architecture.
        seed (int): seed of the weight initialization.
    """

    def __init__(self, config=None, seed=0):
        super().__init__()
        self.config = config or ModelConfig.from_dict(vitvs.config['model'])
        cfg = self.config
        rng = np.random.default_rng(seed)

        self.norm = self.add_layer('norm', BatchNorm(3))
        self.patch_embed = self.add_layer('patch_embed', Linear(cfg.patch_dim, cfg.embed_dim, rng))
        self.pos_embedding = None
        if cfg.use_positional_embedding:
            self.pos_embedding = self.add_parameter(
                'pos_embedding', trunc_normal((cfg.num_patches, cfg.embed_dim), rng))
        self.encoder = [
            self.add_layer('encoder.{}'.format(i), EncoderBlock(
                cfg.embed_dim, cfg.num_heads, cfg.hidden_dim, rng,
                conventional_residual=cfg.conventional_residual))
            for i in range(cfg.encoder_depth)
        ]
        self.decoder = [
            self.add_layer('decoder.{}'.format(i), DecoderBlock(
                cfg.embed_dim, cfg.num_heads, cfg.hidden_dim, rng,
                conventional_residual=cfg.conventional_residual))
            for i in range(cfg.decoder_depth)
        ]
        out_dim = cfg.patch_size * cfg.patch_size * cfg.num_classes
        self.head = self.add_layer('head', Linear(cfg.embed_dim, out_dim, rng))

    def __repr__(self):
        return '<ViTVSModel {}>'.format(self.config)

    def parameter_count(self):
        return sum(param.size for param in self.parameters())

    def _batched(self, img):
        img = as_tensor(img)
        single = img.ndim == 3
        if single:
            img = reshape(img, (1,) + img.shape)
        size = self.config.image_size
        if img.ndim != 4 or img.shape[1:] != (size, size, 3):
            raise DimensionMismatch('model expects {}x{}x3 images, got {}'.format(
                size, size, img.shape[1:] if img.ndim == 4 else img.shape))
        return img, single

    def embed(self, img):
        """Batch-normalize, cut into patches and project to tokens.

        ``img`` is ``(B, H, W, 3)``; returns ``(B, N, D)``.
        """
        img, single = self._batched(img)
        tokens = self.patch_embed(image_to_patches(self.norm(img), self.config.patch_size))
        if self.pos_embedding is not None:
            tokens = tokens + self.pos_embedding
        return tokens[0] if single else tokens

    def encode(self, tokens):
        for block in self.encoder:
            tokens = block(tokens)
        return tokens

    def decode(self, tokens):
        for block in self.decoder:
            tokens = block(tokens)
        return tokens

    def output_projection(self, tokens):
        """Project every token to a ``p x p x C`` logit patch and fold."""
        tokens = as_tensor(tokens)
        if tokens.ndim < 2 or tokens.shape[-2:] != (self.config.num_patches, self.config.embed_dim):
            raise ShapeError('output projection expects (..., {}, {}), got {}'.format(
                self.config.num_patches, self.config.embed_dim, tokens.shape))
        return patches_to_image(self.head(tokens), self.config.patch_size)

    def forward(self, img):
        """``(B, H, W, 3)`` (or a single ``(H, W, 3)``) images to logits
        of shape ``(B, H, W, C)`` (or ``(H, W, C)``)."""
        img, single = self._batched(img)
        logits = self.output_projection(self.decode(self.encode(self.embed(img))))
        return logits[0] if single else logits

    def predict_mask(self, img):
        """Per-pixel argmax over the class logits, ties to the lower class.

        Returns a :class:`Mask` for a single image, a list for a batch.
        """
        with no_grad():
            logits = self.forward(img).numpy()
        labels = np.argmax(logits, axis=-1).astype(np.uint8)
        if labels.ndim == 2:
            return Mask(labels)
        return [Mask(item) for item in labels]

    def state_dict(self):
        """Parameter values and batch-norm running statistics by name."""
        state = collections.OrderedDict(
            (name, param.data.copy()) for name, param in self.named_parameters())
        state[RUNNING_MEAN] = self.norm.state.running_mean.copy()
        state[RUNNING_VAR] = self.norm.state.running_var.copy()
        return state

    def load_state_dict(self, state):
        params = collections.OrderedDict(self.named_parameters())
        expected = set(params) | {RUNNING_MEAN, RUNNING_VAR}
        missing = expected - set(state)
        if missing:
            raise CheckpointError('state is missing {}'.format(', '.join(sorted(missing))))
        for name, param in params.items():
            value = np.asarray(state[name])
            if value.shape != param.shape:
                raise DimensionMismatch('{}: stored shape {} does not match {}'.format(
                    name, value.shape, param.shape))
            param.data = value.astype(param.dtype).copy()
            param.zero_grad()
        self.norm.state.running_mean = np.asarray(state[RUNNING_MEAN], dtype=np.float64).copy()
        self.norm.state.running_var = np.asarray(state[RUNNING_VAR], dtype=np.float64).copy()
        return self


def config_text(model_config):
    return config_utils.to_key_values({'model': model_config.to_dict()})


def config_from_text(text, source='<checkpoint>'):
    """Read the ``model.*`` block embedded in a checkpoint."""
    nested = config_utils.nest(config_utils.parse_key_values(text, source=source),
                               section='model', reference=vitvs._config)
    typed = config_utils.update_types(nested, vitvs._config)
    return ModelConfig.from_dict(typed.get('model', {}))


def save_checkpoint(path, model, extra=None, meta=None):
    """Write ``model`` (and ``extra`` named arrays, e.g. optimizer state)
    as a self-describing checkpoint."""
    arrays = model.state_dict()
    for name, value in (extra or {}).items():
        if name in arrays:
            raise CheckpointError('extra entry `{}` clashes with a model tensor'.format(name))
        arrays[name] = value
    save_tensors(path, arrays, config_text=config_text(model.config), meta=meta)
    logger.info('checkpoint written to %s', path)


def load_checkpoint(path):
    """Rebuild a model from a checkpoint.

    Returns:
        tuple: ``(model, extra, meta)`` where ``extra`` holds the arrays that
        are not part of the model.
    """
    arrays, text, meta = load_tensors(path)
    model = ViTVSModel(config_from_text(text, source=path))
    own = set(model.state_dict())
    model.load_state_dict(arrays)
    extra = collections.OrderedDict((k, v) for k, v in arrays.items() if k not in own)
    logger.debug('loaded %s from %s', model, path)
    return model, extra, meta
