from dataclasses import asdict, dataclass, fields

from vitvs.common.exceptions import ConfigurationError


@dataclass(frozen=True)
class ModelConfig(object):
    """Architecture hyperparameters of the segmentation network."""

    image_size: int = 256
    patch_size: int = 16
    embed_dim: int = 384
    num_heads: int = 6
    encoder_depth: int = 12
    decoder_depth: int = 12
    mlp_ratio: float = 4.0
    num_classes: int = 2
    use_positional_embedding: bool = True
    conventional_residual: bool = False

    def __post_init__(self):
        for name in ('image_size', 'patch_size', 'embed_dim', 'num_heads'):
            if getattr(self, name) < 1:
                raise ConfigurationError('{} must be >= 1, got {}'.format(name, getattr(self, name)))
        for name in ('encoder_depth', 'decoder_depth'):
            if getattr(self, name) < 0:
                raise ConfigurationError('{} must be >= 0, got {}'.format(name, getattr(self, name)))
        if self.image_size % self.patch_size:
            raise ConfigurationError('image_size {} is not divisible by patch_size {}'.format(
                self.image_size, self.patch_size))
        if self.embed_dim % self.num_heads:
            raise ConfigurationError('embed_dim {} is not divisible by num_heads {}'.format(
                self.embed_dim, self.num_heads))
        if self.num_classes < 2:
            raise ConfigurationError('num_classes must be >= 2, got {}'.format(self.num_classes))
        if self.hidden_dim < 1:
            raise ConfigurationError('mlp_ratio {} leaves no hidden units'.format(self.mlp_ratio))

    @classmethod
    def from_dict(cls, config):
        known = {f.name for f in fields(cls)}
        unknown = set(config) - known
        if unknown:
            raise ConfigurationError('Unknown model settings: {}'.format(', '.join(sorted(unknown))))
        return cls(**config)

    def to_dict(self):
        return asdict(self)

    def replace(self, **changes):
        values = self.to_dict()
        values.update(changes)
        return type(self)(**values)

    @property
    def grid(self):
        return self.image_size // self.patch_size

    @property
    def num_patches(self):
        return self.grid * self.grid

    @property
    def head_dim(self):
        return self.embed_dim // self.num_heads

    @property
    def hidden_dim(self):
        return int(self.mlp_ratio * self.embed_dim)

    @property
    def patch_dim(self):
        """Length of a flattened 3-channel input patch."""
        return self.patch_size * self.patch_size * 3


def parameter_count(config):
    """Number of learnable scalars of a network built from ``config``."""
    d, h = config.embed_dim, config.hidden_dim
    attention = 4 * d * d + d
    mlp = d * h + h + h * d + d
    layer_norms = 2 * 2 * d
    encoder_block = attention + mlp + layer_norms
    decoder_block = encoder_block + 2 * d
    embedding = config.patch_dim * d + d + 2 * 3
    if config.use_positional_embedding:
        embedding += config.num_patches * d
    out_dim = config.patch_size * config.patch_size * config.num_classes
    projection = d * out_dim + out_dim
    return (embedding
            + config.encoder_depth * encoder_block
            + config.decoder_depth * decoder_block
            + projection)
