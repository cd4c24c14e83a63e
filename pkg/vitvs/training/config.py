from dataclasses import asdict, dataclass, fields

from vitvs.common.exceptions import ConfigurationError


@dataclass(frozen=True)
class TrainConfig(object):
    """Optimization settings; constant learning rate, AdamW."""

    learning_rate: float = 5e-5
    weight_decay: float = 5e-4
    batch_size: int = 8
    epochs: int = 100
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigurationError('learning_rate must be > 0, got {}'.format(self.learning_rate))
        if self.weight_decay < 0:
            raise ConfigurationError('weight_decay must be >= 0, got {}'.format(self.weight_decay))
        if self.batch_size < 1:
            raise ConfigurationError('batch_size must be >= 1, got {}'.format(self.batch_size))
        if self.epochs < 1:
            raise ConfigurationError('epochs must be >= 1, got {}'.format(self.epochs))
        if self.seed < 0:
            raise ConfigurationError('seed must be unsigned, got {}'.format(self.seed))
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ConfigurationError('betas must lie in [0, 1)')
        if self.adam_eps <= 0:
            raise ConfigurationError('adam_eps must be > 0')

    @classmethod
    def from_dict(cls, config):
        known = {f.name for f in fields(cls)}
        unknown = set(config) - known
        if unknown:
            raise ConfigurationError('Unknown train settings: {}'.format(', '.join(sorted(unknown))))
        return cls(**config)

    def to_dict(self):
        return asdict(self)

    def replace(self, **changes):
        values = self.to_dict()
        values.update(changes)
        return type(self)(**values)

    @property
    def betas(self):
        return self.beta1, self.beta2
