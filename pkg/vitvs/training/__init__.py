from vitvs.training.config import TrainConfig  # noqa
from vitvs.training.loss import nll_loss  # noqa
from vitvs.training.optimizer import AdamW, adamw_step, init_state  # noqa
from vitvs.training.loop import EpochRecord, TrainReport, train, train_step  # noqa
from vitvs.training.ablation import ablate  # noqa
