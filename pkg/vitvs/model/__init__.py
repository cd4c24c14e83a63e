from vitvs.model.config import ModelConfig, parameter_count  # noqa
from vitvs.model.network import (  # noqa
    ViTVSModel,
    image_to_patches,
    load_checkpoint,
    patches_to_image,
    save_checkpoint,
)
