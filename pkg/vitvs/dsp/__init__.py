from vitvs.dsp.types import (  # noqa
    AudioImage,
    AudioSignal,
    Mask,
    Spectrogram,
    StftParams,
)
from vitvs.dsp.transform import (  # noqa
    apply_mask,
    audio_to_image,
    istft,
    magnitude_image,
    normalize_image,
    resize_image,
    resize_mask,
    sdr,
    stft,
    to_model_input,
)
