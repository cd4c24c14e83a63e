from vitvs.tensor.core import (  # noqa
    DTYPES,
    GradientTape,
    Node,
    Tensor,
    as_tensor,
    backward,
    get_dtype,
    is_grad_enabled,
    no_grad,
    precision,
    set_precision,
)
from vitvs.tensor.ops import (  # noqa
    BatchNormState,
    add,
    batch_norm,
    concat,
    gather,
    gelu,
    layer_norm,
    linear,
    log_softmax,
    matmul,
    mean,
    mul,
    neg,
    reshape,
    scale,
    slice,
    softmax,
    sub,
    sum,
    swapaxes,
    transpose,
)
