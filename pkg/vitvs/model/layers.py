"""Parameterized building blocks of the network.

Every layer keeps its learnable tensors in registration order so that
``named_parameters`` (and therefore checkpoints) list them identically
across runs.
"""

import collections

import numpy as np
from scipy import stats

from vitvs.common.exceptions import ShapeError
from vitvs.tensor import (
    BatchNormState,
    Tensor,
    batch_norm,
    gelu,
    get_dtype,
    layer_norm,
    linear,
    matmul,
    reshape,
    scale,
    softmax,
    swapaxes,
)

INIT_STD = 0.02


def trunc_normal(shape, rng, std=INIT_STD):
    """Normal samples with std ``std`` truncated at two standard deviations."""
    return stats.truncnorm.rvs(-2.0, 2.0, scale=std, size=shape, random_state=rng)


class Layer(object):
    """Holds parameters and sub-layers; switches between train and eval."""

    def __init__(self):
        self._parameters = collections.OrderedDict()
        self._layers = collections.OrderedDict()
        self.training = True

    def add_parameter(self, name, data):
        param = Tensor(data, requires_grad=True, dtype=get_dtype(), name=name)
        self._parameters[name] = param
        return param

    def add_layer(self, name, layer):
        self._layers[name] = layer
        return layer

    def named_parameters(self, prefix=''):
        for name, param in self._parameters.items():
            yield prefix + name, param
        for name, layer in self._layers.items():
            yield from layer.named_parameters(prefix + name + '.')

    def parameters(self):
        return [param for _, param in self.named_parameters()]

    def layers(self):
        yield self
        for layer in self._layers.values():
            yield from layer.layers()

    def train(self, mode=True):
        for layer in self.layers():
            layer.training = mode
        return self

    def eval(self):
        return self.train(False)

    def zero_grad(self):
        for param in self.parameters():
            param.zero_grad()

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


class Linear(Layer):
    """``y = x W + b`` with ``W`` stored as (in, out)."""

    def __init__(self, in_features, out_features, rng, bias=True):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        self.weight = self.add_parameter('weight', trunc_normal((in_features, out_features), rng))
        self.bias = self.add_parameter('bias', np.zeros(out_features)) if bias else None

    def forward(self, x):
        return linear(x, self.weight, self.bias)


class LayerNorm(Layer):

    def __init__(self, dim, eps=1e-5):
        super().__init__()
        self.eps = eps
        self.gamma = self.add_parameter('gamma', np.ones(dim))
        self.beta = self.add_parameter('beta', np.zeros(dim))

    def forward(self, x):
        return layer_norm(x, self.gamma, self.beta, eps=self.eps)


class BatchNorm(Layer):
    """Per-channel batch normalization of channel-last input.

    Training mode normalizes with the batch statistics and folds them
    into the running estimates used in eval mode.
    """

    def __init__(self, channels, momentum=0.1, eps=1e-5):
        super().__init__()
        self.eps = eps
        self.gamma = self.add_parameter('gamma', np.ones(channels))
        self.beta = self.add_parameter('beta', np.zeros(channels))
        self.state = BatchNormState(channels, momentum=momentum)

    def forward(self, x):
        mode = 'train' if self.training else 'eval'
        return batch_norm(x, self.gamma, self.beta, self.state, mode=mode, eps=self.eps)


class MultiheadAttention(Layer):
    """Scaled dot-product self-attention over the token axis.

    Queries, keys and values come from bias-free D x D projections split
    into ``num_heads`` heads of ``D / num_heads`` features; the
    concatenated heads pass through a D x D output projection with bias.
    """

    def __init__(self, dim, num_heads, rng):
        super().__init__()
        if dim % num_heads:
            raise ShapeError('embed dim {} is not divisible by {} heads'.format(dim, num_heads))
        self.dim = dim
        self.num_heads = num_heads
        self.head_dim = dim // num_heads
        self.w_q = self.add_parameter('w_q', trunc_normal((dim, dim), rng))
        self.w_k = self.add_parameter('w_k', trunc_normal((dim, dim), rng))
        self.w_v = self.add_parameter('w_v', trunc_normal((dim, dim), rng))
        self.proj = self.add_layer('proj', Linear(dim, dim, rng))

    def _split_heads(self, x):
        # (..., N, D) -> (..., heads, N, head_dim)
        lead, n = x.shape[:-2], x.shape[-2]
        x = reshape(x, lead + (n, self.num_heads, self.head_dim))
        return swapaxes(x, -3, -2)

    def _merge_heads(self, x):
        x = swapaxes(x, -3, -2)
        lead, n = x.shape[:-3], x.shape[-3]
        return reshape(x, lead + (n, self.dim))

    def attention_weights(self, x):
        """Softmax-normalized scores, shape (..., heads, N, N)."""
        q = self._split_heads(matmul(x, self.w_q))
        k = self._split_heads(matmul(x, self.w_k))
        scores = scale(matmul(q, swapaxes(k, -1, -2)), 1.0 / np.sqrt(self.head_dim))
        return softmax(scores, axis=-1)

    def forward(self, x):
        if x.ndim < 2 or x.shape[-1] != self.dim:
            raise ShapeError('attention expects (..., N, {}), got {}'.format(self.dim, x.shape))
        weights = self.attention_weights(x)
        v = self._split_heads(matmul(x, self.w_v))
        return self.proj(self._merge_heads(matmul(weights, v)))


class Mlp(Layer):
    """``GELU(x W1 + b1) W2 + b2``."""

    def __init__(self, dim, hidden_dim, rng):
        super().__init__()
        self.fc1 = self.add_layer('fc1', Linear(dim, hidden_dim, rng))
        self.fc2 = self.add_layer('fc2', Linear(hidden_dim, dim, rng))

    def forward(self, x):
        return self.fc2(gelu(self.fc1(x)))


class EncoderBlock(Layer):
    """Self-attention block.

    The default topology adds a single residual around the whole block::

        a = MHA(LN1(x));  x' = x + MLP(LN2(a))

    With ``conventional_residual`` it becomes the usual pre-norm block::

        h = x + MHA(LN1(x));  x' = h + MLP(LN2(h))
    """

    def __init__(self, dim, num_heads, hidden_dim, rng, conventional_residual=False):
        super().__init__()
        self.conventional_residual = conventional_residual
        self.norm1 = self.add_layer('norm1', LayerNorm(dim))
        self.attn = self.add_layer('attn', MultiheadAttention(dim, num_heads, rng))
        self.norm2 = self.add_layer('norm2', LayerNorm(dim))
        self.mlp = self.add_layer('mlp', Mlp(dim, hidden_dim, rng))

    def forward(self, x):
        attended = self.attn(self.norm1(x))
        if self.conventional_residual:
            hidden = x + attended
            return hidden + self.mlp(self.norm2(hidden))
        return x + self.mlp(self.norm2(attended))


class DecoderBlock(EncoderBlock):
    """An encoder block fed through one more layer norm, ``block(LN0(x))``.

    The residual still adds the un-normalized input.
    """

    def __init__(self, dim, num_heads, hidden_dim, rng, conventional_residual=False):
        super().__init__(dim, num_heads, hidden_dim, rng,
                         conventional_residual=conventional_residual)
        self.norm0 = self.add_layer('norm0', LayerNorm(dim))

    def forward(self, x):
        normed = self.norm0(x)
        attended = self.attn(self.norm1(normed))
        if self.conventional_residual:
            hidden = x + attended
            return hidden + self.mlp(self.norm2(hidden))
        return x + self.mlp(self.norm2(attended))
