import numpy as np
import pytest
from scipy import special

from vitvs.common.exceptions import CheckpointError, ConfigurationError, DimensionMismatch, ShapeError
from vitvs.dsp.types import Mask
from vitvs.model import (
    ModelConfig,
    ViTVSModel,
    image_to_patches,
    load_checkpoint,
    parameter_count,
    patches_to_image,
    save_checkpoint,
)
from vitvs.model.layers import DecoderBlock, EncoderBlock, MultiheadAttention
from vitvs.tensor import Tensor, no_grad
from vitvs.tensor.gradcheck import check_gradients
from vitvs.training import nll_loss


def zero_blocks(model):
    for name, param in model.named_parameters():
        if name.startswith(('encoder.', 'decoder.')):
            param.data = np.zeros_like(param.data)


def set_head(model, weight=None, bias=None):
    cfg = model.config
    out_dim = cfg.patch_size * cfg.patch_size * cfg.num_classes
    model.head.weight.data = np.zeros((cfg.embed_dim, out_dim), dtype=model.head.weight.dtype) \
        if weight is None else weight.astype(model.head.weight.dtype)
    model.head.bias.data = np.zeros(out_dim, dtype=model.head.bias.dtype) \
        if bias is None else bias.astype(model.head.bias.dtype)


# patches

def test_patch_order():
    img = np.arange(16, dtype=np.float64).reshape(4, 4, 1)
    patches = image_to_patches(img, 2).numpy()
    assert patches.shape == (4, 4)
    assert patches[0].tolist() == [0, 1, 4, 5]
    assert patches[3].tolist() == [10, 11, 14, 15]


def test_unit_patches_are_pixels():
    img = np.arange(12, dtype=np.float64).reshape(2, 2, 3)
    patches = image_to_patches(img, 1).numpy()
    assert patches.shape == (4, 3)
    assert np.array_equal(patches, img.reshape(4, 3))


def test_patches_round_trip(rng):
    for _ in range(1000):
        gh, gw, p, c = (int(v) for v in rng.integers(1, 5, size=4))
        img = rng.integers(-100, 100, size=(gh * p, gw * p, c)).astype(np.float32)
        back = patches_to_image(image_to_patches(img, p), p, grid=(gh, gw)).numpy()
        assert np.array_equal(back, img)


def test_batched_patches_round_trip(rng):
    img = rng.integers(0, 9, size=(2, 8, 8, 3)).astype(np.float32)
    patches = image_to_patches(img, 4)
    assert patches.shape == (2, 4, 48)
    assert np.array_equal(patches_to_image(patches, 4).numpy(), img)


def test_patches_need_divisible_sizes():
    with pytest.raises(ShapeError):
        image_to_patches(np.zeros((10, 8, 3)), 4)
    with pytest.raises(ShapeError):
        patches_to_image(np.zeros((3, 16)), 2)


# configuration and size

@pytest.mark.parametrize('changes', [
    {},
    {'use_positional_embedding': False},
    {'conventional_residual': True, 'mlp_ratio': 2.0},
    {'num_classes': 3, 'encoder_depth': 0, 'decoder_depth': 1},
])
def test_parameter_count_matches_model(toy_config, changes):
    cfg = toy_config.replace(**changes)
    assert ViTVSModel(cfg).parameter_count() == parameter_count(cfg)


def test_default_parameter_count():
    assert parameter_count(ModelConfig()) == 43159430


@pytest.mark.parametrize('changes', [
    {'patch_size': 5},
    {'num_heads': 3},
    {'num_classes': 1},
    {'encoder_depth': -1},
])
def test_invalid_model_config(toy_config, changes):
    with pytest.raises(ConfigurationError):
        toy_config.replace(**changes)


def test_unknown_model_setting():
    with pytest.raises(ConfigurationError):
        ModelConfig.from_dict({'depth': 3})


@pytest.mark.parametrize('size,patch', [(32, 8), (64, 16), (256, 16)])
def test_forward_shapes(rng, size, patch):
    cfg = ModelConfig(image_size=size, patch_size=patch, embed_dim=8, num_heads=2,
                      encoder_depth=1, decoder_depth=1)
    model = ViTVSModel(cfg)
    assert model.embed(rng.random((1, size, size, 3))).shape == (1, cfg.num_patches, 8)
    assert model(rng.random((1, size, size, 3))).shape == (1, size, size, 2)
    assert model(rng.random((size, size, 3))).shape == (size, size, 2)


def test_wrong_image_size_is_rejected(toy_config, rng):
    model = ViTVSModel(toy_config)
    with pytest.raises(DimensionMismatch):
        model(rng.random((1, 64, 64, 3)))
    with pytest.raises(DimensionMismatch):
        model(rng.random((1, 32, 32, 1)))


def test_embedding_of_zero_weights_is_zero(toy_config, rng):
    model = ViTVSModel(toy_config).eval()
    for param in model.patch_embed.parameters() + [model.pos_embedding]:
        param.data = np.zeros_like(param.data)
    assert not np.any(model.embed(rng.random((2, 32, 32, 3))).numpy())


# blocks

def test_zeroed_blocks_are_identity(toy_config, rng):
    model = ViTVSModel(toy_config)
    zero_blocks(model)
    tokens = Tensor(rng.standard_normal((2, toy_config.num_patches, toy_config.embed_dim)))
    assert np.array_equal(model.encode(tokens).numpy(), tokens.numpy())
    assert np.array_equal(model.decode(tokens).numpy(), tokens.numpy())


def test_single_token_attention(float64, rng):
    attn = MultiheadAttention(4, 2, rng)
    x = Tensor(rng.standard_normal((1, 4)))
    weights = attn.attention_weights(x).numpy()
    assert weights.shape == (2, 1, 1)
    assert np.all(weights == 1.0)
    expected = x.numpy() @ attn.w_v.numpy() @ attn.proj.weight.numpy() + attn.proj.bias.numpy()
    np.testing.assert_allclose(attn(x).numpy(), expected, rtol=1e-12)


def test_attention_matches_hand_computation(float64, rng):
    attn = MultiheadAttention(4, 1, rng)
    attn.proj.bias.data = rng.standard_normal(4)
    x = rng.standard_normal((3, 4))
    q, k, v = x @ attn.w_q.numpy(), x @ attn.w_k.numpy(), x @ attn.w_v.numpy()
    scores = q @ k.T / 2.0
    weights = np.exp(scores - scores.max(axis=1, keepdims=True))
    weights /= weights.sum(axis=1, keepdims=True)
    expected = weights @ v @ attn.proj.weight.numpy() + attn.proj.bias.numpy()
    np.testing.assert_allclose(attn(Tensor(x)).numpy(), expected, rtol=1e-10, atol=1e-12)


def test_identical_tokens_give_identical_outputs(float64, rng):
    attn = MultiheadAttention(8, 2, rng)
    x = np.tile(rng.standard_normal((1, 8)), (5, 1))
    out = attn(Tensor(x)).numpy()
    np.testing.assert_allclose(out, np.tile(out[:1], (5, 1)), rtol=1e-12)


def _ln(x, norm):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mu) / np.sqrt(var + 1e-5) * norm.gamma.numpy() + norm.beta.numpy()


def _mha(x, attn):
    h, d = attn.num_heads, attn.head_dim
    n = x.shape[0]
    q = (x @ attn.w_q.numpy()).reshape(n, h, d).transpose(1, 0, 2)
    k = (x @ attn.w_k.numpy()).reshape(n, h, d).transpose(1, 0, 2)
    v = (x @ attn.w_v.numpy()).reshape(n, h, d).transpose(1, 0, 2)
    scores = q @ k.transpose(0, 2, 1) / np.sqrt(d)
    weights = np.exp(scores - scores.max(axis=-1, keepdims=True))
    weights /= weights.sum(axis=-1, keepdims=True)
    merged = (weights @ v).transpose(1, 0, 2).reshape(n, h * d)
    return merged @ attn.proj.weight.numpy() + attn.proj.bias.numpy()


def _mlp(x, mlp):
    hidden = x @ mlp.fc1.weight.numpy() + mlp.fc1.bias.numpy()
    hidden = hidden * 0.5 * (1.0 + special.erf(hidden / np.sqrt(2.0)))
    return hidden @ mlp.fc2.weight.numpy() + mlp.fc2.bias.numpy()


def _randomize(block, rng):
    for _, param in block.named_parameters():
        param.data = rng.standard_normal(param.shape) * 0.3


@pytest.mark.parametrize('conventional', [False, True])
def test_encoder_block_composition(float64, rng, conventional):
    block = EncoderBlock(8, 2, 16, rng, conventional_residual=conventional)
    _randomize(block, rng)
    x = rng.standard_normal((6, 8))
    attended = _mha(_ln(x, block.norm1), block.attn)
    if conventional:
        hidden = x + attended
        expected = hidden + _mlp(_ln(hidden, block.norm2), block.mlp)
    else:
        expected = x + _mlp(_ln(attended, block.norm2), block.mlp)
    np.testing.assert_allclose(block(Tensor(x)).numpy(), expected, rtol=1e-9, atol=1e-10)


def test_decoder_block_normalizes_first(float64, rng):
    block = DecoderBlock(8, 2, 16, rng)
    _randomize(block, rng)
    x = rng.standard_normal((6, 8))
    attended = _mha(_ln(_ln(x, block.norm0), block.norm1), block.attn)
    expected = x + _mlp(_ln(attended, block.norm2), block.mlp)
    np.testing.assert_allclose(block(Tensor(x)).numpy(), expected, rtol=1e-9, atol=1e-10)


def test_blocks_are_permutation_equivariant(float64, toy_config, rng):
    model = ViTVSModel(toy_config).eval()
    img = rng.random((32, 32, 3))
    patches = image_to_patches(model.norm(Tensor(img[None])), toy_config.patch_size).numpy()[0]
    pos = model.pos_embedding.numpy()
    perm = rng.permutation(toy_config.num_patches)

    def run(order):
        with no_grad():
            tokens = model.patch_embed(Tensor(patches[order])) + Tensor(pos[order])
            return model.head(model.decode(model.encode(tokens))).numpy()

    identity = np.arange(toy_config.num_patches)
    np.testing.assert_allclose(run(perm), run(identity)[perm], rtol=1e-10, atol=1e-12)


# output projection and prediction

def test_output_projection_places_patches(toy_config):
    model = ViTVSModel(toy_config)
    weight = np.zeros((16, 128))
    weight[0] = 1.0
    set_head(model, weight=weight)
    tokens = np.zeros((toy_config.num_patches, 16))
    tokens[5, 0] = 1.0
    logits = model.output_projection(tokens).numpy()
    assert logits.shape == (32, 32, 2)
    region = np.zeros((32, 32, 2), dtype=bool)
    region[8:16, 8:16] = True
    assert np.all(logits[region] == 1.0)
    assert not np.any(logits[~region])


def test_zero_head_gives_uniform_probabilities(toy_config, rng):
    model = ViTVSModel(toy_config).eval()
    set_head(model)
    logits = model(rng.random((32, 32, 3))).numpy()
    assert not np.any(logits)
    mask = model.predict_mask(rng.random((32, 32, 3)))
    assert isinstance(mask, Mask)
    assert not np.any(mask.labels)


def test_class_one_bias_keeps_everything(toy_config, rng):
    model = ViTVSModel(toy_config).eval()
    bias = np.zeros((8, 8, 2))
    bias[..., 1] = 1.0
    set_head(model, bias=bias.reshape(-1))
    masks = model.predict_mask(rng.random((3, 32, 32, 3)))
    assert len(masks) == 3
    assert all(np.all(m.labels == 1) for m in masks)


def test_prediction_ignores_per_pixel_shifts(float64, toy_config, rng):
    model = ViTVSModel(toy_config).eval()
    img = rng.random((32, 32, 3))
    before = model.predict_mask(img).labels
    shifted = model.head.bias.numpy().reshape(8, 8, 2) + rng.standard_normal((8, 8, 1))
    model.head.bias.data = shifted.reshape(-1)
    assert np.array_equal(model.predict_mask(img).labels, before)


def test_same_seed_same_model(toy_config, rng):
    img = rng.random((2, 32, 32, 3))
    a = ViTVSModel(toy_config, seed=3).eval()
    b = ViTVSModel(toy_config, seed=3).eval()
    with no_grad():
        assert np.array_equal(a(img).numpy(), b(img).numpy())
        assert np.array_equal(a(img).numpy(), a(img).numpy())
    c = ViTVSModel(toy_config, seed=4)
    assert not np.array_equal(a.head.weight.numpy(), c.head.weight.numpy())


def test_end_to_end_gradients(float64, toy_config, rng):
    model = ViTVSModel(toy_config, seed=1)
    images = rng.random((2, 32, 32, 3))
    masks = [Mask((rng.random((32, 32)) < 0.4).astype(np.uint8)) for _ in range(2)]
    worst = check_gradients(lambda: nll_loss(model(images), masks), model.parameters(),
                            samples=20, rng=rng)
    assert worst < 1e-2


# state and checkpoints

def test_checkpoint_round_trip(tmp_path, toy_config, rng):
    model = ViTVSModel(toy_config.replace(conventional_residual=True), seed=5)
    model(rng.random((4, 32, 32, 3)))  # moves the batch-norm statistics
    model.eval()
    path = str(tmp_path / 'm.ckpt')
    save_checkpoint(path, model, extra={'optimizer.t': np.array([3])}, meta={'epoch': 1})

    loaded, extra, meta = load_checkpoint(path)
    assert loaded.config == model.config
    assert list(extra) == ['optimizer.t']
    assert meta == {'epoch': 1}
    for (name, a), (_, b) in zip(model.state_dict().items(), loaded.state_dict().items()):
        assert np.array_equal(a, b), name
    img = rng.random((2, 32, 32, 3))
    with no_grad():
        assert np.array_equal(model.eval()(img).numpy(), loaded.eval()(img).numpy())


def test_load_state_dict_checks_content(toy_config):
    model = ViTVSModel(toy_config)
    state = model.state_dict()
    del state['head.bias']
    with pytest.raises(CheckpointError):
        ViTVSModel(toy_config).load_state_dict(state)
    with pytest.raises(DimensionMismatch):
        ViTVSModel(toy_config.replace(embed_dim=8)).load_state_dict(model.state_dict())
