import copy

import pytest

import vitvs
from vitvs import config_utils
from vitvs.common.exceptions import ConfigurationError, DataIOError


def test_parse_key_values():
    text = '# comment\n\nmodel.patch_size = 8   # trailing\ntrain.learning_rate=5e-4\n'
    assert dict(config_utils.parse_key_values(text)) == {
        'model.patch_size': '8',
        'train.learning_rate': '5e-4',
    }


@pytest.mark.parametrize('text', ['just words\n', '= 3\n', 'a.b = 1\na.b = 2\n'])
def test_parse_key_values_errors(text):
    with pytest.raises(ConfigurationError):
        config_utils.parse_key_values(text)


def test_nest_checks_keys():
    assert config_utils.nest({'model.patch_size': '8'}) == {'model': {'patch_size': '8'}}
    assert config_utils.nest({'patch_size': '8'}, section='model') == {'model': {'patch_size': '8'}}
    with pytest.raises(ConfigurationError):
        config_utils.nest({'model.depth': '3'})
    with pytest.raises(ConfigurationError):
        config_utils.nest({'patch_size': '8'})
    with pytest.raises(ConfigurationError):
        config_utils.nest({'model': '8'})


def test_update_types():
    raw = {
        'model': {'patch_size': '8', 'mlp_ratio': '2', 'use_positional_embedding': 'no'},
        'synth': {'noise_kinds': 'white, pink'},
    }
    typed = config_utils.update_types(raw, vitvs.config)
    assert typed['model'] == {'patch_size': 8, 'mlp_ratio': 2.0, 'use_positional_embedding': False}
    assert typed['synth']['noise_kinds'] == ['white', 'pink']
    with pytest.raises(ConfigurationError):
        config_utils.update_types({'model': {'patch_size': 'eight'}}, vitvs.config)
    with pytest.raises(ConfigurationError):
        config_utils.update_types({'tensor': {'debug': 'maybe'}}, vitvs.config)


def test_map_leafs_returns_a_copy():
    original = {'a': {'b': 1}}
    mapped = config_utils.map_leafs(lambda v, path: v + 1, original)
    assert mapped == {'a': {'b': 2}}
    assert original == {'a': {'b': 1}}


def test_update_merges_recursively():
    d = {'a': {'x': 1, 'y': 2}}
    config_utils.update(d, {'a': {'y': 3}, 'b': 4})
    assert d == {'a': {'x': 1, 'y': 3}, 'b': 4}


def test_autoconfigure_from_file(tmp_path):
    path = tmp_path / 'vitvs.conf'
    path.write_text('train.epochs = 3\nstft.hop = 128\n')
    config_utils.autoconfigure(filename=str(path), config={'train': {'seed': 9}})
    assert vitvs.config['train']['epochs'] == 3
    assert vitvs.config['train']['seed'] == 9
    assert vitvs.config['stft']['hop'] == 128
    assert vitvs.config['CONFIGURED']

    config_utils.autoconfigure(config={'train': {'epochs': 5}})
    assert vitvs.config['train']['epochs'] == 3
    config_utils.autoconfigure(config={'train': {'epochs': 5}}, force=True)
    assert vitvs.config['train']['epochs'] == 5
    assert vitvs.config['stft']['hop'] == 256


def test_write_config_round_trip(tmp_path):
    path = str(tmp_path / 'out.conf')
    config_utils.write_config(vitvs.config, path)
    reread = config_utils.update_types(config_utils.file_config(path), vitvs._config)
    expected = copy.deepcopy(vitvs._config)
    assert reread == expected


def test_file_config_errors(tmp_path):
    with pytest.raises(DataIOError):
        config_utils.file_config(str(tmp_path / 'missing.conf'))
    bad = tmp_path / 'bad.conf'
    bad.write_text('bogus.key = 1\n')
    with pytest.raises(ConfigurationError):
        config_utils.file_config(str(bad))
