import copy
import os

from vitvs.base_config import vitvs_config

# vitvs reads `config` from here; `vitvs.config_utils` layers the key-value
# files given on the command line on top of these defaults.
config = {
    'app': {
        'setup_name': '{}'.format(vitvs_config['app_config']['setup_name']),  # ViTVS
        'service_name': '{}'.format(vitvs_config['app_config']['service_name']),  # vitvs
    },
    'stft': {
        'n_fft': 1024,
        'hop': 256,
        'window': 'hann',
    },
    'dsp': {
        'sdr_cap': 100.0,
        'image_scale': 'log1p',
    },
    'model': {
        'image_size': 256,
        'patch_size': 16,
        'embed_dim': 384,
        'num_heads': 6,
        'encoder_depth': 12,
        'decoder_depth': 12,
        'mlp_ratio': 4.0,
        'num_classes': 2,
        'use_positional_embedding': True,
        'conventional_residual': False,
    },
    'train': {
        'learning_rate': 5e-5,
        'weight_decay': 5e-4,
        'batch_size': 8,
        'epochs': 100,
        'seed': 0,
        'beta1': 0.9,
        'beta2': 0.999,
        'adam_eps': 1e-8,
    },
    'synth': {
        'train_samples': 128,
        'val_samples': 32,
        'test_samples': 32,
        'min_duration': 1.0,
        'max_duration': 3.0,
        'sample_rate': 16000,
        'min_chirps': 1,
        'max_chirps': 4,
        'min_freq': 1500.0,
        'max_freq': 7000.0,
        'noise_kinds': ['white', 'pink', 'wind_lowfreq', 'rain_impulsive'],
        'min_snr': 0.0,
        'max_snr': 15.0,
        'mask_threshold': 0.1,
    },
    'tensor': {
        'precision': 'float32',
        'debug': False,
    },
    'statsd': {
        'host': 'localhost',
        'port': 8125,
        'rate': 0.01,
    },
    'logger_config': {
        'debug_to_console': False,
        'debug_to_file': True,
        'log_dir': os.path.join(os.path.expanduser('~'),
                                vitvs_config['app_config']['log_dir_name']),
    },
}

# We need to maintain a backup copy of the original config dict in case
# a command reconfigures the run. Check ``vitvs.config_utils`` for more info.
_config = copy.deepcopy(config)

from vitvs.version import __version__  # noqa
