"""
ViTVS: Vision Transformer Segmentation for Visual Bird Sound Denoising

Noisy recordings become spectrogram images, a vision-transformer
encoder/decoder marks the time-frequency bins that hold bird sound, and
the masked spectrogram is inverted back to audio.

"""
from setuptools import setup, find_packages

# get the version
version = {}
with open('vitvs/version.py') as fp:
    exec(fp.read(), version)

vitvs_config = {}
with open('vitvs/base_config.py') as fp:
    exec(fp.read(), vitvs_config)

base_vitvs_config = vitvs_config['vitvs_config']['app_config']
app_service_name = base_vitvs_config['service_name']
app_setup_name = base_vitvs_config['setup_name']


tests_require = [
    'coverage',
    'flake8',
    'pytest',
    'pytest-cov',
    'pytest-xdist',
]

dev_require = [
    'ipdb',
    'ipython',
]

install_requires = [
    'numpy>=1.20',
    'scipy>=1.6',
    'pypng>=0.0.20',
    'python-rapidjson>=0.9',
    'statsd>=3.2.1',
    'logstats~=0.2.1',
]

setup(
    name='{}'.format(app_setup_name),
    version=version['__version__'],
    description='{}: vision-transformer segmentation for bird sound denoising'.format(app_setup_name),
    long_description=__doc__,
    license='AGPLv3',
    zip_safe=False,

    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Multimedia :: Sound/Audio :: Analysis',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
        'Natural Language :: English',
        'License :: OSI Approved :: GNU Affero General Public License v3',
        'Programming Language :: Python :: 3 :: Only',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Operating System :: MacOS :: MacOS X',
        'Operating System :: POSIX :: Linux',
    ],

    packages=find_packages(exclude=['tests*']),

    entry_points={
        'console_scripts': [
            '{}=vitvs.commands.vitvs:main'.format(app_service_name),
        ],
    },
    python_requires='>=3.8',
    install_requires=install_requires,
    tests_require=tests_require,
    extras_require={
        'test': tests_require,
        'dev': dev_require + tests_require,
    },
)
