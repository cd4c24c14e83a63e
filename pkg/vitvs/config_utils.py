"""Utils for reading and setting configuration settings.

The value of each ViTVS configuration setting is determined according to
the following rules:

* If it's set by a command-line flag, then use that value
* Otherwise, if it's set in a key-value config file, then use that value
* Otherwise, use the default value (contained in ``vitvs.__init__``)

Environment variables are deliberately not consulted: a run is fully
described by its flags and files.

Config files are plain text, one ``key = value`` per line::

    # comments and blank lines are ignored
    model.patch_size = 8
    train.learning_rate = 5e-4
    synth.noise_kinds = white, pink

A file read into a single section (``--model-config``, ``--train-config``)
may omit the section prefix.
"""

import copy
import logging
import collections.abc

from vitvs.common import exceptions

import vitvs

logger = logging.getLogger(__name__)

LIST_SEP = ','
_TRUE = ('1', 'true', 'yes', 'on')
_FALSE = ('0', 'false', 'no', 'off')


def map_leafs(func, mapping):
    """Map a function to the leafs of a mapping."""

    def _inner(mapping, path=None):
        if path is None:
            path = []

        for key, val in mapping.items():
            if isinstance(val, collections.abc.Mapping):
                _inner(val, path + [key])
            else:
                mapping[key] = func(val, path=path + [key])

        return mapping

    return _inner(copy.deepcopy(mapping))


# Thanks Alex <3
# http://stackoverflow.com/a/3233356/597097
def update(d, u):
    """Recursively update a mapping (i.e. a dict, list, set, or tuple).

    Conceptually, d and u are two sets trees (with nodes and edges).
    This function goes through all the nodes of u. For each node in u,
    if d doesn't have that node yet, then this function adds the node from u,
    otherwise this function overwrites the node already in d with u's node.

    Args:
        d (mapping): The mapping to overwrite and add to.
        u (mapping): The mapping to read for changes.

    Returns:
        mapping: An updated version of d (updated by u).
    """
    for k, v in u.items():
        if isinstance(v, collections.abc.Mapping):
            r = update(d.get(k, {}), v)
            d[k] = r
        else:
            d[k] = u[k]
    return d


def parse_key_values(text, source='<string>'):
    """Parse ``key = value`` lines into a flat ``{key: str}`` dict.

    Raises:
        ConfigurationError: on a line without ``=`` or a repeated key.
    """
    values = collections.OrderedDict()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise exceptions.ConfigurationError(
                '{}:{}: expected `key = value`, got `{}`'.format(source, lineno, raw.strip()))
        key, value = (part.strip() for part in line.split('=', 1))
        if not key:
            raise exceptions.ConfigurationError('{}:{}: empty key'.format(source, lineno))
        if key in values:
            raise exceptions.ConfigurationError(
                '{}:{}: key `{}` given twice'.format(source, lineno, key))
        values[key] = value
    return values


def nest(flat, section=None, reference=None):
    """Turn dotted keys into a nested dict, checking them against ``reference``.

    Args:
        flat (dict): ``{'model.patch_size': '8'}`` style mapping.
        section (str): when given, keys without a dot are read into it.
        reference (dict): the tree of known keys, ``vitvs.config`` by default.

    Raises:
        ConfigurationError: if a key doesn't name a known setting.
    """
    if reference is None:
        reference = vitvs.config
    nested = {}
    for key, value in flat.items():
        path = key.split('.')
        if section is not None and len(path) == 1:
            path = [section] + path
        node = reference
        for elem in path:
            if not isinstance(node, collections.abc.Mapping) or elem not in node:
                raise exceptions.ConfigurationError('Unknown configuration key `{}`'.format(key))
            node = node[elem]
        if isinstance(node, collections.abc.Mapping):
            raise exceptions.ConfigurationError('`{}` names a section, not a setting'.format(key))
        cursor = nested
        for elem in path[:-1]:
            cursor = cursor.setdefault(elem, {})
        cursor[path[-1]] = value
    return nested


def file_config(filename, section=None):
    """Returns the config values found in a key-value configuration file.

    Args:
        filename (str): the file with the configuration values.
        section (str): read section-less keys into this section.

    Returns:
        dict: The nested config values in the specified config file.

    Raises:
        DataIOError: if the file can't be read.
        ConfigurationError: if its content is malformed.
    """
    logger.debug('file_config() will try to open `%s`', filename)
    try:
        with open(filename) as f:
            text = f.read()
    except OSError as exc:
        raise exceptions.DataIOError('Cannot read config file `{}`: {}'.format(filename, exc)) from exc
    config = nest(parse_key_values(text, source=filename), section=section)
    logger.info('Configuration loaded from `%s`', filename)
    return config


def update_types(config, reference, list_sep=LIST_SEP):
    """Return a new configuration where all the values types
    are aligned with the ones in the default configuration"""

    def _coerce(current, value):
        if not isinstance(value, str):
            return value

        # bool('false') is True, so booleans get their own parser
        if isinstance(current, bool):
            lowered = value.strip().lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise exceptions.ConfigurationError('Expected a boolean, got `{}`'.format(value))

        if isinstance(current, list):
            return [item.strip() for item in value.split(list_sep) if item.strip()]

        if current is None:
            return value

        try:
            return type(current)(value)
        except (TypeError, ValueError) as exc:
            raise exceptions.ConfigurationError(
                'Cannot read `{}` as {}'.format(value, type(current).__name__)) from exc

    def _update_type(value, path):
        current = reference

        for elem in path:
            try:
                current = current[elem]
            except KeyError:
                return value

        return _coerce(current, value)

    return map_leafs(_update_type, config)


def set_config(config):
    """Set vitvs.config equal to the default config dict,
    then update that with whatever is in the provided config dict,
    and then set vitvs.config['CONFIGURED'] = True

    Args:
        config (dict): the config dict to read for changes
                       to the default config

    Note:
        Any previous changes made to ``vitvs.config`` will be lost.
    """
    # Deep copy the default config into vitvs.config
    vitvs.config = copy.deepcopy(vitvs._config)
    # Update the default config with whatever is in the passed config
    update(vitvs.config, update_types(config, vitvs.config))
    vitvs.config['CONFIGURED'] = True


def update_config(config):
    """Update vitvs.config with whatever is in the provided config dict,
    and then set vitvs.config['CONFIGURED'] = True

    Args:
        config (dict): the config dict to read for changes
                       to the default config
    """

    # Update the default config with whatever is in the passed config
    update(vitvs.config, update_types(config, vitvs.config))
    vitvs.config['CONFIGURED'] = True


def to_key_values(config, section=None):
    """Render a (section of a) config tree as ``key = value`` text."""
    if section is not None:
        config = {section: config[section]}
    lines = []

    def _emit(value, path):
        if isinstance(value, list):
            value = '{} '.format(LIST_SEP).join(str(v) for v in value)
        lines.append('{} = {}'.format('.'.join(path), value))
        return value

    map_leafs(_emit, {k: v for k, v in config.items() if k != 'CONFIGURED'})
    return '\n'.join(lines) + '\n'


def write_config(config, filename, section=None):
    """Write the provided configuration to a specific location.

    Args:
        config (dict): a dictionary with the configuration to write.
        filename (str): the name of the file that will store the configuration.
        section (str): only write this section.
    """
    try:
        with open(filename, 'w') as f:
            f.write(to_key_values(config, section=section))
    except OSError as exc:
        raise exceptions.DataIOError('Cannot write config file `{}`: {}'.format(filename, exc)) from exc


def autoconfigure(filename=None, config=None, force=False):
    """Load ``filename`` (if any) and ``config`` overrides on top of the
    defaults, unless the module has already been configured."""

    if not force and vitvs.config.get('CONFIGURED'):
        logger.debug('System already configured, skipping autoconfiguration')
        return

    newconfig = {}

    if filename:
        newconfig = update(newconfig, file_config(filename))

    if config:
        newconfig = update(newconfig, config)

    set_config(newconfig)  # sets vitvs.config
