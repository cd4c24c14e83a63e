"""Portable binary checkpoint files.

Layout (all integers little-endian)::

    offset  size  content
    0       8     magic  b'VITVSCK1'
    8       4     uint32 format version (1)
    12      8     uint64 header length H in bytes
    20      H     UTF-8 JSON header, keys sorted:
                    {"tensors": [{"name": str, "shape": [int, ...],
                                  "dtype": "<f4" | "<f8" | "<i8",
                                  "offset": int, "nbytes": int}, ...],
                     "config": str,   # ``key = value`` text block
                     "meta": {...}}
    20+H    ...   raw element data, C order, each tensor starting at
                  ``offset`` bytes from the start of this section

Any implementation able to read JSON and little-endian arrays can load
these files.
"""

import collections
import logging
import struct

import numpy as np

from vitvs.common.exceptions import CheckpointError
from vitvs.common.util import deserialize, serialize

logger = logging.getLogger(__name__)

MAGIC = b'VITVSCK1'
FORMAT_VERSION = 1
_PREAMBLE = struct.Struct('<8sIQ')
_DTYPES = {'<f4': np.dtype('<f4'), '<f8': np.dtype('<f8'), '<i8': np.dtype('<i8')}


def _storage_dtype(array):
    if np.issubdtype(array.dtype, np.integer):
        return '<i8'
    if array.dtype == np.float32:
        return '<f4'
    return '<f8'


def save_tensors(path, arrays, config_text='', meta=None):
    """Write ``arrays`` (an ordered ``{name: numpy.ndarray}``) to ``path``."""
    manifest = []
    chunks = []
    offset = 0
    for name, array in arrays.items():
        array = np.asarray(array)
        dtype = _storage_dtype(array)
        raw = np.ascontiguousarray(array, dtype=_DTYPES[dtype]).tobytes()
        manifest.append({
            'name': name,
            'shape': list(array.shape),
            'dtype': dtype,
            'offset': offset,
            'nbytes': len(raw),
        })
        chunks.append(raw)
        offset += len(raw)

    header = serialize({
        'tensors': manifest,
        'config': config_text,
        'meta': meta or {},
    }).encode('utf-8')
    try:
        with open(path, 'wb') as f:
            f.write(_PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(header)))
            f.write(header)
            for raw in chunks:
                f.write(raw)
    except OSError as exc:
        raise CheckpointError('Cannot write checkpoint `{}`: {}'.format(path, exc)) from exc
    logger.debug('wrote %d tensors (%d bytes of data) to %s', len(manifest), offset, path)


def load_tensors(path):
    """Read a checkpoint written by :func:`save_tensors`.

    Returns:
        tuple: ``(arrays, config_text, meta)``, ``arrays`` ordered as saved.

    Raises:
        CheckpointError: if the file is missing, truncated or not a checkpoint.
    """
    try:
        with open(path, 'rb') as f:
            blob = f.read()
    except OSError as exc:
        raise CheckpointError('Cannot read checkpoint `{}`: {}'.format(path, exc)) from exc

    if len(blob) < _PREAMBLE.size:
        raise CheckpointError('`{}` is too short to be a checkpoint'.format(path))
    magic, version, header_len = _PREAMBLE.unpack_from(blob)
    if magic != MAGIC:
        raise CheckpointError('`{}` is not a checkpoint (bad magic {!r})'.format(path, magic))
    if version != FORMAT_VERSION:
        raise CheckpointError('`{}` has unsupported format version {}'.format(path, version))
    start = _PREAMBLE.size + header_len
    try:
        header = deserialize(blob[_PREAMBLE.size:start].decode('utf-8'))
    except ValueError as exc:
        raise CheckpointError('`{}` has a corrupt header: {}'.format(path, exc)) from exc

    arrays = collections.OrderedDict()
    for entry in header['tensors']:
        dtype = _DTYPES.get(entry['dtype'])
        if dtype is None:
            raise CheckpointError('`{}`: unknown dtype {} for {}'.format(
                path, entry['dtype'], entry['name']))
        begin = start + entry['offset']
        end = begin + entry['nbytes']
        if end > len(blob):
            raise CheckpointError('`{}` is truncated inside {}'.format(path, entry['name']))
        data = np.frombuffer(blob[begin:end], dtype=dtype)
        arrays[entry['name']] = data.reshape(entry['shape']).astype(dtype.newbyteorder('='))
    return arrays, header.get('config', ''), header.get('meta', {})
