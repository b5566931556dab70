"""
Module that reads and writes MMCK1 checkpoint files
Layout:
  8 bytes   magic b"MMCK1\\0\\0\\0"
  8 bytes   little-endian uint64 length of the metadata
  metadata  UTF-8 JSON with sorted keys, tensor names, shapes and offsets
  blob      little-endian float64 values, offsets count floats
"""
import json
import struct
import logging
import numpy as np
from core.kernel.matrix import Matrix, Precision
from core.model.checkpoint import Checkpoint
from core.utils.errors import MagicMismatchError, TruncatedBlobError, FormatError
from core.utils.report_writer import write_bytes


CHECKPOINT_MAGIC = b'MMCK1\0\0\0'
LENGTH_FORMAT = '<Q'
BLOB_DTYPE = np.dtype('<f8')
AVERAGE_IMAGE = '__average_image__'

logger = logging.getLogger()


def checkpoint_to_bytes(checkpoint):
    """
    Serialize a checkpoint, equal checkpoints give equal bytes
    """
    metadata = checkpoint.get_json()
    params = metadata.pop('params')
    average_image = metadata.pop('average_image')
    tensors = [(name, np.asarray(params[name], dtype=BLOB_DTYPE)) for name in sorted(params)]
    if average_image is not None:
        metadata['average_image_precision'] = average_image.precision.value
        tensors.append((AVERAGE_IMAGE, np.asarray(average_image.data, dtype=BLOB_DTYPE)))

    offset = 0
    entries = []
    for name, array in tensors:
        entries.append({'name': name, 'shape': list(array.shape), 'offset': offset})
        offset += array.size

    metadata['tensors'] = entries
    metadata['format'] = 'MMCK1'
    meta_bytes = json.dumps(metadata, sort_keys=True, separators=(',', ':')).encode('utf-8')
    blob = b''.join(array.tobytes() for _, array in tensors)
    return CHECKPOINT_MAGIC + struct.pack(LENGTH_FORMAT, len(meta_bytes)) + meta_bytes + blob


def tensor_entry(entry, source):
    """
    Name, shape and offset of one tensor of the metadata
    """
    if not isinstance(entry, dict) or not all(key in entry for key in ('name', 'shape', 'offset')):
        raise FormatError(f'{source} tensor entry {entry!r} needs name, shape and offset')

    shape = entry['shape']
    start = entry['offset']
    valid_shape = isinstance(shape, list) and all(isinstance(size, int) and size >= 0
                                                  for size in shape)
    if not valid_shape or not isinstance(start, int) or start < 0:
        raise FormatError(f'{source} tensor {entry["name"]!r} has invalid shape '
                          f'{shape!r} or offset {start!r}')

    return entry['name'], tuple(shape), start


def checkpoint_from_bytes(data, source='checkpoint'):
    """
    Deserialize a checkpoint
    """
    header_size = len(CHECKPOINT_MAGIC) + struct.calcsize(LENGTH_FORMAT)
    if not data or not CHECKPOINT_MAGIC.startswith(data[:len(CHECKPOINT_MAGIC)]):
        raise MagicMismatchError(f'{source} is not a MMCK1 checkpoint')

    if len(data) < header_size:
        raise TruncatedBlobError(f'{source} is shorter than the checkpoint header')

    (meta_length,) = struct.unpack(LENGTH_FORMAT, data[len(CHECKPOINT_MAGIC):header_size])
    meta_end = header_size + meta_length
    if meta_end > len(data):
        raise TruncatedBlobError(f'{source} metadata needs {meta_length} bytes, '
                                 f'only {len(data) - header_size} available')

    try:
        metadata = json.loads(data[header_size:meta_end].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as ex:
        raise FormatError(f'{source} metadata is not valid JSON') from ex

    if not isinstance(metadata, dict):
        raise FormatError(f'{source} metadata is not a JSON object')

    blob_bytes = data[meta_end:]
    if len(blob_bytes) % BLOB_DTYPE.itemsize:
        raise TruncatedBlobError(f'{source} parameter blob is not a whole number of floats')

    blob = np.frombuffer(blob_bytes, dtype=BLOB_DTYPE)
    metadata.pop('format', None)
    entries = metadata.pop('tensors', [])
    if not isinstance(entries, list):
        raise FormatError(f'{source} tensors must be a list')

    image_precision = metadata.pop('average_image_precision', Precision.SINGLE.value)
    params = {}
    average_image = None
    for entry in entries:
        name, shape, start = tensor_entry(entry, source)
        size = int(np.prod(shape))
        if start + size > blob.size:
            raise TruncatedBlobError(f'{source} tensor {name} ends at float {start + size}, '
                                     f'blob has {blob.size} floats')

        array = blob[start:start + size].reshape(shape).astype(np.float64)
        if name == AVERAGE_IMAGE:
            average_image = Matrix(array, image_precision, name=f'{source} average image')
        else:
            params[name] = array

    metadata['params'] = params
    metadata['average_image'] = average_image
    return Checkpoint(metadata)


def write_checkpoint(path, checkpoint):
    """
    Write checkpoint file atomically
    """
    return write_bytes(path, checkpoint_to_bytes(checkpoint))


def read_checkpoint(path):
    """
    Read checkpoint file
    """
    with open(path, 'rb') as checkpoint_file:
        data = checkpoint_file.read()

    checkpoint = checkpoint_from_bytes(data, source=path)
    logger.info('Loaded %s checkpoint from %s, best epoch %s',
                checkpoint.get('kind'),
                path,
                checkpoint.get('best_epoch'))
    return checkpoint
