"""
Module that reads and writes MMFV1 dataset directories
  header.json    - format, widths, granularity and class catalog
  manifest.jsonl - one record per line with row counts and offsets
  features.bin   - little-endian float32 values, offsets count floats, not bytes
"""
import os
import json
import logging
import numpy as np
from core.kernel.matrix import Matrix, Precision
from core.model.dataset import Dataset, DatasetHeader
from core.model.feature_record import FeatureRecord
from core.utils.errors import (FormatError,
                               MagicMismatchError,
                               TruncatedBlobError,
                               WidthMismatchError,
                               UnknownLabelError,
                               OutputExistsError)


FORMAT_MAGIC = 'MMFV1'
HEADER_FILE = 'header.json'
MANIFEST_FILE = 'manifest.jsonl'
FEATURES_FILE = 'features.bin'
FLOAT_DTYPE = np.dtype('<f4')

logger = logging.getLogger()


def prepare_output_dir(path, force=False):
    """
    Create output directory, refuse to use a non-empty one unless forced
    """
    if os.path.isdir(path) and os.listdir(path) and not force:
        raise OutputExistsError(f'Output directory {path} is not empty, use --force')

    os.makedirs(path, exist_ok=True)


def write_dataset(dataset, path, force=False):
    """
    Write a dataset to a directory in MMFV1 format
    Features are stored as float32
    """
    prepare_output_dir(path, force)
    header = dataset.header
    classes = header.get('classes')
    header_json = {'format': FORMAT_MAGIC,
                   'd_t': header.get('d_t'),
                   'd_v': header.get('d_v'),
                   'granularity': header.get('granularity'),
                   'classes': classes}
    offset = 0
    lines = []
    chunks = []
    for record in dataset.records():
        text = np.asarray(record.get('text_feats').data, dtype=FLOAT_DTYPE)
        entry = {'id': record.get_id(),
                 'label': classes[record.get('label')],
                 'split': record.get('split'),
                 'has_image': record.get('has_image'),
                 'text_rows': text.shape[0],
                 'text_offset': offset,
                 'image_rows': None,
                 'image_offset': None}
        chunks.append(text.reshape(-1))
        offset += text.size
        image_feats = record.get('image_feats')
        if record.get('has_image') and image_feats is not None:
            image = np.asarray(image_feats.data, dtype=FLOAT_DTYPE)
            entry['image_rows'] = image.shape[0]
            entry['image_offset'] = offset
            chunks.append(image.reshape(-1))
            offset += image.size

        if record.get('extras'):
            entry['extras'] = record.get('extras')

        lines.append(json.dumps(entry))

    with open(os.path.join(path, HEADER_FILE), 'w') as header_file:
        json.dump(header_json, header_file, indent=2)

    with open(os.path.join(path, MANIFEST_FILE), 'w') as manifest_file:
        manifest_file.write(''.join(f'{line}\n' for line in lines))

    blob = np.concatenate(chunks) if chunks else np.zeros(0, dtype=FLOAT_DTYPE)
    with open(os.path.join(path, FEATURES_FILE), 'wb') as features_file:
        features_file.write(blob.astype(FLOAT_DTYPE).tobytes())

    logger.info('Wrote %s records (%s floats) to %s', len(lines), offset, path)


def read_header(path):
    """
    Read and validate header.json
    """
    header_path = os.path.join(path, HEADER_FILE)
    if not os.path.isfile(header_path):
        raise FormatError(f'Dataset directory {path} has no {HEADER_FILE}')

    with open(header_path) as header_file:
        try:
            header_json = json.load(header_file)
        except json.JSONDecodeError as ex:
            raise FormatError(f'{header_path} is not valid JSON: {ex}') from ex

    if not isinstance(header_json, dict):
        raise FormatError(f'{header_path} is not a JSON object')

    magic = header_json.get('format')
    if magic != FORMAT_MAGIC:
        raise MagicMismatchError(f'{header_path} declares format {magic!r}, '
                                 f'expected {FORMAT_MAGIC!r}')

    return DatasetHeader(header_json)


def read_blob(path):
    """
    Read features.bin as a flat float32 array
    """
    features_path = os.path.join(path, FEATURES_FILE)
    if not os.path.isfile(features_path):
        return np.zeros(0, dtype=FLOAT_DTYPE)

    size = os.path.getsize(features_path)
    if size % FLOAT_DTYPE.itemsize:
        raise TruncatedBlobError(f'{features_path} has {size} bytes, '
                                 f'not a whole number of float32 values')

    return np.fromfile(features_path, dtype=FLOAT_DTYPE)


def _matrix(blob, entry, prefix, width, granularity, record_id):
    rows = entry.get(f'{prefix}_rows')
    offset = entry.get(f'{prefix}_offset')
    if not isinstance(rows, int) or not isinstance(offset, int) or rows < 1 or offset < 0:
        raise FormatError(f'Record {record_id}: invalid {prefix}_rows/{prefix}_offset '
                          f'{rows!r}/{offset!r}')

    cols = entry.get(f'{prefix}_cols', width)
    if cols != width:
        raise WidthMismatchError(f'Record {record_id}: {prefix} width {cols} does not match '
                                 f'header width {width}')

    if granularity == 'pooled' and rows != 1:
        raise WidthMismatchError(f'Record {record_id}: pooled dataset has {rows} {prefix} rows')

    end = offset + rows * width
    if end > blob.size:
        raise TruncatedBlobError(f'Record {record_id}: {prefix} features end at float {end} '
                                 f'but {FEATURES_FILE} has {blob.size} floats')

    values = blob[offset:end].reshape(rows, width)
    return Matrix(values, Precision.SINGLE, name=f'Record {record_id} {prefix} features')


def read_dataset(path):
    """
    Read a MMFV1 dataset directory into a Dataset
    """
    header = read_header(path)
    manifest_path = os.path.join(path, MANIFEST_FILE)
    if not os.path.isfile(manifest_path):
        raise FormatError(f'Dataset directory {path} has no {MANIFEST_FILE}')

    blob = read_blob(path)
    d_t = header.get('d_t')
    d_v = header.get('d_v')
    granularity = header.get('granularity')
    records = []
    with open(manifest_path) as manifest_file:
        for line_number, line in enumerate(manifest_file, start=1):
            if not line.strip():
                continue

            try:
                entry = json.loads(line)
            except json.JSONDecodeError as ex:
                raise FormatError(f'{MANIFEST_FILE} line {line_number} is not valid JSON') from ex

            if not isinstance(entry, dict):
                raise FormatError(f'{MANIFEST_FILE} line {line_number} is not a JSON object')

            record_id = entry.get('id', f'<line {line_number}>')
            label = header.label_index(entry.get('label'))
            if label is None:
                raise UnknownLabelError(f'Record {record_id}: label {entry.get("label")!r} '
                                        f'is not in the class catalog')

            has_image = entry.get('has_image')
            if not isinstance(has_image, bool):
                raise FormatError(f'Record {record_id}: has_image must be true or false')

            text_feats = _matrix(blob, entry, 'text', d_t, granularity, record_id)
            image_feats = None
            if has_image:
                image_feats = _matrix(blob, entry, 'image', d_v, granularity, record_id)

            records.append(FeatureRecord({'id': record_id,
                                          'label': label,
                                          'split': entry.get('split'),
                                          'has_image': has_image,
                                          'text_feats': text_feats,
                                          'image_feats': image_feats,
                                          'extras': entry.get('extras', {})}))

    dataset = Dataset(header, records)
    logger.info('Loaded %s records from %s', len(dataset), path)
    return dataset
