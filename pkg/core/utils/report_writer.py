"""
Module with helpers that write JSON reports atomically
Files are first written next to the target and then renamed over it
"""
import os
import json
import hashlib
import logging
import tempfile
from core.utils.errors import FormatError


logger = logging.getLogger()


def percent(value):
    """
    Fraction as percentage rounded to 2 decimal places, None stays None
    """
    if value is None:
        return None

    return round(100.0 * float(value), 2)


def _atomic_write(path, text, mode='w'):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, tmp_path = tempfile.mkstemp(prefix='.tmp-', dir=directory)
    try:
        with os.fdopen(handle, mode) as tmp_file:
            tmp_file.write(text)

        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)

        raise


def write_json(path, document, schema=None):
    """
    Write a dictionary as pretty JSON, add "schema" key if given
    """
    if schema:
        document = {'schema': schema, **document}

    _atomic_write(path, json.dumps(document, indent=2, sort_keys=False) + '\n')
    logger.info('Wrote %s', path)
    return path


def write_jsonl(path, rows):
    """
    Write an iterable of dictionaries as JSON lines
    """
    text = ''.join(json.dumps(row) + '\n' for row in rows)
    _atomic_write(path, text)
    logger.info('Wrote %s', path)
    return path


def write_bytes(path, data):
    """
    Write binary data atomically
    """
    _atomic_write(path, data, mode='wb')
    logger.info('Wrote %s (%s bytes)', path, len(data))
    return path


def read_json(path):
    """
    Read a JSON document
    """
    with open(path) as json_file:
        return json.load(json_file)


def read_jsonl(path):
    """
    Read JSON lines, empty lines are skipped
    """
    rows = []
    with open(path) as jsonl_file:
        for line_number, line in enumerate(jsonl_file, start=1):
            if not line.strip():
                continue

            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as ex:
                raise FormatError(f'{path} line {line_number} is not valid JSON') from ex

    return rows


def file_sha256(path):
    """
    Hex SHA-256 of a file
    """
    digest = hashlib.sha256()
    with open(path, 'rb') as input_file:
        for chunk in iter(lambda: input_file.read(1 << 20), b''):
            digest.update(chunk)

    return digest.hexdigest()
