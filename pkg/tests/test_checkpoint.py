"""
Tests of MMCK1 checkpoint files
"""
import json
import struct
import numpy as np
import pytest
from core.controller.train_controller import TrainController
from core.utils.checkpoint_store import (CHECKPOINT_MAGIC,
                                         checkpoint_from_bytes,
                                         checkpoint_to_bytes,
                                         read_checkpoint,
                                         write_checkpoint)
from core.utils.errors import ConfigError, FormatError, MagicMismatchError, TruncatedBlobError
from conftest import FAST_TRAIN, model_config_for


@pytest.fixture
def checkpoint(dataset_controller, tiny_dataset):
    """
    Gate model trained for a few epochs on the tiny dataset
    """
    prepared = dataset_controller.prepare(tiny_dataset, 'all')
    return TrainController().train_model('mm-gate',
                                         prepared,
                                         FAST_TRAIN,
                                         model_config_for(prepared),
                                         'all')


def metadata_bytes(document):
    """
    Magic, length and JSON metadata without a blob
    """
    data = json.dumps(document).encode('utf-8')
    return CHECKPOINT_MAGIC + struct.pack('<Q', len(data)) + data


class TestCheckpointBytes:
    """
    Serialization and deserialization
    """

    def test_round_trip(self, checkpoint):
        data = checkpoint_to_bytes(checkpoint)
        assert data.startswith(CHECKPOINT_MAGIC)
        loaded = checkpoint_from_bytes(data)
        assert checkpoint_to_bytes(loaded) == data
        assert sorted(loaded.get_params()) == sorted(checkpoint.get_params())
        for name, value in checkpoint.get_params().items():
            np.testing.assert_array_equal(loaded.get_params()[name], value)

        assert loaded.get('average_image') == checkpoint.get('average_image')
        assert loaded.get('average_image').precision == checkpoint.get('average_image').precision
        assert loaded.get('history') == checkpoint.get('history')
        assert loaded.get_model_config() == checkpoint.get_model_config()

    def test_equal_checkpoints_give_equal_bytes(self, checkpoint):
        copy = checkpoint_from_bytes(checkpoint_to_bytes(checkpoint))
        assert checkpoint_to_bytes(copy) == checkpoint_to_bytes(checkpoint)

    def test_majority_checkpoint(self, dataset_controller, tiny_dataset):
        majority = TrainController().train_model('majority',
                                                 tiny_dataset,
                                                 FAST_TRAIN,
                                                 model_config_for(tiny_dataset))
        loaded = checkpoint_from_bytes(checkpoint_to_bytes(majority))
        assert loaded.is_majority()
        assert loaded.get_params() == {}
        assert loaded.get('average_image') is None
        assert loaded.get('majority_class') == majority.get('majority_class')

    def test_wrong_magic(self, checkpoint):
        data = checkpoint_to_bytes(checkpoint)
        with pytest.raises(MagicMismatchError):
            checkpoint_from_bytes(b'MMFV1\0\0\0' + data[8:])

        with pytest.raises(MagicMismatchError):
            checkpoint_from_bytes(b'')

    def test_truncated_header(self):
        with pytest.raises(TruncatedBlobError):
            checkpoint_from_bytes(CHECKPOINT_MAGIC + b'\x01\x00')

        with pytest.raises(TruncatedBlobError):
            checkpoint_from_bytes(CHECKPOINT_MAGIC[:4])

    def test_truncated_metadata(self, checkpoint):
        data = checkpoint_to_bytes(checkpoint)
        (length,) = struct.unpack('<Q', data[8:16])
        with pytest.raises(TruncatedBlobError, match='metadata'):
            checkpoint_from_bytes(data[:16 + length - 1])

    def test_truncated_blob(self, checkpoint):
        data = checkpoint_to_bytes(checkpoint)
        with pytest.raises(TruncatedBlobError, match='whole number'):
            checkpoint_from_bytes(data[:-3])

        with pytest.raises(TruncatedBlobError, match='ends at float'):
            checkpoint_from_bytes(data[:-8])

    def test_metadata_is_not_json(self):
        data = b'{not json'
        with pytest.raises(FormatError) as excinfo:
            checkpoint_from_bytes(CHECKPOINT_MAGIC + struct.pack('<Q', len(data)) + data)

        assert excinfo.type is FormatError

    @pytest.mark.parametrize('tensors', [[{'shape': [1], 'offset': 0}],
                                         [{'name': 'w', 'shape': 'wide', 'offset': 0}],
                                         [{'name': 'w', 'shape': [1], 'offset': -1}],
                                         [3],
                                         'w'])
    def test_invalid_tensor_entries(self, tensors):
        data = metadata_bytes({'kind': 'text', 'tensors': tensors})
        with pytest.raises(FormatError) as excinfo:
            checkpoint_from_bytes(data + struct.pack('<d', 1.0))

        assert excinfo.type is FormatError

    def test_metadata_must_be_an_object(self):
        with pytest.raises(FormatError, match='not a JSON object'):
            checkpoint_from_bytes(metadata_bytes([1, 2]))

    def test_metadata_is_validated(self):
        data = metadata_bytes({'kind': 'mm-gate', 'classes': ['only']})
        with pytest.raises(ConfigError, match='classes'):
            checkpoint_from_bytes(data)


class TestCheckpointFiles:
    """
    Checkpoint files on disk
    """

    def test_write_and_read(self, checkpoint, tmp_path):
        path = str(tmp_path / 'model.mmck')
        write_checkpoint(path, checkpoint)
        with open(path, 'rb') as checkpoint_file:
            assert checkpoint_file.read() == checkpoint_to_bytes(checkpoint)

        loaded = read_checkpoint(path)
        assert loaded.get('kind') == 'mm-gate'
        assert loaded.get('best_epoch') == checkpoint.get('best_epoch')

    def test_source_in_errors(self, tmp_path):
        path = tmp_path / 'broken.mmck'
        path.write_bytes(b'nothing useful here')
        with pytest.raises(MagicMismatchError, match='broken.mmck'):
            read_checkpoint(str(path))

    def test_summary(self, checkpoint):
        summary = checkpoint.summary()
        assert 'params' not in summary
        assert summary['parameter_shapes']['gate.w_z'] == [4, 11]
        assert summary['parameter_count'] == sum(value.size
                                                 for value in checkpoint.get_params().values())
        assert summary['average_image_shape'] == [1, 5]
        json.dumps(summary)

