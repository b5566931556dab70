"""
Module that contains all checkpoint APIs
"""
import json
import flask
import numpy as np
from api.api_base import APIBase
from core.controller.analysis_controller import modality_share
from core.fusion.fusion import predict
from core.kernel.matrix import Matrix
from core.utils.errors import ConfigError


class ServedCheckpoint():
    """
    Checkpoint that is served by the API
    """

    __checkpoint = None
    __path = None

    @classmethod
    def set(cls, checkpoint, path):
        """
        Set checkpoint and the file it was read from
        """
        cls.__checkpoint = checkpoint
        cls.__path = path

    @classmethod
    def get(cls):
        """
        Return served checkpoint
        """
        if cls.__checkpoint is None:
            raise ConfigError('No checkpoint is loaded')

        return cls.__checkpoint

    @classmethod
    def get_path(cls):
        """
        Return file name of served checkpoint
        """
        return cls.__path


def features(json_input, key, width):
    """
    Matrix from a list of rows or a single row, None if missing
    """
    value = json_input.get(key)
    if value is None:
        return None

    try:
        array = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as ex:
        raise ConfigError(f'{key} features must be numbers: {ex}') from ex

    if array.ndim == 1:
        array = array.reshape(1, -1)

    matrix = Matrix(array, name=f'{key} features')
    if matrix.cols != width:
        raise ConfigError(f'{key} features have width {matrix.cols}, expected {width}')

    return matrix


class CheckpointInfoAPI(APIBase):
    """
    Endpoint for getting information about the served checkpoint
    """

    def __init__(self):
        APIBase.__init__(self)

    @APIBase.exceptions_to_errors
    def get(self):
        """
        Get kind, classes, configs, best epoch and parameter shapes of the checkpoint
        """
        info = ServedCheckpoint.get().summary()
        info['path'] = ServedCheckpoint.get_path()
        return self.output_text({'response': info, 'success': True, 'message': ''})


class PredictAPI(APIBase):
    """
    Endpoint for classifying one post from its features
    """

    def __init__(self):
        APIBase.__init__(self)

    @APIBase.ensure_request_data
    @APIBase.exceptions_to_errors
    def post(self):
        """
        Classify {"text": [[...]], "image": [[...]] or null}
        Missing image is replaced by the average image of the checkpoint
        """
        checkpoint = ServedCheckpoint.get()
        classes = checkpoint.get('classes')
        json_input = json.loads(flask.request.data.decode('utf-8'))
        if not isinstance(json_input, dict):
            raise ConfigError('Expected a JSON object with "text" and "image"')

        if checkpoint.is_majority():
            index = checkpoint.get('majority_class')
            probabilities = [1.0 if i == index else 0.0 for i in range(len(classes))]
            result = {'predicted': classes[index],
                      'index': index,
                      'probabilities': dict(zip(classes, probabilities))}
            return self.output_text({'response': result, 'success': True, 'message': ''})

        model_config = checkpoint.get_model_config()
        text = features(json_input, 'text', model_config.get('d_t'))
        image = features(json_input, 'image', model_config.get('d_v'))
        classifier = checkpoint.get_classifier()
        if text is None and classifier.needs_text:
            raise ConfigError(f'{checkpoint.get("kind")} needs text features')

        has_image = image is not None
        if image is None and classifier.needs_image:
            image = checkpoint.get('average_image')

        output = classifier.infer(checkpoint.get_params(),
                                  text,
                                  image,
                                  checkpoint.get_train_config().get('precision'))
        logits = output.logits.value.astype(np.float64).reshape(-1)
        exponents = np.exp(logits - logits.max())
        probabilities = exponents / exponents.sum()
        index = predict(logits)
        result = {'predicted': classes[index],
                  'index': index,
                  'probabilities': dict(zip(classes, probabilities.tolist())),
                  'has_image': has_image}
        if classifier.has_gate or classifier.has_attention:
            text_share = round(100.0 * modality_share(output), 2)
            result['text_share'] = text_share
            result['image_share'] = round(100.0 - text_share, 2)

        return self.output_text({'response': result, 'success': True, 'message': ''})
