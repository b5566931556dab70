"""
Module that contains Checkpoint class
"""
from core.kernel.matrix import Matrix
from core.model.model_base import ModelBase
from core.model.model_config import ModelConfig
from core.model.train_config import TrainConfig
from core.fusion.classifiers import get_classifier


class Checkpoint(ModelBase):
    """
    Self-contained trained model: parameters, average image and everything
    needed to run inference and to report how it was trained
    """

    _ModelBase__schema = {
        # Model kind, e.g. mm-gated-xatt
        'kind': 'majority',
        # Ordered class catalog
        'classes': [],
        # ModelConfig and TrainConfig as dictionaries
        'model_config': {},
        'train_config': {},
        # Regime the model was trained in
        'regime': 'all',
        'seed': 1,
        # Epoch (1-based) whose parameters are stored, 0 if nothing was trained
        'best_epoch': 0,
        # Mean dev loss of the best epoch, None if nothing was trained
        'best_dev_loss': None,
        # Constant prediction of the majority baseline
        'majority_class': 0,
        # Class weights used in the loss
        'class_weights': [],
        # Per epoch {"epoch", "train_loss", "dev_loss"}
        'history': [],
        # Parameter name to float64 array
        'params': {},
        # Matrix used to impute missing images or None
        'average_image': None,
    }

    lambda_checks = {
        'kind': ModelBase.lambda_check('model'),
        'classes': lambda classes: len(classes) >= 2,
        '__classes': ModelBase.class_name_check,
        'regime': ModelBase.lambda_check('regime'),
        'seed': ModelBase.lambda_check('seed'),
        'best_epoch': lambda epoch: epoch >= 0,
        'majority_class': lambda index: index >= 0,
        'params': lambda params: isinstance(params, dict),
        'average_image': lambda image: image is None or isinstance(image, Matrix),
    }

    def is_majority(self):
        """
        Whether this is the majority baseline that has no parameters
        """
        return self.get('kind') == 'majority'

    def get_model_config(self):
        """
        ModelConfig object of this checkpoint
        """
        return ModelConfig(self.get('model_config'))

    def get_train_config(self):
        """
        TrainConfig object of this checkpoint
        """
        return TrainConfig(self.get('train_config'))

    def get_classifier(self):
        """
        Classifier object of this checkpoint's kind
        """
        return get_classifier(self.get('kind'), self.get_model_config())

    def get_params(self):
        """
        Parameter arrays without copying
        """
        return self.get('params')

    def summary(self):
        """
        Short JSON-friendly description without parameters
        """
        json_output = self.get_json()
        params = json_output.pop('params')
        average_image = json_output.pop('average_image')
        json_output['parameter_shapes'] = {name: list(value.shape)
                                           for name, value in sorted(params.items())}
        json_output['parameter_count'] = int(sum(value.size for value in params.values()))
        json_output['average_image_shape'] = None
        if average_image is not None:
            json_output['average_image_shape'] = list(average_image.shape)

        return json_output
