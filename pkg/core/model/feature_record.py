"""
Module that contains FeatureRecord class
"""
from core.kernel.matrix import Matrix
from core.model.model_base import ModelBase


class FeatureRecord(ModelBase):
    """
    One post: text features, optional image features and a label index
    """

    _ModelBase__schema = {
        # Unique id of the post
        'id': '',
        # Class index in the catalog
        'label': 0,
        # train, dev or test
        'split': 'train',
        # Whether the post originally had an image
        'has_image': False,
        # Matrix [L_t x d_t]
        'text_feats': None,
        # Matrix [L_v x d_v] or None
        'image_feats': None,
        # Free-form metadata, e.g. which modality carries the signal in synthetic data
        'extras': {},
    }

    lambda_checks = {
        'id': ModelBase.record_id_check,
        'label': lambda label: label >= 0,
        'split': ModelBase.lambda_check('split'),
        'text_feats': lambda feats: isinstance(feats, Matrix),
        'image_feats': lambda feats: feats is None or isinstance(feats, Matrix),
        'extras': lambda extras: isinstance(extras, dict),
    }

    def get_id(self):
        """
        Return record id
        """
        return self.get('id')

    def with_image(self, image_feats):
        """
        Copy of this record with given image features, has_image flag is kept
        """
        json_input = self.get_json()
        json_input['image_feats'] = image_feats
        return FeatureRecord(json_input, check_attributes=False)

    def __repr__(self):
        return f'FeatureRecord({self.get("id")}, {self.get("split")}, label={self.get("label")})'
