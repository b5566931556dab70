"""
Module that contains all classifier kinds
Each classifier knows its parameter shapes and how to run a forward pass of one
example on a tape
"""
from core.fusion import fusion
from core.fusion.params import (GateParams,
                                XAttParams,
                                LinearParams,
                                HeadParams,
                                prefixed,
                                group,
                                init_arrays)
from core.kernel.matrix import Precision
from core.kernel.tape import Tape
from core.model.model_config import ModelConfig
from core.utils.errors import ConfigError, ShapeMismatchError


class FusionClassifier():
    """
    Base class of trainable classifiers
    """

    kind = ''
    needs_text = True
    needs_image = True
    has_gate = False
    has_attention = False
    uses_sequences = False

    def __init__(self, config):
        if not isinstance(config, ModelConfig):
            config = ModelConfig(config)

        self.config = config

    def head_width(self):
        """
        Width of h that goes into the classification layer
        """
        raise NotImplementedError()

    def fusion_shapes(self):
        """
        Shapes of all parameters except the classification layer
        """
        return {}

    def parameter_shapes(self):
        """
        Shapes of all parameters in a flat dictionary
        """
        shapes = dict(self.fusion_shapes())
        shapes.update(prefixed('head', HeadParams.shapes(self.head_width(),
                                                        self.config.get('classes'))))
        return shapes

    def init_params(self, seed):
        """
        Glorot-uniform weights, zero biases
        """
        return init_arrays(self.parameter_shapes(), seed)

    def fuse(self, params, text, image):
        """
        Build h from text and image nodes
        """
        raise NotImplementedError()

    def prepare(self, tape, matrix, width, name):
        """
        Put input features on the tape, pooled unless the model attends over sequences
        """
        if matrix is None:
            raise ConfigError(f'{self.kind} needs {name} features, impute missing images first')

        if matrix.cols != width:
            raise ShapeMismatchError(f'{name} features are {matrix.rows}x{matrix.cols}, '
                                     f'model expects width {width}')

        if not self.uses_sequences or self.config.get('granularity') == 'pooled':
            matrix = matrix.row_mean()

        return tape.constant(matrix, name=name)

    def forward(self, tape, params, text, image, training=False, generator=None):
        """
        Forward pass of one example, params is a dictionary of tape nodes
        """
        text_node = None
        image_node = None
        if self.needs_text:
            text_node = self.prepare(tape, text, self.config.get('d_t'), 'text')

        if self.needs_image:
            image_node = self.prepare(tape, image, self.config.get('d_v'), 'image')

        output = self.fuse(params, text_node, image_node)
        output.logits = fusion.classify(output.h,
                                        group(params, 'head', HeadParams),
                                        self.config.get('dropout'),
                                        generator,
                                        training)
        return output

    def infer(self, params, text, image, precision=Precision.DOUBLE):
        """
        Forward pass of one example in evaluation mode, params are arrays
        """
        tape = Tape(precision)
        nodes = {name: tape.constant(value, name=name) for name, value in params.items()}
        return self.forward(tape, nodes, text, image)


class TextClassifier(FusionClassifier):
    """
    Text-only classification layer
    """

    kind = 'text'
    needs_image = False

    def head_width(self):
        return self.config.get('d_t')

    def fuse(self, params, text, image):
        return fusion.FusionOutput(h=text)


class ImageClassifier(FusionClassifier):
    """
    Image-only classification layer
    """

    kind = 'image'
    needs_text = False

    def head_width(self):
        return self.config.get('d_v')

    def fuse(self, params, text, image):
        return fusion.FusionOutput(h=image)


class ConcatClassifier(FusionClassifier):
    """
    Image projected to text width and concatenated with text
    """

    kind = 'concat'

    def head_width(self):
        return 2 * self.config.get('d_t')

    def fusion_shapes(self):
        return prefixed('proj', LinearParams.shapes(self.config.get('d_v'),
                                                    self.config.get('d_t')))

    def fuse(self, params, text, image):
        return fusion.concat_fuse(text, image, group(params, 'proj', LinearParams))


class SelfAttentionClassifier(FusionClassifier):
    """
    Self-attention over projected text and image vectors
    """

    kind = 'selfattn'

    def head_width(self):
        return self.config.get_d_proj()

    def fusion_shapes(self):
        return prefixed('proj', XAttParams.shapes(self.config.get('d_t'),
                                                  self.config.get('d_v'),
                                                  self.config.get_d_proj()))

    def fuse(self, params, text, image):
        return fusion.selfattn_fuse(text, image, group(params, 'proj', XAttParams))


class GateClassifier(FusionClassifier):
    """
    Gated multimodal fusion (MM-Gate)
    """

    kind = 'mm-gate'
    has_gate = True

    def head_width(self):
        return self.config.get('d')

    def fusion_shapes(self):
        return prefixed('gate', GateParams.shapes(self.config.get('d_t'),
                                                  self.config.get('d_v'),
                                                  self.config.get('d'),
                                                  self.config.get_gate_width()))

    def fuse(self, params, text, image):
        return fusion.gate_fuse(text, image, group(params, 'gate', GateParams))


class CrossAttentionClassifier(FusionClassifier):
    """
    Cross-attention fusion (MM-XAtt)
    """

    kind = 'mm-xatt'
    has_attention = True
    uses_sequences = True

    def head_width(self):
        return self.config.get_d_proj()

    def fusion_shapes(self):
        return prefixed('xatt', XAttParams.shapes(self.config.get('d_t'),
                                                  self.config.get('d_v'),
                                                  self.config.get_d_proj()))

    def fuse(self, params, text, image):
        return fusion.xatt_fuse(text, image, group(params, 'xatt', XAttParams))


class GatedCrossAttentionClassifier(FusionClassifier):
    """
    Cross-attention on top of gated representations (MM-Gated-XAtt)
    """

    kind = 'mm-gated-xatt'
    has_gate = True
    has_attention = True
    uses_sequences = True

    def head_width(self):
        return self.config.get_d_proj()

    def fusion_shapes(self):
        d = self.config.get('d')
        shapes = prefixed('gate', GateParams.shapes(self.config.get('d_t'),
                                                    self.config.get('d_v'),
                                                    d,
                                                    self.config.get_gate_width()))
        shapes.update(prefixed('xatt', XAttParams.shapes(d, d, self.config.get_d_proj())))
        return shapes

    def fuse(self, params, text, image):
        return fusion.gated_xatt_fuse(text,
                                      image,
                                      group(params, 'gate', GateParams),
                                      group(params, 'xatt', XAttParams))


CLASSIFIERS = {cls.kind: cls for cls in (TextClassifier,
                                         ImageClassifier,
                                         ConcatClassifier,
                                         SelfAttentionClassifier,
                                         GateClassifier,
                                         CrossAttentionClassifier,
                                         GatedCrossAttentionClassifier)}

MODEL_KINDS = ('majority',) + tuple(CLASSIFIERS)


def get_classifier(kind, config):
    """
    Return classifier object for a model kind
    """
    if kind not in CLASSIFIERS:
        raise ConfigError(f'Unknown trainable model kind "{kind}", '
                          f'expected one of {", ".join(CLASSIFIERS)}')

    return CLASSIFIERS[kind](config)


def init_params(kind, config, seed):
    """
    Initial parameters of a model kind as a flat dictionary of float64 arrays
    """
    return get_classifier(kind, config).init_params(seed)
