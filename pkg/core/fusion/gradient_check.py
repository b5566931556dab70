"""
Module that runs finite difference gradient checks of whole classifiers
"""
from core.fusion.classifiers import get_classifier
from core.kernel import ops
from core.kernel.gradcheck import grad_check
from core.kernel.matrix import Matrix, Precision
from core.model.model_config import ModelConfig
from core.utils.random_streams import make_stream, SYNTH_STREAM


DESK_DIMENSIONS = {'d_t': 12, 'd_v': 10, 'd': 8, 'd_proj': 8, 'classes': 4}

CHECK_CASES = (('text', {}),
               ('image', {}),
               ('concat', {}),
               ('selfattn', {}),
               ('mm-gate', {'gate_mode': 'vector'}),
               ('mm-gate', {'gate_mode': 'scalar'}),
               ('mm-xatt', {}),
               ('mm-gated-xatt', {'granularity': 'sequence'}),
               ('mm-gated-xatt', {'granularity': 'pooled'}))


def model_loss(kind, config, text, image, gold, class_weights):
    """
    Closure that builds the weighted cross entropy of one example on a tape
    """
    classifier = get_classifier(kind, config)

    def loss_fn(tape, nodes):
        output = classifier.forward(tape, nodes, text, image)
        return ops.weighted_cross_entropy(output.logits, gold, class_weights)

    return loss_fn


def check_model_gradients(kind, overrides=None, text_rows=3, image_rows=4, seed=1, eps=1e-5):
    """
    Max relative error between tape and finite difference gradients of a
    classifier on one random example
    Parameters are Glorot initialized and then perturbed so biases are not zero
    """
    config = ModelConfig({**DESK_DIMENSIONS, 'granularity': 'sequence', **(overrides or {})})
    generator = make_stream(seed, SYNTH_STREAM, 1)
    params = get_classifier(kind, config).init_params(seed)
    params = {name: value + 0.1 * generator.standard_normal(value.shape)
              for name, value in sorted(params.items())}
    text = Matrix(generator.standard_normal((text_rows, config.get('d_t'))), Precision.DOUBLE)
    image = Matrix(generator.standard_normal((image_rows, config.get('d_v'))), Precision.DOUBLE)
    classes = config.get('classes')
    gold = int(generator.integers(classes))
    class_weights = generator.uniform(0.5, 2.0, size=classes)
    loss_fn = model_loss(kind, config, text, image, gold, class_weights)
    return grad_check(loss_fn, params, eps)
