"""
Tests of fusion functions, the classification layer and classifiers
"""
import math
import numpy as np
import pytest
from core.fusion import fusion
from core.fusion.classifiers import CLASSIFIERS, MODEL_KINDS, get_classifier, init_params
from core.fusion.params import (GateParams,
                               XAttParams,
                               LinearParams,
                               HeadParams,
                               glorot_limit,
                               group)
from core.kernel import ops
from core.kernel.matrix import Precision
from core.model.model_config import ModelConfig
from core.utils.errors import ConfigError, ShapeMismatchError
from core.utils.random_streams import make_stream, DROPOUT_STREAM
from conftest import constants, double_tape, matrix


ATTENTION_HIGH = math.exp(1 / math.sqrt(2)) / (math.exp(1 / math.sqrt(2)) + 1)


def gate_params(tape, rng, d_t, d_v, d, gate_width, w_z=None, b_z=None):
    """
    Random gate parameters with optional fixed gate weights
    """
    arrays = {'w_t': rng.normal(size=(d, d_t)),
              'b_t': rng.normal(size=(d, 1)),
              'w_v': rng.normal(size=(d, d_v)),
              'b_v': rng.normal(size=(d, 1)),
              'w_z': rng.normal(size=(gate_width, d_t + d_v)) if w_z is None else w_z,
              'b_z': rng.normal(size=(gate_width, 1)) if b_z is None else b_z}
    return GateParams(**constants(tape, arrays))


def identity_xatt(tape, width):
    """
    Identity projections with zero biases
    """
    return XAttParams(**constants(tape, {'w_t': np.eye(width),
                                         'b_t': np.zeros((width, 1)),
                                         'w_v': np.eye(width),
                                         'b_v': np.zeros((width, 1))}))


class TestGateFuse:
    """
    Gated multimodal fusion
    """

    def test_zero_gate_weights_average_both_sides(self):
        rng = np.random.default_rng(1)
        tape = double_tape()
        params = gate_params(tape, rng, 3, 2, 4, 4, np.zeros((4, 5)), np.zeros((4, 1)))
        output = fusion.gate_fuse(tape.constant(rng.normal(size=(1, 3))),
                                  tape.constant(rng.normal(size=(1, 2))),
                                  params)
        np.testing.assert_array_equal(output.z.value, np.full((1, 4), 0.5))
        np.testing.assert_allclose(output.h.value,
                                   (output.h_t.value + output.h_v.value) / 2,
                                   atol=1e-15)

    def test_saturated_gate_keeps_text(self):
        rng = np.random.default_rng(2)
        tape = double_tape()
        params = gate_params(tape, rng, 3, 2, 4, 4, np.zeros((4, 5)), np.full((4, 1), 30.0))
        output = fusion.gate_fuse(tape.constant(rng.normal(size=(1, 3))),
                                  tape.constant(rng.normal(size=(1, 2))),
                                  params)
        np.testing.assert_allclose(output.h.value, output.h_t.value, atol=1e-9)

    def test_scalar_gate_hand_example(self):
        tape = double_tape()
        params = GateParams(**constants(tape, {'w_t': [[1.0]], 'b_t': [[0.0]],
                                               'w_v': [[1.0]], 'b_v': [[0.0]],
                                               'w_z': [[1.0, 1.0]], 'b_z': [[0.0]]}))
        output = fusion.gate_fuse(tape.constant([[1.0]]), tape.constant([[-1.0]]), params)
        assert output.z.value[0, 0] == 0.5
        assert output.h.value[0, 0] == pytest.approx(0.0, abs=1e-15)

    def test_result_is_a_convex_combination(self):
        rng = np.random.default_rng(3)
        for gate_width in (1, 6):
            tape = double_tape()
            params = gate_params(tape, rng, 5, 4, 6, gate_width)
            output = fusion.gate_fuse(tape.constant(rng.normal(size=(1, 5))),
                                      tape.constant(rng.normal(size=(1, 4))),
                                      params)
            low = np.minimum(output.h_t.value, output.h_v.value) - 1e-12
            high = np.maximum(output.h_t.value, output.h_v.value) + 1e-12
            assert np.all((output.z.value > 0) & (output.z.value < 1))
            assert np.all((output.h.value >= low) & (output.h.value <= high))

    def test_sequences_are_rejected(self):
        rng = np.random.default_rng(4)
        tape = double_tape()
        params = gate_params(tape, rng, 3, 2, 4, 4)
        with pytest.raises(ShapeMismatchError):
            fusion.gate_fuse(tape.constant(np.ones((2, 3))), tape.constant(np.ones((1, 2))),
                             params)


class TestCrossAttention:
    """
    Cross-attention fusion
    """

    def test_single_rows_give_sum_of_projections(self):
        rng = np.random.default_rng(5)
        tape = double_tape()
        params = XAttParams(**constants(tape, {'w_t': rng.normal(size=(4, 3)),
                                               'b_t': rng.normal(size=(4, 1)),
                                               'w_v': rng.normal(size=(4, 2)),
                                               'b_v': rng.normal(size=(4, 1))}))
        text = tape.constant(rng.normal(size=(1, 3)))
        image = tape.constant(rng.normal(size=(1, 2)))
        output = fusion.xatt_fuse(text, image, params)
        projected_t = ops.linear(text, params.w_t, params.b_t).value
        projected_v = ops.linear(image, params.w_v, params.b_v).value
        np.testing.assert_array_equal(output.attn_t2v.value, [[1.0]])
        np.testing.assert_array_equal(output.attn_v2t.value, [[1.0]])
        np.testing.assert_array_equal(output.h.value, projected_t + projected_v)

    def test_symmetric_inputs_give_symmetric_attention(self):
        rng = np.random.default_rng(6)
        tape = double_tape()
        weight = rng.normal(size=(3, 3))
        bias = rng.normal(size=(3, 1))
        params = XAttParams(**constants(tape, {'w_t': weight, 'b_t': bias,
                                               'w_v': weight, 'b_v': bias}))
        features = rng.normal(size=(4, 3))
        output = fusion.xatt_fuse(tape.constant(features), tape.constant(features), params)
        np.testing.assert_array_equal(output.attn_t2v.value, output.attn_v2t.value)
        np.testing.assert_array_equal(output.pooled_t2v.value, output.pooled_v2t.value)

    def test_composed_hand_example(self):
        tape = double_tape()
        output = fusion.xatt_fuse(tape.constant([[1.0, 0.0]]),
                                  tape.constant([[1.0, 0.0], [0.0, 1.0]]),
                                  identity_xatt(tape, 2))
        np.testing.assert_allclose(output.pooled_t2v.value,
                                   [[ATTENTION_HIGH, 1 - ATTENTION_HIGH]],
                                   atol=1e-15)
        np.testing.assert_array_equal(output.pooled_v2t.value, [[1.0, 0.0]])
        np.testing.assert_allclose(output.h.value,
                                   [[1 + ATTENTION_HIGH, 1 - ATTENTION_HIGH]],
                                   atol=1e-15)

    def test_attention_rows_are_stochastic(self):
        rng = np.random.default_rng(7)
        tape = double_tape()
        params = XAttParams(**constants(tape, {'w_t': rng.normal(size=(4, 3)),
                                               'b_t': rng.normal(size=(4, 1)),
                                               'w_v': rng.normal(size=(4, 5)),
                                               'b_v': rng.normal(size=(4, 1))}))
        output = fusion.xatt_fuse(tape.constant(rng.normal(size=(3, 3))),
                                  tape.constant(rng.normal(size=(6, 5))),
                                  params)
        assert output.attn_t2v.shape == (3, 6)
        assert output.attn_v2t.shape == (6, 3)
        np.testing.assert_allclose(output.attn_t2v.value.sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(output.attn_v2t.value.sum(axis=1), 1.0, atol=1e-12)

    def test_image_row_order_does_not_change_h(self):
        rng = np.random.default_rng(17)
        tape = double_tape()
        params = XAttParams(**constants(tape, {'w_t': rng.normal(size=(4, 3)),
                                               'b_t': rng.normal(size=(4, 1)),
                                               'w_v': rng.normal(size=(4, 5)),
                                               'b_v': rng.normal(size=(4, 1))}))
        text = tape.constant(rng.normal(size=(3, 3)))
        image = rng.normal(size=(4, 5))
        order = [2, 0, 3, 1]
        output = fusion.xatt_fuse(text, tape.constant(image), params)
        permuted = fusion.xatt_fuse(text, tape.constant(image[order]), params)
        np.testing.assert_allclose(permuted.h.value, output.h.value, atol=1e-12)
        np.testing.assert_allclose(permuted.attn_t2v.value,
                                   output.attn_t2v.value[:, order],
                                   atol=1e-12)


class TestGatedCrossAttention:
    """
    Cross-attention over gate weighted representations
    """

    def test_saturated_gate_keeps_only_text_values(self):
        rng = np.random.default_rng(8)
        tape = double_tape()
        gate = gate_params(tape, rng, 3, 2, 4, 4, np.zeros((4, 5)), np.full((4, 1), 30.0))
        w_t = rng.normal(size=(4, 4))
        xatt = XAttParams(**constants(tape, {'w_t': w_t,
                                             'b_t': np.zeros((4, 1)),
                                             'w_v': rng.normal(size=(4, 4)),
                                             'b_v': np.zeros((4, 1))}))
        text = rng.normal(size=(3, 3))
        output = fusion.gated_xatt_fuse(tape.constant(text),
                                        tape.constant(rng.normal(size=(2, 2))),
                                        gate,
                                        xatt)
        h_t = np.tanh(text @ gate.w_t.value.T + gate.b_t.value.T)
        # Image side is zero, so image queries attend uniformly over projected text rows
        expected = (h_t @ w_t.T).mean(axis=0, keepdims=True)
        np.testing.assert_allclose(output.pooled_t2v.value, 0.0, atol=1e-9)
        np.testing.assert_allclose(output.h.value, expected, atol=1e-9)

    def test_pooled_rows_give_sum_of_gated_projections(self):
        rng = np.random.default_rng(9)
        tape = double_tape()
        gate = gate_params(tape, rng, 3, 2, 4, 4)
        xatt = XAttParams(**constants(tape, {'w_t': rng.normal(size=(5, 4)),
                                             'b_t': rng.normal(size=(5, 1)),
                                             'w_v': rng.normal(size=(5, 4)),
                                             'b_v': rng.normal(size=(5, 1))}))
        output = fusion.gated_xatt_fuse(tape.constant(rng.normal(size=(1, 3))),
                                        tape.constant(rng.normal(size=(1, 2))),
                                        gate,
                                        xatt)
        z = output.z.value
        gated_t = z * output.h_t.value
        gated_v = (1 - z) * output.h_v.value
        expected = (gated_t @ xatt.w_t.value.T + xatt.b_t.value.T
                    + gated_v @ xatt.w_v.value.T + xatt.b_v.value.T)
        np.testing.assert_allclose(output.h.value, expected, atol=1e-12)

    def test_unit_width_hand_example(self):
        tape = double_tape()
        gate = GateParams(**constants(tape, {'w_t': [[1.0]], 'b_t': [[0.0]],
                                             'w_v': [[1.0]], 'b_v': [[0.0]],
                                             'w_z': [[1.0, 1.0]], 'b_z': [[0.0]]}))
        output = fusion.gated_xatt_fuse(tape.constant([[1.0]]),
                                        tape.constant([[-1.0]]),
                                        gate,
                                        identity_xatt(tape, 1))
        assert output.z.value[0, 0] == 0.5
        assert output.pooled_t2v.value[0, 0] == pytest.approx(-0.3808, abs=1e-4)
        assert output.pooled_v2t.value[0, 0] == pytest.approx(0.3808, abs=1e-4)
        assert output.h.value[0, 0] == pytest.approx(0.0, abs=1e-15)

    def test_image_row_order_does_not_change_h(self):
        rng = np.random.default_rng(18)
        tape = double_tape()
        gate = gate_params(tape, rng, 3, 2, 4, 4)
        xatt = XAttParams(**constants(tape, {'w_t': rng.normal(size=(5, 4)),
                                             'b_t': rng.normal(size=(5, 1)),
                                             'w_v': rng.normal(size=(5, 4)),
                                             'b_v': rng.normal(size=(5, 1))}))
        text = tape.constant(rng.normal(size=(2, 3)))
        image = rng.normal(size=(3, 2))
        order = [1, 2, 0]
        output = fusion.gated_xatt_fuse(text, tape.constant(image), gate, xatt)
        permuted = fusion.gated_xatt_fuse(text, tape.constant(image[order]), gate, xatt)
        np.testing.assert_allclose(permuted.z.value, output.z.value, atol=1e-12)
        np.testing.assert_allclose(permuted.h.value, output.h.value, atol=1e-12)
        np.testing.assert_allclose(permuted.attn_t2v.value,
                                   output.attn_t2v.value[:, order],
                                   atol=1e-12)


class TestParamGroups:
    """
    Typed access to one prefix of a flat parameter dictionary
    """

    def test_group_reads_prefixed_entries(self):
        params = {'head.w_out': np.ones((3, 2)), 'head.b_out': np.zeros((3, 1)), 'gate.w_t': 1}
        head = group(params, 'head', HeadParams)
        assert head.w_out is params['head.w_out']
        assert head.b_out is params['head.b_out']
        assert not hasattr(head, 'w_t')

    def test_missing_entry(self):
        with pytest.raises(ShapeMismatchError, match='head.b_out'):
            group({'head.w_out': np.ones((3, 2))}, 'head', HeadParams)

    @pytest.mark.parametrize('values', [{'w': 1}, {'w': 1, 'b': 2, 'c': 3}])
    def test_names_must_match(self, values):
        with pytest.raises(ShapeMismatchError, match='LinearParams needs w, b'):
            LinearParams(**values)


class TestConcatAndSelfAttention:
    """
    Concat and self-attention baselines
    """

    def test_zero_projection_appends_bias(self):
        tape = double_tape()
        params = LinearParams(**constants(tape, {'w': np.zeros((2, 3)), 'b': [[0.5], [-1.0]]}))
        output = fusion.concat_fuse(tape.constant([[1.0, 2.0]]),
                                    tape.constant([[4.0, 5.0, 6.0]]),
                                    params)
        np.testing.assert_array_equal(output.h.value, [[1.0, 2.0, 0.5, -1.0]])

    def test_identity_projection(self):
        tape = double_tape()
        params = LinearParams(**constants(tape, {'w': np.eye(2), 'b': np.zeros((2, 1))}))
        output = fusion.concat_fuse(tape.constant([[1.0, 2.0]]),
                                    tape.constant([[3.0, 4.0]]),
                                    params)
        np.testing.assert_array_equal(output.h.value, [[1.0, 2.0, 3.0, 4.0]])

    def test_projection_arithmetic(self):
        tape = double_tape()
        params = LinearParams(**constants(tape, {'w': [[2.0], [0.0]], 'b': np.zeros((2, 1))}))
        output = fusion.concat_fuse(tape.constant([[7.0, 8.0]]), tape.constant([[3.0]]), params)
        np.testing.assert_array_equal(output.h.value, [[7.0, 8.0, 6.0, 0.0]])

    def test_identical_vectors_attend_uniformly(self):
        tape = double_tape()
        output = fusion.selfattn_fuse(tape.constant([[0.3, -0.7]]),
                                      tape.constant([[0.3, -0.7]]),
                                      identity_xatt(tape, 2))
        np.testing.assert_allclose(output.attn_self.value, 0.5, atol=1e-15)
        np.testing.assert_allclose(output.h.value, [[0.3, -0.7]], atol=1e-15)

    def test_orthogonal_vectors(self):
        tape = double_tape()
        output = fusion.selfattn_fuse(tape.constant([[1.0, 0.0]]),
                                      tape.constant([[0.0, 1.0]]),
                                      identity_xatt(tape, 2))
        expected = [[ATTENTION_HIGH, 1 - ATTENTION_HIGH], [1 - ATTENTION_HIGH, ATTENTION_HIGH]]
        np.testing.assert_allclose(output.attn_self.value, expected, atol=1e-15)
        np.testing.assert_allclose(output.attn_self.value,
                                   [[0.6698, 0.3302], [0.3302, 0.6698]],
                                   atol=1e-4)

    def test_zero_projections(self):
        tape = double_tape()
        params = XAttParams(**constants(tape, {'w_t': np.zeros((3, 2)),
                                               'b_t': np.zeros((3, 1)),
                                               'w_v': np.zeros((3, 4)),
                                               'b_v': np.zeros((3, 1))}))
        output = fusion.selfattn_fuse(tape.constant([[1.0, 2.0]]),
                                      tape.constant([[1.0, 2.0, 3.0, 4.0]]),
                                      params)
        np.testing.assert_array_equal(output.attn_self.value, np.full((2, 2), 0.5))
        np.testing.assert_array_equal(output.h.value, np.zeros((1, 3)))


class TestClassify:
    """
    Classification layer, dropout and prediction
    """

    @staticmethod
    def head(tape, rng, width, classes):
        return HeadParams(**constants(tape, {'w_out': rng.normal(size=(classes, width)),
                                             'b_out': rng.normal(size=(classes, 1))}))

    def test_no_dropout_is_the_same_in_training(self):
        rng = np.random.default_rng(10)
        tape = double_tape()
        params = self.head(tape, rng, 5, 3)
        h = tape.constant(rng.normal(size=(1, 5)))
        evaluation = fusion.classify(h, params)
        training = fusion.classify(h, params, 0.0, make_stream(1, DROPOUT_STREAM), True)
        np.testing.assert_array_equal(evaluation.value, training.value)

    def test_dropout_is_reproducible_and_inverted(self):
        tape = double_tape()
        params = HeadParams(**constants(tape, {'w_out': np.eye(6), 'b_out': np.zeros((6, 1))}))
        h = tape.constant(np.arange(1.0, 7.0).reshape(1, 6))
        first = fusion.classify(h, params, 0.5, make_stream(3, DROPOUT_STREAM), True).value
        second = fusion.classify(h, params, 0.5, make_stream(3, DROPOUT_STREAM), True).value
        np.testing.assert_array_equal(first, second)
        kept = first != 0
        np.testing.assert_allclose(first[kept], 2.0 * h.value[kept], atol=1e-15)

    def test_dropout_keeps_the_expectation(self):
        tape = double_tape()
        params = HeadParams(**constants(tape, {'w_out': np.ones((1, 4)), 'b_out': [[0.0]]}))
        h = tape.constant([[1.0, 1.0, 1.0, 1.0]])
        generator = make_stream(5, DROPOUT_STREAM)
        values = [fusion.classify(h, params, 0.25, generator, True).value[0, 0]
                  for _ in range(4000)]
        assert np.mean(values) == pytest.approx(4.0, abs=0.1)

    def test_zero_weights_give_bias(self):
        rng = np.random.default_rng(11)
        tape = double_tape()
        params = HeadParams(**constants(tape, {'w_out': np.zeros((3, 4)),
                                               'b_out': [[1.0], [2.0], [3.0]]}))
        logits = fusion.classify(tape.constant(rng.normal(size=(1, 4))), params)
        np.testing.assert_array_equal(logits.value, [[1.0, 2.0, 3.0]])

    def test_predict(self):
        assert fusion.predict(np.array([[0.1, 0.9]])) == 1
        assert fusion.predict(np.array([[0.5, 0.5]])) == 0
        logits = np.random.default_rng(12).normal(size=(1, 8))
        assert fusion.predict(logits) == fusion.predict(logits + 17.5)
        assert fusion.predict(matrix([[0.0, 3.0, 3.0]])) == 1


class TestClassifiers:
    """
    Parameter shapes, initialization and forward passes of all model kinds
    """

    config = ModelConfig({'d_t': 6, 'd_v': 5, 'd': 4, 'd_proj': 3, 'classes': 3})

    def test_model_kinds(self):
        assert MODEL_KINDS == ('majority', 'text', 'image', 'concat', 'selfattn',
                               'mm-gate', 'mm-xatt', 'mm-gated-xatt')
        with pytest.raises(ConfigError):
            get_classifier('majority', self.config)

    @pytest.mark.parametrize('kind', sorted(CLASSIFIERS))
    def test_init_is_deterministic(self, kind):
        first = init_params(kind, self.config, 3)
        second = init_params(kind, self.config, 3)
        other = init_params(kind, self.config, 4)
        assert sorted(first) == sorted(get_classifier(kind, self.config).parameter_shapes())
        for name, value in first.items():
            np.testing.assert_array_equal(value, second[name])
            if name.split('.')[-1].startswith('b'):
                np.testing.assert_array_equal(value, np.zeros_like(value))
            else:
                assert np.all(np.abs(value) <= glorot_limit(value.shape))
                assert not np.array_equal(value, other[name])

    def test_gate_shapes(self):
        shapes = get_classifier('mm-gate', self.config).parameter_shapes()
        assert shapes['gate.w_z'] == (4, 11)
        assert shapes['head.w_out'] == (3, 4)
        scalar = ModelConfig({**self.config.get_json(), 'gate_mode': 'scalar'})
        assert get_classifier('mm-gate', scalar).parameter_shapes()['gate.w_z'] == (1, 11)

    def test_gated_xatt_shapes(self):
        shapes = get_classifier('mm-gated-xatt', self.config).parameter_shapes()
        assert shapes['xatt.w_t'] == (3, 4)
        assert shapes['xatt.w_v'] == (3, 4)
        assert shapes['head.w_out'] == (3, 3)

    @pytest.mark.parametrize('kind', sorted(CLASSIFIERS))
    def test_infer_on_sequences(self, kind):
        rng = np.random.default_rng(13)
        classifier = get_classifier(kind, self.config)
        params = classifier.init_params(1)
        output = classifier.infer(params,
                                  matrix(rng.normal(size=(3, 6))),
                                  matrix(rng.normal(size=(2, 5))))
        assert output.logits.shape == (1, 3)
        if classifier.has_gate:
            assert output.z is not None

        if classifier.has_attention:
            assert output.attn_t2v.shape == (3, 2)

    def test_pooled_granularity_pools_sequences(self):
        rng = np.random.default_rng(14)
        config = ModelConfig({**self.config.get_json(), 'granularity': 'pooled'})
        classifier = get_classifier('mm-xatt', config)
        params = classifier.init_params(2)
        text = matrix(rng.normal(size=(3, 6)))
        image = matrix(rng.normal(size=(2, 5)))
        sequence_output = classifier.infer(params, text, image)
        pooled_output = classifier.infer(params, text.row_mean(), image.row_mean())
        assert sequence_output.attn_t2v.shape == (1, 1)
        np.testing.assert_array_equal(sequence_output.logits.value, pooled_output.logits.value)

    def test_missing_image_is_an_error(self):
        classifier = get_classifier('mm-gate', self.config)
        with pytest.raises(ConfigError):
            classifier.infer(classifier.init_params(1), matrix(np.ones((1, 6))), None)

    def test_width_mismatch(self):
        classifier = get_classifier('text', self.config)
        with pytest.raises(ShapeMismatchError):
            classifier.infer(classifier.init_params(1), matrix(np.ones((1, 7))), None)

    def test_single_precision_inference(self):
        classifier = get_classifier('mm-gated-xatt', self.config)
        output = classifier.infer(classifier.init_params(1),
                                  matrix(np.ones((2, 6))),
                                  matrix(np.ones((2, 5))),
                                  Precision.SINGLE)
        assert output.logits.value.dtype == np.float32
