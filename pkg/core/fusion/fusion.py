"""
Module with fusion functions of text and image representations
All functions take tape nodes and parameter groups whose values are tape nodes
Vectors are rows: f_t is 1 x d_t, sequences are L x d
"""
import numpy as np
from core.kernel import ops
from core.kernel.tape import Node
from core.kernel.matrix import Matrix
from core.utils.errors import ShapeMismatchError


class FusionOutput:
    """
    Fused representation h and diagnostics of one example
    Diagnostics a fusion does not produce stay None
    """

    def __init__(self, h, logits=None, z=None, h_t=None, h_v=None, attn_t2v=None,
                 attn_v2t=None, attn_self=None, pooled_t2v=None, pooled_v2t=None):
        self.h = h
        self.logits = logits
        self.z = z
        self.h_t = h_t
        self.h_v = h_v
        self.attn_t2v = attn_t2v
        self.attn_v2t = attn_v2t
        self.attn_self = attn_self
        self.pooled_t2v = pooled_t2v
        self.pooled_v2t = pooled_v2t


def _pool(node):
    if node.rows == 1:
        return node

    return ops.mean_rows(node)


def _check_vector(name, node):
    if node.rows != 1:
        raise ShapeMismatchError(f'{name} must be a 1 x n row, got {node.rows}x{node.cols}')


def gate_fuse(f_t, f_v, params):
    """
    h = z * h_t + (1 - z) * h_v with a learned sigmoid gate
    A 1x1 gate (scalar mode) is broadcast over all entries
    """
    _check_vector('f_t', f_t)
    _check_vector('f_v', f_v)
    h_t = ops.tanh_map(ops.linear(f_t, params.w_t, params.b_t))
    h_v = ops.tanh_map(ops.linear(f_v, params.w_v, params.b_v))
    z = ops.sigmoid_map(ops.linear(ops.concat_cols(f_t, f_v), params.w_z, params.b_z))
    h = ops.add(ops.mul(z, h_t), ops.mul(ops.one_minus(z), h_v))
    return FusionOutput(h=h, z=z, h_t=h_t, h_v=h_v)


def cross_attend(text, image, params):
    """
    Project both sides, attend text->image and image->text, mean-pool and sum
    """
    projected_t = ops.linear(text, params.w_t, params.b_t)
    projected_v = ops.linear(image, params.w_v, params.b_v)
    out_t2v, attn_t2v = ops.scaled_dot_attention(projected_t, projected_v, projected_v)
    out_v2t, attn_v2t = ops.scaled_dot_attention(projected_v, projected_t, projected_t)
    pooled_t2v = _pool(out_t2v)
    pooled_v2t = _pool(out_v2t)
    return FusionOutput(h=ops.add(pooled_t2v, pooled_v2t),
                        attn_t2v=attn_t2v,
                        attn_v2t=attn_v2t,
                        pooled_t2v=pooled_t2v,
                        pooled_v2t=pooled_v2t)


def xatt_fuse(text, image, params):
    """
    Cross-attention over text rows [L_t x d_t] and image rows [L_v x d_v]
    """
    return cross_attend(text, image, params)


def gated_xatt_fuse(text, image, gate_params, xatt_params):
    """
    Cross-attention over gate weighted sequences z * h_t and (1 - z) * h_v
    The gate is computed from row means of the raw features
    """
    pooled_t = _pool(text)
    pooled_v = _pool(image)
    z = ops.sigmoid_map(ops.linear(ops.concat_cols(pooled_t, pooled_v),
                                   gate_params.w_z,
                                   gate_params.b_z))
    h_t = ops.tanh_map(ops.linear(text, gate_params.w_t, gate_params.b_t))
    h_v = ops.tanh_map(ops.linear(image, gate_params.w_v, gate_params.b_v))
    gated_t = ops.mul(h_t, z)
    gated_v = ops.mul(h_v, ops.one_minus(z))
    output = cross_attend(gated_t, gated_v, xatt_params)
    output.z = z
    output.h_t = h_t
    output.h_v = h_v
    return output


def concat_fuse(f_t, f_v, params):
    """
    [f_t ; W f_v + b] where the projection maps image width to text width
    """
    _check_vector('f_t', f_t)
    _check_vector('f_v', f_v)
    if params.w.rows != f_t.cols:
        raise ShapeMismatchError(f'Concat projection {params.w.rows}x{params.w.cols} '
                                 f'does not map to text width {f_t.cols}')

    return FusionOutput(h=ops.concat_cols(f_t, ops.linear(f_v, params.w, params.b)))


def selfattn_fuse(f_t, f_v, params):
    """
    Self-attention over the two projected modality vectors, mean-pooled
    """
    _check_vector('f_t', f_t)
    _check_vector('f_v', f_v)
    sequence = ops.stack_rows([ops.linear(f_t, params.w_t, params.b_t),
                               ops.linear(f_v, params.w_v, params.b_v)])
    out, weights = ops.scaled_dot_attention(sequence, sequence, sequence)
    return FusionOutput(h=ops.mean_rows(out), attn_self=weights)


def classify(h, params, dropout=0.0, generator=None, training=False):
    """
    Logits of the classification layer
    In training, inverted dropout with keep probability 1 - dropout is applied to h
    """
    _check_vector('h', h)
    if params.w_out.cols != h.cols:
        raise ShapeMismatchError(f'Head {params.w_out.rows}x{params.w_out.cols} '
                                 f'does not match h 1x{h.cols}')

    if training and dropout > 0.0:
        keep = 1.0 - dropout
        dtype = h.value.dtype
        mask = (generator.random(h.shape) < keep).astype(dtype) / dtype.type(keep)
        h = ops.mul(h, h.tape.constant(mask))

    return ops.linear(h, params.w_out, params.b_out)


def predict(logits):
    """
    Index of the largest logit, ties go to the lowest index
    """
    if isinstance(logits, Node):
        logits = logits.value
    elif isinstance(logits, Matrix):
        logits = logits.data

    values = np.asarray(logits).reshape(-1)
    return int(np.argmax(values))
