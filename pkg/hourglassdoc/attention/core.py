"""
Multi-head scaled dot-product attention and attention-map recording
"""
import dataclasses
import math
import typing as tp
import numpy as np
from hourglassdoc.common import ContractError, DimensionError
from hourglassdoc.attention.params import AttentionParams
from hourglassdoc.numerics import Tensor, add, matmul, mul, reshape, softmax, transpose


def split_heads(x: Tensor, heads: int) -> Tensor:
    """
    [L, d] -> [heads, L, d / heads]
    """
    length, d = x.shape
    if d % heads:
        raise DimensionError(f"cannot split hidden size {d} into {heads} heads")
    return transpose(reshape(x, (length, heads, d // heads)), (1, 0, 2))


def merge_heads(x: Tensor) -> Tensor:
    heads, length, head_dim = x.shape
    return reshape(transpose(x, (1, 0, 2)), (length, heads * head_dim))


def scaled_dot_product(queries: Tensor, keys: Tensor, values: Tensor, heads: int,
                       key_mask: tp.Optional[np.ndarray] = None) -> tp.Tuple[Tensor, Tensor]:
    """
    softmax(Q·Kᵀ / sqrt(d_h))·V per head on projected inputs
    :param queries: [Lq, d]
    :param keys: [Lk, d]
    :param values: [Lk, d]
    :param key_mask: [Lk] booleans, False keys get zero weight
    :return: context [Lq, d] and weights [heads, Lq, Lk]
    """
    if keys.shape != values.shape or queries.shape[1] != keys.shape[1]:
        raise DimensionError(f"attention: queries {queries.shape}, keys {keys.shape}, values {values.shape}")
    q, k, v = split_heads(queries, heads), split_heads(keys, heads), split_heads(values, heads)
    scores = mul(matmul(q, transpose(k, (0, 2, 1))), 1.0 / math.sqrt(q.shape[-1]))
    mask = None if key_mask is None else np.asarray(key_mask, dtype=bool)[None, None, :]
    weights = softmax(scores, axis=-1, mask=mask)
    return merge_heads(matmul(weights, v)), weights


def cross_attention(f_n: Tensor, f_m: Tensor, params: AttentionParams, mask: tp.Optional[np.ndarray] = None,
                    query_mask: tp.Optional[np.ndarray] = None, query_bias: tp.Optional[Tensor] = None,
                    key_bias: tp.Optional[Tensor] = None,
                    with_weights: bool = False) -> tp.Union[Tensor, tp.Tuple[Tensor, Tensor]]:
    """
    CA(f_n | f_m) = W_o·softmax(F_q(f_n)·F_k(f_m)ᵀ / sqrt(d_h))·F_v(f_m)
    :param f_n: query stream [Ln, d]
    :param f_m: key/value stream [Lm, d]
    :param mask: active keys of f_m
    :param query_mask: active queries of f_n, all if None
    :param query_bias: added to f_n before the query projection only
    :param key_bias: added to f_m before the key projection only
    :return: [Ln, d], plus the [heads, Ln, Lm] weights if with_weights
    """
    # pylint: disable=too-many-arguments
    if f_n.shape[-1] != f_m.shape[-1]:
        raise DimensionError(f"cross attention between hidden sizes {f_n.shape} and {f_m.shape}")
    if mask is not None and not np.any(mask) and (query_mask is None or np.any(query_mask)):
        raise ContractError("cross attention: every key is masked, active queries cannot be normalized")
    query_in = f_n if query_bias is None else add(f_n, query_bias)
    key_in = f_m if key_bias is None else add(f_m, key_bias)
    context, weights = scaled_dot_product(params.query(query_in), params.key(key_in), params.value(f_m),
                                          params.heads, mask)
    out = params.output(context)
    return (out, weights) if with_weights else out


@dataclasses.dataclass
class AttentionRecord:
    layer: str
    kind: str
    weights: np.ndarray
    query_mask: np.ndarray
    key_mask: np.ndarray


class AttentionRecorder:
    """
    Collects attention maps of one or more forward passes
    """

    def __init__(self):
        self.records: tp.List[AttentionRecord] = []

    def record(self, layer: str, kind: str, weights: tp.Union[Tensor, np.ndarray],
               query_mask: np.ndarray, key_mask: np.ndarray):
        """
        :param layer: layer name
        :param kind: 'sa', 'tv' (text queries visual) or 'vt'
        :param weights: [heads, queries, keys]
        """
        # pylint: disable=too-many-arguments
        if isinstance(weights, Tensor):
            if weights.is_meta:
                return
            weights = weights.data
        self.records.append(AttentionRecord(layer, kind, np.array(weights), np.asarray(query_mask, dtype=bool),
                                            np.asarray(key_mask, dtype=bool)))

    def layers(self) -> tp.List[str]:
        return list(dict.fromkeys(record.layer for record in self.records))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)
