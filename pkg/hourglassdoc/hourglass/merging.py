"""
Modality-guided token merging and repeat up-sampling
"""
import dataclasses
import typing as tp
import numpy as np
from hourglassdoc.common import ContractError
from hourglassdoc.attention.params import Linear
from hourglassdoc.features.stream import DualStream
from hourglassdoc.numerics import ParameterScope, Tensor, add, mean, mul, reshape, softmax, sum_, take


class GuidanceParams:
    """
    Scalar merge-weight predictors, one per direction, shared by every M-Block.
    Scores carry no bias term.
    """

    def __init__(self, scope: ParameterScope, d: int):
        self.visual_to_text = Linear(scope.scope('visual_to_text'), d, 1, bias=False)
        self.text_to_visual = Linear(scope.scope('text_to_visual'), d, 1, bias=False)


@dataclasses.dataclass
class MergeTrace:
    """
    Skip payload of one M-Block for its paired E-Block
    """
    pre_merge: DualStream
    weights_text: Tensor
    weights_visual: Tensor
    k: int

    def group_map(self, stream: str = 'text') -> np.ndarray:
        """
        Merged-token index of every pre-merge token
        """
        length = self.pre_merge.text_length if stream == 'text' else self.pre_merge.visual_length
        return np.arange(length) // self.k


def alignment_index(target_length: int, source_length: int) -> np.ndarray:
    """
    Source position of every target token when the target is the longer stream: floor(j·Ls/Lt)
    """
    return np.arange(target_length) * source_length // target_length


def align(source: Tensor, target_length: int) -> Tensor:
    """
    Source features aligned to the target positions.
    A longer target gathers; a shorter target averages its r aligned source tokens.
    """
    source_length, d = source.shape
    if target_length >= source_length:
        if target_length % source_length:
            raise ContractError(f"cannot align {source_length} tokens to {target_length}")
        return take(source, alignment_index(target_length, source_length))
    if source_length % target_length:
        raise ContractError(f"cannot align {source_length} tokens to {target_length}")
    return mean(reshape(source, (target_length, source_length // target_length, d)), axis=1)


def guidance_weights(target: Tensor, source: Tensor, linear: Linear, k: int) -> Tensor:
    """
    Per-token merge weights of the target stream predicted from the other modality
    :param target: stream being merged [L, d]
    :param source: guiding stream [L', d]
    :param linear: d -> 1 predictor
    :param k: group size
    :return: [L] weights, softmax-normalized within each group of k consecutive tokens
    """
    length = target.shape[0]
    if length % k:
        raise ContractError(f"length {length} is not divisible by k={k}")
    logits = linear(align(source, length))
    return reshape(softmax(reshape(logits, (length // k, k)), axis=-1), (length,))


def uniform_weights(length: int, k: int, meta: bool = False) -> Tensor:
    if length % k:
        raise ContractError(f"length {length} is not divisible by k={k}")
    return Tensor.meta((length,)) if meta else Tensor(np.full(length, 1.0 / k))


def weighted_pool(states: Tensor, weights: Tensor, k: int) -> Tensor:
    """
    Sum of weight·token over each group of k consecutive tokens
    """
    length, d = states.shape
    weighted = mul(states, reshape(weights, (length, 1)))
    return sum_(reshape(weighted, (length // k, k, d)), axis=1)


def _group_members(ids: np.ndarray, weights: Tensor, k: int) -> np.ndarray:
    groups = ids.reshape(-1, k)
    if weights.is_meta:
        return groups[:, 0].copy()
    best = np.argmax(weights.data.reshape(-1, k), axis=1)
    return groups[np.arange(len(groups)), best]


def merge_streams(stream: DualStream, k: int, guidance: tp.Optional[GuidanceParams] = None) \
        -> tp.Tuple[DualStream, MergeTrace]:
    """
    Shorten both streams by k.
    Weights come from the incoming snapshot; without guidance every group is a plain mean.
    A merged token takes the segment id of its highest-weight member and is active if any member is.
    """
    if stream.text_length % k or stream.visual_length % k:
        raise ContractError(f"stream lengths {stream.text_length}/{stream.visual_length} "
                            f"are not divisible by k={k}")
    if guidance is None or k == 1:
        weights_text = uniform_weights(stream.text_length, k, stream.text.is_meta)
        weights_visual = uniform_weights(stream.visual_length, k, stream.visual.is_meta)
    else:
        weights_text = guidance_weights(stream.text, stream.visual, guidance.visual_to_text, k)
        weights_visual = guidance_weights(stream.visual, stream.text, guidance.text_to_visual, k)
    trace = MergeTrace(stream, weights_text, weights_visual, k)
    if k == 1:
        return stream, trace
    merged = DualStream(weighted_pool(stream.text, weights_text, k), weighted_pool(stream.visual, weights_visual, k),
                        _group_members(stream.text_segment_ids, weights_text, k),
                        _group_members(stream.visual_segment_ids, weights_visual, k),
                        stream.text_mask.reshape(-1, k).any(axis=1), stream.visual_mask.reshape(-1, k).any(axis=1))
    return merged, trace


def extend_streams(stream: DualStream, trace: MergeTrace) -> DualStream:
    """
    Duplicate every token k times and add the pre-merge snapshot
    """
    pre = trace.pre_merge
    if pre.text_length != stream.text_length * trace.k or pre.visual_length != stream.visual_length * trace.k:
        raise ContractError(f"trace of lengths {pre.text_length}/{pre.visual_length} does not match "
                            f"{stream.text_length}/{stream.visual_length} extended by k={trace.k}")
    if trace.k == 1:
        return stream
    text = add(take(stream.text, trace.group_map('text')), pre.text)
    visual = add(take(stream.visual, trace.group_map('visual')), pre.visual)
    return pre.with_states(text, visual)
