"""
Transformer layers over a DualStream: self-attention over both streams
and Symmetry Cross-Attention between them
"""
import typing as tp
from abc import ABC, abstractmethod
import numpy as np
from hourglassdoc.attention.core import AttentionRecorder, cross_attention, scaled_dot_product
from hourglassdoc.attention.params import AttentionParams, FeedForward, LayerNorm
from hourglassdoc.features.config import ModelConfig
from hourglassdoc.features.stream import DualStream
from hourglassdoc.numerics import ParameterScope, Tensor, add, concat, current_graph, take


class BaseLayer(ABC):
    """
    Pre-norm transformer layer mapping a DualStream to a DualStream of the same shape
    """
    KIND = "ABSTRACT"

    @abstractmethod
    def __init__(self, scope: ParameterScope, cfg: ModelConfig, name: str):
        self.cfg = cfg
        self.name = name

    def __call__(self, stream: DualStream, recorder: tp.Optional[AttentionRecorder] = None) -> DualStream:
        """
        Run the layer; on an active graph its nodes are labeled with the layer name
        and both stream outputs are marked for MAC accounting.
        """
        graph = current_graph()
        if graph is None:
            return self.forward(stream, recorder)
        with graph.layer(self.name):
            out = self.forward(stream, recorder)
        graph.mark_output(self.name, 'text', out.text)
        graph.mark_output(self.name, 'visual', out.visual)
        return out

    @abstractmethod
    def forward(self, stream: DualStream, recorder: tp.Optional[AttentionRecorder]) -> DualStream:
        raise NotImplementedError("This is just an abstract class.")


class SelfAttentionLayer(BaseLayer):
    """
    Multi-head self-attention over the concatenation of text and visual tokens.
    Projections run per stream with shared weights, keys and values are concatenated,
    which is the same computation as attending over the concatenated sequence.
    """
    KIND = "sa"

    def __init__(self, scope: ParameterScope, cfg: ModelConfig, name: str):
        super().__init__(scope, cfg, name)
        self.norm1 = LayerNorm(scope.scope('norm1'), cfg.d, cfg.ln_eps)
        self.attention = AttentionParams(scope.scope('attention'), cfg.d, cfg.heads)
        self.norm2 = LayerNorm(scope.scope('norm2'), cfg.d, cfg.ln_eps)
        self.ffn = FeedForward(scope.scope('ffn'), cfg.d, cfg.d_ffn)

    def forward(self, stream: DualStream, recorder: tp.Optional[AttentionRecorder]) -> DualStream:
        # pylint: disable=too-many-locals
        attention = self.attention
        x_text, x_visual = self.norm1(stream.text), self.norm1(stream.visual)
        keys = concat([attention.key(x_text), attention.key(x_visual)])
        values = concat([attention.value(x_text), attention.value(x_visual)])
        key_mask = np.concatenate([stream.text_mask, stream.visual_mask])
        context_text, weights_text = scaled_dot_product(attention.query(x_text), keys, values,
                                                        attention.heads, key_mask)
        context_visual, weights_visual = scaled_dot_product(attention.query(x_visual), keys, values,
                                                            attention.heads, key_mask)
        text = add(stream.text, attention.output(context_text))
        visual = add(stream.visual, attention.output(context_visual))
        text = add(text, self.ffn(self.norm2(text)))
        visual = add(visual, self.ffn(self.norm2(visual)))
        if recorder is not None and not weights_text.is_meta:
            recorder.record(self.name, self.KIND, np.concatenate([weights_text.data, weights_visual.data], axis=1),
                            key_mask, key_mask)
        return stream.with_states(text, visual)


class CrossDirection:
    """
    One direction of SCA: stream n queries stream m, followed by the FFN of stream n
    """

    def __init__(self, scope: ParameterScope, cfg: ModelConfig):
        self.norm1 = LayerNorm(scope.scope('norm1'), cfg.d, cfg.ln_eps)
        self.attention = AttentionParams(scope.scope('attention'), cfg.d, cfg.heads)
        self.norm2 = LayerNorm(scope.scope('norm2'), cfg.d, cfg.ln_eps)
        self.ffn = FeedForward(scope.scope('ffn'), cfg.d, cfg.d_ffn)

    def __call__(self, f_n: Tensor, f_m: Tensor, key_mask: np.ndarray, query_bias: Tensor,
                 key_bias: Tensor) -> tp.Tuple[Tensor, tp.Optional[Tensor]]:
        # pylint: disable=too-many-arguments
        if np.any(key_mask):
            context, weights = cross_attention(self.norm1(f_n), self.norm1(f_m), self.attention, mask=key_mask,
                                               query_bias=query_bias, key_bias=key_bias, with_weights=True)
            hidden = add(f_n, context)
        else:
            # nothing to attend to, the attention sub-layer contributes a zero context
            hidden, weights = f_n, None
        return add(hidden, self.ffn(self.norm2(hidden))), weights


class SymmetryCrossAttentionLayer(BaseLayer):
    """
    Text queries visual and visual queries text, both from the same input snapshot.
    A per-layer segment-index embedding is added to query and key inputs.
    """
    KIND = "sca"

    def __init__(self, scope: ParameterScope, cfg: ModelConfig, name: str):
        super().__init__(scope, cfg, name)
        self.semantic = scope.create('semantic', (cfg.L_v + 1, cfg.d), std=cfg.init_std)
        self.text_from_visual = CrossDirection(scope.scope('text_from_visual'), cfg)
        self.visual_from_text = CrossDirection(scope.scope('visual_from_text'), cfg)

    def forward(self, stream: DualStream, recorder: tp.Optional[AttentionRecorder]) -> DualStream:
        semantic_text = take(self.semantic, stream.text_segment_ids + 1)
        semantic_visual = take(self.semantic, stream.visual_segment_ids + 1)
        text, weights_tv = self.text_from_visual(stream.text, stream.visual, stream.visual_mask,
                                                 semantic_text, semantic_visual)
        visual, weights_vt = self.visual_from_text(stream.visual, stream.text, stream.text_mask,
                                                   semantic_visual, semantic_text)
        if recorder is not None:
            if weights_tv is not None:
                recorder.record(self.name, 'tv', weights_tv, stream.text_mask, stream.visual_mask)
            if weights_vt is not None:
                recorder.record(self.name, 'vt', weights_vt, stream.visual_mask, stream.text_mask)
        return stream.with_states(text, visual)


def build_layer(kind: str, scope: ParameterScope, cfg: ModelConfig, name: str) -> BaseLayer:
    """
    :param kind: 'sa' or 'sca'
    """
    layers = {layer.KIND: layer for layer in (SelfAttentionLayer, SymmetryCrossAttentionLayer)}
    return layers[kind](scope, cfg, name)
