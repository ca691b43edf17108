from hourglassdoc.attention.params import Linear, LayerNorm, FeedForward, AttentionParams
from hourglassdoc.attention.core import (split_heads, merge_heads, scaled_dot_product, cross_attention,
                                         AttentionRecord, AttentionRecorder)
from hourglassdoc.attention.layers import (BaseLayer, SelfAttentionLayer, SymmetryCrossAttentionLayer,
                                           CrossDirection, build_layer)

__all__ = ["Linear", "LayerNorm", "FeedForward", "AttentionParams",
           "split_heads", "merge_heads", "scaled_dot_product", "cross_attention",
           "AttentionRecord", "AttentionRecorder",
           "BaseLayer", "SelfAttentionLayer", "SymmetryCrossAttentionLayer", "CrossDirection", "build_layer"]
