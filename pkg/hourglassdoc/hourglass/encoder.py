"""
Hourglass encoder: Merging-Blocks shorten both streams, Extension-Blocks restore them
"""
import dataclasses
import typing as tp
import numpy as np
from logging import debug
from hourglassdoc.common import ContractError
from hourglassdoc.attention.core import AttentionRecorder
from hourglassdoc.attention.layers import BaseLayer, build_layer
from hourglassdoc.attention.params import LayerNorm
from hourglassdoc.features.config import ModelConfig
from hourglassdoc.features.embedding import Embedder
from hourglassdoc.features.stream import DualStream
from hourglassdoc.features.tokenizer import TokenStreams
from hourglassdoc.hourglass.merging import GuidanceParams, MergeTrace, extend_streams, merge_streams
from hourglassdoc.numerics import ParameterScope


class Block:
    """
    One SA layer followed by one cross layer (SCA, or a second SA layer)
    """

    def __init__(self, scope: ParameterScope, cfg: ModelConfig, name: str):
        self.name = name
        cross = 'sca' if cfg.cross_layer == 'sca' else 'sa2'
        self.layers: tp.List[BaseLayer] = [
            build_layer('sa', scope.scope('sa'), cfg, f'{name}.sa'),
            build_layer(cfg.cross_layer, scope.scope(cross), cfg, f'{name}.{cross}'),
        ]

    def __call__(self, stream: DualStream, recorder: tp.Optional[AttentionRecorder] = None) -> DualStream:
        for layer in self.layers:
            stream = layer(stream, recorder)
        return stream


def merge_block(stream: DualStream, block: Block, k: int, guidance: tp.Optional[GuidanceParams] = None,
                recorder: tp.Optional[AttentionRecorder] = None) -> tp.Tuple[DualStream, MergeTrace]:
    """
    Merge at block entry, then run the block's layers on the shortened streams
    :param guidance: shared weight predictors, None for plain average pooling
    """
    # pylint: disable=too-many-arguments
    merged, trace = merge_streams(stream, k, guidance)
    return block(merged, recorder), trace


def extension_block(stream: DualStream, trace: MergeTrace, block: Block,
                    recorder: tp.Optional[AttentionRecorder] = None) -> DualStream:
    """
    Repeat up-sampling plus skip connection at block entry, then the block's layers
    """
    return block(extend_streams(stream, trace), recorder)


@dataclasses.dataclass
class EncoderOutput:
    stream: DualStream
    traces: tp.List[MergeTrace]
    recorder: tp.Optional[AttentionRecorder] = None


class HourglassEncoder:
    """
    n_stages M-Blocks then n_stages E-Blocks, paired last-in first-out, then a closing norm per stream.
    With merging disabled the same block stack runs at full length throughout.
    """

    def __init__(self, scope: ParameterScope, cfg: ModelConfig, merging: bool = True):
        self.cfg = cfg
        self.merging = merging
        # created in every variant so equal seeds give equal block parameters
        self.guidance = GuidanceParams(scope.scope('guidance'), cfg.d)
        self.merge_blocks = [Block(scope.scope(f'm{i}'), cfg, f'm{i}') for i in range(1, cfg.n_stages + 1)]
        self.extension_blocks = [Block(scope.scope(f'e{i}'), cfg, f'e{i}') for i in range(1, cfg.n_stages + 1)]
        self.text_norm = LayerNorm(scope.scope('final_norm.text'), cfg.d, cfg.ln_eps)
        self.visual_norm = LayerNorm(scope.scope('final_norm.visual'), cfg.d, cfg.ln_eps)

    @property
    def blocks(self) -> tp.List[Block]:
        return self.merge_blocks + self.extension_blocks

    def __call__(self, stream: DualStream, recorder: tp.Optional[AttentionRecorder] = None) -> EncoderOutput:
        if stream.text_length != self.cfg.L_t or stream.visual_length != self.cfg.L_v:
            raise ContractError(f"encoder expects {self.cfg.L_t}/{self.cfg.L_v} tokens, "
                                f"got {stream.text_length}/{stream.visual_length}")
        traces: tp.List[MergeTrace] = []
        if self.merging:
            guidance = self.guidance if self.cfg.merge_strategy == 'guided' else None
            for block in self.merge_blocks:
                stream, trace = merge_block(stream, block, self.cfg.k, guidance, recorder)
                traces.append(trace)
                debug(f"{block.name}: {stream.text_length}/{stream.visual_length} tokens")
            pending = list(traces)
            for block in self.extension_blocks:
                stream = extension_block(stream, pending.pop(), block, recorder)
        else:
            for block in self.blocks:
                stream = block(stream, recorder)
        return EncoderOutput(stream.with_states(self.text_norm(stream.text), self.visual_norm(stream.visual)),
                             traces, recorder)


def encode(streams: TokenStreams, embedder: Embedder, encoder: HourglassEncoder,
           record_attention: bool = False, text_ids: tp.Optional[np.ndarray] = None,
           visual_feature_mask: tp.Optional[np.ndarray] = None) -> EncoderOutput:
    """
    Embed a tokenized document and run the encoder over it
    :param record_attention: keep every layer's attention maps
    :param text_ids: replacement token ids for masked language modeling
    :param visual_feature_mask: visual positions whose features are zeroed
    """
    # pylint: disable=too-many-arguments
    recorder = AttentionRecorder() if record_attention else None
    return encoder(embedder.embed(streams, text_ids, visual_feature_mask), recorder)
