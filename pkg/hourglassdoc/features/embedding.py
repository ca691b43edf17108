"""
Text, layout and synthetic visual embeddings
"""
import hashlib
import typing as tp
from logging import warning
import numpy as np
from hourglassdoc.common import ContractError
from hourglassdoc.features.config import ModelConfig
from hourglassdoc.features.stream import DualStream
from hourglassdoc.features.tokenizer import TokenStreams
from hourglassdoc.numerics import ParameterScope, Tensor, add, matmul, take

LAYOUT_TABLES = ('x0', 'y0', 'x1', 'y1')


def synthetic_segment_feature(token_ids: tp.Sequence[int], dim: int) -> np.ndarray:
    """
    Stand-in for an ROI feature: a fixed pseudo-random vector keyed by the segment's tokens
    """
    digest = hashlib.blake2b(np.asarray(token_ids, dtype='<i8').tobytes(), digest_size=8).digest()
    return np.random.default_rng(int.from_bytes(digest, 'little')).normal(size=dim)


def quantize_boxes(boxes: np.ndarray, page_w: int, page_h: int, buckets: int) -> tp.Tuple[np.ndarray, int]:
    """
    Map pixel coordinates to floor(coord / page_size * buckets), clamped to [0, buckets - 1]
    :return: bucket array with the boxes' shape and the number of clamped out-of-page coordinates
    """
    boxes = np.asarray(boxes, dtype=np.float64)
    scale = np.array([page_w, page_h, page_w, page_h], dtype=np.float64)
    outside = int(np.count_nonzero((boxes < 0) | (boxes > scale)))
    raw = np.floor(boxes / scale * buckets).astype(np.int64)
    return np.clip(raw, 0, buckets - 1), outside


class Embedder:
    """
    Turns TokenStreams into the initial DualStream
    """

    def __init__(self, scope: ParameterScope, cfg: ModelConfig):
        self.cfg = cfg
        self.word = scope.create('word', (cfg.vocab, cfg.d), std=cfg.init_std)
        self.position = scope.create('position', (cfg.L_t, cfg.d), std=cfg.init_std)
        self.layout = [scope.create(f'layout_{name}', (cfg.coord_buckets, cfg.d), std=cfg.init_std)
                       for name in LAYOUT_TABLES]
        self.segment = scope.create('segment', (cfg.L_v + 1, cfg.d), std=cfg.init_std)
        self.visual_proj = scope.create('visual_proj', (cfg.visual_feat_dim, cfg.d))
        self.visual_bias = scope.create('visual_bias', (cfg.d,), init='zeros')
        self.clamped_coordinates = 0

    def _layout(self, boxes: np.ndarray, page_w: int, page_h: int) -> Tensor:
        buckets, outside = quantize_boxes(boxes, page_w, page_h, self.cfg.coord_buckets)
        if outside:
            self.clamped_coordinates += outside
            warning(f"Clamped {outside} coordinates outside the {page_w}x{page_h} page "
                    f"({self.clamped_coordinates} so far).")
        total = take(self.layout[0], buckets[:, 0])
        for table, column in zip(self.layout[1:], range(1, 4)):
            total = add(total, take(table, buckets[:, column]))
        return total

    def visual_features(self, streams: TokenStreams,
                        feature_mask: tp.Optional[np.ndarray] = None) -> np.ndarray:
        """
        Synthetic per-segment features, zero for [PAD] and for positions selected by feature_mask
        """
        features = np.zeros((streams.visual_length, self.cfg.visual_feat_dim))
        for index, tokens in enumerate(streams.segment_tokens):
            features[index] = synthetic_segment_feature(tokens, self.cfg.visual_feat_dim)
        if feature_mask is not None:
            features[np.asarray(feature_mask, dtype=bool)] = 0.0
        return features

    def embed(self, streams: TokenStreams, text_ids: tp.Optional[np.ndarray] = None,
              visual_feature_mask: tp.Optional[np.ndarray] = None) -> DualStream:
        """
        :param streams: tokenized document
        :param text_ids: replacement token ids (masked language modeling)
        :param visual_feature_mask: visual positions whose features are zeroed (image masking)
        """
        ids = streams.text_ids if text_ids is None else np.asarray(text_ids, dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= self.cfg.vocab):
            raise ContractError(f"token ids must lie in [0, {self.cfg.vocab})")
        if streams.text_length != self.cfg.L_t or streams.visual_length != self.cfg.L_v:
            raise ContractError(f"streams of length {streams.text_length}/{streams.visual_length} do not match "
                                f"the configured {self.cfg.L_t}/{self.cfg.L_v}")
        text = add(take(self.word, ids), take(self.position, np.arange(streams.text_length)))
        text = add(text, self._layout(streams.text_boxes, streams.page_w, streams.page_h))
        text = add(text, take(self.segment, streams.text_segment_ids + 1))
        features = Tensor(self.visual_features(streams, visual_feature_mask))
        visual = add(matmul(features, self.visual_proj), self.visual_bias)
        visual = add(visual, self._layout(streams.visual_boxes, streams.page_w, streams.page_h))
        visual = add(visual, take(self.segment, streams.visual_segment_ids + 1))
        return DualStream(text, visual, streams.text_segment_ids.copy(), streams.visual_segment_ids.copy(),
                          streams.text_mask.copy(), streams.visual_mask.copy())
