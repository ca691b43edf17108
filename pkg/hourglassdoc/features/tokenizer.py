"""
Document to padded text/visual token streams
"""
import dataclasses
import typing as tp
import numpy as np
from hourglassdoc.common import CLS_ID, PAD_ID, CapacityError
from hourglassdoc.features.config import ModelConfig
from hourglassdoc.features.document import DocumentSample

NO_SEGMENT = -1


@dataclasses.dataclass
class TokenStreams:
    """
    Padded model input. Visual position i carries segment i.
    """
    # pylint: disable=too-many-instance-attributes
    page_w: int
    page_h: int
    text_ids: np.ndarray
    text_boxes: np.ndarray
    text_segment_ids: np.ndarray
    text_mask: np.ndarray
    visual_boxes: np.ndarray
    visual_segment_ids: np.ndarray
    visual_mask: np.ndarray
    segment_positions: tp.List[tp.List[int]]
    segment_tokens: tp.List[tp.Tuple[int, ...]]

    @property
    def n_segments(self) -> int:
        return len(self.segment_positions)

    @property
    def text_length(self) -> int:
        return len(self.text_ids)

    @property
    def visual_length(self) -> int:
        return len(self.visual_segment_ids)


def tokenize_and_pad(doc: DocumentSample, cfg: ModelConfig) -> TokenStreams:
    """
    [CLS] + words in segment reading order + [PAD]s; one visual token per segment + [PAD]s
    :param doc: document sample
    :param cfg: model configuration providing L_t and L_v
    """
    # pylint: disable=too-many-locals
    n_words = len(doc.words)
    if n_words + 1 > cfg.L_t:
        raise CapacityError('text', n_words + 1, cfg.L_t)
    if len(doc.segments) > cfg.L_v:
        raise CapacityError('visual', len(doc.segments), cfg.L_v)
    text_ids = np.full(cfg.L_t, PAD_ID, dtype=np.int64)
    text_boxes = np.zeros((cfg.L_t, 4), dtype=np.int64)
    text_segment_ids = np.full(cfg.L_t, NO_SEGMENT, dtype=np.int64)
    text_mask = np.zeros(cfg.L_t, dtype=bool)
    text_ids[0] = CLS_ID
    text_boxes[0] = (0, 0, doc.page_w, doc.page_h)
    text_mask[0] = True
    segment_positions: tp.List[tp.List[int]] = [[] for _ in doc.segments]
    position = 1
    for index in doc.sentence_order:
        segment = doc.segments[index]
        for word in doc.words[segment.start:segment.end]:
            text_ids[position] = word.token_id
            text_boxes[position] = word.box
            text_segment_ids[position] = index
            text_mask[position] = True
            segment_positions[index].append(position)
            position += 1
    visual_boxes = np.zeros((cfg.L_v, 4), dtype=np.int64)
    visual_segment_ids = np.full(cfg.L_v, NO_SEGMENT, dtype=np.int64)
    visual_mask = np.zeros(cfg.L_v, dtype=bool)
    for index, segment in enumerate(doc.segments):
        visual_boxes[index] = segment.box
        visual_segment_ids[index] = index
        visual_mask[index] = True
    return TokenStreams(doc.page_w, doc.page_h, text_ids, text_boxes, text_segment_ids, text_mask,
                        visual_boxes, visual_segment_ids, visual_mask, segment_positions,
                        [tuple(doc.segment_tokens(i)) for i in range(len(doc.segments))])
