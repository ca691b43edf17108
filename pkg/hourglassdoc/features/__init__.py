from hourglassdoc.features.config import ModelConfig, DESK_PRESET, BASE_PRESET, PRESETS
from hourglassdoc.features.document import (Word, Segment, DocumentSample, generate_synthetic_document,
                                            generate_corpus, label_rule, link_rule, reading_order)
from hourglassdoc.features.tokenizer import TokenStreams, tokenize_and_pad, NO_SEGMENT
from hourglassdoc.features.stream import DualStream
from hourglassdoc.features.embedding import Embedder, quantize_boxes, synthetic_segment_feature

__all__ = ["ModelConfig", "DESK_PRESET", "BASE_PRESET", "PRESETS",
           "Word", "Segment", "DocumentSample", "generate_synthetic_document", "generate_corpus",
           "label_rule", "link_rule", "reading_order",
           "TokenStreams", "tokenize_and_pad", "NO_SEGMENT",
           "DualStream",
           "Embedder", "quantize_boxes", "synthetic_segment_feature"]
