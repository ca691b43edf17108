from hourglassdoc.hourglass.merging import (GuidanceParams, MergeTrace, align, alignment_index, guidance_weights,
                                            uniform_weights, weighted_pool, merge_streams, extend_streams)
from hourglassdoc.hourglass.encoder import (Block, EncoderOutput, HourglassEncoder, merge_block, extension_block,
                                            encode)

__all__ = ["GuidanceParams", "MergeTrace", "align", "alignment_index", "guidance_weights", "uniform_weights",
           "weighted_pool", "merge_streams", "extend_streams",
           "Block", "EncoderOutput", "HourglassEncoder", "merge_block", "extension_block", "encode"]
