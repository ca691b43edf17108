from hourglassdoc.heads.entity import (EntityLabelingHead, BiaffineLinker, entity_features, entity_labeling,
                                       entity_linking, span_average_matrix)
from hourglassdoc.heads.gtr import GtrHead, gtr_labels, gtr_loss, N_RELATIONS, FAR, COINCIDENT
from hourglassdoc.heads.pretrain import (MvlmHead, MvlmTask, TiaHead, TiaTask, mvlm_task, tia_task, sop_pairs)

__all__ = ["EntityLabelingHead", "BiaffineLinker", "entity_features", "entity_labeling", "entity_linking",
           "span_average_matrix",
           "GtrHead", "gtr_labels", "gtr_loss", "N_RELATIONS", "FAR", "COINCIDENT",
           "MvlmHead", "MvlmTask", "TiaHead", "TiaTask", "mvlm_task", "tia_task", "sop_pairs"]
