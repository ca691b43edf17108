"""
The document model: embedder, hourglass encoder and task heads over one parameter store
"""
import typing as tp
import numpy as np
from hourglassdoc.common import ContractError
from hourglassdoc.features.config import ModelConfig
from hourglassdoc.features.document import DocumentSample
from hourglassdoc.features.embedding import Embedder
from hourglassdoc.features.stream import DualStream
from hourglassdoc.features.tokenizer import TokenStreams, tokenize_and_pad
from hourglassdoc.heads.entity import BiaffineLinker, EntityLabelingHead, entity_features
from hourglassdoc.heads.gtr import GtrHead, gtr_labels, gtr_loss
from hourglassdoc.heads.pretrain import MvlmHead, TiaHead, mvlm_task, sop_pairs, tia_task
from hourglassdoc.hourglass.encoder import EncoderOutput, HourglassEncoder, encode
from hourglassdoc.numerics import Graph, ParameterStore, Tensor, add, constant, take

PRETRAIN_TASKS = ('mvlm', 'gtr', 'sop', 'tia')


class DocumentModel:
    """
    All parameters of one model.
    vanilla keeps the block stack but runs every block at full length.
    meta builds shape-only parameters for dry runs at any scale.
    """

    def __init__(self, cfg: ModelConfig, vanilla: bool = False, meta: bool = False,
                 seed: tp.Optional[int] = None):
        self.cfg = cfg
        self.vanilla = vanilla
        self.store = ParameterStore(cfg.seed if seed is None else seed, meta=meta)
        self.embedder = Embedder(self.store.scope('embedding'), cfg)
        self.encoder = HourglassEncoder(self.store.scope('encoder'), cfg, merging=not vanilla)
        self.labeling = EntityLabelingHead(self.store.scope('labeling'), cfg)
        self.linking = BiaffineLinker(self.store.scope('linking'), cfg)
        self.mvlm = MvlmHead(self.store.scope('mvlm'), cfg)
        self.gtr = GtrHead(self.store.scope('gtr'), cfg)
        self.tia = TiaHead(self.store.scope('tia'), cfg)

    def encode(self, streams: TokenStreams, record_attention: bool = False,
               text_ids: tp.Optional[np.ndarray] = None,
               visual_feature_mask: tp.Optional[np.ndarray] = None) -> EncoderOutput:
        return encode(streams, self.embedder, self.encoder, record_attention, text_ids, visual_feature_mask)

    def dry_run(self, graph: Graph) -> EncoderOutput:
        """
        Shape-only encoder forward recorded on graph; embedding lookups cost no MACs
        """
        with graph:
            return self.encoder(DualStream.meta(self.cfg.L_t, self.cfg.L_v, self.cfg.d))

    def entity_features(self, doc: DocumentSample, streams: tp.Optional[TokenStreams] = None) -> Tensor:
        streams = streams if streams is not None else tokenize_and_pad(doc, self.cfg)
        return entity_features(self.encode(streams).stream, streams.segment_positions)

    def labeling_loss(self, doc: DocumentSample) -> Tensor:
        return self.labeling.loss(self.entity_features(doc), doc.labels)

    def predict_labels(self, doc: DocumentSample) -> tp.List[int]:
        probabilities = self.labeling.probabilities(self.entity_features(doc)).numpy()
        return [int(label) for label in np.argmax(probabilities, axis=1)]

    def linking_loss(self, doc: DocumentSample) -> Tensor:
        return self.linking.loss(self.entity_features(doc), doc.links)

    def link_scores(self, doc: DocumentSample) -> np.ndarray:
        """
        Directed link score of every segment pair, N×N
        """
        return self.linking.pair_scores(self.entity_features(doc)).numpy()

    def pretrain_losses(self, doc: DocumentSample, seed: int, mask_ratio: float = 0.15) -> tp.Dict[str, Tensor]:
        """
        The four pre-training losses of one document on a shared forward pass
        """
        if not doc.segments:
            raise ContractError("pre-training needs at least one segment")
        streams = tokenize_and_pad(doc, self.cfg)
        mvlm = mvlm_task(streams, mask_ratio, seed, self.cfg.vocab)
        tia = tia_task(streams, mask_ratio, seed + 1, mvlm)
        stream = self.encode(streams, text_ids=mvlm.masked_ids, visual_feature_mask=tia.feature_mask).stream
        segments = take(stream.visual, np.arange(len(doc.segments)))
        relations = gtr_labels([segment.box for segment in doc.segments], doc.page_w, doc.page_h)
        pairs = sop_pairs(doc, seed)
        sop = self.linking.pairs_loss(entity_features(stream, streams.segment_positions), pairs) if pairs \
            else constant(0.0)
        return {'mvlm': mvlm.loss(stream.text, self.mvlm),
                'gtr': gtr_loss(segments, relations, self.gtr),
                'sop': sop,
                'tia': tia.loss(stream.visual, self.tia)}


def total_loss(losses: tp.Mapping[str, Tensor]) -> Tensor:
    """
    Unweighted sum of task losses
    """
    values = list(losses.values())
    total = values[0]
    for value in values[1:]:
        total = add(total, value)
    return total
