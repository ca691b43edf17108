"""
Pre-training label builders and losses: masked visual-language modeling,
sentence order prediction and text-image alignment.
The spatial relation task lives in gtr.py.
"""
import dataclasses
import itertools
import typing as tp
from logging import debug
import numpy as np
from hourglassdoc.common import FIRST_WORD_ID, MASK_ID, ContractError
from hourglassdoc.attention.params import Linear
from hourglassdoc.features.config import ModelConfig
from hourglassdoc.features.document import DocumentSample
from hourglassdoc.features.tokenizer import NO_SEGMENT, TokenStreams
from hourglassdoc.numerics import ParameterScope, Tensor, binary_cross_entropy, constant, cross_entropy, reshape, take

MASK_SHARE = 0.8
RANDOM_SHARE = 0.1


def _check_ratio(mask_ratio: float):
    if not 0.0 < mask_ratio < 1.0:
        raise ContractError(f"mask ratio must lie in (0, 1), got {mask_ratio}")


def sop_pairs(doc: DocumentSample, seed: int = 0) -> tp.List[tp.Tuple[int, int, int]]:
    """
    Adjacent segments in reading order are positives; reversed adjacent and
    non-adjacent pairs are negatives, down-sampled to the number of positives.
    :return: (i, j, label) triples, positives first
    """
    order = doc.sentence_order
    if len(order) < 2:
        return []
    positives = [(order[t], order[t + 1], 1) for t in range(len(order) - 1)]
    negatives = [(order[a], order[b], 0) for a, b in itertools.permutations(range(len(order)), 2) if b != a + 1]
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(len(negatives), size=min(len(positives), len(negatives)), replace=False))
    return positives + [negatives[index] for index in chosen]


class MvlmHead:
    def __init__(self, scope: ParameterScope, cfg: ModelConfig):
        self.decoder = Linear(scope.scope('decoder'), cfg.d, cfg.vocab)

    def __call__(self, states: Tensor) -> Tensor:
        return self.decoder(states)


@dataclasses.dataclass
class MvlmTask:
    """
    Masked text ids and the original ids at the selected positions.
    positions follow the selection order of the shuffle, not the text order.
    """
    masked_ids: np.ndarray
    positions: np.ndarray
    targets: np.ndarray

    @property
    def skipped(self) -> bool:
        return len(self.positions) == 0

    def loss(self, text: Tensor, head: MvlmHead) -> Tensor:
        """
        Cross-entropy over the masked positions of the full-length text output
        """
        if self.skipped:
            debug("no tokens selected for masked language modeling, skipping")
            return constant(0.0)
        return cross_entropy(head(take(text, self.positions)), self.targets)


def mvlm_task(streams: TokenStreams, mask_ratio: float = 0.15, seed: int = 0,
              vocab: tp.Optional[int] = None) -> MvlmTask:
    """
    Select round(mask_ratio·words) word positions; replace 80% with [MASK],
    10% with a random word id and keep 10%.
    Draw order: permutation of the candidates, split uniforms, random ids.
    :param vocab: vocabulary size for random replacements, defaults to the largest id + 1
    """
    _check_ratio(mask_ratio)
    ids = np.asarray(streams.text_ids, dtype=np.int64)
    vocab = vocab if vocab is not None else int(ids.max()) + 1
    candidates = np.flatnonzero(streams.text_mask & (ids >= FIRST_WORD_ID))
    count = int(round(mask_ratio * len(candidates)))
    rng = np.random.default_rng(seed)
    positions = rng.permutation(candidates)[:count]
    split = rng.random(count)
    random_ids = rng.integers(FIRST_WORD_ID, max(vocab, FIRST_WORD_ID + 1), count)
    masked = ids.copy()
    masked[positions] = np.where(split < MASK_SHARE, MASK_ID,
                                 np.where(split < MASK_SHARE + RANDOM_SHARE, random_ids, ids[positions]))
    return MvlmTask(masked, positions, ids[positions])


class TiaHead:
    def __init__(self, scope: ParameterScope, cfg: ModelConfig):
        self.classifier = Linear(scope.scope('classifier'), cfg.d, 1)

    def __call__(self, visual: Tensor) -> Tensor:
        return reshape(self.classifier(visual), (visual.shape[0],))


@dataclasses.dataclass
class TiaTask:
    """
    feature_mask zeroes the chosen visual features before projection;
    labels mark them and weights exclude padding and segments touched by text masking
    """
    feature_mask: np.ndarray
    labels: np.ndarray
    weights: np.ndarray

    def loss(self, visual: Tensor, head: TiaHead) -> Tensor:
        return binary_cross_entropy(head(visual), self.labels, self.weights)


def tia_task(streams: TokenStreams, mask_ratio: float = 0.15, seed: int = 0,
             mvlm: tp.Optional[MvlmTask] = None) -> TiaTask:
    """
    Mask round(mask_ratio·active) visual tokens
    :param mvlm: text masking of the same step; its segments do not contribute to the loss
    """
    _check_ratio(mask_ratio)
    active = np.flatnonzero(streams.visual_mask)
    count = int(round(mask_ratio * len(active)))
    rng = np.random.default_rng(seed)
    feature_mask = np.zeros(streams.visual_length, dtype=bool)
    feature_mask[rng.permutation(active)[:count]] = True
    weights = streams.visual_mask.astype(np.float64)
    if mvlm is not None and not mvlm.skipped:
        touched = set(streams.text_segment_ids[mvlm.positions].tolist()) - {NO_SEGMENT}
        weights[np.isin(streams.visual_segment_ids, sorted(touched))] = 0.0
    return TiaTask(feature_mask, feature_mask.astype(np.float64), weights)
