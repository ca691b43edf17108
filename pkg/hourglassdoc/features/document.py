"""
Synthetic visually rich documents
"""
import dataclasses
import math
import typing as tp
from collections import Counter
import numpy as np
from hourglassdoc.common import (ANSWER, QUESTION, CATEGORIES, FIRST_WORD_ID, Box, ContractError,
                                 GenerationError, box_center)

ROW_HEIGHT = 24
MARGIN = 8
MIN_COLUMN_WIDTH = 48
MAX_WORDS = 4
CUE_CLASSES = 4


@dataclasses.dataclass(frozen=True)
class Word:
    token_id: int
    box: Box


@dataclasses.dataclass(frozen=True)
class Segment:
    """
    A text line: words[start:end] of the document
    """
    start: int
    end: int
    box: Box
    label: tp.Optional[int] = None

    def __len__(self):
        return self.end - self.start


@dataclasses.dataclass
class DocumentSample:
    page_w: int
    page_h: int
    words: tp.List[Word]
    segments: tp.List[Segment]
    links: tp.List[tp.Tuple[int, int]]
    sentence_order: tp.List[int] = dataclasses.field(default_factory=list)

    def __post_init__(self):
        if not self.sentence_order:
            self.sentence_order = reading_order([segment.box for segment in self.segments])
        self.validate()

    def validate(self):
        """
        Check box bounds and labels.
        Segments must partition the word list.
        """
        for box in [word.box for word in self.words] + [segment.box for segment in self.segments]:
            x0, y0, x1, y1 = box
            if not (0 <= x0 <= x1 <= self.page_w and 0 <= y0 <= y1 <= self.page_h):
                raise ContractError(f"box {box} lies outside the {self.page_w}x{self.page_h} page")
        position = 0
        for segment in sorted(self.segments, key=lambda seg: seg.start):
            if segment.start != position or segment.end < segment.start:
                raise ContractError(f"segments do not partition the word list at word {position}")
            position = segment.end
        if position != len(self.words):
            raise ContractError(f"segments cover {position} of {len(self.words)} words")
        for i, j in self.links:
            if not (0 <= i < len(self.segments) and 0 <= j < len(self.segments)):
                raise ContractError(f"link ({i}, {j}) references a missing segment")
        for segment in self.segments:
            if segment.label is not None and not 0 <= segment.label < len(CATEGORIES):
                raise ContractError(f"label {segment.label} is not one of {len(CATEGORIES)} categories")

    def segment_tokens(self, index: int) -> tp.List[int]:
        segment = self.segments[index]
        return [word.token_id for word in self.words[segment.start:segment.end]]

    @property
    def labels(self) -> tp.List[tp.Optional[int]]:
        return [segment.label for segment in self.segments]


def reading_order(boxes: tp.Sequence[Box]) -> tp.List[int]:
    """
    Top-to-bottom, left-to-right by box origin
    """
    return sorted(range(len(boxes)), key=lambda i: (boxes[i][1], boxes[i][0], i))


def quadrant(box: Box, page_w: int, page_h: int) -> int:
    center_x, center_y = box_center(box)
    return 2 * int(center_y >= page_h / 2) + int(center_x >= page_w / 2)


def label_rule(token_ids: tp.Sequence[int], box: Box, page_w: int, page_h: int) -> int:
    """
    Entity category of a segment: majority cue class of its tokens shifted by the box quadrant.
    Ties go to the smallest cue class.
    """
    counts = Counter(token_id % CUE_CLASSES for token_id in token_ids)
    majority = min(counts, key=lambda cue: (-counts[cue], cue))
    return (majority + quadrant(box, page_w, page_h)) % len(CATEGORIES)


def link_rule(boxes: tp.Sequence[Box], labels: tp.Sequence[tp.Optional[int]]) -> tp.List[tp.Tuple[int, int]]:
    """
    Connect every question to the nearest answer to its right or below
    """
    links = []
    centers = [box_center(box) for box in boxes]
    for i, label in enumerate(labels):
        if label != QUESTION:
            continue
        candidates = [j for j, other in enumerate(labels)
                      if other == ANSWER and (centers[j][0] > centers[i][0] or centers[j][1] > centers[i][1])]
        if candidates:
            nearest = min(candidates, key=lambda j: (math.dist(centers[i], centers[j]), j))
            links.append((i, nearest))
    return links


def generate_synthetic_document(seed: int, page_w: int, page_h: int, n_segments: int,
                                vocab: int) -> DocumentSample:
    """
    Lay out n_segments text lines in two columns, one row after the other.
    :param seed: generation seed, equal seeds give equal documents
    :param page_w: page width in pixels
    :param page_h: page height in pixels
    :param n_segments: number of segments, at least 1
    :param vocab: vocabulary size, at least 16
    """
    # pylint: disable=too-many-locals
    if n_segments < 1:
        raise GenerationError(f"need at least one segment, got {n_segments}")
    if vocab < 16:
        raise GenerationError(f"vocabulary of {vocab} is too small")
    rows = math.ceil(n_segments / 2)
    column_w = (page_w - 3 * MARGIN) // 2
    if column_w < MIN_COLUMN_WIDTH or 2 * MARGIN + rows * ROW_HEIGHT > page_h:
        raise GenerationError(f"cannot place {n_segments} segments on a {page_w}x{page_h} page")
    rng = np.random.default_rng(seed)
    words: tp.List[Word] = []
    segments: tp.List[Segment] = []
    word_ids = np.arange(FIRST_WORD_ID, vocab)
    for index in range(n_segments):
        row, column = divmod(index, 2)
        x0 = MARGIN + column * (column_w + MARGIN)
        y0 = MARGIN + row * ROW_HEIGHT
        width = int(rng.integers(MIN_COLUMN_WIDTH // 2, column_w + 1))
        box = (x0, y0, x0 + width, y0 + ROW_HEIGHT - 4)
        count = int(rng.integers(1, MAX_WORDS + 1))
        cue = int(rng.integers(CUE_CLASSES))
        cue_ids = word_ids[word_ids % CUE_CLASSES == cue]
        token_ids = [int(rng.choice(cue_ids)) if rng.random() < 0.75 else int(rng.choice(word_ids))
                     for _ in range(count)]
        start = len(words)
        step = width / count
        for slot, token_id in enumerate(token_ids):
            left = x0 + int(round(slot * step))
            right = x0 + int(round((slot + 1) * step))
            words.append(Word(token_id, (left, box[1], right, box[3])))
        segments.append(Segment(start, len(words), box, label_rule(token_ids, box, page_w, page_h)))
    links = link_rule([segment.box for segment in segments], [segment.label for segment in segments])
    return DocumentSample(page_w, page_h, words, segments, links)


def generate_corpus(n_documents: int, seed: int = 0, segments: tp.Tuple[int, int] = (4, 12),
                    page_w: int = 600, page_h: int = 800, vocab: int = 1024) -> tp.List[DocumentSample]:
    """
    Documents with seeds seed, seed+1, ... and segment counts drawn from [min, max]
    """
    # pylint: disable=too-many-arguments
    rng = np.random.default_rng(seed)
    counts = rng.integers(segments[0], segments[1] + 1, size=n_documents)
    return [generate_synthetic_document(seed + i, page_w, page_h, int(count), vocab)
            for i, count in enumerate(counts)]
