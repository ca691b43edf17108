"""
Common code for all hourglassdoc modules
"""
import typing as tp

# Reserved token ids, words start at FIRST_WORD_ID
PAD_ID = 0
CLS_ID = 1
MASK_ID = 2
UNK_ID = 3
FIRST_WORD_ID = 4

CATEGORIES = ('other', 'header', 'question', 'answer')
QUESTION = CATEGORIES.index('question')
ANSWER = CATEGORIES.index('answer')

FORMAT_VERSION = 1

Box = tp.Tuple[int, int, int, int]
ZERO_BOX: Box = (0, 0, 0, 0)


class HourglassError(Exception):
    """
    Base of all errors raised by hourglassdoc
    """


class DimensionError(HourglassError, ValueError):
    """
    Operand shapes do not fit together
    """


class ContractError(HourglassError, ValueError):
    """
    A precondition of an operation is violated
    """


class CapacityError(ContractError):
    """
    A document does not fit into a padded stream
    """
    def __init__(self, stream: str, needed: int, available: int):
        super().__init__(f"{stream} stream overflow: {needed} positions needed, {available} available")
        self.stream = stream
        self.needed = needed
        self.available = available


class GenerationError(HourglassError):
    """
    A synthetic document cannot be laid out
    """


class ConfigError(HourglassError):
    """
    Invalid model configuration
    """


class FormatError(HourglassError):
    """
    Corrupt or unsupported file content
    """


def box_center(box: tp.Sequence[float]) -> tp.Tuple[float, float]:
    return (box[0] + box[2]) / 2.0, (box[1] + box[3]) / 2.0
