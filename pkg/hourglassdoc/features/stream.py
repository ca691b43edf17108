"""
Paired text/visual hidden states
"""
import dataclasses
import numpy as np
from hourglassdoc.common import ContractError
from hourglassdoc.numerics import Tensor


@dataclasses.dataclass
class DualStream:
    text: Tensor
    visual: Tensor
    text_segment_ids: np.ndarray
    visual_segment_ids: np.ndarray
    text_mask: np.ndarray
    visual_mask: np.ndarray

    def __post_init__(self):
        if self.text.shape[0] != len(self.text_segment_ids) or self.text.shape[0] != len(self.text_mask):
            raise ContractError(f"text states {self.text.shape} do not match their segment ids/mask")
        if self.visual.shape[0] != len(self.visual_segment_ids) or self.visual.shape[0] != len(self.visual_mask):
            raise ContractError(f"visual states {self.visual.shape} do not match their segment ids/mask")
        if self.text.shape[0] % self.visual.shape[0]:
            raise ContractError(f"text length {self.text.shape[0]} is not a multiple of "
                                f"visual length {self.visual.shape[0]}")

    @property
    def ratio(self) -> int:
        return self.text.shape[0] // self.visual.shape[0]

    @property
    def text_length(self) -> int:
        return self.text.shape[0]

    @property
    def visual_length(self) -> int:
        return self.visual.shape[0]

    def with_states(self, text: Tensor, visual: Tensor) -> 'DualStream':
        """
        Same token metadata, new hidden states
        """
        return dataclasses.replace(self, text=text, visual=visual)

    @classmethod
    def meta(cls, text_length: int, visual_length: int, d: int) -> 'DualStream':
        """
        Shape-only stream with every token active, for dry runs
        """
        return cls(Tensor.meta((text_length, d)), Tensor.meta((visual_length, d)),
                   np.arange(text_length) // max(text_length // visual_length, 1), np.arange(visual_length),
                   np.ones(text_length, dtype=bool), np.ones(visual_length, dtype=bool))
