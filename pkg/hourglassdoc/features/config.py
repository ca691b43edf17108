"""
Model configuration and presets
"""
import dataclasses
import typing as tp
from logging import warning
from hourglassdoc.common import ConfigError, FORMAT_VERSION, FIRST_WORD_ID

MERGE_STRATEGIES = ('guided', 'average')
CROSS_LAYERS = ('sca', 'sa')


def _coerce(name: str, default: tp.Any, value: tp.Any) -> tp.Any:
    """
    Numbers that a YAML 1.1 resolver left as strings, such as 1e-6, become numbers again
    """
    if not isinstance(value, str) or isinstance(default, str):
        return value
    try:
        return type(default)(value)
    except ValueError as err:
        raise ConfigError(f"{name} must be a {type(default).__name__}, got '{value}'") from err


@dataclasses.dataclass(frozen=True)
class ModelConfig:
    """
    Hyper-parameters of the hourglass model
    """
    # pylint: disable=too-many-instance-attributes
    d: int = 64
    heads: int = 4
    d_ffn: int = 256
    k: int = 2
    n_stages: int = 3
    L_t: int = 128  # pylint: disable=invalid-name
    L_v: int = 32  # pylint: disable=invalid-name
    vocab: int = 1024
    coord_buckets: int = 64
    seed: int = 0
    visual_feat_dim: int = 32
    merge_strategy: str = 'guided'
    cross_layer: str = 'sca'
    n_categories: int = 4
    gtr_pair_dim: int = 16
    ln_eps: float = 1e-6
    init_std: float = 0.02

    def __post_init__(self):
        for name in ('d', 'heads', 'd_ffn', 'k', 'L_t', 'L_v', 'vocab', 'coord_buckets',
                     'visual_feat_dim', 'n_categories', 'gtr_pair_dim'):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.n_stages < 0:
            raise ConfigError(f"n_stages must not be negative, got {self.n_stages}")
        if self.d % self.heads:
            raise ConfigError(f"d={self.d} is not divisible by heads={self.heads}")
        shrink = self.k ** self.n_stages
        if self.L_t % shrink or self.L_v % shrink:
            raise ConfigError(f"L_t={self.L_t} and L_v={self.L_v} must be divisible by k^n_stages={shrink}")
        if self.L_t % self.L_v:
            raise ConfigError(f"L_t={self.L_t} must be an integral multiple of L_v={self.L_v}")
        if self.vocab < 16 or self.vocab <= FIRST_WORD_ID:
            raise ConfigError(f"vocab must be at least 16, got {self.vocab}")
        if self.merge_strategy not in MERGE_STRATEGIES:
            raise ConfigError(f"merge_strategy must be one of {', '.join(MERGE_STRATEGIES)}")
        if self.cross_layer not in CROSS_LAYERS:
            raise ConfigError(f"cross_layer must be one of {', '.join(CROSS_LAYERS)}")
        if self.ln_eps <= 0:
            raise ConfigError("ln_eps must be positive")

    @property
    def ratio(self) -> int:
        return self.L_t // self.L_v

    @property
    def head_dim(self) -> int:
        return self.d // self.heads

    def stage_lengths(self) -> tp.List[tp.Tuple[int, int]]:
        """
        (text, visual) lengths at which each block's layers run, M-Blocks first
        """
        merged = [(self.L_t // self.k ** i, self.L_v // self.k ** i) for i in range(1, self.n_stages + 1)]
        extended = [(self.L_t // self.k ** i, self.L_v // self.k ** i) for i in range(self.n_stages - 1, -1, -1)]
        return merged + extended

    def replace(self, **changes) -> 'ModelConfig':
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> tp.Dict[str, tp.Any]:
        content = {'format_version': FORMAT_VERSION}
        content.update(dataclasses.asdict(self))
        return content

    @classmethod
    def from_dict(cls, content: tp.Mapping[str, tp.Any]) -> 'ModelConfig':
        """
        Build a config from a parsed file, unknown keys are reported and dropped
        :param content: dict from a JSON or YAML config file
        """
        content = dict(content)
        version = content.pop('format_version', FORMAT_VERSION)
        if version != FORMAT_VERSION:
            raise ConfigError(f"unsupported config format_version {version}")
        known = {field.name for field in dataclasses.fields(cls)}
        unknown = sorted(set(content) - known)
        if unknown:
            warning(f'Unknown parameter{"s" if len(unknown) > 1 else ""}: {", ".join(unknown)}')
        try:
            return cls(**{field.name: _coerce(field.name, field.default, content[field.name])
                          for field in dataclasses.fields(cls) if field.name in content})
        except TypeError as err:
            raise ConfigError(str(err)) from err


DESK_PRESET = ModelConfig()
BASE_PRESET = ModelConfig(d=768, heads=12, d_ffn=3072, k=2, n_stages=3, L_t=512, L_v=128, vocab=30522,
                           coord_buckets=1000, visual_feat_dim=1024)
PRESETS = {'desk': DESK_PRESET, 'base': BASE_PRESET}
