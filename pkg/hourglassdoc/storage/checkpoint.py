"""
Binary model checkpoints: a versioned flat list of named float64 tensors
"""
import json
from logging import info
import numpy as np
from construct import Bytes, Const, ConstructError, Int8ul, Int16ul, Int32ul, PascalString, PrefixedArray, \
    Struct, this
from hourglassdoc.common import FORMAT_VERSION, ContractError, DimensionError, FormatError, ConfigError
from hourglassdoc.features.config import ModelConfig
from hourglassdoc.model import DocumentModel
from hourglassdoc.storage.base import BaseStorage

MAGIC = b'HGCK'
HEADER_STRUCT = Struct('magic' / Const(MAGIC),
                       'format_version' / Int32ul)
PARAMETER_STRUCT = Struct('name' / PascalString(Int16ul, 'utf8'),
                          'rank' / Int8ul,
                          'shape' / Int32ul[this.rank],
                          'data' / Bytes(lambda ctx: 8 * int(np.prod(ctx.shape, dtype=np.int64))))
CHECKPOINT_STRUCT = Struct('magic' / Const(MAGIC),
                           'format_version' / Int32ul,
                           'config' / PascalString(Int32ul, 'utf8'),
                           'parameters' / PrefixedArray(Int32ul, PARAMETER_STRUCT))
LITTLE_FLOAT64 = np.dtype('<f8')


class CheckpointStorage(BaseStorage):
    """
    Parameters of a DocumentModel together with its configuration
    """
    SUFFIX = '.hgck'

    def save(self, content: DocumentModel):
        header = dict(content.cfg.to_dict(), vanilla=content.vanilla)
        parameters = [{'name': name,
                       'rank': tensor.ndim,
                       'shape': list(tensor.shape),
                       'data': np.ascontiguousarray(tensor.numpy(), dtype=LITTLE_FLOAT64).tobytes()}
                      for name, tensor in content.store.items()]
        blob = CHECKPOINT_STRUCT.build({'format_version': FORMAT_VERSION,
                                        'config': json.dumps(header),
                                        'parameters': parameters})
        with open(self.path, 'wb') as stream:
            stream.write(blob)
        info(f"Saved {len(parameters)} parameter tensors to {self.path}")

    def load(self) -> DocumentModel:
        with open(self.path, 'rb') as stream:
            blob = stream.read()
        try:
            self.check_version(HEADER_STRUCT.parse(blob).format_version)
            parsed = CHECKPOINT_STRUCT.parse(blob)
        except ConstructError as err:
            raise FormatError(f"{self.path} is not a checkpoint: {err}") from err
        try:
            header = json.loads(parsed.config)
            vanilla = bool(header.pop('vanilla', False))
            model = DocumentModel(ModelConfig.from_dict(header), vanilla=vanilla)
        except (json.JSONDecodeError, AttributeError, ConfigError) as err:
            raise FormatError(f"{self.path}: bad embedded configuration: {err}") from err
        state = {}
        for parameter in parsed.parameters:
            values = np.frombuffer(parameter.data, dtype=LITTLE_FLOAT64)
            state[parameter.name] = values.reshape(tuple(parameter.shape)).astype(np.float64)
        try:
            model.store.load_state(state)
        except (ContractError, DimensionError) as err:
            raise FormatError(f"{self.path}: {err}") from err
        info(f"Loaded {len(state)} parameter tensors from {self.path}")
        return model


def save_checkpoint(path: str, model: DocumentModel):
    CheckpointStorage(path).save(model)


def load_checkpoint(path: str) -> DocumentModel:
    return CheckpointStorage(path).load()
