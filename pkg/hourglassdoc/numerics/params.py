"""
Named parameter storage, initialization and the gradient-descent optimizer
"""
import typing as tp
from collections import OrderedDict
from logging import debug
import numpy as np
from hourglassdoc.common import ContractError, DimensionError
from hourglassdoc.numerics.tensor import Tensor


class ParameterStore:
    """
    Flat, ordered mapping of dotted names to trainable tensors.
    Creation order is fixed by the model code, so a seed fully determines initialization.
    """

    def __init__(self, seed: int = 0, meta: bool = False):
        """
        :param seed: initialization seed
        :param meta: create shape-only parameters (dry runs at full scale)
        """
        self.meta = meta
        self.__rng = np.random.default_rng(seed)
        self.__params: tp.Dict[str, Tensor] = OrderedDict()

    def create(self, name: str, shape: tp.Sequence[int], init: str = 'normal',
               std: tp.Optional[float] = None) -> Tensor:
        """
        Create and register a parameter
        :param name: unique dotted name
        :param shape: tensor shape
        :param init: 'normal', 'zeros' or 'ones'
        :param std: standard deviation for 'normal', defaults to 1/sqrt(shape[0])
        """
        # pylint: disable=too-many-arguments
        if name in self.__params:
            raise ContractError(f"parameter {name} already exists")
        shape = tuple(int(dim) for dim in shape)
        if self.meta:
            tensor = Tensor.meta(shape, name=name)
        else:
            if init == 'zeros':
                data = np.zeros(shape)
            elif init == 'ones':
                data = np.ones(shape)
            elif init == 'normal':
                scale = std if std is not None else 1.0 / np.sqrt(max(shape[0], 1))
                data = self.__rng.normal(0.0, scale, size=shape)
            else:
                raise ContractError(f"unknown initializer {init}")
            tensor = Tensor(data, requires_grad=True, name=name)
        self.__params[name] = tensor
        return tensor

    def scope(self, prefix: str) -> 'ParameterScope':
        return ParameterScope(self, prefix)

    def __getitem__(self, name: str) -> Tensor:
        return self.__params[name]

    def __contains__(self, name: str) -> bool:
        return name in self.__params

    def __len__(self) -> int:
        return len(self.__params)

    def items(self) -> tp.ItemsView:
        return self.__params.items()

    def names(self) -> tp.List[str]:
        return list(self.__params)

    @property
    def num_parameters(self) -> int:
        return sum(tensor.size for tensor in self.__params.values())

    def zero_grad(self):
        for tensor in self.__params.values():
            tensor.zero_grad()

    def state(self) -> tp.Dict[str, np.ndarray]:
        """
        Copy of all parameter values
        """
        return OrderedDict((name, tensor.numpy().copy()) for name, tensor in self.__params.items())

    def load_state(self, state: tp.Mapping[str, np.ndarray]):
        """
        Overwrite parameter values in place
        :param state: mapping of names to arrays with matching shapes
        """
        missing = set(self.__params) - set(state)
        if missing:
            raise ContractError(f"state lacks parameters: {', '.join(sorted(missing))}")
        for name, tensor in self.__params.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != tensor.shape:
                raise DimensionError(f"{name}: stored shape {value.shape} does not match {tensor.shape}")
            tensor.data = value.copy()
        unused = set(state) - set(self.__params)
        if unused:
            debug(f"Ignoring {len(unused)} stored parameters without counterpart.")


class ParameterScope:
    """
    Prefixing view on a ParameterStore
    """

    def __init__(self, store: ParameterStore, prefix: str):
        self.store = store
        self.prefix = prefix

    def create(self, name: str, shape: tp.Sequence[int], init: str = 'normal',
               std: tp.Optional[float] = None) -> Tensor:
        # pylint: disable=too-many-arguments
        return self.store.create(f"{self.prefix}.{name}", shape, init, std)

    def scope(self, prefix: str) -> 'ParameterScope':
        return ParameterScope(self.store, f"{self.prefix}.{prefix}")

    @property
    def meta(self) -> bool:
        return self.store.meta


class SGD:
    """
    Gradient descent with fixed learning rate and optional momentum
    """

    def __init__(self, store: ParameterStore, lr: float, momentum: float = 0.0):
        if lr < 0:
            raise ContractError(f"learning rate must not be negative, got {lr}")
        self.store = store
        self.lr = lr
        self.momentum = momentum
        self.__velocity: tp.Dict[str, np.ndarray] = {}

    def zero_grad(self):
        self.store.zero_grad()

    def step(self):
        for name, tensor in self.store.items():
            if tensor.grad is None:
                continue
            update = tensor.grad
            if self.momentum:
                velocity = self.__velocity.get(name)
                velocity = update.copy() if velocity is None else self.momentum * velocity + update
                self.__velocity[name] = velocity
                update = velocity
            tensor.data = tensor.data - self.lr * update
