"""
Base class for file formats
"""
import typing as tp
from abc import ABC, abstractmethod
from logging import debug
from hourglassdoc.common import FORMAT_VERSION, FormatError


class BaseStorage(ABC):
    SUFFIX = ''

    def __init__(self, path: str):
        """
        File format base class
        :param path: location of the file
        """
        self.path = path
        if self.SUFFIX and not path.endswith(self.SUFFIX):
            debug(f"{path} does not end in {self.SUFFIX}")

    @abstractmethod
    def save(self, content: tp.Any):
        raise NotImplementedError("Abstract Base for save")

    @abstractmethod
    def load(self) -> tp.Any:
        raise NotImplementedError("Abstract Base for load")

    def check_version(self, version: tp.Any, where: str = ''):
        if version != FORMAT_VERSION:
            raise FormatError(f"{self.path}{where}: unsupported format_version {version}")
        debug(f"{self.path}{where}: format_version {version}")
