from hourglassdoc.runner import main
from hourglassdoc.model import DocumentModel
from hourglassdoc.features.config import ModelConfig, DESK_PRESET, BASE_PRESET

__all__ = ['main',
           'DocumentModel',
           'ModelConfig', 'DESK_PRESET', 'BASE_PRESET']
