from hourglassdoc.storage.base import BaseStorage
from hourglassdoc.storage.corpus import CorpusStorage, read_corpus, write_corpus, document_from_dict, document_to_dict
from hourglassdoc.storage.checkpoint import CheckpointStorage, load_checkpoint, save_checkpoint

__all__ = ["BaseStorage",
           "CorpusStorage", "read_corpus", "write_corpus", "document_from_dict", "document_to_dict",
           "CheckpointStorage", "load_checkpoint", "save_checkpoint"]
