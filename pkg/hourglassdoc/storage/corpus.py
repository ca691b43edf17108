"""
Document corpora as JSON lines
"""
import json
import typing as tp
from logging import info
from hourglassdoc.common import FORMAT_VERSION, ContractError, FormatError
from hourglassdoc.features.document import DocumentSample, Segment, Word
from hourglassdoc.storage.base import BaseStorage


def document_to_dict(doc: DocumentSample) -> tp.Dict[str, tp.Any]:
    segments = []
    for segment in doc.segments:
        entry = {'start': segment.start, 'end': segment.end, 'box': list(segment.box)}
        if segment.label is not None:
            entry['label'] = segment.label
        segments.append(entry)
    return {'format_version': FORMAT_VERSION,
            'page_w': doc.page_w,
            'page_h': doc.page_h,
            'words': [{'id': word.token_id, 'box': list(word.box)} for word in doc.words],
            'segments': segments,
            'links': [[i, j] for i, j in doc.links]}


def _label(segment: tp.Mapping[str, tp.Any]) -> tp.Optional[int]:
    label = segment.get('label')
    if label is not None and (isinstance(label, bool) or not isinstance(label, int)):
        raise FormatError(f"segment label {label!r} is not an integer")
    return label


def document_from_dict(content: tp.Mapping[str, tp.Any]) -> DocumentSample:
    """
    :raises FormatError: missing fields or a document that violates its own invariants
    """
    try:
        words = [Word(int(word['id']), tuple(int(v) for v in word['box'])) for word in content['words']]
        segments = [Segment(int(segment['start']), int(segment['end']), tuple(int(v) for v in segment['box']),
                            _label(segment)) for segment in content['segments']]
        links = [(int(i), int(j)) for i, j in content['links']]
        return DocumentSample(int(content['page_w']), int(content['page_h']), words, segments, links)
    except KeyError as err:
        raise FormatError(f"document lacks field {err}") from err
    except (TypeError, ValueError) as err:
        raise FormatError(f"malformed document: {err}") from err


class CorpusStorage(BaseStorage):
    """
    One document per line, each carrying its format_version
    """
    SUFFIX = '.jsonl'

    def save(self, content: tp.Sequence[DocumentSample]):
        with open(self.path, 'w', encoding='utf-8') as stream:
            for doc in content:
                stream.write(json.dumps(document_to_dict(doc)) + "\n")
        info(f"Wrote {len(content)} documents to {self.path}")

    def load(self) -> tp.List[DocumentSample]:
        corpus = []
        with open(self.path, encoding='utf-8') as stream:
            for number, line in enumerate(stream, start=1):
                if not line.strip():
                    continue
                try:
                    content = json.loads(line)
                except json.JSONDecodeError as err:
                    raise FormatError(f"{self.path}:{number}: {err}") from err
                if not isinstance(content, dict):
                    raise FormatError(f"{self.path}:{number}: expected a JSON object")
                self.check_version(content.get('format_version'), f":{number}")
                try:
                    corpus.append(document_from_dict(content))
                except (FormatError, ContractError) as err:
                    raise FormatError(f"{self.path}:{number}: {err}") from err
        info(f"Read {len(corpus)} documents from {self.path}")
        return corpus


def write_corpus(path: str, corpus: tp.Sequence[DocumentSample]):
    CorpusStorage(path).save(corpus)


def read_corpus(path: str) -> tp.List[DocumentSample]:
    return CorpusStorage(path).load()
