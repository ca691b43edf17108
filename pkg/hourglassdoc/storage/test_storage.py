import json
import os
import struct
import tempfile
import unittest
import numpy as np
from hourglassdoc.common import FormatError
from hourglassdoc.features.config import ModelConfig
from hourglassdoc.features.document import generate_corpus, generate_synthetic_document
from hourglassdoc.model import DocumentModel
from hourglassdoc.storage import CorpusStorage, document_to_dict, load_checkpoint, read_corpus, save_checkpoint, \
    write_corpus

CFG = ModelConfig(d=8, heads=2, d_ffn=12, k=2, n_stages=2, L_t=32, L_v=8, vocab=32, coord_buckets=8,
                  visual_feat_dim=6, gtr_pair_dim=3)


class TestCorpusStorage(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.directory.name, 'corpus.jsonl')

    def tearDown(self):
        self.directory.cleanup()

    def test_documents_survive(self):
        corpus = generate_corpus(5, seed=2, vocab=64)
        write_corpus(self.path, corpus)
        loaded = read_corpus(self.path)
        self.assertEqual([document_to_dict(doc) for doc in corpus], [document_to_dict(doc) for doc in loaded])
        self.assertEqual([doc.sentence_order for doc in corpus], [doc.sentence_order for doc in loaded])

    def test_line_format(self):
        doc = generate_synthetic_document(0, 600, 800, 2, 32)
        write_corpus(self.path, [doc])
        with open(self.path, encoding='utf-8') as stream:
            lines = stream.read().splitlines()
        self.assertEqual(1, len(lines))
        content = json.loads(lines[0])
        self.assertEqual(1, content['format_version'])
        self.assertEqual(['format_version', 'page_w', 'page_h', 'words', 'segments', 'links'], list(content))
        self.assertEqual({'id', 'box'}, set(content['words'][0]))

    def test_missing_label_is_optional(self):
        doc = document_to_dict(generate_synthetic_document(0, 600, 800, 2, 32))
        del doc['segments'][0]['label']
        self.write_lines([json.dumps(doc)])
        self.assertIsNone(read_corpus(self.path)[0].segments[0].label)

    def test_blank_lines_skipped(self):
        doc = document_to_dict(generate_synthetic_document(0, 600, 800, 2, 32))
        self.write_lines([json.dumps(doc), '', json.dumps(doc)])
        self.assertEqual(2, len(read_corpus(self.path)))

    def test_bad_version(self):
        doc = document_to_dict(generate_synthetic_document(0, 600, 800, 2, 32))
        doc['format_version'] = 2
        self.write_lines([json.dumps(doc)])
        with self.assertRaises(FormatError):
            read_corpus(self.path)

    def test_broken_json(self):
        self.write_lines(['{"page_w": 600'])
        with self.assertRaisesRegex(FormatError, ':1:'):
            read_corpus(self.path)

    def test_missing_field(self):
        doc = document_to_dict(generate_synthetic_document(0, 600, 800, 2, 32))
        del doc['words']
        self.write_lines([json.dumps(doc)])
        with self.assertRaises(FormatError):
            read_corpus(self.path)

    def test_invalid_document(self):
        doc = document_to_dict(generate_synthetic_document(0, 600, 800, 2, 32))
        doc['links'] = [[0, 7]]
        self.write_lines([json.dumps(doc)])
        with self.assertRaises(FormatError):
            CorpusStorage(self.path).load()

    def test_invalid_label(self):
        for label in (7, -1, '2', 1.5, True):
            with self.subTest(label=label):
                doc = document_to_dict(generate_synthetic_document(0, 600, 800, 2, 32))
                doc['segments'][0]['label'] = label
                self.write_lines([json.dumps(doc)])
                with self.assertRaisesRegex(FormatError, ':1:'):
                    read_corpus(self.path)

    def write_lines(self, lines):
        with open(self.path, 'w', encoding='utf-8') as stream:
            stream.write("\n".join(lines) + "\n")


class TestCheckpointStorage(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.directory.name, 'model.hgck')

    def tearDown(self):
        self.directory.cleanup()

    def test_parameters_survive(self):
        model = DocumentModel(CFG, seed=7)
        save_checkpoint(self.path, model)
        loaded = load_checkpoint(self.path)
        self.assertEqual(CFG, loaded.cfg)
        self.assertFalse(loaded.vanilla)
        self.assertEqual(model.store.names(), loaded.store.names())
        for name, tensor in model.store.items():
            np.testing.assert_array_equal(tensor.numpy(), loaded.store[name].numpy(), err_msg=name)
        doc = generate_synthetic_document(1, 600, 800, 3, CFG.vocab)
        self.assertEqual(model.labeling_loss(doc).item(), loaded.labeling_loss(doc).item())

    def test_vanilla_flag(self):
        save_checkpoint(self.path, DocumentModel(CFG, vanilla=True))
        self.assertTrue(load_checkpoint(self.path).vanilla)

    def test_header_layout(self):
        save_checkpoint(self.path, DocumentModel(CFG))
        with open(self.path, 'rb') as stream:
            blob = stream.read()
        self.assertEqual(b'HGCK', blob[:4])
        self.assertEqual((1,), struct.unpack('<I', blob[4:8]))
        length, = struct.unpack('<I', blob[8:12])
        config = json.loads(blob[12:12 + length].decode('utf-8'))
        self.assertEqual(CFG.d, config['d'])
        count, = struct.unpack('<I', blob[12 + length:16 + length])
        self.assertEqual(len(DocumentModel(CFG).store), count)

    def test_bad_magic(self):
        with open(self.path, 'wb') as stream:
            stream.write(b'NOPE' + bytes(16))
        with self.assertRaises(FormatError):
            load_checkpoint(self.path)

    def test_bad_version(self):
        save_checkpoint(self.path, DocumentModel(CFG))
        with open(self.path, 'r+b') as stream:
            stream.seek(4)
            stream.write(struct.pack('<I', 9))
        with self.assertRaisesRegex(FormatError, 'format_version'):
            load_checkpoint(self.path)

    def test_truncated(self):
        save_checkpoint(self.path, DocumentModel(CFG))
        with open(self.path, 'rb') as stream:
            blob = stream.read()
        with open(self.path, 'wb') as stream:
            stream.write(blob[:len(blob) // 2])
        with self.assertRaises(FormatError):
            load_checkpoint(self.path)

    def test_missing_file(self):
        with self.assertRaises(OSError):
            load_checkpoint(os.path.join(self.directory.name, 'absent.hgck'))


if __name__ == '__main__':
    unittest.main()
