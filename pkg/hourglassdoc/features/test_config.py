import unittest
import yaml
from yaml import load, FullLoader
from hourglassdoc.common import ConfigError
from hourglassdoc.features.config import BASE_PRESET, DESK_PRESET, ModelConfig


class TestModelConfig(unittest.TestCase):
    def test_dict_round_trip(self):
        for cfg in (DESK_PRESET, BASE_PRESET):
            self.assertEqual(cfg, ModelConfig.from_dict(cfg.to_dict()))

    def test_yaml_exponent_without_dot(self):
        content = load("d: 32\nheads: 4\nln_eps: 1e-6\n", Loader=FullLoader)
        self.assertEqual('1e-6', content['ln_eps'])
        cfg = ModelConfig.from_dict(content)
        self.assertEqual(1e-6, cfg.ln_eps)
        self.assertIsInstance(cfg.ln_eps, float)

    def test_dumped_yaml(self):
        dumped = yaml.dump(DESK_PRESET.to_dict(), Dumper=yaml.SafeDumper, sort_keys=False)
        self.assertEqual(DESK_PRESET, ModelConfig.from_dict(load(dumped, Loader=FullLoader)))

    def test_numeric_string(self):
        self.assertEqual(48, ModelConfig.from_dict({'d': '48', 'heads': 4}).d)

    def test_non_numeric_string(self):
        with self.assertRaisesRegex(ConfigError, 'ln_eps'):
            ModelConfig.from_dict({'ln_eps': 'tiny'})

    def test_unknown_parameter(self):
        with self.assertLogs(level='WARNING') as logs:
            cfg = ModelConfig.from_dict({'d': 32, 'dropout': 0.1})
        self.assertEqual(32, cfg.d)
        self.assertIn('dropout', logs.output[0])

    def test_wrong_version(self):
        with self.assertRaises(ConfigError):
            ModelConfig.from_dict({'format_version': 2})

    def test_invalid_values(self):
        for changes in ({'d': 30, 'heads': 4}, {'k': 3}, {'merge_strategy': 'max'}, {'heads': [4]}):
            with self.subTest(changes=changes):
                with self.assertRaises(ConfigError):
                    ModelConfig.from_dict(changes)


if __name__ == '__main__':
    unittest.main()
