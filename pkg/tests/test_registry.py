import shutil
import tempfile
import unittest

from app.core.registry import CommandRegistry


class TestCommandRegistry(unittest.TestCase):
    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.registry = CommandRegistry(storage_dir=self.temp_dir)

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_name_from_directory(self):
        @self.registry.register(config_schema={"timeout": 0})
        def handler(config):
            return config

        # registered from tests/test_registry.py
        self.assertIs(self.registry.get_handler("tests"), handler)

    def test_case_insensitive_settings(self):
        self.registry.register("FastCommand", {"timeout": 1.5, "default_grid": "0:1:3"})(lambda c: c)
        self.assertEqual(self.registry.get_timeout("FastCommand"), 1.5)
        self.assertEqual(self.registry.get_timeout("fastcommand"), 1.5)
        self.assertEqual(self.registry.get_timeout("FASTCOMMAND"), 1.5)
        self.assertEqual(self.registry.get_setting("fastCommand", "default_grid"), "0:1:3")

    def test_zero_timeout_means_none(self):
        self.registry.register("dos", {"timeout": 0})(lambda c: c)
        self.assertIsNone(self.registry.get_timeout("dos"))

    def test_unknown_command(self):
        self.assertIsNone(self.registry.get_timeout("NonExistentCommand"))
        self.assertIsNone(self.registry.get_handler("NonExistentCommand"))
        self.assertEqual(self.registry.get_setting("", "timeout", 3), 3)

    def test_configs(self):
        self.registry.register("green", {"timeout": 0})(lambda c: c)
        self.registry.register("corr2", {"timeout": 2})(lambda c: c)
        self.assertEqual(self.registry.names(), ["corr2", "green"])
        self.assertEqual(self.registry.get_all_configs(), {"green": {"timeout": 0}, "corr2": {"timeout": 2}})


if __name__ == "__main__":
    unittest.main()
