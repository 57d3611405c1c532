import json
import os
import shutil
import tempfile
import unittest

from app.core.config_manager import ConfigManager


class TestConfigManager(unittest.TestCase):
    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.schema = {"circle_nodes": 64, "quad_epsrel": 1e-11}

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_creates_default_file(self):
        manager = ConfigManager("core", self.schema, is_core=True, storage_dir=self.temp_dir)
        path = os.path.join(self.temp_dir, "configs", "core.json")
        self.assertEqual(manager.filepath, path)
        with open(path) as f:
            self.assertEqual(json.load(f), self.schema)

    def test_command_files_live_under_plugins(self):
        manager = ConfigManager("dos", {"timeout": 0}, storage_dir=self.temp_dir)
        self.assertEqual(manager.filepath, os.path.join(self.temp_dir, "configs", "plugins", "dos.json"))

    def test_saved_values_win_and_missing_keys_are_added(self):
        os.makedirs(os.path.join(self.temp_dir, "configs"))
        path = os.path.join(self.temp_dir, "configs", "core.json")
        with open(path, "w") as f:
            json.dump({"circle_nodes": 128}, f)
        manager = ConfigManager("core", self.schema, is_core=True, storage_dir=self.temp_dir)
        self.assertEqual(manager.get_int("circle_nodes"), 128)
        self.assertEqual(manager.get_float("quad_epsrel"), 1e-11)
        with open(path) as f:
            self.assertEqual(json.load(f), {"circle_nodes": 128, "quad_epsrel": 1e-11})

    def test_corrupt_file_falls_back(self):
        os.makedirs(os.path.join(self.temp_dir, "configs"))
        with open(os.path.join(self.temp_dir, "configs", "core.json"), "w") as f:
            f.write("{not json")
        manager = ConfigManager("core", self.schema, is_core=True, storage_dir=self.temp_dir)
        self.assertEqual(manager.config, self.schema)

    def test_non_numeric_value(self):
        manager = ConfigManager("core", {"circle_nodes": "many"}, is_core=True, storage_dir=self.temp_dir)
        self.assertEqual(manager.get_int("circle_nodes", 64), 64)


if __name__ == "__main__":
    unittest.main()
