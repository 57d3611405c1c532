import os
import inspect
from typing import Any, Callable, Dict, Optional
from .config_manager import ConfigManager
from .config import STORAGE_DIR


class CommandRegistry:
    """Handlers and per-command settings for the CLI commands.

    Each plugins/<command>/backend.py registers one handler. The command name
    defaults to the plugin directory name, and the command's config_schema is
    persisted as a plugin config file.
    """
    def __init__(self, storage_dir: str = STORAGE_DIR):
        self.storage_dir = storage_dir
        self._handlers: Dict[str, Callable] = {}
        self._settings: Dict[str, ConfigManager] = {}

    def register(self, name: Optional[str] = None, config_schema: Dict[str, Any] = None):
        schema = config_schema or {}
        if name is None:
            frame = inspect.currentframe().f_back
            name = os.path.basename(os.path.dirname(frame.f_code.co_filename))

        def decorator(func):
            self._handlers[name] = func
            self._settings[name.lower()] = ConfigManager(
                name=name,
                default_schema=schema,
                is_core=False,
                storage_dir=self.storage_dir
            )
            return func
        return decorator

    def get_handler(self, name: str) -> Optional[Callable]:
        return self._handlers.get(name)

    def names(self):
        return sorted(self._handlers)

    def get_setting(self, name: str, key: str, default: Any = None) -> Any:
        if not name:
            return default
        manager = self._settings.get(name.lower())
        if manager is None:
            return default
        return manager.get(key, default)

    def get_timeout(self, name: str) -> Optional[float]:
        timeout = self.get_setting(name, "timeout")
        if timeout is not None and float(timeout) > 0:
            return float(timeout)
        return None

    def get_all_configs(self) -> Dict[str, Dict[str, Any]]:
        return {name: manager.config for name, manager in self._settings.items()}


command_registry = CommandRegistry()
