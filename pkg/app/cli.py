import argparse
import importlib
import json
import logging
import os
import re
import sys
import traceback
from typing import List, Optional, Tuple

from loguru import logger
from pydantic import ValidationError

import plugins
from kernel.converter import write_records
from kernel.execution import run_task_in_process
from .core.errors import AndersonCorrError, ConfigError
from .core.registry import command_registry
from .models.schemas import COMMANDS, RunConfig


class InterceptHandler(logging.Handler):
    def emit(self, record):
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        frame, depth = logging.currentframe(), 2
        while frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back
            depth += 1

        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


def setup_logging(verbose: bool = False):
    logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)
    logging.captureWarnings(True)
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "INFO")


def load_plugins():
    plugins_path = plugins.__path__[0] if hasattr(plugins, "__path__") else os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "plugins")
    if not os.path.exists(plugins_path):
        return
    for item in sorted(os.listdir(plugins_path)):
        item_path = os.path.join(plugins_path, item)
        if os.path.isdir(item_path):
            backend_file = os.path.join(item_path, "backend.py")
            if os.path.exists(backend_file):
                try:
                    importlib.import_module(f"plugins.{item}.backend")
                except Exception as e:
                    logger.error(f"Error loading plugin backend {item}: {e}")
                    logger.error(traceback.format_exc())


# flags whose values may start with "-": negative grids, complex points, sign patterns
_SIGNED_FLAGS = ("--grid", "--grid2", "--z", "--sigma")
_SIGNED_VALUE = re.compile(r"^-(?:[\d.i]|[+-]*$)")


def join_signed_values(argv: List[str]) -> List[str]:
    """Rewrite `--grid -3:3:121` as `--grid=-3:3:121` so argparse does not read the value as an option."""
    out, i = [], 0
    while i < len(argv):
        token = argv[i]
        if token in _SIGNED_FLAGS and i + 1 < len(argv) and _SIGNED_VALUE.match(argv[i + 1]):
            out.append(f"{token}={argv[i + 1]}")
            i += 2
            continue
        out.append(token)
        i += 1
    return out


# file keys that differ from RunConfig field names
_KEY_ALIASES = {"observable": "observables", "check": "checks", "lam": "lambda"}


def _add_run_options(parser: argparse.ArgumentParser):
    s = argparse.SUPPRESS
    parser.add_argument("--config", default=s, help="JSON file with the same keys as the flags")
    parser.add_argument("--density", default=s, help="e.g. gaussian:sigma2=1.0,r=1.0 or cauchy:a=1.0,r=0.5")
    parser.add_argument("--d", type=int, default=s)
    parser.add_argument("--lambda", dest="lambda", type=float, default=s)
    parser.add_argument("--observable", dest="observables", action="append", default=s,
                        help="identity | velocity:nu=0 | monomial:u0=(1,0),coef@(0,0)=rational1; repeat for N > 1")
    parser.add_argument("--grid", default=s, help="start:stop:count, endpoints included")
    parser.add_argument("--grid2", default=s, help="second energy grid for corr2")
    parser.add_argument("--z", action="append", default=s, help="spectral point(s), e.g. 0.3+0.4i or 0.3+0.4i,0.1-0.4i")
    parser.add_argument("--sigma", default=s, help="half-plane pattern such as +-")
    parser.add_argument("--n-max", dest="n_max", type=int, default=s)
    parser.add_argument("--gap", type=float, default=s)
    parser.add_argument("--delta", type=float, default=s)
    parser.add_argument("--box-L", dest="box_L", type=int, default=s)
    parser.add_argument("--boundary", choices=["open", "periodic"], default=s)
    parser.add_argument("--eps", type=float, default=s)
    parser.add_argument("--smoothing", type=float, default=s)
    parser.add_argument("--samples", type=int, default=s)
    parser.add_argument("--seed", type=int, default=s)
    parser.add_argument("--margin", type=int, default=s)
    parser.add_argument("--output", default=s)
    parser.add_argument("--format", choices=["json", "csv"], default=s)
    parser.add_argument("--deterministic", action="store_true", default=s)
    parser.add_argument("--certified", action="store_true", default=s)
    parser.add_argument("--threads", type=int, default=s)
    parser.add_argument("--check", dest="checks", action="append", default=s)
    parser.add_argument("--verbose", "-v", action="store_true", default=False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anderson-corr",
                                     description="Random-walk expansion of disordered Green functions")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_run_options(sub.add_parser(name))
    return parser


def _line_of(text: str, key: str) -> Optional[int]:
    for number, line in enumerate(text.splitlines(), start=1):
        if f'"{key}"' in line:
            return number
    return None


def read_config_file(path: str) -> Tuple[dict, str]:
    try:
        with open(path, "r") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError("config", f"Cannot read {path}: {e}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"Invalid JSON in {path}: {e.msg}", line=e.lineno)
    if not isinstance(data, dict):
        raise ConfigError("config", f"{path} must hold a JSON object")
    normalized = {}
    for key, value in data.items():
        key = key.replace("-", "_")
        normalized[_KEY_ALIASES.get(key, key)] = value
    return normalized, text


def load_run_config(args: argparse.Namespace) -> RunConfig:
    values = vars(args).copy()
    values.pop("verbose", None)
    path = values.pop("config", None)
    merged, text = {}, ""
    if path:
        merged, text = read_config_file(path)
    merged.update(values)
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        error = e.errors()[0]
        field = ".".join(str(p) for p in error["loc"]) or "config"
        key = str(error["loc"][0]) if error["loc"] else ""
        line = _line_of(text, key) if text and key not in values else None
        raise ConfigError(field, error["msg"], line=line)


def _execute(handler, config: RunConfig):
    timeout = command_registry.get_timeout(config.command)
    if timeout is None:
        return handler(config)
    logger.debug(f"Running {config.command} in a worker process, limit {timeout:g}s")
    outcome = run_task_in_process(handler, config, timeout)
    if outcome["status"] != "finished":
        raise AndersonCorrError(f"{config.command} failed: {outcome['error']}")
    return outcome["result"]


def run(config: RunConfig) -> int:
    handler = command_registry.get_handler(config.command)
    if handler is None:
        raise ConfigError("command", f"No handler registered for {config.command!r}")
    logger.info(f"Running {config.command}")
    result = _execute(handler, config)
    text = write_records(result.rows, result.columns, config.format, config.output)
    if config.output:
        logger.info(f"Wrote {len(result.rows)} rows to {config.output}")
    else:
        sys.stdout.write(text)
    if not result.passed:
        logger.error(f"{config.command}: one or more rows failed")
        return 2
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(join_signed_values(argv))
    except SystemExit as e:
        # usage errors are configuration errors; 2 is reserved for failed rows
        return 0 if not e.code else 1
    setup_logging(args.verbose)
    load_plugins()
    try:
        return run(load_run_config(args))
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return 1
    except AndersonCorrError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 1
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        return 1
    except TimeoutError as e:
        logger.error(str(e))
        return 1
