import os
from typing import Optional
from pydantic_settings import BaseSettings, SettingsConfigDict
from .config_manager import ConfigManager

# Base Directories
BASE_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="ANDERSON_CORR_", extra="ignore")

    threads: int = 1
    home: str = os.path.join(BASE_DIR, ".storage")
    slow: Optional[str] = None


settings = Settings()
STORAGE_DIR = settings.home

# Load Core Config
core_config = ConfigManager(
    name="core",
    default_schema={
        "enumeration_budget": 10_000_000,
        "circle_nodes": 64,
        "circle_max_nodes": 4096,
        "circle_tol": 1e-12,
        "simplex_order": 32,
        "simplex_max_order": 256,
        "simplex_tol": 1e-10,
        "quad_epsabs": 1e-13,
        "quad_epsrel": 1e-11,
        "quad_limit": 400,
        "tail_tol": 1e-13,
        "positivity_grid": 10_000,
        "direct_solve_max_dim": 40_000,
        "iterative_tol": 1e-10,
        "norm_safety": 1.01,
        "task_timeout": 0,
    },
    is_core=True,
    storage_dir=STORAGE_DIR
)

# Export values for the rest of the app
ENUMERATION_BUDGET = core_config.get_int("enumeration_budget", 10_000_000)
CIRCLE_NODES = core_config.get_int("circle_nodes", 64)
CIRCLE_MAX_NODES = core_config.get_int("circle_max_nodes", 4096)
CIRCLE_TOL = core_config.get_float("circle_tol", 1e-12)
SIMPLEX_ORDER = core_config.get_int("simplex_order", 32)
SIMPLEX_MAX_ORDER = core_config.get_int("simplex_max_order", 256)
SIMPLEX_TOL = core_config.get_float("simplex_tol", 1e-10)
QUAD_EPSABS = core_config.get_float("quad_epsabs", 1e-13)
QUAD_EPSREL = core_config.get_float("quad_epsrel", 1e-11)
QUAD_LIMIT = core_config.get_int("quad_limit", 400)
TAIL_TOL = core_config.get_float("tail_tol", 1e-13)
POSITIVITY_GRID = core_config.get_int("positivity_grid", 10_000)
DIRECT_SOLVE_MAX_DIM = core_config.get_int("direct_solve_max_dim", 40_000)
ITERATIVE_TOL = core_config.get_float("iterative_tol", 1e-10)
NORM_SAFETY = core_config.get_float("norm_safety", 1.01)
TASK_TIMEOUT = core_config.get_float("task_timeout", 0) or None
