from loguru import logger

from app.core.registry import command_registry
from app.models.schemas import RunConfig, parse_grid
from app.services.commands import CommandResult, expansion_config
from app.services.expansion import density_of_states

COLUMNS = ("energy", "dos", "dos_tail", "value_re", "value_im", "order", "tail_bound")


@command_registry.register(
    config_schema={
        "default_grid": "-3:3:121",
        "timeout": 0
    }
)
def dos_command(config: RunConfig) -> CommandResult:
    grid = config.energies() or parse_grid(command_registry.get_setting("dos", "default_grid", "-3:3:121"))
    cfg = expansion_config(config)
    rows = []
    for E in grid:
        dos, dos_tail, series = density_of_states(cfg, E, config.smoothing)
        rows.append({
            "energy": E,
            "dos": dos,
            "dos_tail": dos_tail,
            "value_re": series.value.real,
            "value_im": series.value.imag,
            "order": series.order,
            "tail_bound": series.tail_bound,
        })
    logger.info(f"dos: {len(rows)} energies, lambda={config.lam:g}, n_max={config.n_max}")
    return CommandResult(rows, COLUMNS)
