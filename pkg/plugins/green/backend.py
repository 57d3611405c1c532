from app.core.errors import ConfigError
from app.core.registry import command_registry
from app.models.schemas import RunConfig
from app.services.commands import CommandResult, expansion_config, observables_of
from app.services.expansion import green_series

COLUMNS = ("value_re", "value_im", "order", "tail_bound", "lambda", "energies", "sigmas")


@command_registry.register(config_schema={"timeout": 0})
def green_command(config: RunConfig) -> CommandResult:
    points = config.spectral_points()
    if not points:
        raise ConfigError("z", "green needs at least one --z value (comma-separated for N > 1)")
    rows = []
    for z in points:
        cfg = expansion_config(config, observables_of(config, len(z)))
        rows.append(green_series(cfg, z).to_record())
    return CommandResult(rows, COLUMNS)
