from loguru import logger

from app.core.registry import command_registry
from app.models.schemas import RunConfig, parse_grid
from app.services.commands import CommandResult, expansion_config, observables_of
from app.services.expansion import correlation_density

SIGMAS = ("++", "+-", "-+", "--")
_SIGMA_NAMES = {"++": "pp", "+-": "pm", "-+": "mp", "--": "mm"}
COLUMNS = ("e1", "e2", "density_re", "density_im", "tail_bound") + tuple(
    f"g_{_SIGMA_NAMES[s]}_{part}" for s in SIGMAS for part in ("re", "im"))


@command_registry.register(
    config_schema={
        "default_grid": "-1.5:1.5:7",
        "default_gap": 0.4,  # gap - gap/4 < r/2 for the default gaussian, r = 1
        "observables": ["velocity:nu=0", "velocity:nu=0"],
        "timeout": 0
    }
)
def corr2_command(config: RunConfig) -> CommandResult:
    default_grid = command_registry.get_setting("corr2", "default_grid", "-1.5:1.5:7")
    first = config.energies() or parse_grid(default_grid)
    second = config.energies2() or first
    gap = config.gap or float(command_registry.get_setting("corr2", "default_gap", 0.4))
    if "observables" not in config.model_fields_set:
        config = config.model_copy(update={"observables": command_registry.get_setting("corr2", "observables")})
    cfg = expansion_config(config, observables_of(config, 2), gap=gap)

    rows = []
    skipped = 0
    for e1 in first:
        for e2 in second:
            if abs(e1 - e2) <= gap:
                skipped += 1
                continue
            density, parts = correlation_density(cfg, (e1, e2))
            row = {
                "e1": e1,
                "e2": e2,
                "density_re": density.value.real,
                "density_im": density.value.imag,
                "tail_bound": density.tail_bound,
            }
            for sigma in SIGMAS:
                row[f"g_{_SIGMA_NAMES[sigma]}_re"] = parts[sigma].value.real
                row[f"g_{_SIGMA_NAMES[sigma]}_im"] = parts[sigma].value.imag
            rows.append(row)
    logger.info(f"corr2: {len(rows)} energy pairs, {skipped} skipped within the gap {gap:g}")
    return CommandResult(rows, COLUMNS)
