from loguru import logger

from app.core.errors import ConfigError
from app.core.registry import command_registry
from app.models.schemas import RunConfig, format_complex
from app.services.commands import (CommandResult, box_of, density_of, expansion_config, margin_of,
                                   observables_of, resolve_threads)
from app.services.expansion import green_series
from app.services.oracle import mc_green, mc_npoint

COLUMNS = ("energies", "series_re", "series_im", "mc_re", "mc_im", "stderr", "tail_bound", "deviation", "passed")


@command_registry.register(
    config_schema={
        "stderr_factor": 3.0,
        "timeout": 0
    }
)
def validate_command(config: RunConfig) -> CommandResult:
    points = config.spectral_points() or [[complex(E, config.eps)] for E in config.energies()]
    if not points:
        raise ConfigError("z", "validate needs --z values or an energy --grid (shifted by i*eps)")
    factor = float(command_registry.get_setting("validate", "stderr_factor", 3.0))
    g = density_of(config)
    box = box_of(config)
    threads = resolve_threads(config)

    rows = []
    for z in points:
        polys = observables_of(config, len(z))
        series = green_series(expansion_config(config, polys), z)
        if len(z) == 1 and polys[0].label == "identity":
            mc = mc_green(box, config.lam, z[0], config.samples, config.seed, g, margin_of(config), threads)
        else:
            mc = mc_npoint(box, config.lam, polys, z, config.samples, config.seed, g, margin_of(config), threads)
        deviation = abs(series.value - mc.mean)
        passed = deviation <= factor * mc.stderr + series.tail_bound
        rows.append({
            "energies": ",".join(format_complex(zk) for zk in z),
            "series_re": series.value.real,
            "series_im": series.value.imag,
            "mc_re": mc.mean.real,
            "mc_im": mc.mean.imag,
            "stderr": mc.stderr,
            "tail_bound": series.tail_bound,
            "deviation": deviation,
            "passed": bool(passed),
        })
        if not passed:
            logger.error(f"validate: series and Monte Carlo disagree at {z}: |diff|={deviation:.3g}, "
                         f"allowed {factor:g}*{mc.stderr:.3g} + {series.tail_bound:.3g}")
    return CommandResult(rows, COLUMNS, passed=all(row["passed"] for row in rows))
