import time

from app.core.registry import command_registry
from app.models.schemas import RunConfig
from app.services.commands import CommandResult, density_of
from app.services.identities import check_registry, run_identities

COLUMNS = ("check", "max_error", "tolerance", "passed", "seconds")


@command_registry.register(config_schema={"timeout": 0})
def identities_command(config: RunConfig) -> CommandResult:
    g = density_of(config)
    rows = []
    for name in config.checks or check_registry.names():
        started = time.perf_counter()
        result, = run_identities(g, [name])
        rows.append({
            "check": result.name,
            "max_error": result.deviation,
            "tolerance": result.tolerance,
            "passed": result.passed,
            "seconds": round(time.perf_counter() - started, 3),
        })
    return CommandResult(rows, COLUMNS, passed=all(row["passed"] for row in rows))
