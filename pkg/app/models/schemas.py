import re
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

COMMANDS = ("dos", "green", "corr2", "validate", "identities")

_GRID = re.compile(r"^\s*(-?[\d.eE+-]+)\s*:\s*(-?[\d.eE+-]+)\s*:\s*(\d+)\s*$")


def parse_grid(text: str) -> List[float]:
    """`start:stop:count`, endpoints included."""
    match = _GRID.match(text)
    if not match:
        raise ValueError(f"Energy grid must look like start:stop:count, got {text!r}")
    start, stop, count = float(match.group(1)), float(match.group(2)), int(match.group(3))
    if count < 1:
        raise ValueError(f"Grid needs at least one point, got {count}")
    if count == 1:
        return [start]
    step = (stop - start) / (count - 1)
    return [start + k * step for k in range(count - 1)] + [stop]


def parse_complex(text: str) -> complex:
    """`0.3+0.4i`, `0.3-0.4j`, `-1i` or a plain real."""
    cleaned = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError:
        raise ValueError(f"Invalid complex number {text!r}")


def format_complex(z: complex) -> str:
    return f"{z.real:g}{z.imag:+g}i"


class RunConfig(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    command: Literal["dos", "green", "corr2", "validate", "identities"]
    density: str = "gaussian:sigma2=1.0,r=1.0"
    d: int = Field(1, ge=1)
    lam: float = Field(0.05, alias="lambda")
    observables: List[str] = Field(default_factory=lambda: ["identity"])
    grid: Optional[str] = None
    grid2: Optional[str] = None
    z: List[str] = Field(default_factory=list)
    sigma: Optional[str] = None
    n_max: int = Field(8, ge=0)
    gap: Optional[float] = Field(None, gt=0)
    delta: Optional[float] = Field(None, gt=0)
    box_L: int = Field(20, ge=0)
    boundary: Literal["open", "periodic"] = "open"
    eps: float = Field(0.4, gt=0)
    smoothing: float = Field(0.0, ge=0)
    samples: int = Field(2000, ge=1)
    seed: int = 12345
    margin: Optional[int] = Field(None, ge=0)
    output: Optional[str] = None
    format: Literal["json", "csv"] = "json"
    deterministic: bool = False
    certified: bool = False
    threads: Optional[int] = Field(None, ge=1)
    checks: List[str] = Field(default_factory=list)

    @field_validator("grid", "grid2")
    @classmethod
    def _check_grid(cls, value):
        if value is not None:
            parse_grid(value)
        return value

    @field_validator("z")
    @classmethod
    def _check_z(cls, value):
        for item in value:
            for part in item.split(","):
                parse_complex(part)
        return value

    @field_validator("sigma")
    @classmethod
    def _check_sigma(cls, value):
        if value is not None and not re.fullmatch(r"[+\-]+", value.replace(",", "").replace(" ", "")):
            raise ValueError(f"Sign pattern must use + and -, got {value!r}")
        return value

    @model_validator(mode="after")
    def _check_delta(self):
        if self.delta is not None and self.gap is not None and not self.delta < self.gap / 2.0:
            raise ValueError(f"delta must be below gap/2, got delta={self.delta}, gap={self.gap}")
        return self

    def energies(self) -> List[float]:
        return parse_grid(self.grid) if self.grid else []

    def energies2(self) -> List[float]:
        return parse_grid(self.grid2) if self.grid2 else self.energies()

    def spectral_points(self) -> List[List[complex]]:
        """Each --z value is one point tuple; components separated by commas."""
        return [[parse_complex(part) for part in item.split(",")] for item in self.z]

    def to_json_dict(self) -> dict:
        return self.model_dump(by_alias=True, exclude_none=True)
