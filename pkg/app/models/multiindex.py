import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator, Sequence, Tuple


class HalfPlaneSign(IntEnum):
    PLUS = 1
    MINUS = -1

    @classmethod
    def parse(cls, value) -> "HalfPlaneSign":
        if isinstance(value, str):
            value = value.strip()
            if value in ("+", "+1", "plus"):
                return cls.PLUS
            if value in ("-", "-1", "minus"):
                return cls.MINUS
            raise ValueError(f"Invalid half-plane sign {value!r}")
        return cls(int(value))

    @property
    def symbol(self) -> str:
        return "+" if self is HalfPlaneSign.PLUS else "-"


@dataclass(frozen=True, order=True)
class MultiIndex:
    entries: Tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(n) for n in self.entries)
        if not entries:
            raise ValueError("MultiIndex needs at least one entry")
        if any(n < 0 for n in entries):
            raise ValueError(f"MultiIndex entries must be non-negative, got {entries}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, *entries: int) -> "MultiIndex":
        return cls(tuple(entries))

    @classmethod
    def zeros(cls, length: int) -> "MultiIndex":
        return cls((0,) * length)

    @classmethod
    def ones(cls, length: int) -> "MultiIndex":
        return cls((1,) * length)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __getitem__(self, k: int) -> int:
        return self.entries[k]

    @property
    def total(self) -> int:
        return sum(self.entries)

    @property
    def factorial(self) -> int:
        return math.prod(math.factorial(n) for n in self.entries)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        self._check_length(other)
        return MultiIndex(tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        self._check_length(other)
        return MultiIndex(tuple(a - b for a, b in zip(self.entries, other.entries)))

    def _check_length(self, other: "MultiIndex"):
        if len(other) != len(self):
            raise ValueError(f"MultiIndex length mismatch: {len(self)} vs {len(other)}")

    def power(self, s: Sequence[float]) -> float:
        return math.prod(x ** n for x, n in zip(s, self.entries))


def compositions(total: int, length: int) -> Iterator[Tuple[int, ...]]:
    """All tuples of `length` non-negative integers summing to `total`, in lexicographic order."""
    if total < 0 or length < 1:
        return
    if length == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, length - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class SignVector:
    entries: Tuple[HalfPlaneSign, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(HalfPlaneSign.parse(s) for s in self.entries))

    @classmethod
    def parse(cls, pattern: str) -> "SignVector":
        tokens = [t for t in pattern.replace(",", " ").split()] if ("," in pattern or " " in pattern) else list(pattern)
        return cls(tuple(tokens))

    @classmethod
    def uniform(cls, sign: HalfPlaneSign, length: int) -> "SignVector":
        return cls((sign,) * length)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, k: int) -> HalfPlaneSign:
        return self.entries[k]

    @property
    def all_equal(self) -> bool:
        return len(set(self.entries)) == 1

    def flipped(self) -> "SignVector":
        return SignVector(tuple(HalfPlaneSign(-s) for s in self.entries))

    @property
    def sign_product(self) -> int:
        return math.prod(int(s) for s in self.entries)

    def __str__(self) -> str:
        return "".join(s.symbol for s in self.entries)


@dataclass(frozen=True)
class EnergyVector:
    entries: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(float(e) for e in self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, k: int) -> float:
        return self.entries[k]

    @property
    def min_gap(self) -> float:
        if len(self.entries) < 2:
            return math.inf
        return min(abs(a - b) for i, a in enumerate(self.entries) for b in self.entries[i + 1:])

    @property
    def distinct(self) -> bool:
        return self.min_gap > 0
