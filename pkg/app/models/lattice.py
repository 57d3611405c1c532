from collections import Counter
from dataclasses import dataclass
from typing import Dict, Tuple

from .multiindex import MultiIndex

Site = Tuple[int, ...]


def origin(d: int) -> Site:
    return (0,) * d


def add_sites(a: Site, b: Site) -> Site:
    return tuple(x + y for x, y in zip(a, b))


def sub_sites(a: Site, b: Site) -> Site:
    return tuple(x - y for x, y in zip(a, b))


def l1_norm(a: Site) -> int:
    return sum(abs(x) for x in a)


def unit_vector(d: int, axis: int, sign: int = 1) -> Site:
    return tuple(sign if k == axis else 0 for k in range(d))


@dataclass(frozen=True)
class LatticeWalk:
    sites: Tuple[Site, ...]

    def __post_init__(self):
        sites = tuple(tuple(int(c) for c in s) for s in self.sites)
        if not sites:
            raise ValueError("A walk visits at least one site")
        for a, b in zip(sites, sites[1:]):
            if l1_norm(sub_sites(b, a)) != 1:
                raise ValueError(f"Walk step {a} -> {b} is not a nearest-neighbour step")
        object.__setattr__(self, "sites", sites)

    @classmethod
    def trusted(cls, sites: Tuple[Site, ...]) -> "LatticeWalk":
        """Build without step validation, for sequences produced by the enumerator."""
        walk = object.__new__(cls)
        object.__setattr__(walk, "sites", sites)
        return walk

    @property
    def length(self) -> int:
        return len(self.sites) - 1

    @property
    def start(self) -> Site:
        return self.sites[0]

    @property
    def end(self) -> Site:
        return self.sites[-1]

    @property
    def vertices(self) -> frozenset:
        return frozenset(self.sites)

    def visit_counts(self) -> Counter:
        return Counter(self.sites)


@dataclass(frozen=True)
class NPathFamily:
    walks: Tuple[LatticeWalk, ...]
    offsets: Tuple[Site, ...]

    def __post_init__(self):
        if len(self.walks) != len(self.offsets):
            raise ValueError("One offset per walk is required")
        n = len(self.walks)
        for i in range(n - 1):
            if add_sites(self.walks[i].end, self.offsets[i]) != self.walks[i + 1].start:
                raise ValueError(f"Walk {i + 1} does not start at the offset end of walk {i}")
        if add_sites(self.walks[-1].end, self.offsets[-1]) != self.walks[0].start:
            raise ValueError("The last offset does not close the family")

    @property
    def size(self) -> int:
        return len(self.walks)

    @property
    def total_length(self) -> int:
        return sum(w.length for w in self.walks)

    @property
    def vertices(self) -> frozenset:
        return frozenset().union(*(w.vertices for w in self.walks))

    def visit_counts(self) -> Dict[Site, MultiIndex]:
        per_walk = [w.visit_counts() for w in self.walks]
        sites = sorted(self.vertices)
        return {u: MultiIndex(tuple(c.get(u, 0) for c in per_walk)) for u in sites}
