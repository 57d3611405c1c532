import math
from collections import Counter
from functools import lru_cache
from typing import Dict, Iterator, List, Sequence, Tuple

from loguru import logger

from ..core.config import ENUMERATION_BUDGET
from ..core.errors import ResourceLimit
from ..models.lattice import LatticeWalk, NPathFamily, Site, add_sites, l1_norm, origin, unit_vector
from ..models.multiindex import MultiIndex, compositions


class _Budget:
    def __init__(self, limit: int):
        self.limit = int(limit)
        self.used = 0

    def tick(self):
        self.used += 1
        if self.used > self.limit:
            raise ResourceLimit(f"Walk enumeration exceeded the budget of {self.limit} nodes")


@lru_cache(maxsize=None)
def lattice_steps(d: int) -> Tuple[Site, ...]:
    """Unit steps in DFS order: +e_0, -e_0, +e_1, -e_1, ..."""
    return tuple(unit_vector(d, axis, sign) for axis in range(d) for sign in (1, -1))


def _normalize_offsets(d: int, offsets: Sequence[Sequence[int]]) -> Tuple[Site, ...]:
    normalized = tuple(tuple(int(c) for c in u) for u in offsets)
    if not normalized:
        raise ValueError("At least one offset is required")
    for u in normalized:
        if len(u) != d:
            raise ValueError(f"Offset {u} does not live in Z^{d}")
    return normalized


def _walks(d: int, start: Site, length: int, later_steps: int, later_offset: Site,
           budget: _Budget) -> Iterator[LatticeWalk]:
    """Walks of `length` steps from `start` that can still close the family.

    A walk may end at p only if |p + later_offset|_1 <= later_steps, where
    later_offset sums the remaining offsets and later_steps the remaining walk
    lengths; with global parity checked, every kept prefix extends.
    """
    steps = lattice_steps(d)
    path: List[Site] = [start]

    def extend(pos: Site, left: int):
        budget.tick()
        if left == 0:
            yield LatticeWalk.trusted(tuple(path))
            return
        for step in steps:
            nxt = add_sites(pos, step)
            if l1_norm(add_sites(nxt, later_offset)) <= left - 1 + later_steps:
                path.append(nxt)
                yield from extend(nxt, left - 1)
                path.pop()

    if l1_norm(add_sites(start, later_offset)) <= length + later_steps:
        yield from extend(start, length)


def enumerate_npaths(d: int, offsets: Sequence[Sequence[int]], n: int,
                     budget: int = ENUMERATION_BUDGET) -> Iterator[NPathFamily]:
    """All compatible N-path families of total length n, starting at the origin."""
    if d < 1 or n < 0:
        raise ValueError(f"Need d >= 1 and n >= 0, got d={d}, n={n}")
    offsets = _normalize_offsets(d, offsets)
    count = len(offsets)
    total_offset = origin(d)
    for u in offsets:
        total_offset = add_sites(total_offset, u)
    if (n + l1_norm(total_offset)) % 2:
        return
    counter = _Budget(budget)

    def families(lengths: Tuple[int, ...], i: int, start: Site, done: List[LatticeWalk]):
        later_steps = sum(lengths[i + 1:])
        later_offset = origin(d)
        for u in offsets[i:]:
            later_offset = add_sites(later_offset, u)
        for walk in _walks(d, start, lengths[i], later_steps, later_offset, counter):
            if i == count - 1:
                yield NPathFamily(tuple(done) + (walk,), offsets)
            else:
                yield from families(lengths, i + 1, add_sites(walk.end, offsets[i]), done + [walk])

    for lengths in compositions(n, count):
        yield from families(lengths, 0, origin(d), [])
    logger.debug(f"Enumerated N={count} families of length {n} in Z^{d} ({counter.used} nodes)")


def enumerate_closed_walks(d: int, n: int, budget: int = ENUMERATION_BUDGET) -> Iterator[LatticeWalk]:
    for family in enumerate_npaths(d, [origin(d)], n, budget):
        yield family.walks[0]


def visit_counts(family: NPathFamily) -> Dict[Site, MultiIndex]:
    return family.visit_counts()


def count_walks(d: int, n: int, budget: int = ENUMERATION_BUDGET) -> int:
    """Number of closed walks of length n on Z^d."""
    if d < 1 or n < 0:
        raise ValueError(f"Need d >= 1 and n >= 0, got d={d}, n={n}")
    if n % 2:
        return 0
    if d == 1:
        return math.comb(n, n // 2)
    if (2 * n + 1) ** d > budget:
        raise ResourceLimit(f"Counting closed walks of length {n} in Z^{d} exceeds the budget of {budget}")
    # exact transfer count over lattice positions, pruned by the return distance
    steps = lattice_steps(d)
    counts = Counter({origin(d): 1})
    for left in range(n, 0, -1):
        following = Counter()
        for pos, c in counts.items():
            for step in steps:
                nxt = add_sites(pos, step)
                if l1_norm(nxt) <= left - 1:
                    following[nxt] += c
        counts = following
    return counts.get(origin(d), 0)


def count_npaths(d: int, offsets: Sequence[Sequence[int]], n: int, budget: int = ENUMERATION_BUDGET) -> int:
    return sum(1 for _ in enumerate_npaths(d, offsets, n, budget))
