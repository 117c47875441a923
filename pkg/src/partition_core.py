# Partitions, Ferrers-diagram geometry, hooks, rim hooks, cycle types and class sizes
# Everything here is immutable and pure, so values can be shared freely between workers

import math
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

from src.utils import (
    setup_logger,
    load_settings,
    factorial,
    PreconditionError,
    ResourceLimitError,
    UsageError,
)

logger = setup_logger('PartitionCore')


class Partition(Sequence):
    """Weakly decreasing tuple of positive integers; the empty partition has weight 0."""

    __slots__ = ('_data',)

    def __init__(self, parts: Sequence = ()):
        data = tuple(int(p) for p in parts)
        if any(p < 0 for p in data):
            raise PreconditionError(f"partition parts must be non-negative: {data}")
        if any(data[i] < data[i + 1] for i in range(len(data) - 1)):
            raise PreconditionError(f"partition parts must be weakly decreasing: {data}")

        # Stored dense - trailing zeros dropped
        while data and data[-1] == 0:
            data = data[:-1]
        object.__setattr__(self, '_data', data)

    @classmethod
    def _trusted(cls, data: tuple):
        # Skip validation for tuples produced by this module
        obj = cls.__new__(cls)
        object.__setattr__(obj, '_data', data)
        return obj

    def __len__(self) -> int:
        return len(self._data)

    def __getitem__(self, idx):
        return self._data[idx]

    def __iter__(self):
        return iter(self._data)

    def __hash__(self) -> int:
        return hash(self._data)

    def __eq__(self, other) -> bool:
        if isinstance(other, Partition):
            return self._data == other._data
        if isinstance(other, tuple):
            return self._data == other
        return NotImplemented

    def __lt__(self, other) -> bool:
        return self._data < tuple(other)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self._data})"

    def __str__(self) -> str:
        return '(' + ','.join(str(p) for p in self._data) + ')'

    @property
    def parts(self) -> tuple:
        return self._data

    @property
    def weight(self) -> int:
        return sum(self._data)

    @property
    def norm(self) -> int:
        """Number of nonzero parts."""
        return len(self._data)

    @property
    def first_row(self) -> int:
        return self._data[0] if self._data else 0

    @property
    def delta(self) -> int:
        """n - lambda_1."""
        return self.weight - self.first_row

    def without_first_row(self) -> "Partition":
        return Partition._trusted(self._data[1:])

    def conjugate(self) -> "Partition":
        return conjugate(self)

    def to_json(self) -> list:
        return list(self._data)


class CycleType(Partition):
    """A partition read as the cycle lengths of a permutation."""

    __slots__ = ()

    def multiplicity(self, i: int) -> int:
        """s_i: number of i-cycles."""
        return self._data.count(i)

    def multiplicities(self) -> dict:
        return dict(sorted(Counter(self._data).items()))

    @property
    def fixed_points(self) -> int:
        return self._data.count(1)

    @property
    def cycle_count(self) -> int:
        return len(self._data)

    @property
    def sign(self) -> int:
        return -1 if (self.weight - len(self._data)) % 2 else 1

    @property
    def is_even(self) -> bool:
        return self.sign == 1

    @property
    def is_identity(self) -> bool:
        return all(p == 1 for p in self._data)

    @property
    def order(self) -> int:
        result = 1
        for p in set(self._data):
            result = result * p // math.gcd(result, p)
        return result

    def centralizer_order(self) -> int:
        return centralizer_order(self)

    def class_size(self) -> int:
        return class_size(self)

    def to_json(self) -> dict:
        return {'role': 'class', 'parts': list(self._data)}


def as_cycle_type(value) -> CycleType:
    if isinstance(value, CycleType):
        return value
    return CycleType(sorted(value, reverse=True))


def parse_partition(text: str) -> Partition:
    """'3,1' or '[3,1]' or '' -> Partition."""
    cleaned = text.strip().strip('[]()').strip()
    if not cleaned:
        return Partition(())
    try:
        parts = [int(p) for p in cleaned.replace(' ', '').split(',') if p]
    except ValueError:
        raise UsageError(f"cannot read a partition from {text!r}")
    if any(p <= 0 for p in parts):
        raise UsageError(f"partition parts must be positive: {text!r}")
    return Partition(sorted(parts, reverse=True))


def parse_cycle_type(text: str) -> CycleType:
    return as_cycle_type(parse_partition(text))


# Enumeration

def _default_ceiling() -> int:
    return load_settings().n_ceiling


def iter_partition_tuples(n: int):
    """
    Yield the partitions of n as tuples in reverse lexicographic order,
    starting from (n) and ending at (1,...,1).
    """
    if n < 0:
        raise PreconditionError(f"n must be non-negative, got {n}")
    if n == 0:
        yield ()
        return

    current = [n]
    while True:
        yield tuple(current)

        # Strip trailing ones, then lower the last part above one and refill greedily
        ones = 0
        while current and current[-1] == 1:
            current.pop()
            ones += 1
        if not current:
            return

        current[-1] -= 1
        head = current[-1]
        remaining = ones + 1
        while remaining > 0:
            piece = min(head, remaining)
            current.append(piece)
            remaining -= piece


@lru_cache(maxsize=128)
def _partition_tuples(n: int) -> tuple:
    return tuple(iter_partition_tuples(n))


def partitions_of(n: int, ceiling: int = None) -> list:
    """
    All partitions of n, each exactly once, in reverse lexicographic order

    Args:
        n: non-negative integer
        ceiling: largest n allowed (defaults to SYMCHAR_N_CEILING)

    Returns:
        list of Partition, length p(n)
    """
    ceiling = _default_ceiling() if ceiling is None else ceiling
    if n > ceiling:
        raise ResourceLimitError(f"partitions_of: n={n} is above the ceiling {ceiling}")
    return [Partition._trusted(p) for p in _partition_tuples(n)]


def cycle_types_of(n: int, ceiling: int = None) -> list:
    ceiling = _default_ceiling() if ceiling is None else ceiling
    if n > ceiling:
        raise ResourceLimitError(f"cycle_types_of: n={n} is above the ceiling {ceiling}")
    return [CycleType._trusted(p) for p in _partition_tuples(n)]


# Diagram geometry

def conjugate(lam: Partition) -> Partition:
    parts = tuple(lam)
    if not parts:
        return Partition._trusted(())
    return Partition._trusted(tuple(sum(1 for p in parts if p >= i) for i in range(1, parts[0] + 1)))


@dataclass(frozen=True)
class HookGrid:
    partition: Partition
    rows: tuple  # rows[i][j] = hook length of box (i+1, j+1)

    def hook(self, i: int, j: int) -> int:
        """Hook length of box (i, j), 1-indexed as in the diagram."""
        return self.rows[i - 1][j - 1]

    def product(self) -> int:
        return math.prod(h for row in self.rows for h in row)

    def square_sum(self, s: int) -> int:
        """Sum of h_ij over i, j <= s."""
        return sum(self.rows[i][j] for i in range(min(s, len(self.rows))) for j in range(min(s, len(self.rows[i]))))

    def values(self) -> list:
        return [h for row in self.rows for h in row]


def hook_grid(lam: Partition) -> HookGrid:
    lam = lam if isinstance(lam, Partition) else Partition(lam)
    conj = conjugate(lam)
    rows = tuple(
        tuple((lam[i] - (j + 1)) + (conj[j] - (i + 1)) + 1 for j in range(lam[i]))
        for i in range(len(lam))
    )
    return HookGrid(partition=lam, rows=rows)


def sq(lam: Partition) -> int:
    """Side of the largest square inside the diagram."""
    if len(lam) == 0:
        raise PreconditionError("sq is undefined for the empty partition")
    side = 0
    for j, part in enumerate(lam, start=1):
        if part >= j:
            side = j
        else:
            break
    return side


# Rim hooks via beta-sets: a k-rim hook is a bead moved k places down onto a free position

def beta_set(parts: tuple) -> tuple:
    length = len(parts)
    return tuple(parts[i] + (length - 1 - i) for i in range(length))


def _from_beta(beads: list) -> tuple:
    beads = sorted(beads, reverse=True)
    length = len(beads)
    parts = [beads[i] - (length - 1 - i) for i in range(length)]
    while parts and parts[-1] == 0:
        parts.pop()
    return tuple(parts)


def rim_hook_tuples(parts: tuple, k: int) -> list:
    """(remaining parts, leg length) for every size-k rim hook of the partition given as a tuple."""
    if k < 1:
        raise PreconditionError(f"rim hook size must be positive, got {k}")
    beads = beta_set(parts)
    occupied = set(beads)
    removals = []
    for bead in beads:
        target = bead - k
        if target < 0 or target in occupied:
            continue
        leg = sum(1 for other in beads if target < other < bead)
        moved = [target if b == bead else b for b in beads]
        removals.append((_from_beta(moved), leg))
    return removals


def rim_hooks(lam: Partition, k: int) -> list:
    """
    Every way to remove a size-k rim hook from lam

    Returns:
        list of (Partition, leg_length), ordered by the row where the hook starts
    """
    return [(Partition._trusted(rest), leg) for rest, leg in rim_hook_tuples(tuple(lam), k)]


# Conjugacy classes

def centralizer_order(c: CycleType) -> int:
    # prod_i i^{s_i} s_i!
    result = 1
    for length, count in Counter(tuple(c)).items():
        result *= length ** count * factorial(count)
    return result


def class_size(c: CycleType) -> int:
    return factorial(sum(c)) // centralizer_order(c)


def cycle_type_of(perm: Sequence) -> CycleType:
    """Cycle type of a permutation given in one-line notation on 0..n-1."""
    n = len(perm)
    seen = [False] * n
    lengths = []
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        point = start
        while not seen[point]:
            seen[point] = True
            point = perm[point]
            length += 1
        lengths.append(length)
    return CycleType._trusted(tuple(sorted(lengths, reverse=True)))
