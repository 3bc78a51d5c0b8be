"""Perfect matchings of ``{0, ..., n-1}`` stored as fixed-point-free involutions.

A matching is held as ``pair_of`` with ``pair_of[i]`` the partner of ``i``.
Indices are 0-based throughout the API; ``Matching.from_one_based`` and
``Matching.to_list(one_based=True)`` convert for humans and files.

Random draws use numpy's counter-based ``Philox`` (4x64, 10 rounds) bit
generator seeded through ``SeedSequence(seed, spawn_key=(stream,))``. Each Monte Carlo chunk gets
its own stream index, so results do not depend on how chunks are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import EnumerationTooLarge, InvalidDimension, InvalidMatching, InvalidPair

RNG_ALGORITHM = "numpy Philox-4x64-10 via SeedSequence(seed, spawn_key=(stream,))"
DEFAULT_CUTOFF = 16
MAX_CUTOFF = 20
# Largest sub-problem enumerated in one vectorized block (13!! = 135135 rows).
_BLOCK_M = 14


def _check_even(n: int) -> None:
    if n < 2 or n % 2:
        raise InvalidDimension(f"matchings need an even n >= 2, got n={n}")


def count_matchings(n: int) -> int:
    """Number of perfect matchings of ``n`` points, ``(n-1)!!``."""
    _check_even(n)
    return math.prod(range(n - 1, 0, -2))


@dataclass(frozen=True, eq=False)
class Matching:
    """A fixed-point-free involution ``pi`` with ``pi(pi(i)) == i != pi(i)``."""

    pair_of: np.ndarray

    def __post_init__(self):
        p = np.array(self.pair_of)
        if p.ndim != 1 or not np.issubdtype(p.dtype, np.integer) and p.size:
            raise InvalidMatching("pair_of must be a 1-d integer array")
        p = p.astype(np.intp)
        n = p.size
        if n == 0 or n % 2:
            raise InvalidDimension(f"matching length must be even and positive, got {n}")
        if p.min() < 0 or p.max() >= n:
            raise InvalidMatching("partner index out of range")
        idx = np.arange(n)
        if np.any(p == idx):
            raise InvalidMatching(f"fixed point at index {int(np.flatnonzero(p == idx)[0])}")
        if np.any(p[p] != idx):
            raise InvalidMatching("pair_of is not an involution")
        p.flags.writeable = False
        object.__setattr__(self, "pair_of", p)

    @classmethod
    def _trusted(cls, pair_of: np.ndarray) -> "Matching":
        obj = object.__new__(cls)
        pair_of.flags.writeable = False
        object.__setattr__(obj, "pair_of", pair_of)
        return obj

    @classmethod
    def from_pairs(cls, pairs, n: int | None = None, one_based: bool = False) -> "Matching":
        """Build from an iterable of ``(i, j)`` pairs covering every index once."""
        pairs = np.asarray(list(pairs), dtype=np.intp).reshape(-1, 2)
        if one_based:
            pairs = pairs - 1
        if n is None:
            n = 2 * len(pairs)
        flat = pairs.ravel()
        if flat.size != n or np.unique(flat).size != n:
            raise InvalidMatching("pairs must cover every index exactly once")
        if flat.min(initial=0) < 0 or flat.max(initial=0) >= n:
            raise InvalidMatching("pair index out of range")
        p = np.empty(n, dtype=np.intp)
        p[pairs[:, 0]] = pairs[:, 1]
        p[pairs[:, 1]] = pairs[:, 0]
        return cls(p)

    @classmethod
    def from_one_based(cls, pair_of) -> "Matching":
        return cls(np.asarray(pair_of, dtype=np.intp) - 1)

    @property
    def n(self) -> int:
        return self.pair_of.size

    def pairs(self) -> np.ndarray:
        """``(n/2, 2)`` array of pairs ``(i, pi(i))`` with ``i < pi(i)``, sorted by ``i``."""
        i = np.flatnonzero(self.pair_of > np.arange(self.n))
        return np.column_stack([i, self.pair_of[i]])

    def to_list(self, one_based: bool = False) -> list[int]:
        return [int(x) + int(one_based) for x in self.pair_of]

    def __len__(self):
        return self.n

    def __getitem__(self, i):
        return int(self.pair_of[i])

    def __eq__(self, other):
        if not isinstance(other, Matching):
            return NotImplemented
        return np.array_equal(self.pair_of, other.pair_of)

    def __hash__(self):
        return hash(self.pair_of.tobytes())

    def __repr__(self):
        return f"Matching({self.to_list(one_based=True)})"


@dataclass(frozen=True)
class SamplerConfig:
    """Monte Carlo and enumeration settings.

    ``workers`` only changes wall time; results are identical for any value.
    """

    seed: int = 0
    replicates: int = 100_000
    enumeration_cutoff: int = DEFAULT_CUTOFF
    workers: int = 1

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if self.enumeration_cutoff % 2 or not 2 <= self.enumeration_cutoff <= MAX_CUTOFF:
            raise ValueError(f"enumeration_cutoff must be even and in [2, {MAX_CUTOFF}]")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, stream)``."""
    ss = np.random.SeedSequence(seed, spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(ss))


def canonical_matching(n: int) -> Matching:
    """The designated pairing ``(0, 1), (2, 3), ..., (n-2, n-1)``."""
    _check_even(n)
    return Matching._trusted(np.arange(n, dtype=np.intp) ^ 1)


def sample_pairs(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` uniform matchings, returned as a ``(size, n/2, 2)`` pair array.

    Partial Fisher-Yates: the item in slot ``2t`` is paired with a uniformly
    chosen item from slots ``2t+1 .. n-1``, which is swapped into slot
    ``2t+1``. Each matching has probability ``1/(n-1)!!``.
    """
    _check_even(n)
    perm = np.tile(np.arange(n, dtype=np.intp), (size, 1))
    rows = np.arange(size)
    for t in range(n // 2 - 1):
        k = rng.integers(2 * t + 1, n, size=size)
        a = perm[rows, 2 * t + 1].copy()
        perm[rows, 2 * t + 1] = perm[rows, k]
        perm[rows, k] = a
    return perm.reshape(size, n // 2, 2)


def pairs_to_pair_of(pairs: np.ndarray) -> np.ndarray:
    """Convert ``(..., n/2, 2)`` pair arrays into ``(..., n)`` partner arrays."""
    lead = pairs.shape[:-2]
    n = 2 * pairs.shape[-2]
    flat = pairs.reshape(-1, n // 2, 2)
    out = np.empty((flat.shape[0], n), dtype=np.intp)
    r = np.arange(flat.shape[0])[:, None]
    out[r, flat[:, :, 0]] = flat[:, :, 1]
    out[r, flat[:, :, 1]] = flat[:, :, 0]
    return out.reshape(*lead, n)


def sample_matching(n: int, rng: np.random.Generator) -> Matching:
    """One matching drawn uniformly from all ``(n-1)!!``."""
    return Matching._trusted(pairs_to_pair_of(sample_pairs(n, 1, rng))[0])


@lru_cache(maxsize=None)
def _template(m: int) -> np.ndarray:
    # All matchings of positions 0..m-1, lowest free position paired with each
    # larger partner in turn.
    if m == 0:
        return np.zeros((1, 0, 2), dtype=np.int8)
    sub = _template(m - 2)
    blocks = []
    for p in range(1, m):
        rest = np.array([q for q in range(1, m) if q != p], dtype=np.int8)
        head = np.broadcast_to(np.array([0, p], dtype=np.int8), (sub.shape[0], 1, 2))
        blocks.append(np.concatenate([head, rest[sub]], axis=1))
    out = np.concatenate(blocks)
    out.flags.writeable = False
    return out


def _blocks(items: np.ndarray, prefix: list) -> Iterator[np.ndarray]:
    m = items.size
    if m <= _BLOCK_M:
        body = items[_template(m)]
        head = np.array(prefix, dtype=np.intp).reshape(1, -1, 2)
        yield np.concatenate([np.broadcast_to(head, (body.shape[0],) + head.shape[1:]), body], axis=1)
        return
    first = items[0]
    for k in range(1, m):
        rest = np.delete(items, [0, k])
        yield from _blocks(rest, prefix + [(first, items[k])])


def iter_pair_blocks(n: int, cutoff: int = DEFAULT_CUTOFF) -> Iterator[np.ndarray]:
    """Yield every matching of ``n`` points as blocks of ``(k, n/2, 2)`` pair arrays.

    Order is deterministic: index 0 is paired with 1, 2, ..., n-1 in turn and
    the remaining points are handled the same way recursively.
    """
    _check_even(n)
    if n > cutoff:
        raise EnumerationTooLarge(
            f"n={n} exceeds the enumeration cutoff {cutoff} ({count_matchings(n)} matchings)"
        )
    yield from _blocks(np.arange(n, dtype=np.intp), [])


def enumerate_matchings(n: int, cutoff: int = DEFAULT_CUTOFF) -> Iterator[Matching]:
    """Yield all ``(n-1)!!`` matchings exactly once, in deterministic order."""
    for block in iter_pair_blocks(n, cutoff):
        for row in pairs_to_pair_of(block):
            yield Matching._trusted(row)


def matching_table(n: int, cutoff: int = DEFAULT_CUTOFF) -> np.ndarray:
    """All matchings as a ``((n-1)!!, n)`` array of partner indices."""
    return np.concatenate([pairs_to_pair_of(b) for b in iter_pair_blocks(n, cutoff)])


def coupling_step(
    pi: Matching,
    i: int | None = None,
    j: int | None = None,
    rng: np.random.Generator | None = None,
) -> Matching:
    """Re-pair ``i`` with ``j`` and their former partners with each other.

    Returns ``pi*`` with ``pi*(i) = j``, ``pi*(pi(i)) = pi(j)`` and all other
    pairs kept. When ``j == pi(i)`` the matching is returned unchanged. If
    ``i`` and ``j`` are omitted they are drawn uniformly over ordered distinct
    pairs using ``rng``.
    """
    n = pi.n
    if i is None and j is None:
        if rng is None:
            raise ValueError("pass either (i, j) or rng")
        i = int(rng.integers(n))
        j = int(rng.integers(n - 1))
        j += j >= i
    if i is None or j is None:
        raise InvalidPair("both i and j are required")
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidPair(f"pair ({i}, {j}) out of range for n={n}")
    if i == j:
        raise InvalidPair("i and j must be distinct")
    p = pi.pair_of
    a, b = int(p[i]), int(p[j])
    if a == j:
        return pi
    q = p.copy()
    q[i], q[j], q[a], q[b] = j, i, b, a
    return Matching._trusted(q)
