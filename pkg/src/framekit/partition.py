"""Partitions of frame indices into blocks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidPartition


def _normalize_blocks(blocks: Iterable[Iterable[int]]) -> tuple[tuple[int, ...], ...]:
    out = []
    for b in blocks:
        block = tuple(int(i) for i in b)
        if not block:
            raise InvalidPartition("empty block")
        out.append(block)
    if not out:
        raise InvalidPartition("a partition needs at least one block")
    return tuple(out)


def check_cover(blocks: Sequence[Sequence[int]], universe: Iterable[int]) -> None:
    """Raise InvalidPartition unless ``blocks`` cover ``universe`` disjointly."""
    seen: set[int] = set()
    for b in blocks:
        for i in b:
            if i in seen:
                raise InvalidPartition(f"index {i} appears in more than one block")
            seen.add(i)
    target = set(universe)
    if seen != target:
        missing = sorted(target - seen)
        extra = sorted(seen - target)
        raise InvalidPartition(f"blocks do not cover the index set (missing {missing}, extra {extra})")


@dataclass(frozen=True)
class Partition:
    """Disjoint cover of {0, ..., count-1} by blocks."""

    blocks: tuple[tuple[int, ...], ...]
    count: int

    def __post_init__(self):
        blocks = _normalize_blocks(self.blocks)
        check_cover(blocks, range(self.count))
        object.__setattr__(self, "blocks", blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, j: int) -> tuple[int, ...]:
        return self.blocks[j]

    @property
    def max_block(self) -> int:
        return max(len(b) for b in self.blocks)

    def check_cap(self, cap: int) -> None:
        if self.max_block > cap:
            raise InvalidPartition(f"block of size {self.max_block} exceeds cap {cap}")

    @classmethod
    def contiguous(cls, count: int, block_size: int) -> "Partition":
        if block_size < 1:
            raise InvalidPartition("block size must be positive")
        blocks = [tuple(range(i, min(i + block_size, count))) for i in range(0, count, block_size)]
        return cls(tuple(blocks), count)

    @classmethod
    def parse(cls, spec: str, count: int) -> "Partition":
        """Parse ``"0,1,2;3,4;5"`` (semicolon-separated blocks)."""
        try:
            blocks = [tuple(int(t) for t in chunk.split(",") if t.strip())
                      for chunk in spec.split(";") if chunk.strip()]
        except ValueError as exc:
            raise InvalidPartition(f"cannot parse block spec {spec!r}") from exc
        return cls(tuple(blocks), count)

    def to_spec(self) -> str:
        return ";".join(",".join(str(i) for i in b) for b in self.blocks)

    @classmethod
    def random(cls, count: int, cap: int, rng) -> "Partition":
        """Random permutation of the indices cut into blocks of size 1..cap."""
        perm = [int(i) for i in rng.permutation(count)]
        blocks = []
        while perm:
            k = int(rng.integers(1, cap + 1))
            blocks.append(tuple(sorted(perm[:k])))
            perm = perm[k:]
        return cls(tuple(blocks), count)
