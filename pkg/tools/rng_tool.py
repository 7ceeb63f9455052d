"""
Counter-based random streams.

Every block of paths draws from its own Philox stream keyed by
(root seed, block index), so the numbers a path sees depend only on the
seed and the path's position in the layout, never on scheduling.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Block:
    index: int
    start: int
    count: int


def substream(seed: int, block: int) -> np.random.Generator:
    """Independent generator for one block of paths."""
    key = (int(seed) & _MASK64) | ((int(block) & _MASK64) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def block_layout(paths: int, cells_per_path: int, block_cells: int) -> List[Block]:
    """
    Split paths into contiguous blocks of roughly block_cells simulated cells.

    Args:
        paths: Total number of paths
        cells_per_path: Random cells each path consumes (usually the step count)
        block_cells: Target cells per block

    Returns:
        Blocks in path-index order
    """
    if paths < 1:
        raise ValueError("paths must be positive")
    per_block = max(1, block_cells // max(1, cells_per_path))
    blocks = []
    start = 0
    index = 0
    while start < paths:
        count = min(per_block, paths - start)
        blocks.append(Block(index=index, start=start, count=count))
        start += count
        index += 1
    return blocks
