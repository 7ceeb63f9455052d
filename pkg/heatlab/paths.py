"""
Path engine shared by the supremum and heat content estimators.

A path on [0, t] is the skeleton of the subordinator S at the times it/n
together with the Brownian motion W (variance 2s at time s) read at those
subordinator times. Between skeleton points W is a Brownian bridge in
Brownian time, whose extrema and barrier-survival probabilities are exact.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

import config
from tools import block_layout, map_blocks, substream
from .state import StableIndex
from . import subordinator

logger = logging.getLogger(__name__)

# Images kept on each side in the short-time double-barrier series
_IMAGE_TERMS = 6
# Eigenfunctions kept in the long-time double-barrier series
_EIGEN_TERMS = 12


@dataclass
class Skeleton:
    """Subordinator increments and Brownian values at the skeleton times."""
    ds: np.ndarray      # (paths, n) increments of S
    w: np.ndarray       # (paths, n) W at the running sums of ds, started at 0

    @property
    def variance(self) -> np.ndarray:
        """Brownian variance accumulated over each segment, 2 dS."""
        return 2.0 * self.ds

    def previous(self, start: np.ndarray) -> np.ndarray:
        """Segment left endpoints given per-path starting values."""
        return np.concatenate([start[:, None], self.w[:, :-1] + start[:, None]], axis=1)


def simulate_skeleton(
    alpha: StableIndex,
    t: float,
    n_steps: int,
    count: int,
    rng: np.random.Generator
) -> Skeleton:
    """Draw count skeletons with n_steps subordinator steps on [0, t]."""
    ds = subordinator.sample(alpha, t / n_steps, rng, size=(count, n_steps))
    z = rng.standard_normal((count, n_steps))
    w = np.cumsum(np.sqrt(2.0 * ds) * z, axis=1)
    return Skeleton(ds=ds, w=w)


def bridge_max(w0: np.ndarray, w1: np.ndarray, variance: np.ndarray, u: np.ndarray) -> np.ndarray:
    """
    Exact draw of the maximum of a Brownian bridge from w0 to w1.

    variance is the unconditioned variance over the segment (2 dS here);
    u is uniform on (0, 1].
    """
    return 0.5 * (w0 + w1 + np.sqrt((w1 - w0) ** 2 - 2.0 * variance * np.log(u)))


def bridge_min(w0: np.ndarray, w1: np.ndarray, variance: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Exact draw of the bridge minimum; mirror image of bridge_max."""
    return 0.5 * (w0 + w1 - np.sqrt((w1 - w0) ** 2 - 2.0 * variance * np.log(u)))


def bridge_below_probability(
    w0: np.ndarray, w1: np.ndarray, variance: np.ndarray, level: float
) -> np.ndarray:
    """P(bridge from w0 to w1 stays below level)."""
    gap0 = level - w0
    gap1 = level - w1
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        p = -np.expm1(-2.0 * gap0 * gap1 / variance)
    return np.where((gap0 > 0) & (gap1 > 0), np.nan_to_num(p, nan=1.0), 0.0)


def bridge_above_probability(
    w0: np.ndarray, w1: np.ndarray, variance: np.ndarray, level: float
) -> np.ndarray:
    """P(bridge from w0 to w1 stays above level)."""
    return bridge_below_probability(-w0, -w1, variance, -level)


def bridge_stay_probability(
    x0: np.ndarray, x1: np.ndarray, variance: np.ndarray, width: float
) -> np.ndarray:
    """
    P(bridge from x0 to x1 stays inside (0, width)), exact.

    Uses the method of images when the variance is small against width^2 and
    the Dirichlet eigenfunction expansion of the kernel otherwise.
    """
    x0, x1, variance = np.broadcast_arrays(
        np.asarray(x0, dtype=float), np.asarray(x1, dtype=float), np.asarray(variance, dtype=float)
    )
    inside = (x0 > 0) & (x0 < width) & (x1 > 0) & (x1 < width) & (variance > 0)
    out = np.zeros(x0.shape)
    if not inside.any():
        return out

    short = inside & (variance < width * width)
    if short.any():
        a, b, v = x0[short], x1[short], variance[short]
        total = np.zeros(a.shape)
        for k in range(-_IMAGE_TERMS, _IMAGE_TERMS + 1):
            shift = k * width
            total += np.exp(-2.0 * shift * (shift - (b - a)) / v)
            total -= np.exp(-2.0 * (shift - a) * (shift - b) / v)
        out[short] = total

    long = inside & ~short
    if long.any():
        a, b, v = x0[long], x1[long], variance[long]
        kernel = np.zeros(a.shape)
        for n in range(1, _EIGEN_TERMS + 1):
            freq = n * math.pi / width
            kernel += np.sin(freq * a) * np.sin(freq * b) * np.exp(-0.5 * freq * freq * v)
        kernel *= 2.0 / width
        gauss = np.exp(-0.5 * (b - a) ** 2 / v) / np.sqrt(2.0 * math.pi * v)
        with np.errstate(divide='ignore', invalid='ignore'):
            out[long] = np.where(gauss > 0, kernel / gauss, 0.0)

    return np.clip(out, 0.0, 1.0)


def run_blocks(
    worker: Callable[[tuple], Dict[str, np.ndarray]],
    params: tuple,
    paths: int,
    n_steps: int,
    seed: int,
    workers: Optional[int] = None,
    block_cells: Optional[int] = None
) -> List[Dict[str, np.ndarray]]:
    """
    Evaluate worker over the block layout of paths.

    Each task is params + (seed, block index, start, count); results come back
    in block order whatever the worker count. The layout, and with it the
    substream each path reads, is fixed by block_cells (default
    HEATLAB_BLOCK_CELLS).
    """
    workers = config.WORKERS if workers is None else workers
    block_cells = config.BLOCK_CELLS if block_cells is None else block_cells
    blocks = block_layout(paths, n_steps, block_cells)
    tasks = [params + (seed, b.index, b.start, b.count) for b in blocks]
    logger.debug(f"Simulating {paths} paths x {n_steps} steps in {len(blocks)} blocks")
    return map_blocks(worker, tasks, workers)


def concat(results: Sequence[Dict[str, np.ndarray]], key: str) -> np.ndarray:
    return np.concatenate([r[key] for r in results])


def block_rng(seed: int, block: int) -> np.random.Generator:
    return substream(seed, block)
