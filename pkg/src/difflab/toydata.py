"""2-D toy datasets and the two-sample / mode-coverage metrics.

Generators produce the classic swiss roll (spiral with Gaussian jitter), two
interleaved moons, and an alternating-cell chessboard, standardized to zero
mean and unit per-axis variance.  The energy distance

    D(A, B) = 2 E|a - b| - E|a - a'| - E|b - b'|

is estimated as a V-statistic over subsampled blocks: non-negative, symmetric,
zero exactly for identical empirical distributions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

__all__ = [
    "ToyDataset",
    "generate",
    "energy_distance",
    "mode_coverage",
    "chessboard_regions",
    "occupancy_regions",
    "TOY_NAMES",
]

TOY_NAMES = ("swissroll", "moons", "chessboard")

_CHESS_LO, _CHESS_HI, _CHESS_CELLS = -2.0, 2.0, 4


@dataclass(frozen=True)
class ToyDataset:
    """Standardized 2-D point set plus the affine transform that produced it."""

    name: str
    points: np.ndarray        # (n, 2), standardized
    seed: int
    noise: float
    center: np.ndarray        # per-axis mean of the raw draw
    scale: np.ndarray         # per-axis std of the raw draw

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def to_standardized(self, raw: np.ndarray) -> np.ndarray:
        return (raw - self.center) / self.scale


def _raw_swissroll(n: int, noise: float, rng: np.random.Generator) -> np.ndarray:
    theta = 1.5 * np.pi * (1.0 + 2.0 * rng.uniform(size=n))
    pts = np.stack([theta * np.cos(theta), theta * np.sin(theta)], axis=1)
    return pts + noise * rng.standard_normal((n, 2))


def _raw_moons(n: int, noise: float, rng: np.random.Generator) -> np.ndarray:
    n_out = n // 2
    n_in = n - n_out
    th_out = np.pi * rng.uniform(size=n_out)
    th_in = np.pi * rng.uniform(size=n_in)
    outer = np.stack([np.cos(th_out), np.sin(th_out)], axis=1)
    inner = np.stack([1.0 - np.cos(th_in), 0.5 - np.sin(th_in)], axis=1)
    pts = np.concatenate([outer, inner], axis=0)
    return pts + noise * rng.standard_normal((n, 2))


def _chess_on_cells() -> np.ndarray:
    cells = []
    for i in range(_CHESS_CELLS):
        for j in range(_CHESS_CELLS):
            if (i + j) % 2 == 0:
                cells.append((i, j))
    return np.array(cells)


def _raw_chessboard(n: int, noise: float, rng: np.random.Generator) -> np.ndarray:
    size = (_CHESS_HI - _CHESS_LO) / _CHESS_CELLS
    cells = _chess_on_cells()
    pick = rng.integers(len(cells), size=n)
    offsets = rng.uniform(size=(n, 2))
    return _CHESS_LO + (cells[pick] + offsets) * size


_GENERATORS = {"swissroll": _raw_swissroll, "moons": _raw_moons, "chessboard": _raw_chessboard}
_DEFAULT_NOISE = {"swissroll": 0.4, "moons": 0.05, "chessboard": 0.0}


def generate(name: str, n: int = 100_000, noise: float | None = None, seed: int = 0) -> ToyDataset:
    """Draw a standardized toy dataset; identical (name, n, noise, seed) give
    identical datasets."""
    if name not in _GENERATORS:
        raise ValueError(f"unknown dataset {name!r}; expected one of {TOY_NAMES}")
    if n < 2:
        raise ValueError("n must be >= 2")
    if noise is None:
        noise = _DEFAULT_NOISE[name]
    rng = np.random.Generator(np.random.Philox(key=seed))
    raw = _GENERATORS[name](n, noise, rng)
    center = raw.mean(axis=0)
    scale = raw.std(axis=0)
    return ToyDataset(name, (raw - center) / scale, seed, noise, center, scale)


def energy_distance(samples_a, samples_b, *, max_points: int = 2048, blocks: int = 4,
                    seed: int = 0) -> float:
    """Energy distance between two sample sets (V-statistic, subsampled).

    Sets larger than max_points are subsampled without replacement per block
    and the block values averaged; smaller sets are used whole (one block).
    """
    a = np.asarray(samples_a, dtype=np.float64)
    b = np.asarray(samples_b, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape[1] != b.shape[1]:
        raise ValueError("sample sets must share dimensionality")
    rng = np.random.Generator(np.random.Philox(key=seed))
    if a.shape[0] <= max_points and b.shape[0] <= max_points:
        blocks = 1
    vals = []
    for _ in range(blocks):
        sa = a if a.shape[0] <= max_points else a[rng.choice(a.shape[0], max_points, replace=False)]
        sb = b if b.shape[0] <= max_points else b[rng.choice(b.shape[0], max_points, replace=False)]
        ab = cdist(sa, sb).mean()
        aa = cdist(sa, sa).mean()
        bb = cdist(sb, sb).mean()
        vals.append(2.0 * ab - aa - bb)
    return float(np.mean(vals))


def mode_coverage(samples, regions: np.ndarray, min_count: int = 10) -> float:
    """Fraction of regions holding at least min_count samples.

    regions has shape (R, d, 2): per region, per dimension, (low, high).
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    regions = np.asarray(regions, dtype=np.float64)
    if regions.ndim != 3 or regions.shape[1] != x.shape[1] or regions.shape[2] != 2:
        raise ValueError(f"regions shape {regions.shape} incompatible with samples {x.shape}")
    hit = 0
    for box in regions:
        inside = np.all((x >= box[:, 0]) & (x < box[:, 1]), axis=1)
        if int(inside.sum()) >= min_count:
            hit += 1
    return hit / len(regions)


def chessboard_regions(dataset: ToyDataset) -> np.ndarray:
    """The 8 occupied chessboard cells as boxes in standardized coordinates."""
    if dataset.name != "chessboard":
        raise ValueError("chessboard_regions needs a chessboard dataset")
    size = (_CHESS_HI - _CHESS_LO) / _CHESS_CELLS
    boxes = []
    for i, j in _chess_on_cells():
        lo = np.array([_CHESS_LO + i * size, _CHESS_LO + j * size])
        hi = lo + size
        lo_s = (lo - dataset.center) / dataset.scale
        hi_s = (hi - dataset.center) / dataset.scale
        boxes.append(np.stack([lo_s, hi_s], axis=1))
    return np.stack(boxes)


def occupancy_regions(points: np.ndarray, grid_shape: tuple[int, int] = (8, 8),
                      min_count: int = 50, pad: float = 1e-9) -> np.ndarray:
    """Boxes of a regular grid over the data's bounding box that contain at
    least min_count of the given points; a generic region spec for coverage
    checks on curved supports like the swiss roll."""
    pts = np.asarray(points, dtype=np.float64)
    lo = pts.min(axis=0) - pad
    hi = pts.max(axis=0) + pad
    nx, ny = grid_shape
    ex = np.linspace(lo[0], hi[0], nx + 1)
    ey = np.linspace(lo[1], hi[1], ny + 1)
    boxes = []
    for i in range(nx):
        for j in range(ny):
            box = np.array([[ex[i], ex[i + 1]], [ey[j], ey[j + 1]]])
            inside = np.all((pts >= box[:, 0]) & (pts < box[:, 1]), axis=1)
            if int(inside.sum()) >= min_count:
                boxes.append(box)
    if not boxes:
        raise ValueError("no region reached min_count; loosen the grid")
    return np.stack(boxes)
