"""Axis-aligned cubes and k-ary subdivision."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError


@dataclass(frozen=True)
class Cube:
    """Closed axis-aligned cube ``center +- side/2`` at a subdivision depth."""

    center: tuple
    side: float
    depth: int = 0

    def __post_init__(self):
        center = tuple(float(c) for c in np.atleast_1d(np.asarray(self.center, dtype=float)))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "side", float(self.side))
        if not self.side > 0 or not np.isfinite(self.side):
            raise InvalidParameterError(f"cube side must be positive, got {self.side}")
        if self.depth < 0:
            raise InvalidParameterError("depth must be nonnegative")

    @classmethod
    def from_corner(cls, lo: Sequence[float], side: float, depth: int = 0) -> "Cube":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        return cls(tuple(lo + 0.5 * side), side, depth)

    @classmethod
    def unit(cls, d: int) -> "Cube":
        return cls((0.5,) * d, 1.0)

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return self.side ** self.dim

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.center) - 0.5 * self.side

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.center) + 0.5 * self.side

    def scaled(self, factor: float) -> "Cube":
        """Image of the cube under x -> factor * x."""
        return Cube(tuple(factor * np.asarray(self.center)), factor * self.side, self.depth)

    def translated(self, shift) -> "Cube":
        return Cube(tuple(np.asarray(self.center) + np.asarray(shift, dtype=float)), self.side, self.depth)

    def to_dict(self) -> dict:
        return {"center": list(self.center), "side": self.side, "depth": self.depth}


def lattice_offsets(k: int, d: int) -> list[tuple[int, ...]]:
    """Child lattice indices in lexicographic order (first axis slowest)."""
    return list(itertools.product(range(k), repeat=d))


def subdivide(parent: Cube, k: int) -> list[Cube]:
    """Split ``parent`` into k^d congruent children, lexicographically ordered.

    Child centers are offsets from the parent center, so for odd k the
    middle child reproduces the parent center bit for bit.
    """
    if int(k) != k or k < 2:
        raise InvalidParameterError(f"k must be an integer >= 2, got {k}")
    k = int(k)
    h = parent.side / k
    c = np.asarray(parent.center)
    children = []
    for idx in lattice_offsets(k, parent.dim):
        offset = (np.asarray(idx, dtype=float) - 0.5 * (k - 1)) * h
        children.append(Cube(tuple(c + offset), h, parent.depth + 1))
    return children


def contains(cube: Cube, x, root: Cube | None = None) -> bool:
    """Half-open membership: lower faces closed, upper faces open.

    Upper faces lying on the upper boundary of ``root`` are closed so the
    tiles of ``root`` cover it entirely.  ``root`` defaults to ``cube``.
    Faces are snapped to the lattice of ``root`` with spacing ``cube.side``,
    so neighbouring tiles compute their shared face identically.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (cube.dim,):
        raise DimensionMismatchError(f"point has shape {x.shape}, cube has dimension {cube.dim}")
    root = cube if root is None else root
    h = cube.side
    idx = np.rint((cube.lo - root.lo) / h)
    lo = root.lo + idx * h
    hi = root.lo + (idx + 1) * h
    on_root_top = (idx + 1) == np.rint(root.side / h)
    upper_ok = np.where(on_root_top, x <= root.hi, x < hi)
    return bool(np.all(x >= lo) and np.all(upper_ok))


def point_distance(cube: Cube, x) -> float:
    """Euclidean distance from the closed cube to the point x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    gap = np.maximum(0.0, np.maximum(cube.lo - x, x - cube.hi))
    return float(np.sqrt(np.sum(gap ** 2)))


def lattice_center_relation(index: Sequence[int], level: int, k: int) -> tuple[bool, bool]:
    """Exact position of a lattice cube relative to the root center.

    A cube at ``level`` below the root with integer lattice ``index`` spans
    [I, I+1]/k^level in root-normalized coordinates.  Scaling by 2 k^level
    makes every quantity an integer, so the check is exact.

    Returns (shares_root_center, distance_at_least_half_side).
    """
    n = k ** level
    shares = all(2 * i + 1 == n for i in index)
    dist2 = 0
    for i in index:
        gap = max(0, 2 * i - n, n - 2 * i - 2)
        dist2 += gap * gap
    # side is 2 in these units, so dist >= side/2 means dist2 >= 1
    return shares, dist2 >= 1
