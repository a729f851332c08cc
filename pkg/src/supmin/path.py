"""Grids, piecewise-linear vector paths, affine boundary maps, difference quotients.

A path u : [a, b] -> R^N is stored by its nodal values on a strictly
increasing grid and interpolated linearly inside each element, so its
derivative is element-wise constant.  This is the discrete stand-in for
Lipschitz candidates throughout the package.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomain, SupminError, ZeroStep

_EPS = np.finfo(float).eps


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Grid:
    """Strictly increasing nodes x_0 < ... < x_M with at least two elements."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = _readonly(self.nodes)
        if nodes.ndim != 1 or nodes.size < 3:
            raise SupminError("grid needs at least 3 nodes")
        if not np.all(np.isfinite(nodes)):
            raise SupminError("grid nodes must be finite")
        if not np.all(np.diff(nodes) > 0):
            raise SupminError("grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, a: float, b: float, num_nodes: int) -> "Grid":
        return cls(np.linspace(float(a), float(b), int(num_nodes)))

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    @property
    def num_elements(self) -> int:
        return self.nodes.size - 1

    @property
    def element_lengths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def is_uniform(self) -> bool:
        h = self.element_lengths
        return bool(np.max(h) - np.min(h) <= 1e-12 * np.max(h))


@dataclass(frozen=True)
class Path:
    """Nodal values of a piecewise-linear map from the grid interval to R^N."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != self.grid.nodes.size:
            raise SupminError("values must have one row per grid node")
        if not np.all(np.isfinite(values)):
            raise SupminError("path values must be finite")
        object.__setattr__(self, "values", _readonly(values))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def element_slopes(self) -> np.ndarray:
        """Constant derivative of each element, shape (M, N)."""
        return np.diff(self.values, axis=0) / self.grid.element_lengths[:, None]

    def with_values(self, values: np.ndarray) -> "Path":
        return Path(self.grid, values)

    def to_csv(self, file) -> None:
        """Write `x,u1,...,uN` rows at full double precision (17 significant digits)."""
        close = False
        if isinstance(file, (str, bytes)):
            file, close = open(file, "w", newline="\n"), True
        try:
            cols = ",".join(f"u{k + 1}" for k in range(self.dim))
            file.write(f"x,{cols}\n")
            for x, row in zip(self.grid.nodes, self.values):
                vals = ",".join(format(v, ".17g") for v in row)
                file.write(f"{format(x, '.17g')},{vals}\n")
        finally:
            if close:
                file.close()

    @classmethod
    def from_csv(cls, file) -> "Path":
        close = False
        if isinstance(file, (str, bytes)):
            file, close = open(file, "r"), True
        try:
            header = file.readline().strip()
            if not header.startswith("x,"):
                raise SupminError("path CSV must start with header 'x,u1,...'")
            rows = [
                [float(tok) for tok in line.strip().split(",")]
                for line in file
                if line.strip()
            ]
        finally:
            if close:
                file.close()
        data = np.array(rows, dtype=float)
        return cls(Grid(data[:, 0]), data[:, 1:])

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


@dataclass(frozen=True)
class AffineMap:
    """Boundary data x -> b0 + b1 * x."""

    b0: np.ndarray
    b1: np.ndarray

    def __post_init__(self):
        b0 = _readonly(np.atleast_1d(self.b0))
        b1 = _readonly(np.atleast_1d(self.b1))
        if b0.shape != b1.shape or b0.ndim != 1:
            raise SupminError("b0 and b1 must be vectors of equal length")
        if not (np.all(np.isfinite(b0)) and np.all(np.isfinite(b1))):
            raise SupminError("affine map coefficients must be finite")
        object.__setattr__(self, "b0", b0)
        object.__setattr__(self, "b1", b1)

    @property
    def dim(self) -> int:
        return self.b0.size

    def __call__(self, x: float) -> np.ndarray:
        return self.b0 + self.b1 * float(x)


@dataclass(frozen=True)
class PathSample:
    value: np.ndarray
    slope: np.ndarray
    element: int


def interpolate_affine(bmap: AffineMap, grid: Grid) -> Path:
    """Nodal sampling of the affine map: values[i] = b0 + b1 * x_i exactly."""
    values = bmap.b0[None, :] + grid.nodes[:, None] * bmap.b1[None, :]
    return Path(grid, values)


def _containing_element(grid: Grid, x: float) -> int:
    # Left element at interior nodes (tie-break rule); clamped at the ends.
    idx = int(np.searchsorted(grid.nodes, x, side="left"))
    return min(max(idx - 1, 0), grid.num_elements - 1)


def eval_and_slope(path: Path, x: float) -> PathSample:
    """Interpolated value and element slope at x; left element wins at nodes."""
    x = float(x)
    if x < path.grid.a or x > path.grid.b:
        raise OutOfDomain(f"x={x} outside [{path.grid.a}, {path.grid.b}]")
    e = _containing_element(path.grid, x)
    x0 = path.grid.nodes[e]
    slope = (path.values[e + 1] - path.values[e]) / (path.grid.nodes[e + 1] - x0)
    return PathSample(path.values[e] + (x - x0) * slope, slope, e)


def _weighted_slope_average(path: Path, lo: float, hi: float) -> np.ndarray:
    """Length-weighted average of element slopes over [lo, hi]."""
    nodes = path.grid.nodes
    slopes = path.element_slopes()
    acc = np.zeros(path.dim)
    for e in range(path.grid.num_elements):
        w = min(nodes[e + 1], hi) - max(nodes[e], lo)
        if w > 0:
            acc += w * slopes[e]
    return acc / (hi - lo)


def difference_quotient(path: Path, y: float, t: float) -> np.ndarray:
    """(u(y+t) - u(y)) / t for y, y+t in [a, b], t != 0.

    For piecewise-linear paths this equals the element-length-weighted
    average of the element slopes between y and y+t; the identity is
    asserted in debug mode within 8*eps*scale, where
    scale = (n_spanned + 4) * (1 + max spanned |u|) / |t|.
    """
    t = float(t)
    if t == 0.0:
        raise ZeroStep("difference quotient needs t != 0")
    q = (eval_and_slope(path, y + t).value - eval_and_slope(path, y).value) / t
    if __debug__:
        lo, hi = (y, y + t) if t > 0 else (y + t, y)
        avg = _weighted_slope_average(path, lo, hi)
        assert np.max(np.abs(q - avg)) <= 8 * _EPS * quotient_scale(path, y, t)
    return q


def quotient_scale(path: Path, y: float, t: float) -> float:
    """Floating-point error scale of the difference-quotient identity."""
    lo, hi = (y, y + t) if t > 0 else (y + t, y)
    nodes = path.grid.nodes
    spanned = (nodes[1:] > lo) & (nodes[:-1] < hi)
    node_mask = np.zeros(nodes.size, dtype=bool)
    node_mask[:-1] |= spanned
    node_mask[1:] |= spanned
    umax = float(np.max(np.abs(path.values[node_mask]))) if node_mask.any() else 0.0
    return (int(np.count_nonzero(spanned)) + 4) * (1.0 + umax) / abs(t)


def resample(path: Path, new_grid: Grid) -> Path:
    """Re-sample onto a new grid; nodal values are copied bit-exactly where
    a new node coincides with an old one."""
    old = path.grid.nodes
    values = np.empty((new_grid.nodes.size, path.dim))
    pos = np.searchsorted(old, new_grid.nodes)
    for i, x in enumerate(new_grid.nodes):
        j = pos[i]
        if j < old.size and old[j] == x:
            values[i] = path.values[j]
        else:
            values[i] = eval_and_slope(path, x).value
    return Path(new_grid, values)
