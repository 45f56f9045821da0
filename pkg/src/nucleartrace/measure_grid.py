"""Finite product measure spaces: axes, grids, boxes, weights and sampled functions.

Everything in the package computes on a :class:`ProductGrid`, a tensor product
of one-dimensional quadrature axes.  The continuous measure spaces of the
theory are replaced by finite grids; sigma-finiteness is represented by an
explicit box partition whose per-box weighted norms are reported.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Axis",
    "ProductGrid",
    "Box",
    "WeightFunction",
    "SampledFunction",
    "InvalidPartitionError",
    "integrate",
    "box_partition",
    "box_mask",
    "triple_is_sigma_finite",
    "torus_grid",
    "interval_grid",
    "line_grid",
    "save_function",
    "load_function",
]


class InvalidPartitionError(ValueError):
    """Requested box partition does not tile the grid."""


@dataclass(frozen=True, eq=False)
class Axis:
    """One factor of a product measure space.

    Parameters
    ----------
    nodes : array_like
        Strictly increasing sample points.
    quad_weights : array_like
        Positive quadrature weights, one per node.
    periodic : bool
        Whether the axis is a circle of length ``extent``.
    extent : float
        Period length for periodic axes, otherwise the covered length.
    """

    nodes: np.ndarray
    quad_weights: np.ndarray
    periodic: bool = False
    extent: float = 1.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        wts = np.asarray(self.quad_weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != wts.shape or nodes.size == 0:
            raise ValueError("nodes and quad_weights must be 1-d arrays of equal nonzero length")
        if not np.all(np.isfinite(nodes)) or not np.all(np.isfinite(wts)):
            raise ValueError("axis data must be finite")
        if np.any(wts <= 0):
            raise ValueError("quadrature weights must be positive")
        if nodes.size > 1 and np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if self.periodic and (nodes[0] < 0 or nodes[-1] >= self.extent):
            raise ValueError("periodic nodes must lie in [0, extent)")
        nodes.setflags(write=False)
        wts.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "quad_weights", wts)
        object.__setattr__(self, "extent", float(self.extent))

    def __len__(self):
        return self.nodes.size

    def __eq__(self, other):
        if not isinstance(other, Axis):
            return NotImplemented
        return (
            self.periodic == other.periodic
            and self.extent == other.extent
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.quad_weights, other.quad_weights)
        )

    __hash__ = None

    @classmethod
    def periodic_uniform(cls, n: int, extent: float = 1.0) -> "Axis":
        """Uniform trapezoidal grid on the circle of length ``extent``."""
        h = extent / n
        return cls(np.arange(n) * h, np.full(n, h), periodic=True, extent=extent)

    @classmethod
    def uniform(cls, start: float, stop: float, n: int, rule: str = "left") -> "Axis":
        """Riemann grid on ``[start, stop)``; ``rule`` is ``'left'`` or ``'midpoint'``."""
        h = (stop - start) / n
        offset = {"left": 0.0, "midpoint": 0.5}[rule]
        nodes = start + (np.arange(n) + offset) * h
        return cls(nodes, np.full(n, h), periodic=False, extent=stop - start)

    @property
    def measure(self) -> float:
        return float(self.quad_weights.sum())

    def to_dict(self) -> dict:
        return {
            "nodes": self.nodes.tolist(),
            "quad_weights": self.quad_weights.tolist(),
            "periodic": self.periodic,
            "extent": self.extent,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Axis":
        return cls(d["nodes"], d["quad_weights"], bool(d["periodic"]), float(d["extent"]))


@dataclass(frozen=True)
class ProductGrid:
    """Tensor product of axes; axis 0 is the innermost integration variable."""

    axes: tuple

    def __post_init__(self):
        axes = tuple(self.axes)
        if len(axes) < 1:
            raise ValueError("a grid needs at least one axis")
        object.__setattr__(self, "axes", axes)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def cell_weights(self) -> np.ndarray:
        """Product quadrature weights on the full grid."""
        out = np.ones(())
        for a in self.axes:
            out = np.multiply.outer(out, a.quad_weights)
        return out

    def mesh(self) -> list:
        """Coordinate arrays (``indexing='ij'``)."""
        return np.meshgrid(*(a.nodes for a in self.axes), indexing="ij")

    @property
    def measure(self) -> float:
        return float(np.prod([a.measure for a in self.axes]))

    def product(self, other: "ProductGrid") -> "ProductGrid":
        return ProductGrid(self.axes + other.axes)

    def to_dict(self) -> dict:
        return {
            "axes": [a.to_dict() for a in self.axes],
            "counts": list(self.shape),
            "extents": [a.extent for a in self.axes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProductGrid":
        return cls(tuple(Axis.from_dict(a) for a in d["axes"]))


def torus_grid(n: int, dim: int = 1) -> ProductGrid:
    """Uniform grid on the unit torus ``[0, 1)^dim`` with ``n`` points per axis."""
    return ProductGrid(tuple(Axis.periodic_uniform(n) for _ in range(dim)))


def interval_grid(start: float, stop: float, n: int, dim: int = 1, rule: str = "midpoint") -> ProductGrid:
    return ProductGrid(tuple(Axis.uniform(start, stop, n, rule) for _ in range(dim)))


def line_grid(L: float, n: int, dim: int = 1) -> ProductGrid:
    """Truncation ``[-L, L)^dim`` of R^dim; ``n`` must be even so 0 is a node."""
    if n % 2:
        raise ValueError("line grids need an even number of points")
    return ProductGrid(tuple(Axis.uniform(-L, L, n, "left") for _ in range(dim)))


@dataclass(frozen=True)
class Box:
    """Half-open index ranges ``[start, stop)`` per axis."""

    ranges: tuple

    def slices(self) -> tuple:
        return tuple(slice(a, b) for a, b in self.ranges)

    @property
    def size(self) -> int:
        return int(np.prod([b - a for a, b in self.ranges]))


class SampledFunction:
    """Complex values on a :class:`ProductGrid`.

    ``values`` has shape ``grid.shape``; non-finite samples are rejected.
    Arithmetic with scalars and functions on the same grid is supported.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: ProductGrid, values):
        vals = np.array(values, dtype=complex)
        if vals.shape != grid.shape:
            if vals.size == grid.size:
                vals = vals.reshape(grid.shape)
            else:
                raise ValueError(f"values of shape {vals.shape} do not fit grid {grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sampled values must be finite")
        vals.setflags(write=False)
        self.grid = grid
        self.values = vals

    @classmethod
    def from_callable(cls, grid: ProductGrid, fn: Callable) -> "SampledFunction":
        return cls(grid, np.broadcast_to(fn(*grid.mesh()), grid.shape))

    @classmethod
    def constant(cls, grid: ProductGrid, c: complex = 1.0) -> "SampledFunction":
        return cls(grid, np.full(grid.shape, c, dtype=complex))

    def _other(self, other):
        if isinstance(other, SampledFunction):
            if other.grid != self.grid:
                raise ValueError("functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return SampledFunction(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return SampledFunction(self.grid, self.values - self._other(other))

    def __mul__(self, other):
        return SampledFunction(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return SampledFunction(self.grid, -self.values)

    def conj(self) -> "SampledFunction":
        return SampledFunction(self.grid, self.values.conj())

    def abs(self) -> np.ndarray:
        return np.abs(self.values)

    def __repr__(self):
        return f"SampledFunction(shape={self.grid.shape})"


class WeightFunction:
    """Strictly positive weight sampled on a grid.

    Optional ``factors`` are one-dimensional weights ``w_j`` on each axis; when
    present, ``w(x) <= prod_j w_j(x_j)`` is checked at every node.
    """

    __slots__ = ("grid", "values", "factors", "params")

    def __init__(self, grid: ProductGrid, values, factors=None, params=None):
        vals = np.array(np.broadcast_to(values, grid.shape), dtype=float)
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise ValueError("weights must be finite and strictly positive")
        if factors is not None:
            factors = tuple(np.asarray(f, dtype=float) for f in factors)
            if len(factors) != grid.ndim or any(f.shape != (len(a),) for f, a in zip(factors, grid.axes)):
                raise ValueError("one factor per axis with matching length required")
            if any(np.any(f <= 0) for f in factors):
                raise ValueError("weight factors must be strictly positive")
            bound = np.ones(())
            for f in factors:
                bound = np.multiply.outer(bound, f)
            if np.any(vals > bound * (1 + 1e-12)):
                raise ValueError("weight violates w(x) <= w_1(x_1)...w_n(x_n)")
        vals.setflags(write=False)
        self.grid = grid
        self.values = vals
        self.factors = factors
        self.params = dict(params or {})

    @classmethod
    def constant(cls, grid: ProductGrid, c: float = 1.0) -> "WeightFunction":
        return cls(grid, np.full(grid.shape, float(c)),
                   factors=[np.full(len(a), c ** (1.0 / grid.ndim)) for a in grid.axes],
                   params={"kind": "constant", "value": c})

    @classmethod
    def from_callable(cls, grid: ProductGrid, fn: Callable) -> "WeightFunction":
        return cls(grid, fn(*grid.mesh()))

    @classmethod
    def polynomial(cls, grid: ProductGrid, s: float) -> "WeightFunction":
        """``v_s(z) = (1 + |z|^2)^(s/2)`` over all coordinates of the grid."""
        r2 = sum(x ** 2 for x in grid.mesh())
        vals = (1.0 + r2) ** (s / 2.0)
        factors = None
        if s >= 0:
            # (1 + sum x_j^2) <= prod (1 + |x_j|)^2
            factors = [(1.0 + np.abs(a.nodes)) ** s for a in grid.axes]
        return cls(grid, vals, factors=factors, params={"kind": "polynomial", "s": s})

    @classmethod
    def bracket_product(cls, grid: ProductGrid, betas: Sequence[float]) -> "WeightFunction":
        """Separable ``<x_1>^b_1 ... <x_n>^b_n`` with ``<x> = 1 + |x|``."""
        factors = [(1.0 + np.abs(a.nodes)) ** b for a, b in zip(grid.axes, betas)]
        vals = np.ones(())
        for f in factors:
            vals = np.multiply.outer(vals, f)
        return cls(grid, vals, factors=factors, params={"kind": "bracket", "betas": list(betas)})

    def inverse(self) -> "WeightFunction":
        return WeightFunction(self.grid, 1.0 / self.values, params={"kind": "inverse", "of": self.params})

    def is_box_constant(self, boxes: Sequence[Box], rtol: float = 1e-12) -> bool:
        for b in boxes:
            block = self.values[b.slices()]
            if np.ptp(block) > rtol * np.max(block):
                return False
        return True


def integrate(f: SampledFunction) -> complex:
    """Quadrature of ``f`` against the product measure of its grid."""
    return complex(np.sum(f.values * f.grid.cell_weights()))


def box_partition(grid: ProductGrid, counts: Sequence[int]) -> list:
    """Split every axis into ``counts[i]`` equal index blocks.

    >>> len(box_partition(torus_grid(8), [2]))
    2
    """
    counts = list(counts)
    if len(counts) != grid.ndim:
        raise InvalidPartitionError("one count per axis required")
    per_axis = []
    for n, c in zip(grid.shape, counts):
        if c < 1 or n % c:
            raise InvalidPartitionError(f"count {c} does not divide axis length {n}")
        step = n // c
        per_axis.append([(k * step, (k + 1) * step) for k in range(c)])
    boxes = [Box(tuple(r)) for r in _product(per_axis)]
    return boxes


def _product(lists):
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for tail in _product(lists[1:]):
            yield (head,) + tail


def box_mask(grid: ProductGrid, box: Box) -> np.ndarray:
    m = np.zeros(grid.shape, dtype=bool)
    m[box.slices()] = True
    return m


def triple_is_sigma_finite(grid, w, P, partition, convention=None):
    """Weighted mixed norm of every box indicator.

    Returns ``(ok, values)`` where ``values[k] = ||1_{box_k}||`` in the
    weighted mixed-norm space; ``ok`` is whether all of them are finite, which
    on a finite grid is always the case.
    """
    from .mixed_norm import Convention, mixed_norm

    convention = Convention.POINTWISE if convention is None else convention
    values = [
        mixed_norm(SampledFunction(grid, box_mask(grid, b).astype(float)), P, w, convention)
        for b in partition
    ]
    ok = all(np.isfinite(v) for v in values)
    return ok, values


# --- serialization ---------------------------------------------------------

def save_function(f: SampledFunction, path, fmt: str = "csv", header: dict | None = None) -> Path:
    """Write ``<stem>.json`` descriptor plus ``<stem>.csv`` or ``<stem>.bin``.

    Values are flattened row-major in axis order and stored as interleaved
    real/imag pairs; the binary layout is little-endian float64.
    """
    path = Path(path)
    stem = path.with_suffix("")
    flat = f.values.reshape(-1)
    pairs = np.column_stack([flat.real, flat.imag])
    if fmt == "csv":
        data_path = stem.with_suffix(".csv")
        np.savetxt(data_path, pairs, delimiter=",", fmt="%.17g", header="re,im", comments="")
    elif fmt == "bin":
        data_path = stem.with_suffix(".bin")
        pairs.astype("<f8").tofile(data_path)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    desc = {
        "schema": "1",
        "grid": f.grid.to_dict(),
        "format": fmt,
        "byte_order": "little",
        "layout": "row-major, interleaved re/im",
        "data_file": data_path.name,
    }
    if header:
        desc["header"] = header
    json_path = stem.with_suffix(".json")
    json_path.write_text(json.dumps(desc, indent=1, sort_keys=True))
    return json_path


def load_function(path) -> SampledFunction:
    json_path = Path(path).with_suffix(".json")
    desc = json.loads(json_path.read_text())
    grid = ProductGrid.from_dict(desc["grid"])
    data_path = json_path.parent / desc["data_file"]
    if desc["format"] == "csv":
        pairs = np.loadtxt(data_path, delimiter=",", skiprows=1, ndmin=2)
    else:
        pairs = np.fromfile(data_path, dtype="<f8").reshape(-1, 2)
    return SampledFunction(grid, (pairs[:, 0] + 1j * pairs[:, 1]).reshape(grid.shape))
