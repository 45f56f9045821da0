"""Weighted mixed-norm Lebesgue spaces ``L^P_w`` on product grids."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .measure_grid import (
    Box,
    SampledFunction,
    WeightFunction,
    integrate,
)

__all__ = [
    "Convention",
    "ExponentTuple",
    "DualExponentTuple",
    "mixed_norm",
    "iterated_norm",
    "dual_exponents",
    "dual_pairing",
    "map_projection",
    "box_average",
    "NotBoxConstantError",
]


class NotBoxConstantError(ValueError):
    """Weight (or exponent) varies inside a partition box."""


class Convention(enum.Enum):
    """Where the weight enters the mixed norm.

    DENSITY puts ``w`` once inside the innermost integral,
    ``(int |f|^p1 w dmu_1)^(1/p1)...``.  POINTWISE takes the unweighted mixed
    norm of ``f * w``.  They agree when ``w == 1``.
    """

    DENSITY = "density"
    POINTWISE = "pointwise"


@dataclass(frozen=True)
class ExponentTuple:
    entries: tuple

    def __post_init__(self):
        e = tuple(float(p) for p in self.entries)
        if not e:
            raise ValueError("empty exponent tuple")
        for p in e:
            if not (1.0 <= p < np.inf):
                raise ValueError(f"exponent {p} outside [1, inf)")
        object.__setattr__(self, "entries", e)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class DualExponentTuple:
    """Conjugate exponents; ``inf`` entries are allowed (dual of ``p = 1``)."""

    entries: tuple

    def __post_init__(self):
        e = tuple(float(p) for p in self.entries)
        for p in e:
            if not (1.0 <= p <= np.inf):
                raise ValueError(f"dual exponent {p} outside [1, inf]")
        object.__setattr__(self, "entries", e)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def _as_exponents(P):
    if isinstance(P, (ExponentTuple, DualExponentTuple)):
        return P
    return ExponentTuple(tuple(P))


def _conj(p: float) -> float:
    if p == 1.0:
        return np.inf
    if p == np.inf:
        return 1.0
    return p / (p - 1.0)


def dual_exponents(P) -> DualExponentTuple:
    """Entrywise Hoelder conjugate, ``1 -> inf``."""
    return DualExponentTuple(tuple(_conj(p) for p in _as_exponents(P)))


def iterated_norm(values: np.ndarray, axis_weights: Sequence[np.ndarray], exponents: Sequence[float],
                  density: np.ndarray | None = None) -> float:
    """Iterated ``L^{p_1}``, ..., ``L^{p_n}`` norm of ``|values|``, axis 0 innermost.

    ``density`` (same shape as ``values``) multiplies the innermost integrand
    only.  Infinite exponents take the maximum over nodes.
    """
    a = np.abs(np.asarray(values))
    scale = a.max() if a.size else 0.0
    if scale == 0.0:
        return 0.0
    a = a / scale
    for k, (wts, p) in enumerate(zip(axis_weights, exponents)):
        if np.isinf(p):
            if density is not None and k == 0:
                a = a * (density > 0)
            a = a.max(axis=0)
            continue
        integrand = a ** p
        if density is not None and k == 0:
            integrand = integrand * density
        wts = np.asarray(wts).reshape((-1,) + (1,) * (a.ndim - 1))
        a = np.sum(integrand * wts, axis=0) ** (1.0 / p)
    return float(scale * a)


def mixed_norm(f: SampledFunction, P, w: WeightFunction | None = None,
               convention: Convention = Convention.POINTWISE) -> float:
    """Weighted mixed norm ``||f||_{L^P_w}``.

    Parameters
    ----------
    f : SampledFunction
    P : ExponentTuple, DualExponentTuple or sequence of floats
        One exponent per grid axis; ``P[0]`` belongs to the innermost axis.
    w : WeightFunction, optional
        Defaults to ``w == 1``.
    convention : Convention
        See :class:`Convention`.
    """
    P = _as_exponents(P)
    grid = f.grid
    if len(P) != grid.ndim:
        raise ValueError(f"{len(P)} exponents for a {grid.ndim}-axis grid")
    if w is not None and w.grid != grid:
        raise ValueError("weight and function live on different grids")
    axis_w = [a.quad_weights for a in grid.axes]
    if w is None:
        return iterated_norm(f.values, axis_w, P.entries)
    if convention is Convention.POINTWISE:
        return iterated_norm(f.values * w.values, axis_w, P.entries)
    return iterated_norm(f.values, axis_w, P.entries, density=w.values)


def dual_pairing(f: SampledFunction, h: SampledFunction) -> complex:
    """Bilinear pairing ``int f h dmu`` (no complex conjugation)."""
    if f.grid != h.grid:
        raise ValueError("pairing needs a common grid")
    return integrate(f * h)


def box_average(f: SampledFunction, partition: Sequence[Box]) -> SampledFunction:
    """Replace ``f`` on each box by its mean with respect to the grid measure."""
    cw = f.grid.cell_weights()
    out = np.empty(f.grid.shape, dtype=complex)
    for b in partition:
        s = b.slices()
        out[s] = np.sum(f.values[s] * cw[s]) / np.sum(cw[s])
    return SampledFunction(f.grid, out)


def map_projection(f: SampledFunction, partition: Sequence[Box], P=None,
                   w: WeightFunction | None = None) -> SampledFunction:
    """Conditional expectation onto the box partition.

    A finite-rank operator (rank at most ``len(partition)``) whose norm on
    ``L^P_w`` is at most one, by Jensen on every box.  That bound needs ``w``
    constant on each box, so other weights are rejected.
    """
    if P is not None and len(_as_exponents(P)) != f.grid.ndim:
        raise ValueError("exponent tuple does not match grid dimension")
    if w is not None and not w.is_box_constant(partition):
        raise NotBoxConstantError("weight must be constant on every box")
    return box_average(f, partition)
