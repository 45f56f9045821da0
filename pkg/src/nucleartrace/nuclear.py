"""Finite r-nuclear representations ``T f = sum_n g_n <h_n, f>`` and their traces."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .measure_grid import ProductGrid, SampledFunction, WeightFunction, integrate
from .mixed_norm import Convention, dual_exponents, mixed_norm, dual_pairing
from .variable_exponent import VariableExponent, dual_exponent, luxemburg_norm

__all__ = [
    "MixedNormSpace",
    "VariableExponentSpace",
    "NuclearRepresentation",
    "EigenTrace",
    "DimensionCapError",
    "DEFAULT_DIMENSION_CAP",
    "apply",
    "kernel",
    "quasinorm",
    "quasinorm_terms",
    "trace_by_pairing",
    "trace_by_eigenvalues",
    "quadrature_matrix",
    "sorted_eigenvalues",
]

DEFAULT_DIMENSION_CAP = 4096


class DimensionCapError(ValueError):
    """Dense matrix would exceed the configured dimension cap."""


@dataclass(frozen=True)
class MixedNormSpace:
    """``L^P_w`` on a grid; ``dual()`` is ``L^{P'}_{1/w}`` (pointwise convention)."""

    P: tuple
    w: WeightFunction | None = None
    convention: Convention = Convention.POINTWISE

    def norm(self, f: SampledFunction) -> float:
        return mixed_norm(f, self.P, self.w, self.convention)

    def dual(self) -> "MixedNormSpace":
        w = None if self.w is None else self.w.inverse()
        return MixedNormSpace(dual_exponents(self.P), w, Convention.POINTWISE)

    def describe(self) -> dict:
        return {"kind": "mixed", "P": [float(p) for p in self.P],
                "weight": None if self.w is None else self.w.params,
                "convention": self.convention.value}


@dataclass(frozen=True)
class VariableExponentSpace:
    """``L^{p(.)}`` with the Luxemburg norm; ``dual()`` is ``L^{p'(.)}``."""

    p: VariableExponent

    def norm(self, f: SampledFunction) -> float:
        return luxemburg_norm(f, self.p)

    def dual(self) -> "VariableExponentSpace":
        return VariableExponentSpace(dual_exponent(self.p))

    def describe(self) -> dict:
        return {"kind": "variable", "p_minus": self.p.p_minus, "p_plus": self.p.p_plus}


@dataclass
class NuclearRepresentation:
    """Pairs ``(g_n, h_n)``; ``g_n`` live on the target grid, ``h_n`` on the source grid.

    ``source`` and ``target`` describe the spaces whose norms enter the
    quasinorm ledger ``sum ||g_n||^r ||h_n||^r`` (``h_n`` measured in the dual
    of ``source``).
    """

    g: list
    h: list
    r: float = 1.0
    source: MixedNormSpace | VariableExponentSpace | None = None
    target: MixedNormSpace | VariableExponentSpace | None = None

    def __post_init__(self):
        if len(self.g) != len(self.h) or not self.g:
            raise ValueError("need the same positive number of g_n and h_n")
        if not (0.0 < self.r <= 1.0):
            raise ValueError("order r must lie in (0, 1]")
        tg, sg = self.g[0].grid, self.h[0].grid
        if any(x.grid != tg for x in self.g) or any(x.grid != sg for x in self.h):
            raise ValueError("all g_n (resp. h_n) must share one grid")

    @property
    def rank(self) -> int:
        return len(self.g)

    @property
    def source_grid(self) -> ProductGrid:
        return self.h[0].grid

    @property
    def target_grid(self) -> ProductGrid:
        return self.g[0].grid

    def concat(self, other: "NuclearRepresentation") -> "NuclearRepresentation":
        """Representation of the sum of the two operators."""
        return NuclearRepresentation(self.g + other.g, self.h + other.h, self.r, self.source, self.target)


def apply(T: NuclearRepresentation, f: SampledFunction) -> SampledFunction:
    if f.grid != T.source_grid:
        raise ValueError("input is not on the source grid")
    out = np.zeros(T.target_grid.shape, dtype=complex)
    for g, h in zip(T.g, T.h):
        out += g.values * dual_pairing(h, f)
    return SampledFunction(T.target_grid, out)


def _stack(fs) -> np.ndarray:
    return np.stack([f.values.reshape(-1) for f in fs])


def kernel(T: NuclearRepresentation) -> SampledFunction:
    """``K(x, y) = sum_n g_n(x) h_n(y)`` on the product of target and source grids."""
    K = _stack(T.g).T @ _stack(T.h)
    grid = T.target_grid.product(T.source_grid)
    return SampledFunction(grid, K.reshape(grid.shape))


def quasinorm_terms(T: NuclearRepresentation, r: float | None = None) -> np.ndarray:
    r = T.r if r is None else r
    if not (0.0 < r <= 1.0):
        raise ValueError("order r must lie in (0, 1]")
    if T.source is None or T.target is None:
        raise ValueError("norm descriptors are not set")
    dual = T.source.dual()
    return np.array([(T.target.norm(g) * dual.norm(h)) ** r for g, h in zip(T.g, T.h)])


def quasinorm(T: NuclearRepresentation, r: float | None = None) -> float:
    """``sum_n ||g_n||^r_target ||h_n||^r_{source'}`` for this representation.

    This is a ledger value for the given pairs, not the nuclear quasinorm
    (which is an infimum over all representations).
    """
    return float(quasinorm_terms(T, r).sum())


def trace_by_pairing(T: NuclearRepresentation) -> complex:
    """``sum_n <g_n, h_n> = int sum_n g_n(x) h_n(x) dmu``."""
    if T.source_grid != T.target_grid:
        raise ValueError("trace needs source grid == target grid")
    return complex(sum(integrate(g * h) for g, h in zip(T.g, T.h)))


def quadrature_matrix(T: NuclearRepresentation, dimension_cap: int = DEFAULT_DIMENSION_CAP) -> np.ndarray:
    """``M[i, j] = K(x_i, x_j) * quad_weight(x_j)`` over flattened nodes."""
    if T.source_grid != T.target_grid:
        raise ValueError("eigenvalues need source grid == target grid")
    n = T.source_grid.size
    if n > dimension_cap:
        raise DimensionCapError(f"matrix dimension {n} exceeds cap {dimension_cap}")
    cw = T.source_grid.cell_weights().reshape(-1)
    return _stack(T.g).T @ (_stack(T.h) * cw[None, :])


def sorted_eigenvalues(M: np.ndarray) -> np.ndarray:
    """All eigenvalues of a dense (non-normal) complex matrix, by modulus descending."""
    ev = scipy.linalg.eigvals(M, check_finite=True)
    order = np.lexsort((ev.imag, ev.real, -np.abs(ev)))
    return ev[order]


@dataclass
class EigenTrace:
    eigenvalue_sum: complex
    matrix_trace: complex
    eigenvalues: np.ndarray = field(repr=False)


def trace_by_eigenvalues(T: NuclearRepresentation, dimension_cap: int = DEFAULT_DIMENSION_CAP) -> EigenTrace:
    M = quadrature_matrix(T, dimension_cap)
    ev = sorted_eigenvalues(M)
    return EigenTrace(complex(ev.sum()), complex(np.trace(M)), ev)
