"""Variable exponent Lebesgue spaces: modular, Luxemburg norm, duality."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .measure_grid import Box, ProductGrid, SampledFunction, integrate
from .mixed_norm import NotBoxConstantError, box_average

__all__ = [
    "VariableExponent",
    "LuxemburgResult",
    "HolderReport",
    "modular",
    "luxemburg_norm",
    "luxemburg_solve",
    "dual_exponent",
    "holder_check",
    "map_projection_ve",
    "HOLDER_CONSTANT",
]

HOLDER_CONSTANT = 2.0


class VariableExponent:
    """Exponent function ``p(x)`` sampled on a grid, ``1 <= p <= inf``.

    Infinite values only arise as duals of ``p = 1`` nodes; primal exponents
    built by users are normally bounded (``p_plus < inf``).
    """

    __slots__ = ("grid", "values", "p_minus", "p_plus")

    def __init__(self, grid: ProductGrid, values):
        vals = np.array(np.broadcast_to(values, grid.shape), dtype=float)
        if np.any(np.isnan(vals)) or np.any(vals < 1.0):
            raise ValueError("variable exponent must take values in [1, inf]")
        vals.setflags(write=False)
        self.grid = grid
        self.values = vals
        self.p_minus = float(vals.min())
        self.p_plus = float(vals.max())

    @classmethod
    def constant(cls, grid: ProductGrid, p: float) -> "VariableExponent":
        return cls(grid, np.full(grid.shape, float(p)))

    @classmethod
    def from_callable(cls, grid: ProductGrid, fn) -> "VariableExponent":
        return cls(grid, fn(*grid.mesh()))

    @property
    def bounded(self) -> bool:
        return self.p_plus < np.inf

    def is_box_constant(self, boxes: Sequence[Box]) -> bool:
        return all(np.ptp(self.values[b.slices()]) == 0.0 for b in boxes)


def modular(f: SampledFunction, p: VariableExponent) -> float:
    """``rho(f) = int_{p<inf} |f|^p dmu + max_{p=inf} |f|``."""
    if f.grid != p.grid:
        raise ValueError("function and exponent on different grids")
    a = np.abs(f.values)
    inf_nodes = np.isinf(p.values)
    cw = f.grid.cell_weights()
    with np.errstate(over="ignore"):
        body = np.where(inf_nodes, 0.0, a ** np.where(inf_nodes, 1.0, p.values))
    total = float(np.sum(body * cw))
    if inf_nodes.any():
        total += float(a[inf_nodes].max())
    return total


@dataclass
class LuxemburgResult:
    norm: float
    iterations: int
    bracket: tuple
    widths: list = field(default_factory=list)


def luxemburg_solve(f: SampledFunction, p: VariableExponent, rtol: float = 1e-13,
                    bracket: tuple | None = None, max_iter: int = 200) -> LuxemburgResult:
    """Luxemburg norm by geometric bracketing then bisection in ``log(lambda)``.

    ``rho(f / lam)`` is nonincreasing in ``lam``; the returned value is the
    smallest ``lam`` (to relative ``rtol``) with ``rho(f / lam) <= 1``.
    ``widths`` records the log-width of the bracket after every halving.
    """
    a = np.abs(f.values)
    if not a.any():
        return LuxemburgResult(0.0, 0, (0.0, 0.0))

    def over(lam):
        return modular(SampledFunction(f.grid, a / lam), p) > 1.0

    if bracket is None:
        mu = f.grid.measure
        lam0 = float(np.sum(a * f.grid.cell_weights())) / (1.0 + mu)
        lo = hi = lam0
        while over(hi):
            hi *= 2.0
        while not over(lo):
            lo /= 2.0
    else:
        lo, hi = map(float, bracket)
        if not over(lo) or over(hi):
            raise ValueError("bracket does not enclose the Luxemburg norm")
    start = (lo, hi)
    llo, lhi = math.log(lo), math.log(hi)
    widths = []
    it = 0
    while lhi - llo > rtol and it < max_iter:
        mid = 0.5 * (llo + lhi)
        if over(math.exp(mid)):
            llo = mid
        else:
            lhi = mid
        it += 1
        widths.append(lhi - llo)
    return LuxemburgResult(math.exp(lhi), it, start, widths)


def luxemburg_norm(f: SampledFunction, p: VariableExponent, rtol: float = 1e-13) -> float:
    """``inf{lam > 0 : rho(f / lam) <= 1}``."""
    return luxemburg_solve(f, p, rtol).norm


def dual_exponent(p: VariableExponent) -> VariableExponent:
    """Pointwise conjugate ``1/p + 1/p' = 1`` (``p = 1`` maps to ``inf``)."""
    v = p.values
    with np.errstate(divide="ignore", invalid="ignore"):
        dual = np.where(v == 1.0, np.inf, np.where(np.isinf(v), 1.0, v / (v - 1.0)))
    return VariableExponent(p.grid, dual)


@dataclass
class HolderReport:
    pairing: complex
    norm_f: float
    norm_g: float
    ratio: float
    bound: float = HOLDER_CONSTANT

    @property
    def passed(self) -> bool:
        return self.ratio <= self.bound


def holder_check(f: SampledFunction, g: SampledFunction, p: VariableExponent) -> HolderReport:
    """``|int f g| <= 2 ||f||_{p(.)} ||g||_{p'(.)}``; returns the ratio to the product of norms."""
    pair = integrate(f * g)
    nf = luxemburg_norm(f, p)
    ng = luxemburg_norm(g, dual_exponent(p))
    denom = nf * ng
    ratio = abs(pair) / denom if denom > 0 else 0.0
    return HolderReport(pair, nf, ng, ratio)


def map_projection_ve(f: SampledFunction, p: VariableExponent, partition: Sequence[Box]) -> SampledFunction:
    """Box averaging; contractive on ``L^{p(.)}`` when ``p`` is constant on each box."""
    if not p.is_box_constant(partition):
        raise NotBoxConstantError("exponent must be constant on every box")
    return box_average(f, partition)
