"""Harmonic oscillator ``A = -Delta + |x|^2`` on R^d and functions ``F(A)``.

Eigenfunctions are tensor products of normalized Hermite functions, built with
the stable three-term recurrence.  The eigenvalues ``2|k| + d`` are not
assumed: every basis is certified by its Gram matrix and by the residual of
``A phi_k - lambda_k phi_k`` computed with Fourier differentiation.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .measure_grid import ProductGrid, SampledFunction, integrate, line_grid
from .nuclear import NuclearRepresentation, kernel, trace_by_pairing
from .report import SpectralReport
from .timefreq import EDGE_DECAY, TFGrid, Window, _tf_norm, gaussian_window, stft, tf_weight

__all__ = [
    "DecayPreconditionError",
    "NonSummableError",
    "HermiteBasis",
    "SpectralFunction",
    "multi_indices",
    "hermite_functions",
    "build_basis",
    "default_grid",
    "exp_decay",
    "inverse_square",
    "ground_projection",
    "functional_calculus_representation",
    "functional_calculus_kernel",
    "CriterionResult",
    "nuclearity_criterion",
    "trace_formula_check",
]


class DecayPreconditionError(ValueError):
    """Highest basis function is not negligible at the edge of the box."""


class NonSummableError(ValueError):
    """``sum F(lambda_k)`` has no finite tail bound."""


def multi_indices(d: int, J: int) -> list:
    """All ``k`` in ``N^d`` with ``|k| <= J``; by total degree, lexicographic within a degree."""
    out = []
    for deg in range(J + 1):
        out.extend(sorted(k for k in itertools.product(range(deg + 1), repeat=d) if sum(k) == deg))
    return out


def hermite_functions(x: np.ndarray, J: int) -> np.ndarray:
    """Rows ``phi_0 .. phi_J`` of normalized Hermite functions at ``x``.

    phi_{j+1} = sqrt(2/(j+1)) x phi_j - sqrt(j/(j+1)) phi_{j-1}
    """
    x = np.asarray(x, dtype=float)
    H = np.empty((J + 1,) + x.shape)
    H[0] = np.pi ** -0.25 * np.exp(-x ** 2 / 2.0)
    if J >= 1:
        H[1] = np.sqrt(2.0) * x * H[0]
    for j in range(1, J):
        H[j + 1] = np.sqrt(2.0 / (j + 1)) * x * H[j] - np.sqrt(j / (j + 1.0)) * H[j - 1]
    return H


def default_grid(d: int = 1, J: int = 20) -> ProductGrid:
    """``[-12, 12)^d`` with 512 points per axis for ``d = 1, J <= 20``.

    Larger ``J`` widens the box to ``sqrt(2J + 1) + 5`` at the same spacing;
    ``d >= 2`` uses 4x coarser spacing.
    """
    L = 12.0 if J <= 20 else float(math.ceil(math.sqrt(2 * J + 1) + 5))
    n = int(round(512 * L / 12.0 / 2)) * 2
    if d > 1:
        n //= 4
        n += n % 2
    return line_grid(L, n, d)


def _spectral_laplacian(values: np.ndarray, grid: ProductGrid) -> np.ndarray:
    out = np.zeros_like(values, dtype=complex)
    for ax, a in enumerate(grid.axes):
        n = len(a)
        h = a.quad_weights[0]
        k = 2 * np.pi * np.fft.fftfreq(n, d=h)
        shape = [1] * values.ndim
        shape[ax] = n
        out += np.fft.ifft(-(k ** 2).reshape(shape) * np.fft.fft(values, axis=ax), axis=ax)
    return out.real if np.isrealobj(values) else out


@dataclass
class HermiteBasis:
    d: int
    J: int
    grid: ProductGrid
    indices: list
    functions: np.ndarray = field(repr=False)   # shape (len(indices),) + grid.shape
    eigenvalues: np.ndarray = field(repr=False)
    gram_deviation: float = 0.0
    residuals: np.ndarray = field(default=None, repr=False)

    def phi(self, k) -> SampledFunction:
        return SampledFunction(self.grid, self.functions[self.indices.index(tuple(k))])

    def __len__(self):
        return len(self.indices)


def build_basis(d: int = 1, J: int = 20, grid: ProductGrid | None = None, certify: bool = True) -> HermiteBasis:
    """Sample ``phi_k``, ``|k| <= J``, with ``lambda_k = 2|k| + d``.

    With ``certify`` the Gram deviation ``max|G - I|`` and the relative
    eigen-residuals are computed and stored on the basis.
    """
    grid = default_grid(d, J) if grid is None else grid
    if grid.ndim != d:
        raise ValueError("grid dimension differs from d")
    tables = [hermite_functions(a.nodes, J) for a in grid.axes]
    for t in tables:
        peak = np.abs(t).max(axis=1)
        edge = np.maximum(np.abs(t[:, 0]), np.abs(t[:, -1]))
        if np.any(edge >= EDGE_DECAY * peak):
            raise DecayPreconditionError("Hermite functions do not decay at the box edge; enlarge the box")
    idx = multi_indices(d, J)
    funcs = np.empty((len(idx),) + grid.shape)
    for m, k in enumerate(idx):
        v = np.ones(())
        for a, kk in enumerate(k):
            v = np.multiply.outer(v, tables[a][kk])
        funcs[m] = v
    lam = np.array([2.0 * sum(k) + d for k in idx])
    basis = HermiteBasis(d, J, grid, idx, funcs, lam)
    if certify:
        cw = grid.cell_weights().reshape(-1)
        F = funcs.reshape(len(idx), -1)
        G = (F * cw) @ F.T
        basis.gram_deviation = float(np.abs(G - np.eye(len(idx))).max())
        x2 = sum(x ** 2 for x in grid.mesh())
        res = []
        for m in range(len(idx)):
            phi = funcs[m]
            Aphi = -_spectral_laplacian(phi, grid) + x2 * phi
            num = np.sqrt(np.sum((Aphi - lam[m] * phi) ** 2 * grid.cell_weights()))
            den = np.sqrt(np.sum(phi ** 2 * grid.cell_weights()))
            res.append(num / den)
        basis.residuals = np.array(res)
    return basis


@dataclass
class SpectralFunction:
    """Function ``F`` of the oscillator.

    ``tail`` maps ``(J, d)`` to an upper bound for ``sum_{|k| > J} |F(2|k|+d)|``
    (``inf`` if not summable); ``exact`` maps ``d`` to the full sum or ``None``.
    """

    evaluator: Callable
    name: str = "F"
    tail: Callable | None = None
    exact: Callable | None = None

    def __call__(self, lam):
        return self.evaluator(np.asarray(lam, dtype=float))


def _shell_count(m: int, d: int) -> int:
    return math.comb(m + d - 1, d - 1)


def exp_decay() -> SpectralFunction:
    """``F(lambda) = exp(-lambda)``; full trace ``(2 sinh 1)^-d``."""
    def tail(J, d):
        # shells past J + 400 contribute below exp(-800)
        m = np.arange(J + 1, J + 400)
        return float(sum(_shell_count(int(mm), d) * math.exp(-(2 * mm + d)) for mm in m))
    return SpectralFunction(lambda lam: np.exp(-lam), "exp(-lambda)", tail,
                            lambda d: (2.0 * math.sinh(1.0)) ** (-d))


def inverse_square() -> SpectralFunction:
    """``F(lambda) = lambda^-2``; summable only for ``d = 1`` where the trace is ``pi^2 / 8``."""
    def tail(J, d):
        if d != 1:
            return math.inf
        return 1.0 / (4.0 * J) if J > 0 else math.inf
    return SpectralFunction(lambda lam: lam ** -2.0, "lambda^-2", tail,
                            lambda d: math.pi ** 2 / 8.0 if d == 1 else None)


def ground_projection(d: int = 1) -> SpectralFunction:
    """Indicator of the lowest eigenvalue ``lambda = d``; rank one, trace 1."""
    return SpectralFunction(lambda lam: (np.abs(lam - d) < 0.5).astype(float), "1{lambda=lambda_0}",
                            lambda J, dd: 0.0, lambda dd: 1.0)


def functional_calculus_representation(F: SpectralFunction, basis: HermiteBasis, J: int | None = None) -> NuclearRepresentation:
    """``g_k = F(lambda_k) phi_k``, ``h_k = phi_k`` for ``|k| <= J``."""
    J = basis.J if J is None else J
    sel = [m for m, k in enumerate(basis.indices) if sum(k) <= J]
    Fl = F(basis.eigenvalues[sel])
    g = [SampledFunction(basis.grid, Fl[i] * basis.functions[m]) for i, m in enumerate(sel)]
    h = [SampledFunction(basis.grid, basis.functions[m]) for m in sel]
    return NuclearRepresentation(g, h, 1.0)


def functional_calculus_kernel(F: SpectralFunction, basis: HermiteBasis, J: int | None = None) -> SampledFunction:
    """``K_J(x, y) = sum_{|k| <= J} F(lambda_k) phi_k(x) phi_k(y)``."""
    return kernel(functional_calculus_representation(F, basis, J))


@dataclass
class CriterionResult:
    total: float
    terms: np.ndarray
    partial_sums: np.ndarray
    norms: np.ndarray        # ||phi_k||_{M^{p,q}_s}
    dual_norms: np.ndarray   # ||phi_k||_{M^{p',q'}_{-s}}
    indices: list
    window: str
    weight: str


def _conj(p):
    return math.inf if p == 1 else p / (p - 1.0)


def nuclearity_criterion(F: SpectralFunction, basis: HermiteBasis, r: float, p: float, q: float, s: float,
                         window: Window | None = None, tf: TFGrid | None = None) -> CriterionResult:
    """Partial sums of ``sum_k |F(lambda_k)|^r ||phi_k||^r_{M^{p,q}_s} ||phi_k||^r_{M^{p',q'}_{-s}}``.

    Norms use the STFT with a Gaussian window (unit by default) and the
    polynomial weights ``v_s``, ``v_{-s}``.
    """
    if not (0.0 < r <= 1.0):
        raise ValueError("order r must lie in (0, 1]")
    for e in (p, q):
        if not (1.0 <= e < math.inf):
            raise ValueError(f"exponent {e} outside [1, inf)")
    grid = basis.grid
    window = gaussian_window(grid) if window is None else window
    tf = TFGrid.for_space(grid) if tf is None else tf
    d = basis.d
    ws, wms = tf_weight(tf, s), tf_weight(tf, -s)
    pp, qq = _conj(p), _conj(q)
    Fl = np.abs(F(basis.eigenvalues))
    norms, dnorms, terms = [], [], []
    for m in range(len(basis)):
        if Fl[m] == 0.0:
            norms.append(np.nan)
            dnorms.append(np.nan)
            terms.append(0.0)
            continue
        V = stft(SampledFunction(grid, basis.functions[m]), window, tf)
        a = _tf_norm(V, [p] * d + [q] * d, ws)
        b = _tf_norm(V, [pp] * d + [qq] * d, wms)
        norms.append(a)
        dnorms.append(b)
        terms.append((Fl[m] * a * b) ** r)
    terms = np.array(terms)
    degrees = np.array([sum(k) for k in basis.indices])
    partial = np.array([terms[degrees <= j].sum() for j in range(basis.J + 1)])
    return CriterionResult(float(terms.sum()), terms, partial, np.array(norms), np.array(dnorms),
                           basis.indices, window.tag, f"v_{s}")


def trace_formula_check(F: SpectralFunction, basis: HermiteBasis, J: int | None = None) -> SpectralReport:
    """Compare the kernel-diagonal trace with ``sum_{|k| <= J} F(lambda_k)``.

    ``matrix_trace`` holds the quadrature of ``K_J(x, x)``; the eigenvalue
    list is ``F(lambda_k)`` for the retained indices.
    """
    J = basis.J if J is None else J
    tail = F.tail(J, basis.d) if F.tail is not None else math.inf
    if not math.isfinite(tail):
        raise NonSummableError(f"{F.name} has no finite tail bound in dimension {basis.d}")
    T = functional_calculus_representation(F, basis, J)
    G = np.stack([g.values for g in T.g])
    H = np.stack([h.values for h in T.h])
    diag = np.sum(G * H, axis=0)
    diag_trace = integrate(SampledFunction(basis.grid, diag))
    sel = [m for m, k in enumerate(basis.indices) if sum(k) <= J]
    Fl = np.asarray(F(basis.eigenvalues[sel]), dtype=complex)
    order = np.argsort(-np.abs(Fl), kind="stable")
    exact = F.exact(basis.d) if F.exact is not None else None
    return SpectralReport(
        eigenvalues=Fl[order],
        matrix_trace=diag_trace,
        eigenvalue_sum=complex(Fl.sum()),
        pairing_trace=trace_by_pairing(T),
        truncated_sum=complex(Fl.sum()),
        target=exact,
        target_kind="closed-form" if exact is not None else None,
        tail_bound=tail,
        truncation={"J": J, "d": basis.d, "terms": len(sel), "enumeration": "total degree, lexicographic"},
        extra={"F": F.name, "gram_deviation": basis.gram_deviation,
               "max_residual": float(np.max(basis.residuals)) if basis.residuals is not None else None},
    )
