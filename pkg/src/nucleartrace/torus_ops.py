"""Toroidal pseudo-differential operators ``alpha(x) sigma(D)`` and their traces.

Characters are ``e_k(x) = exp(2 pi i x.k)`` on ``T^n = R^n / Z^n``, so
``(I - Delta)`` has symbol ``1 + 4 pi^2 |k|^2``.  Frequencies are truncated to
the sup-norm ball ``|k|_inf <= N``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np

from .measure_grid import ProductGrid, SampledFunction
from .nuclear import (
    DEFAULT_DIMENSION_CAP,
    DimensionCapError,
    NuclearRepresentation,
    quasinorm_terms,
    sorted_eigenvalues,
    trace_by_pairing,
)
from .report import SpectralReport

__all__ = [
    "AliasingError",
    "FrequencyCutoff",
    "BesselSymbol",
    "TableSymbol",
    "ToroidalSymbol",
    "bessel_symbol",
    "bessel_tail_bound",
    "bessel_full_sum",
    "character",
    "fourier_coefficients",
    "toroidal_apply",
    "assemble_matrix",
    "canonical_representation",
    "symbol_power_sums",
    "LedgerResult",
    "nuclearity_ledger",
    "verify_corollary_trace",
]


class AliasingError(ValueError):
    """Grid too coarse for the active frequency set."""


@dataclass(frozen=True)
class FrequencyCutoff:
    N: int
    n: int = 1

    def __post_init__(self):
        if self.N < 0 or self.n < 1:
            raise ValueError("need N >= 0 and n >= 1")

    @property
    def active(self) -> np.ndarray:
        """Active frequencies, shape ``((2N+1)^n, n)``, lexicographic."""
        r = range(-self.N, self.N + 1)
        return np.array(list(itertools.product(r, repeat=self.n)), dtype=int).reshape(-1, self.n)

    @property
    def size(self) -> int:
        return (2 * self.N + 1) ** self.n


@dataclass(frozen=True)
class BesselSymbol:
    """``sigma(k) = (1 + 4 pi^2 |k|^2)^(-tau/2)``, the symbol of ``(I - Delta)^(-tau/2)``."""

    tau: float
    n: int = 1

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    def __call__(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return (1.0 + 4.0 * np.pi ** 2 * np.sum(k ** 2, axis=-1)) ** (-self.tau / 2.0)

    def describe(self) -> dict:
        return {"name": "bessel", "tau": self.tau, "n": self.n}


@dataclass(frozen=True, eq=False)
class TableSymbol:
    """Symbol given on a finite list of frequencies, zero elsewhere."""

    freqs: np.ndarray
    values: np.ndarray
    n: int = 1

    def __call__(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=int).reshape(-1, self.n)
        table = {tuple(f): v for f, v in zip(np.asarray(self.freqs).reshape(-1, self.n), self.values)}
        return np.array([table.get(tuple(x), 0.0) for x in k], dtype=complex)

    def describe(self) -> dict:
        return {"name": "custom-table", "n": self.n, "size": len(self.values)}


def bessel_symbol(tau: float, n: int = 1) -> BesselSymbol:
    return BesselSymbol(float(tau), n)


def bessel_tail_bound(tau: float, n: int, N: int, r: float = 1.0) -> float:
    """Upper bound for ``sum_{|k|_inf > N} sigma(k)^r``.

    Shells ``|k|_inf = m`` hold at most ``2n (3m)^(n-1)`` points with
    ``|k| >= m``; comparing with an integral gives
    ``2 n 3^(n-1) (2 pi)^(-r tau) N^(n - r tau) / (r tau - n)``.
    """
    s = r * tau
    if s <= n:
        return math.inf
    if N < 1:
        raise ValueError("tail bound needs N >= 1")
    return 2 * n * 3 ** (n - 1) * (2 * math.pi) ** (-s) * N ** (n - s) / (s - n)


def bessel_full_sum(tau: float, n: int = 1) -> tuple:
    """``(value, kind)`` for ``sum_{k in Z^n} sigma(k)``.

    ``n = 1, tau = 2`` is ``coth(1/2) / 2`` in closed form; other ``n = 1``
    cases use high-precision summation; ``n > 1`` returns ``(None, None)``.
    """
    if n == 1 and tau == 2:
        return 0.5 / math.tanh(0.5), "closed-form"
    if n == 1 and tau > 1:
        with mpmath.workdps(30):
            v = 1 + 2 * mpmath.nsum(lambda k: (1 + 4 * mpmath.pi ** 2 * k ** 2) ** (-mpmath.mpf(tau) / 2), [1, mpmath.inf])
        return float(v), "high-precision"
    return None, None


def _check_torus(grid: ProductGrid, min_points: int):
    for a in grid.axes:
        if not a.periodic or a.extent != 1.0:
            raise ValueError("torus operators need periodic unit axes")
        if len(a) < min_points:
            raise AliasingError(f"axis has {len(a)} points, need at least {min_points}")


def character(grid: ProductGrid, k) -> SampledFunction:
    """``exp(2 pi i x.k)`` sampled on ``grid``."""
    k = np.atleast_1d(k)
    phase = sum(x * kk for x, kk in zip(grid.mesh(), k))
    return SampledFunction(grid, np.exp(2j * np.pi * phase))


def _char_matrix(grid: ProductGrid, freqs: np.ndarray) -> np.ndarray:
    """``E[x, k] = exp(2 pi i x.k)`` over flattened nodes."""
    pts = np.stack([x.reshape(-1) for x in grid.mesh()], axis=1)
    return np.exp(2j * np.pi * pts @ freqs.T)


def fourier_coefficients(f: SampledFunction, freqs: np.ndarray) -> np.ndarray:
    """``int f(y) exp(-2 pi i y.k) dy`` by quadrature, one value per row of ``freqs``."""
    E = _char_matrix(f.grid, np.asarray(freqs).reshape(len(freqs), -1))
    cw = f.grid.cell_weights().reshape(-1)
    return E.conj().T @ (f.values.reshape(-1) * cw)


@dataclass
class ToroidalSymbol:
    """Either a full table ``sigma(x, k)`` (shape ``grid.shape + (K,)`` over the
    active set of ``cutoff``) or a separable pair ``alpha(x) sigma(k)``."""

    table: np.ndarray | None = None
    grid: ProductGrid | None = None
    cutoff: FrequencyCutoff | None = None
    alpha: SampledFunction | None = None
    sigma: Callable | None = None

    @property
    def separable(self) -> bool:
        return self.sigma is not None

    @classmethod
    def from_table(cls, grid: ProductGrid, cutoff: FrequencyCutoff, table) -> "ToroidalSymbol":
        table = np.asarray(table, dtype=complex)
        if table.shape != grid.shape + (cutoff.size,):
            raise ValueError("symbol table has the wrong shape")
        if not np.all(np.isfinite(table)):
            raise ValueError("symbol values must be finite")
        return cls(table=table, grid=grid, cutoff=cutoff)

    @classmethod
    def from_separable(cls, alpha: SampledFunction, sigma: Callable) -> "ToroidalSymbol":
        return cls(alpha=alpha, sigma=sigma, grid=alpha.grid)

    def evaluate(self, cutoff: FrequencyCutoff) -> np.ndarray:
        if self.separable:
            s = np.asarray(self.sigma(cutoff.active), dtype=complex)
            return self.alpha.values[..., None] * s
        if cutoff != self.cutoff:
            raise ValueError("tabulated symbol was built for another cutoff")
        return self.table


def toroidal_apply(sym: ToroidalSymbol, f: SampledFunction, N: FrequencyCutoff | int) -> SampledFunction:
    """``T f(x) = sum_{|k| <= N} exp(2 pi i x.k) sigma(x, k) (F f)(k)``."""
    cutoff = N if isinstance(N, FrequencyCutoff) else FrequencyCutoff(N, f.grid.ndim)
    _check_torus(f.grid, 2 * cutoff.N + 2)
    if sym.grid is not None and sym.grid != f.grid:
        raise ValueError("symbol and function on different grids")
    freqs = cutoff.active
    fh = fourier_coefficients(f, freqs)
    E = _char_matrix(f.grid, freqs)
    S = sym.evaluate(cutoff).reshape(-1, cutoff.size)
    out = np.sum(E * S * fh[None, :], axis=1)
    return SampledFunction(f.grid, out.reshape(f.grid.shape))


def assemble_matrix(alpha: SampledFunction, sigma: Callable, N: FrequencyCutoff | int) -> np.ndarray:
    """Matrix of ``alpha sigma(D)`` in the character basis: ``M[eta, k] = alpha^(eta - k) sigma(k)``."""
    cutoff = N if isinstance(N, FrequencyCutoff) else FrequencyCutoff(N, alpha.grid.ndim)
    _check_torus(alpha.grid, 4 * cutoff.N + 4)
    freqs = cutoff.active
    diffs = FrequencyCutoff(2 * cutoff.N, cutoff.n)
    ahat = fourier_coefficients(alpha, diffs.active).reshape((4 * cutoff.N + 1,) * cutoff.n)
    D = freqs[:, None, :] - freqs[None, :, :] + 2 * cutoff.N
    A = ahat[tuple(D[..., a] for a in range(cutoff.n))]
    s = np.asarray(sigma(freqs), dtype=complex)
    return A * s[None, :]


def canonical_representation(alpha: SampledFunction, sigma: Callable, N: FrequencyCutoff | int,
                             r: float = 1.0, source=None, target=None) -> NuclearRepresentation:
    """``g_k = sigma(k) alpha e_k``, ``h_k = e_{-k}`` over the active set."""
    cutoff = N if isinstance(N, FrequencyCutoff) else FrequencyCutoff(N, alpha.grid.ndim)
    freqs = cutoff.active
    s = np.asarray(sigma(freqs), dtype=complex)
    g = [alpha * character(alpha.grid, k) * sk for k, sk in zip(freqs, s)]
    h = [character(alpha.grid, -k) for k in freqs]
    return NuclearRepresentation(g, h, r, source, target)


def symbol_power_sums(sigma: Callable, r: float, n: int, Ns) -> np.ndarray:
    """Partial sums ``sum_{|k|_inf <= N} |sigma(k)|^r`` for each ``N`` in ``Ns``."""
    Ns = list(Ns)
    if n == 1:
        k = np.arange(0, max(Ns) + 1)
        t = np.abs(np.asarray(sigma(k[:, None]))) ** r
        t[1:] *= 2.0
        c = np.cumsum(t)
        return np.array([c[N] for N in Ns])
    return np.array([np.sum(np.abs(np.asarray(sigma(FrequencyCutoff(N, n).active))) ** r) for N in Ns])


@dataclass
class LedgerResult:
    total: float
    terms: np.ndarray
    freqs: np.ndarray
    r: float
    hypothesis: bool | None
    symbol: dict = field(default_factory=dict)


def nuclearity_ledger(alpha: SampledFunction, sigma: Callable, r: float, p_desc, q_desc,
                      N: FrequencyCutoff | int) -> LedgerResult:
    """Quasinorm ledger of the canonical representation of ``alpha sigma(D)``.

    ``p_desc`` is the source space (``h_k`` measured in its dual), ``q_desc``
    the target.  For Bessel symbols ``hypothesis`` reports ``r tau > n``.
    """
    if not (0.0 < r <= 1.0):
        raise ValueError("order r must lie in (0, 1]")
    cutoff = N if isinstance(N, FrequencyCutoff) else FrequencyCutoff(N, alpha.grid.ndim)
    _check_torus(alpha.grid, 2 * cutoff.N + 2)
    T = canonical_representation(alpha, sigma, cutoff, r, p_desc, q_desc)
    terms = quasinorm_terms(T, r)
    hyp = None
    if isinstance(sigma, BesselSymbol):
        hyp = bool(r * sigma.tau > sigma.n)
    desc = sigma.describe() if hasattr(sigma, "describe") else {"name": "callable"}
    return LedgerResult(float(terms.sum()), terms, cutoff.active, r, hyp, desc)


def verify_corollary_trace(alpha: SampledFunction, sigma: Callable, N: FrequencyCutoff | int,
                           dimension_cap: int = DEFAULT_DIMENSION_CAP) -> SpectralReport:
    """Trace of the truncated ``alpha sigma(D)`` computed three ways.

    ``matrix_trace`` is the diagonal sum of the assembled matrix,
    ``eigenvalue_sum`` comes from the dense eigensolver and ``pairing_trace``
    from the canonical nuclear representation; ``truncated_sum`` is
    ``alpha^(0) * sum_{|k| <= N} sigma(k)``.
    """
    cutoff = N if isinstance(N, FrequencyCutoff) else FrequencyCutoff(N, alpha.grid.ndim)
    if cutoff.size > dimension_cap:
        raise DimensionCapError(f"matrix dimension {cutoff.size} exceeds cap {dimension_cap}")
    M = assemble_matrix(alpha, sigma, cutoff)
    ev = sorted_eigenvalues(M)
    a0 = complex(fourier_coefficients(alpha, np.zeros((1, cutoff.n), dtype=int))[0])
    s = np.asarray(sigma(cutoff.active), dtype=complex)
    truncated = a0 * s.sum()
    pairing = trace_by_pairing(canonical_representation(alpha, sigma, cutoff))

    target = kind = tail = None
    if isinstance(sigma, BesselSymbol):
        full, kind = bessel_full_sum(sigma.tau, sigma.n)
        if full is not None:
            target = (a0 * full).real if abs(a0.imag) < 1e-14 else None
        if cutoff.N >= 1:
            tail = abs(a0) * bessel_tail_bound(sigma.tau, sigma.n, cutoff.N)
    comm = M @ M.conj().T - M.conj().T @ M
    desc = sigma.describe() if hasattr(sigma, "describe") else {"name": "callable"}
    return SpectralReport(
        eigenvalues=ev,
        matrix_trace=complex(np.trace(M)),
        eigenvalue_sum=complex(ev.sum()),
        pairing_trace=pairing,
        truncated_sum=truncated,
        target=target,
        target_kind=kind if target is not None else None,
        tail_bound=tail,
        truncation={"N": cutoff.N, "n": cutoff.n, "dimension": cutoff.size, "ball": "sup-norm"},
        extra={"alpha_hat_0": a0, "symbol": desc, "nonnormality_max": float(np.abs(comm).max())},
    )
