"""Short-time Fourier transform, modulation and Wiener amalgam norms.

Fourier convention on R^d is angular: ``f^(xi) = int f(t) exp(-i t.xi) dt``
and ``V_g f(x, xi) = int f(t) conj(g(t - x)) exp(-i t.xi) dt``.  Under this
convention ``|V_g f(x, xi)| = (2 pi)^-d |V_{g^} f^(xi, -x)|`` holds literally.
The torus code in :mod:`nucleartrace.torus_ops` uses ``exp(2 pi i x.k)``
instead; the two modules never exchange Fourier data.

R^d is truncated to ``[-L, L)^d``.  Inputs must decay below ``1e-10`` of their
peak on the boundary of that box, otherwise :class:`DecayError` is raised.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .measure_grid import Axis, ProductGrid, SampledFunction, WeightFunction
from .mixed_norm import iterated_norm

__all__ = [
    "DecayError",
    "Window",
    "TFGrid",
    "gaussian",
    "gaussian_window",
    "check_decay",
    "fourier_transform",
    "stft",
    "modulation_norm",
    "wiener_amalgam_norm",
    "swap",
    "tf_weight",
    "SwapReport",
    "fourier_swap_check",
    "EDGE_DECAY",
]

EDGE_DECAY = 1e-10


class DecayError(ValueError):
    """Sampled data is not negligible at the edge of the truncation box."""


def _edge_max(values: np.ndarray) -> float:
    a = np.abs(values)
    out = 0.0
    for ax in range(a.ndim):
        out = max(out, np.take(a, 0, axis=ax).max(), np.take(a, -1, axis=ax).max())
    return float(out)


def check_decay(values: np.ndarray, tol: float = EDGE_DECAY) -> float:
    """Ratio of boundary maximum to interior peak; raises if above ``tol``."""
    peak = np.abs(values).max()
    if peak == 0:
        return 0.0
    ratio = _edge_max(values) / peak
    if ratio >= tol:
        raise DecayError(f"edge/peak ratio {ratio:.3e} exceeds {tol:.0e}")
    return ratio


def _check_line_axis(axis: Axis):
    n = len(axis)
    h = axis.quad_weights[0]
    if n % 2 or not np.allclose(axis.quad_weights, h, rtol=1e-12, atol=0):
        raise ValueError("time-frequency axes must be uniform with an even number of points")
    if abs(axis.nodes[n // 2]) > 1e-9 * h:
        raise ValueError("time-frequency axes must be symmetric with a node at 0")


@dataclass(frozen=True)
class TFGrid:
    """Phase-space grid: ``space`` axes followed by ``freq`` axes.

    Frequency spacing is ``2 pi / (2 L)`` for a space box ``[-L, L)``; by
    default there are as many frequencies as space points, so the frequency
    box is ``[-pi/h, pi/h)``.
    """

    space: ProductGrid
    freq: ProductGrid

    @classmethod
    def for_space(cls, space: ProductGrid, n_freq: int | None = None) -> "TFGrid":
        axes = []
        for a in space.axes:
            _check_line_axis(a)
            m = len(a) if n_freq is None else n_freq
            if m % 2:
                raise ValueError("number of frequencies must be even")
            d_xi = 2.0 * np.pi / a.extent
            axes.append(Axis.uniform(-m * d_xi / 2.0, m * d_xi / 2.0, m, "left"))
        return cls(space, ProductGrid(tuple(axes)))

    @property
    def d(self) -> int:
        return self.space.ndim

    @property
    def product_grid(self) -> ProductGrid:
        return self.space.product(self.freq)

    @property
    def L(self) -> float:
        return self.space.axes[0].extent / 2.0

    @property
    def Xi(self) -> float:
        return self.freq.axes[0].extent / 2.0

    def swapped(self) -> "TFGrid":
        return TFGrid(self.freq, self.space)

    def header(self) -> dict:
        return {"angular": True, "L": self.L, "Xi": self.Xi, "d": self.d}


def gaussian(grid: ProductGrid, width: float = 1.0, center: float = 0.0) -> SampledFunction:
    """``exp(-|t - center|^2 / (2 width^2))``."""
    r2 = sum((x - center) ** 2 for x in grid.mesh())
    return SampledFunction(grid, np.exp(-r2 / (2.0 * width ** 2)))


@dataclass(frozen=True)
class Window:
    """Sampled window ``g``; Gaussian windows remember their width so they
    can be resampled on another grid."""

    function: SampledFunction
    tag: str = "custom"
    width: float | None = None

    def __post_init__(self):
        if not np.any(self.function.values):
            raise ValueError("window must be nonzero")
        check_decay(self.function.values)

    def on(self, grid: ProductGrid) -> "Window":
        if self.width is None:
            raise ValueError("only Gaussian windows can be resampled")
        return gaussian_window(grid, self.width)


def gaussian_window(grid: ProductGrid, width: float = 1.0) -> Window:
    """``exp(-|t|^2 / (2 width^2))``; ``width=1`` is the unit Gaussian."""
    return Window(gaussian(grid, width), tag=f"gaussian(width={width})", width=width)


def _dft_matrix(nodes: np.ndarray, weights: np.ndarray, freqs: np.ndarray, sign: float = -1.0) -> np.ndarray:
    return np.exp(sign * 1j * np.outer(nodes, freqs)) * weights[:, None]


def fourier_transform(f: SampledFunction, freq: ProductGrid) -> SampledFunction:
    """Quadrature of ``int f(t) exp(-i t.xi) dt`` on the nodes of ``freq``."""
    out = f.values
    for a, fa in zip(f.grid.axes, freq.axes):
        E = _dft_matrix(a.nodes, a.quad_weights, fa.nodes)
        out = np.tensordot(out, E, axes=([0], [0]))
    return SampledFunction(freq, out)


def _stft_values(fv, gv, space: ProductGrid, freq_nodes) -> np.ndarray:
    """Array ``V[x_1..x_d, xi_1..xi_d]`` with shifts restricted to the space grid."""
    d = fv.ndim
    idx = []
    valid = np.ones((1,) * (2 * d), dtype=bool)
    for a, ax in enumerate(space.axes):
        n = len(ax)
        j = np.arange(n).reshape([n if k == a else 1 for k in range(2 * d)])
        i = np.arange(n).reshape([n if k == d + a else 1 for k in range(2 * d)])
        k = i - j + n // 2
        ok = (k >= 0) & (k < n)
        valid = valid & ok
        idx.append(np.clip(k, 0, n - 1))
    G = np.where(valid, np.conj(gv[tuple(idx)]), 0.0)
    A = G * fv.reshape((1,) * d + fv.shape)
    for ax, xi in zip(space.axes, freq_nodes):
        E = _dft_matrix(ax.nodes, ax.quad_weights, xi)
        A = np.tensordot(A, E, axes=([d], [0]))
    return A


def stft(f: SampledFunction, g: Window | SampledFunction, tf: TFGrid | None = None) -> SampledFunction:
    """Short-time Fourier transform on ``tf.product_grid``.

    Window translates ``g(t - x)`` are taken on the space grid and set to zero
    where they leave the truncation box.
    """
    gf = g.function if isinstance(g, Window) else g
    if f.grid != gf.grid:
        raise ValueError("function and window must share the space grid")
    tf = TFGrid.for_space(f.grid) if tf is None else tf
    if tf.space != f.grid:
        raise ValueError("TF grid does not match the function's space grid")
    V = _stft_values(f.values, gf.values, tf.space, [a.nodes for a in tf.freq.axes])
    return SampledFunction(tf.product_grid, V)


def tf_weight(tf: TFGrid, s: float) -> WeightFunction:
    """Polynomial weight ``v_s(x, xi) = (1 + |x|^2 + |xi|^2)^(s/2)`` on the TF plane."""
    return WeightFunction.polynomial(tf.product_grid, s)


def _tf_norm(F: SampledFunction, exps, w: WeightFunction | None) -> float:
    vals = F.values if w is None else F.values * w.values
    return iterated_norm(vals, [a.quad_weights for a in F.grid.axes], exps)


def _check_pq(p, q):
    for e in (p, q):
        if not (1.0 <= e < np.inf):
            raise ValueError(f"exponent {e} outside [1, inf)")


def modulation_norm(f, g, p, q, w: WeightFunction | None = None, tf: TFGrid | None = None,
                    _allow_inf: bool = False) -> float:
    """``||V_g f * w||_{L^{p,q}}``: space variables inner with ``p``, frequency outer with ``q``."""
    if not _allow_inf:
        _check_pq(p, q)
    V = stft(f, g, tf)
    d = f.grid.ndim
    return _tf_norm(V, [p] * d + [q] * d, w)


def swap(F: SampledFunction, d: int | None = None) -> SampledFunction:
    """``(R F)(x, xi) = F(xi, x)``: exchange the first and second halves of the axes."""
    nd = F.grid.ndim
    d = nd // 2 if d is None else d
    if 2 * d != nd:
        raise ValueError("swap needs an even number of axes")
    perm = list(range(d, 2 * d)) + list(range(d))
    grid = ProductGrid(tuple(F.grid.axes[k] for k in perm))
    return SampledFunction(grid, np.transpose(F.values, perm))


def wiener_amalgam_norm(f, g, p, q, w: WeightFunction | None = None, tf: TFGrid | None = None) -> float:
    """``||R(V_g f * w)||_{L^{(q,p)}}``."""
    _check_pq(p, q)
    V = stft(f, g, tf)
    d = f.grid.ndim
    if w is not None:
        V = V * w.values
    return _tf_norm(swap(V, d), [q] * d + [p] * d, None)


@dataclass
class SwapReport:
    modulus_deviation: float
    origin_lhs: float
    origin_rhs: float
    wiener_norm: float
    modulation_norm_of_ft: float
    ratio: float
    p: float
    q: float
    s: float
    tf_header: dict = field(default_factory=dict)


def fourier_swap_check(f: SampledFunction, g: Window, tf: TFGrid | None = None,
                       p: float = 2.0, q: float = 4.0, s: float = 1.0) -> SwapReport:
    """Compare ``|V_g f(x, xi)|`` with ``(2 pi)^-d |V_{g^} f^(xi, -x)|`` on ``tf``.

    ``modulus_deviation`` is the maximum absolute difference divided by the
    peak of ``|V_g f|``.  Also evaluates ``||f||_{W^{p,q}_w}`` against
    ``||f^||_{M^{q,p}_{w0}}`` with ``w = v_s`` and ``w0(xi, -x) = w(x, xi)``;
    the two are only claimed equivalent, so their ratio is reported.
    """
    gf = g.function if isinstance(g, Window) else g
    tf = TFGrid.for_space(f.grid) if tf is None else tf
    d = tf.d
    check_decay(f.values)
    check_decay(gf.values)
    fh = fourier_transform(f, tf.freq)
    gh = fourier_transform(gf, tf.freq)
    check_decay(fh.values)
    check_decay(gh.values)

    V = stft(f, gf, tf).values
    neg_x = [-a.nodes for a in tf.space.axes]
    W = _stft_values(fh.values, gh.values, tf.freq, neg_x)  # W[xi, x] = V_{g^} f^(xi, -x)
    perm = list(range(d, 2 * d)) + list(range(d))
    rhs = (2 * np.pi) ** (-d) * np.abs(np.transpose(W, perm))
    lhs = np.abs(V)
    dev = float(np.max(np.abs(lhs - rhs)) / lhs.max())

    origin = tuple(len(a) // 2 for a in tf.space.axes) + tuple(len(a) // 2 for a in tf.freq.axes)

    w = tf_weight(tf, s)
    wn = wiener_amalgam_norm(f, gf, p, q, w, tf)
    # v_s is even, so w0(xi, -x) = w(x, xi) is again v_s on the swapped plane
    dual_tf = tf.swapped()
    mn = modulation_norm(fh, g.on(tf.freq), q, p, tf_weight(dual_tf, s), dual_tf)
    return SwapReport(dev, float(lhs[origin]), float(rhs[origin]), wn, mn, wn / mn, p, q, s, tf.header())
