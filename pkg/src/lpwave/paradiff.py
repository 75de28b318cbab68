"""Paradifferential operators with a large parameter gamma on the torus.

A symbol ``a(x, xi)`` is smoothed in x by the weight ``psi_gamma(eta, xi)``
(eta is the x-frequency), and the operator acts by the oscillatory sum

    T_a u(x) = sum_xi sigma_a(x, xi) u_hat(xi) exp(i xi.x).

Tables are stored as ``(N^dim, K)`` arrays: rows are flattened grid points,
columns the retained frequencies ``xi_idx`` (flattened spectral indices).
Restricting columns to the spectral support of the input keeps block-local
computations cheap.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .dyadic import (
    GridFunction,
    chi,
    frequency_magnitude,
    grid_points,
    low_pass_multiplier,
    varphi,
    wavenumbers,
)

__all__ = [
    "ParamWeight",
    "ParaSymbol",
    "ParaOperator",
    "KernelReport",
    "PositivityReport",
    "make_param_weight",
    "smooth_symbol",
    "multiplier_symbol",
    "kernel_diagnostics",
    "paraproduct",
    "usual_paraproduct",
    "apply",
    "dense_matrix",
    "sobolev_weights",
    "operator_norm",
    "boundedness_ratio",
    "adjoint_remainder",
    "composition_remainder",
    "positivity_check",
    "time_derivative_scaling",
    "save_symbol",
    "load_symbol",
    "write_kernel_csv",
]

GAMMA_LADDER = tuple(2.0**k for k in range(13))


def _top_index(max_xi: float) -> int:
    # Largest k with a non-zero varphi(xi / 2^{k+3}) for |xi| <= max_xi.
    return max(0, int(math.ceil(math.log2(max(max_xi, 1.0) / 0.55))) - 3 + 1)


@dataclass(frozen=True)
class ParamWeight:
    """The weight ``psi_gamma(eta, xi)``.

    ``variant="paraproduct"`` (default) is the weight whose block form is the
    paraproduct ``S_{mu-1}a S_{mu+2}u + sum_{k>=mu} S_k a Delta_{k+3}u``::

        chi(eta/2^{mu-1}) chi(xi/2^{mu+2}) + sum_{k>=mu} chi(eta/2^k) varphi(xi/2^{k+3})

    ``variant="literal"`` uses ``chi(eta/2^mu) chi(xi/2^{mu+3})`` for the low
    term and starts the sum at ``k = mu + 1``; its eta-support is not
    contained in ``|eta| < gamma + |xi|``.
    """

    gamma: float
    mu: int
    variant: str = "paraproduct"

    def __call__(self, eta, xi):
        eta = np.abs(np.asarray(eta, dtype=float))
        xi = np.abs(np.asarray(xi, dtype=float))
        mu = self.mu
        if self.variant == "paraproduct":
            low, start = chi(eta / 2.0 ** (mu - 1)) * chi(xi / 2.0 ** (mu + 2)), mu
        elif self.variant == "literal":
            low, start = chi(eta / 2.0**mu) * chi(xi / 2.0 ** (mu + 3)), mu + 1
        else:
            raise ValueError(f"unknown variant {self.variant!r}")
        out = np.array(low, dtype=float, copy=True) if np.ndim(low) else np.asarray(float(low))
        top = _top_index(float(np.max(xi)) if xi.size else 1.0)
        for k in range(start, max(start, top) + 1):
            out = out + chi(eta / 2.0**k) * varphi(xi / 2.0 ** (k + 3))
        return out if out.ndim else float(out)

    def constants(self, radius: float | None = None, samples: int = 801) -> tuple[float, float]:
        """Measured ``(eps1, eps2)``: psi = 1 below ``eps1 (gamma+|xi|)`` and 0 above ``eps2 (gamma+|xi|)``."""
        r = 8.0 * (self.gamma + 64.0) if radius is None else radius
        xi = np.linspace(0.0, r, samples)
        frac = np.linspace(0.0, 1.2, 1201)
        eta = frac[:, None] * (self.gamma + xi[None, :])
        vals = self(eta, np.broadcast_to(xi, eta.shape))
        below = np.where(vals < 1 - 1e-12, frac[:, None], np.inf)
        above = np.where(vals > 1e-15, frac[:, None], -np.inf)
        return float(below.min()), float(above.max())


def make_param_weight(gamma: float, variant: str = "paraproduct") -> ParamWeight:
    if gamma < 1:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    return ParamWeight(gamma=float(gamma), mu=int(math.floor(math.log2(gamma))), variant=variant)


@dataclass
class ParaSymbol:
    """Smoothed symbol table ``sigma_a(x, xi)`` on grid-x times retained xi."""

    table: np.ndarray
    xi_idx: np.ndarray
    n: int
    dim: int
    gamma: float
    order: float = 0.0
    variant: str = "paraproduct"

    def xi_vectors(self) -> np.ndarray:
        """Retained frequencies as an array of shape ``(K, dim)``."""
        ks = [k.ravel()[self.xi_idx] for k in wavenumbers(self.n, self.dim)]
        return np.stack(ks, axis=1)

    def xi_magnitude(self) -> np.ndarray:
        return frequency_magnitude(self.n, self.dim).ravel()[self.xi_idx]

    def x_spectrum(self) -> np.ndarray:
        """Discrete Fourier coefficients in x of each column, shape ``(N^dim, K)``."""
        shape = (self.n,) * self.dim + (self.table.shape[1],)
        axes = tuple(range(self.dim))
        spec = np.fft.fftn(self.table.reshape(shape), axes=axes) / self.n**self.dim
        return spec.reshape(self.table.shape)


@dataclass
class ParaOperator:
    symbol: ParaSymbol
    dense_matrix: np.ndarray | None = None

    @classmethod
    def from_symbol(cls, symbol: ParaSymbol, with_matrix: bool = False) -> "ParaOperator":
        return cls(symbol, dense_matrix(symbol) if with_matrix else None)


def _xi_idx(n: int, dim: int, xi_idx) -> np.ndarray:
    if xi_idx is None:
        return np.arange(n**dim)
    return np.asarray(xi_idx, dtype=np.int64)


def _x_mesh(n: int, dim: int) -> list[np.ndarray]:
    x = grid_points(n)
    if dim == 1:
        return [x]
    return [m.ravel() for m in np.meshgrid(x, x, indexing="ij")]


def smooth_symbol(raw, gamma: float, n: int, dim: int = 1, order: float = 0.0, xi_idx=None,
                  variant: str = "paraproduct") -> ParaSymbol:
    """``sigma_a(x, xi) = (psi_gamma(D_x, xi) a)(x, xi)``.

    Parameters
    ----------
    raw : callable or ndarray
        Either ``raw(x, xi)`` evaluated on broadcast arrays (``x`` of shape
        ``(N^dim, 1)`` per axis, ``xi`` of shape ``(1, K)`` per axis, passed as
        lists in 2-D), or a precomputed table of shape ``(N^dim, K)``.
    xi_idx : array_like, optional
        Flattened spectral indices of the retained columns; default all.

    Notes
    -----
    Multiplying the discrete x-spectrum by the weight is exactly the discrete
    periodic convolution with the kernel ``G^{psi_gamma}(., xi)``.
    """
    idx = _xi_idx(n, dim, xi_idx)
    weight = make_param_weight(gamma, variant)
    table = _raw_table(raw, n, dim, idx)
    shape = (n,) * dim + (idx.size,)
    axes = tuple(range(dim))
    spec = np.fft.fftn(table.reshape(shape), axes=axes)
    w = _weight_table(weight, n, dim, idx.tobytes()).reshape(shape)
    out = np.fft.ifftn(spec * w, axes=axes).reshape(table.shape)
    # psi_gamma(0, xi) = 1, so columns constant in x are left exactly as they are
    flat = _flat_columns(table)
    out[:, flat] = table[:, flat]
    return ParaSymbol(table=out, xi_idx=idx, n=n, dim=dim, gamma=float(gamma), order=order,
                      variant=variant)


@lru_cache(maxsize=32)
def _weight_table(weight: ParamWeight, n: int, dim: int, idx_bytes: bytes) -> np.ndarray:
    # psi_gamma depends on |eta| and |xi| only; evaluate on the distinct values
    idx = np.frombuffer(idx_bytes, dtype=np.int64)
    eta_u, eta_inv = np.unique(frequency_magnitude(n, dim).ravel(), return_inverse=True)
    xi_u, xi_inv = np.unique(frequency_magnitude(n, dim).ravel()[idx], return_inverse=True)
    w = weight(eta_u[:, None], np.broadcast_to(xi_u, (eta_u.size, xi_u.size)))
    out = w[eta_inv][:, xi_inv]
    out.setflags(write=False)
    return out


def _raw_table(raw, n: int, dim: int, idx: np.ndarray) -> np.ndarray:
    if callable(raw):
        xs = [x[:, None] for x in _x_mesh(n, dim)]
        xis = [k.ravel()[idx][None, :] for k in wavenumbers(n, dim)]
        if dim == 1:
            vals = raw(xs[0], xis[0])
        else:
            vals = raw(xs, xis)
        return np.broadcast_to(np.asarray(vals, dtype=complex), (n**dim, idx.size)).copy()
    table = np.asarray(raw, dtype=complex)
    if table.shape != (n**dim, idx.size):
        raise ValueError(f"table shape {table.shape} != {(n**dim, idx.size)}")
    return table


def multiplier_symbol(p: Callable, gamma: float, n: int, dim: int = 1, order: float = 0.0,
                      xi_idx=None) -> ParaSymbol:
    """x-independent symbol ``p(xi)``; smoothing leaves it unchanged."""
    idx = _xi_idx(n, dim, xi_idx)
    xis = [k.ravel()[idx] for k in wavenumbers(n, dim)]
    vals = p(xis[0]) if dim == 1 else p(xis)
    table = np.broadcast_to(np.asarray(vals, dtype=complex), (n**dim, idx.size)).copy()
    return ParaSymbol(table=table, xi_idx=idx, n=n, dim=dim, gamma=float(gamma), order=order)


def _phases(sym: ParaSymbol) -> np.ndarray:
    return _phase_table(sym.n, sym.dim, np.asarray(sym.xi_idx, dtype=np.int64).tobytes())


@lru_cache(maxsize=16)
def _phase_table(n: int, dim: int, idx_bytes: bytes) -> np.ndarray:
    idx = np.frombuffer(idx_bytes, dtype=np.int64)
    xs = _x_mesh(n, dim)
    xis = np.stack([k.ravel()[idx] for k in wavenumbers(n, dim)], axis=1)
    arg = sum(xs[a][:, None] * xis[None, :, a] for a in range(dim))
    out = np.exp(1j * arg)
    out.setflags(write=False)
    return out


def apply(op: ParaOperator | ParaSymbol, u: GridFunction) -> GridFunction:
    """Direct O(N^dim K) quadrature of ``sum_xi sigma(x, xi) u_hat(xi) e^{i xi.x}``.

    Spectral content of ``u`` outside the retained columns is ignored.
    """
    sym = op.symbol if isinstance(op, ParaOperator) else op
    if u.n != sym.n or u.dim != sym.dim:
        raise ValueError("grid mismatch between symbol and function")
    coef = u.spectrum.ravel()[sym.xi_idx]
    vals = (sym.table * _phases(sym)) @ coef
    return GridFunction(vals.reshape((sym.n,) * sym.dim))


def dense_matrix(sym: ParaSymbol) -> np.ndarray:
    """Matrix acting on spectral coefficients: ``out_hat = M @ u_hat[xi_idx]``."""
    shape = (sym.n,) * sym.dim + (sym.xi_idx.size,)
    axes = tuple(range(sym.dim))
    cols = np.fft.fftn((sym.table * _phases(sym)).reshape(shape), axes=axes) / sym.n**sym.dim
    cols = cols.reshape(sym.n**sym.dim, sym.xi_idx.size)
    # x-independent columns are exact Fourier multipliers: keep them diagonal
    flat = _flat_columns(sym.table)
    if np.any(flat):
        cols[:, flat] = 0
        cols[sym.xi_idx[flat], np.flatnonzero(flat)] = sym.table[0, flat]
    return cols


def _flat_columns(table: np.ndarray) -> np.ndarray:
    return np.all(table == table[:1], axis=0)


def _paraproduct_top(n: int, dim: int) -> int:
    # k with chi(xi / 2^{k+3}) = 1 on the whole grid, so the block sum telescopes.
    max_xi = math.sqrt(dim) * n / 2
    return max(0, int(math.ceil(math.log2(max_xi / 1.1))) - 3)


def paraproduct(a: GridFunction, u: GridFunction, gamma: float = 1.0) -> GridFunction:
    """``S_{mu-1}a S_{mu+2}u + sum_{k>=mu} S_k a Delta_{k+3}u`` with ``mu = floor(log2 gamma)``."""
    mu = make_param_weight(gamma).mu
    n, dim = u.n, u.dim
    out = low_pass(a, mu - 1).samples * low_pass(u, mu + 2).samples
    for k in range(mu, _paraproduct_top(n, dim) + 1):
        blk = u.apply_multiplier(varphi(frequency_magnitude(n, dim) / 2.0 ** (k + 3)))
        out = out + low_pass(a, k).samples * blk.samples
    return GridFunction(out)


def usual_paraproduct(a: GridFunction, u: GridFunction) -> GridFunction:
    """``sum_{k>=0} S_k a Delta_{k+3} u`` (no parameter)."""
    n, dim = u.n, u.dim
    out = np.zeros_like(u.samples)
    for k in range(0, _paraproduct_top(n, dim) + 1):
        blk = u.apply_multiplier(varphi(frequency_magnitude(n, dim) / 2.0 ** (k + 3)))
        out = out + low_pass(a, k).samples * blk.samples
    return GridFunction(out)


def low_pass(u: GridFunction, k: int) -> GridFunction:
    return u.apply_multiplier(low_pass_multiplier(u.n, u.dim, k))


# --- kernel diagnostics -------------------------------------------------------------

@dataclass
class KernelReport:
    gamma: float
    rows: list[tuple] = field(default_factory=list)  # (xi, l1, moment, dxi_l1, zero_mean)

    def column(self, name: str) -> np.ndarray:
        k = {"xi": 0, "l1": 1, "moment": 2, "dxi_l1": 3, "zero_mean": 4}[name]
        return np.array([r[k] for r in self.rows])


def _kernel_samples(weight: ParamWeight, xi: float, m: int):
    eta = np.fft.fftfreq(m, d=1.0 / m)
    return eta, weight(eta, np.full(eta.shape, xi))


def kernel_diagnostics(gamma: float, xi_samples: Sequence[float], variant: str = "paraproduct",
                       points: int | None = None) -> KernelReport:
    """L1 quantities of ``G(x, xi) = (2 pi)^-1 sum_eta psi_gamma(eta, xi) e^{i eta x}``.

    For each xi reports ``||G||_L1``, ``(gamma+|xi|) || |x| G ||_L1`` (|x| the
    periodic distance), ``(gamma+|xi|) ||d_xi G||_L1`` by a centred difference
    in xi, and the quadrature of ``int d_x G dx``.
    """
    weight = make_param_weight(gamma, variant)
    top = max(xi_samples) if len(xi_samples) else 0.0
    m = points or max(4096, 2 ** int(math.ceil(math.log2(32 * (gamma + top + 1)))))
    x = grid_points(m)
    dist = np.minimum(x, 2 * np.pi - x)
    dx = 2 * np.pi / m
    rep = KernelReport(gamma=float(gamma))
    for xi in xi_samples:
        eta, w = _kernel_samples(weight, xi, m)
        g = np.fft.ifft(w).real * m / (2 * np.pi)
        dg = np.fft.ifft(1j * eta * w) * m / (2 * np.pi)
        h = 0.5
        _, wp = _kernel_samples(weight, xi + h, m)
        _, wm = _kernel_samples(weight, xi - h, m)
        gxi = np.fft.ifft((wp - wm) / (2 * h)).real * m / (2 * np.pi)
        scale = gamma + abs(xi)
        l1 = float(np.sum(np.abs(g)) * dx)
        mom = float(np.sum(dist * np.abs(g)) * dx) * scale
        dxi = float(np.sum(np.abs(gxi)) * dx) * scale
        zero = abs(complex(np.sum(dg) * dx))
        rep.rows.append((float(xi), l1, mom, dxi, zero))
    return rep


def write_kernel_csv(path, reports: Sequence[KernelReport]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gamma", "xi", "l1", "moment", "dxi_l1", "zero_mean"])
        for rep in reports:
            for row in rep.rows:
                w.writerow([repr(rep.gamma)] + [repr(float(v)) for v in row])


# --- operator norms -------------------------------------------------------------------

def sobolev_weights(n: int, dim: int, s: float, gamma: float, xi_idx=None) -> np.ndarray:
    """``(gamma^2 + |xi|^2)^{s/2}`` on the (retained) flattened frequencies."""
    mag = frequency_magnitude(n, dim).ravel()
    if xi_idx is not None:
        mag = mag[np.asarray(xi_idx)]
    return (gamma**2 + mag**2) ** (s / 2)


def operator_norm(matrix: np.ndarray, iters: int = 200, tol: float = 1e-6, seed: int = 0) -> float:
    """Largest singular value by power iteration on ``M^H M``.

    Stops after ``iters`` iterations or when the estimate changes by less
    than ``tol`` relative.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(matrix.shape[1]) + 1j * rng.standard_normal(matrix.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = matrix.conj().T @ (matrix @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        new = math.sqrt(nw)
        v = w / nw
        if est > 0 and abs(new - est) <= tol * est:
            est = new
            break
        est = new
    return est


def _weighted(matrix: np.ndarray, n: int, dim: int, s_in: float, s_out: float, gamma: float,
              xi_idx=None) -> np.ndarray:
    w_out = sobolev_weights(n, dim, s_out, gamma)
    w_in = sobolev_weights(n, dim, s_in, gamma, xi_idx)
    return (w_out[:, None] * matrix) / w_in[None, :]


def boundedness_ratio(sym: ParaSymbol, s: float, samples: int = 50, seed: int = 0,
                      band: float | None = None) -> np.ndarray:
    """``||T u||_{H^{s-m}_gamma} / ||u||_{H^s_gamma}`` over random band-limited u."""
    from .dyadic import sobolev_norm_gamma

    rng = np.random.default_rng(seed)
    mag = frequency_magnitude(sym.n, sym.dim)
    cut = sym.n / 4 if band is None else band
    out = []
    for _ in range(samples):
        spec = (rng.standard_normal(mag.shape) + 1j * rng.standard_normal(mag.shape)) * (mag <= cut)
        u = GridFunction.from_spectrum(spec)
        tu = apply(sym, u)
        out.append(sobolev_norm_gamma(tu, s - sym.order, sym.gamma) / sobolev_norm_gamma(u, s, sym.gamma))
    return np.array(out)


def adjoint_remainder(raw, gamma: float, n: int, s: float, order: float = 0.0, dim: int = 1,
                      exact: bool = False) -> float:
    """Norm of ``T_a^* - T_{conj(a)}`` from ``H^s_gamma`` to ``H^{s-m+1}_gamma``."""
    a = smooth_symbol(raw, gamma, n, dim, order)
    if callable(raw):
        abar = smooth_symbol(lambda *z: np.conj(raw(*z)), gamma, n, dim, order)
    else:
        abar = smooth_symbol(np.conj(raw), gamma, n, dim, order)
    r = dense_matrix(a).conj().T - dense_matrix(abar)
    wr = _weighted(r, n, dim, s, s - order + 1, gamma)
    return float(np.linalg.norm(wr, 2)) if exact else operator_norm(wr)


def composition_remainder(a_raw, b_raw, s: float, gamma: float, n: int, m: float = 0.0,
                          m_prime: float = 0.0, dim: int = 1, gain: float = 1.0,
                          exact: bool = False) -> float:
    """Norm of ``T_a T_b - T_{ab}`` from ``H^s_gamma`` to ``H^{s-m-m'+gain}_gamma``.

    ``gain = 1`` is the order-one improvement; ``gain = 0`` measures the
    remainder as an operator of the full order ``m + m'``.
    """
    ta = dense_matrix(smooth_symbol(a_raw, gamma, n, dim, m))
    tb = dense_matrix(smooth_symbol(b_raw, gamma, n, dim, m_prime))
    idx = np.arange(n**dim)
    at = _raw_table(a_raw, n, dim, idx)
    bt = _raw_table(b_raw, n, dim, idx)
    tab = dense_matrix(smooth_symbol(at * bt, gamma, n, dim, m + m_prime))
    r = ta @ tb - tab
    wr = _weighted(r, n, dim, s, s - m - m_prime + gain, gamma)
    return float(np.linalg.norm(wr, 2)) if exact else operator_norm(wr)


@dataclass
class PositivityReport:
    gamma_pass: float | None
    min_ratio: dict[float, float]  # worst Re(T u, u) / (lambda0/2 ||u||^2_{H^{m/2}_gamma}); pass iff >= 1
    failures: dict[float, int]
    # smallest eigenvalue of the Hermitian part on the band, in the same units
    worst_case: dict[float, float] = field(default_factory=dict)


def positivity_corpus(n: int, count: int = 100, seed: int = 0, dim: int = 1,
                      band: float | None = None) -> list[GridFunction]:
    """Random band-limited states: even entries white-spectrum, odd entries
    Gaussian wave packets with random centre, carrier frequency and width."""
    rng = np.random.default_rng(seed)
    mag = frequency_magnitude(n, dim)
    cut = n / 4 if band is None else band
    xs = [x.reshape((n,) * dim) for x in _x_mesh(n, dim)]
    keep = mag <= cut
    out = []
    for i in range(count):
        if i % 2 == 0:
            spec = (rng.standard_normal(mag.shape) + 1j * rng.standard_normal(mag.shape)) * keep
            out.append(GridFunction.from_spectrum(spec))
            continue
        x0 = rng.uniform(0, 2 * np.pi, dim)
        k = rng.uniform(0, cut / 2, dim)
        width = 2.0 ** rng.uniform(-5, 0)
        r2 = sum(np.angle(np.exp(1j * (x - c))) ** 2 for x, c in zip(xs, x0))
        phase = sum(kk * x for kk, x in zip(k, xs))
        g = GridFunction(np.exp(-r2 / (2 * width**2) + 1j * phase))
        out.append(GridFunction.from_spectrum(g.spectrum * keep))
    return out


def positivity_check(raw: Callable, lambda0: float, n: int = 128, order: float = 0.0,
                     gamma_ladder: Sequence[float] = GAMMA_LADDER, corpus: Sequence[GridFunction] | None = None,
                     seed: int = 0, dim: int = 1) -> PositivityReport:
    """Smallest gamma with ``Re(T_a u, u) >= lambda0/2 ||u||^2_{H^{m/2}_gamma}`` on a corpus.

    ``raw(x, xi, gamma)`` is the symbol, which may depend on gamma (for
    instance ``a(x) (gamma^2 + xi^2)^{m/2}``). Failures per gamma are
    recorded; ``gamma_pass`` is None when the ladder is exhausted.
    """
    from .dyadic import sobolev_norm_gamma

    states = positivity_corpus(n, 100, seed, dim) if corpus is None else list(corpus)
    min_ratio: dict[float, float] = {}
    failures: dict[float, int] = {}
    worst_case: dict[float, float] = {}
    passed = None
    for g in gamma_ladder:
        sym = smooth_symbol(lambda *z: raw(*z, g), g, n, dim, order)
        mat = dense_matrix(sym)
        worst, bad = math.inf, 0
        for u in states:
            c = u.spectrum.ravel()
            lhs = (2 * np.pi) ** dim * float(np.real(np.vdot(c, mat @ c)))
            rhs = 0.5 * lambda0 * sobolev_norm_gamma(u, order / 2, g) ** 2
            worst = min(worst, lhs / rhs)
            bad += lhs < rhs * (1 - 1e-12)
        min_ratio[g], failures[g] = worst, bad
        keep = np.flatnonzero(frequency_magnitude(n, dim).ravel() <= n / 4)
        herm = mat[np.ix_(keep, keep)]
        herm = (herm + herm.conj().T) / 2
        w = sobolev_weights(n, dim, order / 2, g, keep)
        worst_case[g] = float(np.linalg.eigvalsh(herm / np.outer(w, w)).min()) / (0.5 * lambda0)
        if bad == 0:
            passed = g
            break
    return PositivityReport(gamma_pass=passed, min_ratio=min_ratio, failures=failures, worst_case=worst_case)


def time_derivative_scaling(coef, gamma: float, nus: Sequence[int], n: int = 128, nt: int = 2**14,
                            order: float = 0.0) -> list[tuple]:
    """Scaled sups of the smoothed mollified time derivatives of a coefficient.

    Rows ``(nu, sup|sigma_{d_t a_eps}| / (1+nu), sup|sigma_{d_t^2 a_eps}| 2^-nu)``
    with ``eps = 2^-nu``; sup over a periodic time grid, grid x and all xi.
    The symbol is ``a(t, x)`` (order 0), so ``(gamma+|xi|)^m = 1``.
    """
    x = _x_mesh(n, coef.dim)
    sf = coef.space_factor(*[xx.reshape((n,) * coef.dim) for xx in x]).ravel()
    sym = smooth_symbol(np.repeat(sf[:, None], n**coef.dim, axis=1), gamma, n, coef.dim, order)
    xi_scale = (gamma + sym.xi_magnitude()) ** order
    space_sup = float(np.max(np.abs(sym.table) / xi_scale[None, :])) * coef.max_entry
    rows = []
    for nu in nus:
        eps = 2.0**-nu
        d1 = float(np.max(np.abs(coef.mollified_time_grid(nt, eps, 1))))
        d2 = float(np.max(np.abs(coef.mollified_time_grid(nt, eps, 2))))
        rows.append((nu, d1 * space_sup / (1 + nu), d2 * space_sup * eps))
    return rows


_SYM_HEADER = struct.Struct("<4sIIdd")


def save_symbol(path, sym: ParaSymbol) -> None:
    """Binary dump: {magic, N_x, N_xi, gamma, m} then the complex128 table and xi indices."""
    with open(path, "wb") as fh:
        fh.write(_SYM_HEADER.pack(b"LPSY", sym.table.shape[0], sym.table.shape[1], sym.gamma, sym.order))
        fh.write(struct.pack("<II", sym.n, sym.dim))
        fh.write(np.ascontiguousarray(sym.table, dtype="<c16").tobytes())
        fh.write(np.ascontiguousarray(sym.xi_idx, dtype="<i8").tobytes())


def load_symbol(path) -> ParaSymbol:
    with open(path, "rb") as fh:
        data = fh.read()
    magic, nx, nxi, gamma, order = _SYM_HEADER.unpack_from(data)
    if magic != b"LPSY":
        raise ValueError(f"{path}: not a symbol file")
    off = _SYM_HEADER.size
    n, dim = struct.unpack_from("<II", data, off)
    off += 8
    table = np.frombuffer(data, dtype="<c16", count=nx * nxi, offset=off).reshape(nx, nxi).copy()
    off += 16 * nx * nxi
    idx = np.frombuffer(data, dtype="<i8", count=nxi, offset=off).copy()
    return ParaSymbol(table=table, xi_idx=idx, n=n, dim=dim, gamma=gamma, order=order)
