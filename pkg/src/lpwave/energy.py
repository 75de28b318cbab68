"""Block energies for the wave operator with time-mollified coefficients.

For block nu the coefficient is mollified in time at ``eps = 2^-nu`` and

    alpha_nu^2 = (gamma^2 + sum a_jk,eps xi_j xi_k) / (gamma^2 + |xi|^2).

With ``u_nu = Delta_nu u`` the energy pieces are

    v_nu = T_{alpha^-1/2} d_t u_nu - T_{d_t(alpha^-1/2)} u_nu
    w_nu = T_{alpha^1/2 (gamma^2+|xi|^2)^1/2} u_nu
    z_nu = u_nu

and ``e_nu = |v|^2 + |w|^2 + |z|^2``, ``E_theta = sum 2^{-2 nu theta} e_nu``.
Time derivatives of the symbols come from differentiating the mollifier,
never from differencing operator outputs in time.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .coefficients import RoughCoefficient
from .dyadic import (
    GridFunction,
    block_multiplier,
    frequency_magnitude,
    grid_points,
    j_max,
    low_pass_multiplier,
    sobolev_norm,
    wavenumbers,
)
from .paradiff import ParaSymbol, apply, paraproduct, smooth_symbol
from .regularity import ResolutionError, mollify_function

__all__ = [
    "EnergyConfig",
    "EnergyBreakdown",
    "AlphaSymbol",
    "BlockOperators",
    "alpha_symbol",
    "block_operators",
    "build_vwz",
    "block_energy",
    "total_energy",
    "energy_rate",
    "sobolev_bracket",
    "zeta_check",
    "mollification_gap",
    "commutator_vanishing",
    "commutator_ratio",
    "commutator_aggregate",
    "lipschitz_constant",
    "write_energy_csv",
]

H_COEF = 2 * np.pi / 2**16  # time spacing of the mollifier quadrature


@dataclass(frozen=True)
class EnergyConfig:
    """theta in [0, 1), gamma >= 1, block range ``nus`` (default ``0..nu_max``)."""

    theta: float = 0.0
    gamma: float = 1.0
    nu_max: int = 5
    T: float = 1.0
    nus: tuple[int, ...] | None = None
    column_tol: float = 0.0  # drop block columns where the data is below tol * global max

    def __post_init__(self):
        if not 0 <= self.theta < 1:
            raise ValueError(f"theta must lie in [0, 1), got {self.theta}")
        if self.gamma < 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")

    @classmethod
    def for_grid(cls, n: int, **kw) -> "EnergyConfig":
        """``nu_max = j_max(n) - 1``."""
        return cls(nu_max=j_max(n) - 1, **kw)

    def blocks(self) -> tuple[int, ...]:
        return tuple(range(self.nu_max + 1)) if self.nus is None else tuple(self.nus)


@dataclass
class EnergyBreakdown:
    t: float
    theta: float
    nus: np.ndarray
    v2: np.ndarray
    w2: np.ndarray
    z2: np.ndarray
    tail: float = 0.0  # relative mass of (u, d_t u) outside the retained blocks

    @property
    def e(self) -> np.ndarray:
        return self.v2 + self.w2 + self.z2

    @property
    def weights(self) -> np.ndarray:
        return 2.0 ** (-2.0 * self.nus * self.theta)

    @property
    def E_theta(self) -> float:
        return float(np.sum(self.weights * self.e))


@lru_cache(maxsize=64)
def _block_columns(n: int, dim: int, nu: int) -> np.ndarray:
    idx = np.flatnonzero(block_multiplier(n, dim, nu).ravel() != 0)
    idx.setflags(write=False)
    return idx


@dataclass
class AlphaSymbol:
    """``alpha_nu`` at time t on grid-x times the block-nu frequencies."""

    nu: int
    t: float
    gamma: float
    n: int
    dim: int
    xi_idx: np.ndarray
    a_eps: np.ndarray  # (N^dim,) mollified scalar coefficient a_eps(t, x)
    a_eps_t: np.ndarray
    a_eps_tt: np.ndarray
    quad: np.ndarray  # (K,) xi . M xi
    xi2: np.ndarray  # (K,) |xi|^2

    def _q(self, a):
        return self.gamma**2 + a[:, None] * self.quad[None, :]

    @property
    def p(self) -> np.ndarray:
        return self.gamma**2 + self.xi2

    def alpha2(self) -> np.ndarray:
        return self._q(self.a_eps) / self.p[None, :]

    def power(self, e: float) -> np.ndarray:
        return self.alpha2() ** (e / 2)

    def dt_inv_sqrt(self) -> np.ndarray:
        # alpha^-1/2 = p^1/4 q^-1/4
        q = self._q(self.a_eps)
        return self.p[None, :] ** 0.25 * (-0.25) * q**-1.25 * (self.a_eps_t[:, None] * self.quad[None, :])

    def dtt_inv_sqrt(self) -> np.ndarray:
        q = self._q(self.a_eps)
        q1 = self.a_eps_t[:, None] * self.quad[None, :]
        q2 = self.a_eps_tt[:, None] * self.quad[None, :]
        return self.p[None, :] ** 0.25 * (5.0 / 16.0 * q**-2.25 * q1**2 - 0.25 * q**-1.25 * q2)

    def dt_sqrt(self) -> np.ndarray:
        q = self._q(self.a_eps)
        return self.p[None, :] ** -0.25 * 0.25 * q**-0.75 * (self.a_eps_t[:, None] * self.quad[None, :])


def _mollified(c: RoughCoefficient, t: float, eps: float, h: float) -> tuple[float, float, float]:
    if eps < 8 * h * (1 - 1e-12):
        raise ResolutionError(f"eps={eps} needs at least 8 quadrature samples of spacing {h}")
    nodes = 2 * int(math.ceil(eps / h)) + 1
    tt = np.array([t])
    return tuple(float(c.mollified_time(tt, eps, order, nodes)[0]) for order in (0, 1, 2))


def alpha_symbol(c: RoughCoefficient, t: float, nu: int, gamma: float, n: int,
                 xi_idx=None, h_coef: float = H_COEF) -> AlphaSymbol:
    """Tabulate ``alpha_nu(t, x, xi)`` with ``eps = 2^-nu``.

    Raises
    ------
    ResolutionError
        If ``2^-nu`` is below eight quadrature spacings ``h_coef``.
    """
    dim = c.dim
    idx = _block_columns(n, dim, nu) if xi_idx is None else np.asarray(xi_idx)
    a0, a1, a2 = _mollified(c, t, 2.0**-nu, h_coef)
    x = grid_points(n)
    if dim == 1:
        sf = c.space_factor(x)
    else:
        xx, yy = np.meshgrid(x, x, indexing="ij")
        sf = c.space_factor(xx, yy).ravel()
    ks = np.stack([k.ravel()[idx] for k in wavenumbers(n, dim)], axis=1)
    quad = np.einsum("kj,jl,kl->k", ks, c.matrix, ks)
    return AlphaSymbol(nu=nu, t=float(t), gamma=float(gamma), n=n, dim=dim, xi_idx=idx,
                       a_eps=a0 * sf, a_eps_t=a1 * sf, a_eps_tt=a2 * sf, quad=quad,
                       xi2=np.sum(ks**2, axis=1))


@dataclass
class BlockOperators:
    """Smoothed symbols acting on block nu."""

    alpha: AlphaSymbol
    inv_sqrt: ParaSymbol
    dt_inv_sqrt: ParaSymbol
    elliptic: ParaSymbol
    dtt_inv_sqrt: ParaSymbol | None = None
    dt_elliptic: ParaSymbol | None = None


def block_operators(alpha: AlphaSymbol, derivatives: bool = False) -> BlockOperators:
    """Smooth the block symbols; ``derivatives`` adds those needed for ``dE/dt``."""
    n, dim, g, idx = alpha.n, alpha.dim, alpha.gamma, alpha.xi_idx
    sq = np.sqrt(alpha.p)[None, :]
    mk = lambda tab, m: smooth_symbol(tab, g, n, dim, m, xi_idx=idx)  # noqa: E731
    ops = BlockOperators(
        alpha=alpha,
        inv_sqrt=mk(alpha.power(-0.5), 0.0),
        dt_inv_sqrt=mk(alpha.dt_inv_sqrt(), 0.0),
        elliptic=mk(alpha.power(0.5) * sq, 1.0),
    )
    if derivatives:
        ops.dtt_inv_sqrt = mk(alpha.dtt_inv_sqrt(), 0.0)
        ops.dt_elliptic = mk(alpha.dt_sqrt() * sq, 1.0)
    return ops


def _block(u: GridFunction, nu: int) -> GridFunction:
    return u.apply_multiplier(block_multiplier(u.n, u.dim, nu))


def build_vwz(u: GridFunction, du_dt: GridFunction, alpha: AlphaSymbol | BlockOperators,
              gamma: float | None = None) -> tuple[GridFunction, GridFunction, GridFunction]:
    """``(v_nu, w_nu, z_nu)`` from the full u and d_t u (blocks are taken here).

    ``gamma`` defaults to the one the symbol was built with.
    """
    ops = alpha if isinstance(alpha, BlockOperators) else block_operators(alpha)
    if gamma is not None and gamma != ops.alpha.gamma:
        raise ValueError(f"gamma={gamma} differs from the symbol's gamma={ops.alpha.gamma}")
    nu = ops.alpha.nu
    un, utn = _block(u, nu), _block(du_dt, nu)
    v = apply(ops.inv_sqrt, utn) - apply(ops.dt_inv_sqrt, un)
    w = apply(ops.elliptic, un)
    return v, w, un


def block_energy(u, du_dt, ops: BlockOperators) -> tuple[float, float, float]:
    v, w, z = build_vwz(u, du_dt, ops)
    return v.norm() ** 2, w.norm() ** 2, z.norm() ** 2


def _tail(u: GridFunction, du_dt: GridFunction, nus: Sequence[int]) -> float:
    keep = np.zeros(u.spectrum.shape)
    for nu in nus:
        keep = keep + block_multiplier(u.n, u.dim, nu)
    mag2 = 1.0 + frequency_magnitude(u.n, u.dim) ** 2
    full = np.sum(mag2 * np.abs(u.spectrum) ** 2 + np.abs(du_dt.spectrum) ** 2)
    if full == 0:
        return 0.0
    rest = np.sum((1 - keep) ** 2 * (mag2 * np.abs(u.spectrum) ** 2 + np.abs(du_dt.spectrum) ** 2))
    return float(math.sqrt(rest / full))


def total_energy(u: GridFunction, du_dt: GridFunction, t: float, c: RoughCoefficient,
                 cfg: EnergyConfig, cache: dict | None = None) -> EnergyBreakdown:
    """``E_theta(t)`` with its block breakdown over ``cfg.blocks()``.

    Blocks where both ``u`` and ``d_t u`` vanish exactly are skipped (zero
    energy). ``cache`` may hold :class:`BlockOperators` keyed by ``(t, nu)``.
    """
    nus = cfg.blocks()
    v2, w2, z2 = (np.zeros(len(nus)) for _ in range(3))
    for i, nu in enumerate(nus):
        idx = _active(u.n, u.dim, nu, cfg.column_tol, u, du_dt)
        if idx is not None and idx.size == 0:
            continue
        ops = _ops(c, t, nu, cfg.gamma, u.n, cache, False, idx)
        v2[i], w2[i], z2[i] = block_energy(u, du_dt, ops)
    return EnergyBreakdown(t=float(t), theta=cfg.theta, nus=np.array(nus), v2=v2, w2=w2, z2=z2,
                           tail=_tail(u, du_dt, nus))


def _active(n: int, dim: int, nu: int, tol: float, *fields: GridFunction) -> np.ndarray | None:
    """Block columns where some field exceeds ``tol`` times its own largest coefficient."""
    idx = _block_columns(n, dim, nu)
    mags = [np.abs(f.spectrum.ravel()) for f in fields]
    if not any(np.any(m[idx]) for m in mags):
        return idx[:0]
    if tol <= 0:
        return None
    keep = np.zeros(idx.size, dtype=bool)
    for m in mags:
        keep |= m[idx] > tol * m.max()
    return idx[keep]


def _ops(c, t, nu, gamma, n, cache, derivatives, xi_idx=None) -> BlockOperators:
    key = (float(t), nu, float(gamma), n, derivatives)
    if xi_idx is None and cache is not None and key in cache:
        return cache[key]
    ops = block_operators(alpha_symbol(c, t, nu, gamma, n, xi_idx), derivatives)
    if xi_idx is not None:
        return ops
    if cache is not None:
        cache[key] = ops
    return ops


def energy_rate(u: GridFunction, du_dt: GridFunction, d2u_dt2: GridFunction, t: float,
                c: RoughCoefficient, cfg: EnergyConfig) -> tuple[EnergyBreakdown, float]:
    """``E_theta(t)`` and its exact time derivative along the flow.

    ``d2u_dt2`` is the second time derivative (the spatial operator plus
    forcing). With ``d_t v = T_{alpha^-1/2} d_t^2 u_nu - T_{d_t^2 alpha^-1/2} u_nu``
    (the ``T_{d_t alpha^-1/2} d_t u_nu`` terms cancel) and
    ``d_t w = T_{d_t(alpha^1/2) (gamma^2+|xi|^2)^1/2} u_nu + T_{...} d_t u_nu``,
    ``de_nu/dt = 2 Re[(d_t v, v) + (d_t w, w) + (d_t u_nu, u_nu)]``.
    """
    nus = cfg.blocks()
    v2, w2, z2 = (np.zeros(len(nus)) for _ in range(3))
    rate = 0.0
    weights = 2.0 ** (-2.0 * np.array(nus) * cfg.theta)
    for i, nu in enumerate(nus):
        idx = _active(u.n, u.dim, nu, cfg.column_tol, u, du_dt, d2u_dt2)
        if idx is not None and idx.size == 0:
            continue
        ops = _ops(c, t, nu, cfg.gamma, u.n, None, True, idx)
        un, utn, uttn = _block(u, nu), _block(du_dt, nu), _block(d2u_dt2, nu)
        v = apply(ops.inv_sqrt, utn) - apply(ops.dt_inv_sqrt, un)
        w = apply(ops.elliptic, un)
        dv = apply(ops.inv_sqrt, uttn) - apply(ops.dtt_inv_sqrt, un)
        dw = apply(ops.dt_elliptic, un) + apply(ops.elliptic, utn)
        v2[i], w2[i], z2[i] = v.norm() ** 2, w.norm() ** 2, un.norm() ** 2
        de = 2 * (dv.inner(v).real + dw.inner(w).real + utn.inner(un).real)
        rate += weights[i] * de
    br = EnergyBreakdown(t=float(t), theta=cfg.theta, nus=np.array(nus), v2=v2, w2=w2, z2=z2,
                         tail=_tail(u, du_dt, nus))
    return br, float(rate)


def sobolev_bracket(u: GridFunction, du_dt: GridFunction, theta: float) -> float:
    """``||d_t u||_{H^-theta} + ||u||_{H^{1-theta}}``."""
    return sobolev_norm(du_dt, -theta) + sobolev_norm(u, 1 - theta)


# --- zeta identity and commutators ------------------------------------------------------

def _space_field(c: RoughCoefficient, n: int) -> np.ndarray:
    x = grid_points(n)
    if c.dim == 1:
        return c.space_factor(x)
    xx, yy = np.meshgrid(x, x, indexing="ij")
    return c.space_factor(xx, yy)


def _div_para(c: RoughCoefficient, t: float, un: GridFunction, gamma: float) -> GridFunction:
    # sum_jk d_j (T_{a_jk} d_k u_nu), with T the gamma-paraproduct of a_jk(t, .)
    a = GridFunction(float(c.time_values(t)) * _space_field(c, un.n))
    out = GridFunction(np.zeros_like(un.samples))
    for j in range(c.dim):
        for k in range(c.dim):
            if c.matrix[j, k] == 0:
                continue
            out = out + c.matrix[j, k] * paraproduct(a, un.derivative(k), gamma).derivative(j)
    return out


def zeta_check(u: GridFunction, alpha: AlphaSymbol, c: RoughCoefficient, nu: int | None = None,
               gamma: float | None = None, du_dt: GridFunction | None = None) -> float:
    """``||zeta_nu|| / e_nu^{1/2}`` where

    ``zeta_nu = T_{alpha_nu^2 (gamma^2+|xi|^2)} u_nu + sum d_j (T_{a_jk} d_k u_nu)``.

    The first symbol is ``gamma^2 + sum a_jk,eps xi_j xi_k``. ``du_dt``
    (default zero) enters only through ``e_nu``.
    """
    nu = alpha.nu if nu is None else nu
    gamma = alpha.gamma if gamma is None else gamma
    un = _block(u, nu)
    sym = smooth_symbol(alpha.alpha2() * alpha.p[None, :], gamma, alpha.n, alpha.dim, 2.0, xi_idx=alpha.xi_idx)
    zeta = apply(sym, un) + _div_para(c, alpha.t, un, gamma)
    ut = GridFunction(np.zeros_like(u.samples)) if du_dt is None else du_dt
    e = sum(block_energy(u, ut, block_operators(alpha)))
    return zeta.norm() / math.sqrt(e)


def mollification_gap(u: GridFunction, alpha: AlphaSymbol, c: RoughCoefficient) -> float:
    """``||T_{(a_eps - a) xi.M xi} u_nu|| / (2^-nu ||grad^2 u_nu||)``."""
    un = _block(u, alpha.nu)
    a_now = float(c.time_values(alpha.t)) * _space_field(c, alpha.n).ravel()
    tab = (alpha.a_eps - a_now)[:, None] * alpha.quad[None, :]
    sym = smooth_symbol(tab, alpha.gamma, alpha.n, alpha.dim, 2.0, xi_idx=alpha.xi_idx)
    hess = math.sqrt(sum(un.derivative(j).derivative(k).norm() ** 2
                         for j in range(un.dim) for k in range(un.dim)))
    return apply(sym, un).norm() / (2.0**-alpha.nu * hess)


def _lp(u: GridFunction, k: int) -> GridFunction:
    return u.apply_multiplier(low_pass_multiplier(u.n, u.dim, k))


def _commutator(a_low: GridFunction, f: GridFunction, nu: int) -> GridFunction:
    # [Delta_nu, b] f = Delta_nu(b f) - b Delta_nu f
    return _block(a_low * f, nu) - a_low * _block(f, nu)


def commutator_vanishing(a: GridFunction, w: GridFunction, hs: Sequence[int], nus: Sequence[int]) -> np.ndarray:
    """``||[Delta_nu, S_h a] Delta_{h+3} w|| / (||a||_inf ||w||)`` over (h, nu)."""
    scale = a.sup() * w.norm()
    out = np.zeros((len(hs), len(nus)))
    for i, h in enumerate(hs):
        blk = w.apply_multiplier(block_multiplier(w.n, w.dim, h + 3)) if h + 3 >= 0 else w * 0
        sa = _lp(a, h)
        for k, nu in enumerate(nus):
            out[i, k] = _commutator(sa, blk, nu).norm() / scale
    return out


def lipschitz_constant(a: GridFunction) -> float:
    """Largest first difference over one grid spacing, along each axis."""
    h = 2 * np.pi / a.n
    vals = a.samples.real
    return max(float(np.max(np.abs(np.roll(vals, -1, axis=ax) - vals))) / h for ax in range(a.dim))


def commutator_ratio(a: GridFunction, u: GridFunction, nu: int) -> float:
    """``||d_x([Delta_nu, S_{nu-3} a] d_x Delta_nu u)|| / (2^nu |a|_Lip ||Delta_nu u||)``.

    In 2-D the sum over ``j, k`` of the mixed terms is used.
    """
    un = _block(u, nu)
    sa = _lp(a, nu - 3)
    total = GridFunction(np.zeros_like(u.samples))
    for j in range(u.dim):
        for k in range(u.dim):
            total = total + _commutator(sa, un.derivative(k), nu).derivative(j)
    return total.norm() / (2.0**nu * lipschitz_constant(a) * un.norm())


def commutator_aggregate(c: RoughCoefficient, u: GridFunction, du_dt: GridFunction, t: float,
                         cfg: EnergyConfig) -> float:
    """``sum 2^{-2 nu theta} ||sum d_j [Delta_nu, T_{a_jk}] d_k u|| e_nu^{1/2}`` over ``E_theta``."""
    a = GridFunction(float(c.time_values(t)) * _space_field(c, u.n))
    br = total_energy(u, du_dt, t, c, cfg)
    num = 0.0
    for i, nu in enumerate(br.nus):
        if br.e[i] == 0:
            continue
        comm = GridFunction(np.zeros_like(u.samples))
        for j in range(c.dim):
            for k in range(c.dim):
                if c.matrix[j, k] == 0:
                    continue
                dk = u.derivative(k)
                term = _block(paraproduct(a, dk, cfg.gamma), int(nu)) - paraproduct(a, _block(dk, int(nu)), cfg.gamma)
                comm = comm + c.matrix[j, k] * term.derivative(j)
        num += br.weights[i] * comm.norm() * math.sqrt(br.e[i])
    return num / br.E_theta


def write_energy_csv(path, breakdowns: Sequence[EnergyBreakdown]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "nu", "v2", "w2", "z2", "e_nu", "E_theta"])
        for br in breakdowns:
            E = br.E_theta
            for i, nu in enumerate(br.nus):
                w.writerow([repr(br.t), int(nu), repr(float(br.v2[i])), repr(float(br.w2[i])),
                            repr(float(br.z2[i])), repr(float(br.e[i])), repr(E)])
