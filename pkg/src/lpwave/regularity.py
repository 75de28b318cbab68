"""Lipschitz, Zygmund and log-Lipschitz moduli, measured directly and dyadically.

Also the time mollifier ``u_eps = rho_eps * u`` with its first two derivatives,
obtained by differentiating the kernel rather than the smoothed samples.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dyadic import GridFunction, dyadic_block, j_max, low_pass

__all__ = [
    "RegularityReport",
    "MollifierConfig",
    "ResolutionError",
    "direct_seminorms",
    "dyadic_indicators",
    "affine_trend",
    "spread",
    "is_bounded_profile",
    "bump",
    "mollify",
    "mollify_function",
    "mollifier_estimate_check",
    "MollifierTable",
    "weierstrass",
    "triangle_wave",
    "write_dyadic_csv",
    "write_mollifier_csv",
]


class ResolutionError(ValueError):
    """Smoothing width too small for the sampling grid."""


@dataclass
class RegularityReport:
    lip_direct: float | None = None
    zyg_direct: float | None = None
    loglip_direct: float | None = None
    lip_dyadic: float | None = None
    zyg_dyadic: float | None = None
    loglip_dyadic: float | None = None
    # direct: rows (y, lip_q, zyg_q, loglip_q); dyadic: rows (j, grad_Sj_inf, 2^j_Dj_inf, loglip_ratio)
    per_scale_profile: list[tuple] = field(default_factory=list)
    per_j_profile: list[tuple] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        idx = {"grad_Sj_inf": 1, "2^j_Dj_inf": 2, "loglip_ratio": 3}[name]
        return np.array([row[idx] for row in self.per_j_profile])

    @property
    def js(self) -> np.ndarray:
        return np.array([row[0] for row in self.per_j_profile])


def direct_seminorms(u, spacing: float, scale_range: tuple[float, float] = (0.0, 1.0),
                     periodic: bool = True) -> RegularityReport:
    """Difference-quotient suprema over dyadic shifts ``y = 2^m * spacing``.

    Parameters
    ----------
    u : array_like
        Samples of a 1-D function on a uniform grid.
    spacing : float
        Grid spacing.
    scale_range : (float, float)
        Shifts outside ``[lo, hi]`` are skipped; the log-Lipschitz quotient
        additionally uses only ``y <= 1``.
    periodic : bool
        Wrap around the ends (torus samples). Otherwise only interior points
        with both neighbours available are used.
    """
    u = np.asarray(u)
    lo, hi = scale_range
    lo = max(lo, spacing)
    shifts = []
    k = 1
    while k * spacing <= hi * (1 + 1e-12) and k < u.size:
        if k * spacing >= lo * (1 - 1e-12):
            shifts.append(k)
        k *= 2
    if not shifts:
        raise ValueError(f"no dyadic shift of spacing {spacing} lies in {scale_range}")

    rows = []
    for k in shifts:
        y = k * spacing
        if periodic:
            fwd = np.roll(u, -k) - u
            second = np.roll(u, -k) + np.roll(u, k) - 2 * u
        else:
            if 2 * k >= u.size:
                continue
            fwd = u[k:] - u[:-k]
            second = u[2 * k:] + u[:-2 * k] - 2 * u[k:-k]
        lq = float(np.max(np.abs(fwd))) / y
        zq = float(np.max(np.abs(second))) / y
        llq = lq / (1 + math.log(1 / y)) if y <= 1 else float("nan")
        rows.append((y, lq, zq, llq))
    ll = [r[3] for r in rows if not math.isnan(r[3])]
    return RegularityReport(
        lip_direct=max(r[1] for r in rows),
        zyg_direct=max(r[2] for r in rows),
        loglip_direct=max(ll) if ll else None,
        per_scale_profile=rows,
    )


def _grad_sup(u: GridFunction) -> float:
    g2 = sum(np.abs(u.derivative(axis=a).samples) ** 2 for a in range(u.dim))
    return float(np.sqrt(g2.max()))


def dyadic_indicators(u: GridFunction, top: int | None = None) -> RegularityReport:
    """Per-block table of ``||grad S_j u||_inf``, ``2^j ||Delta_j u||_inf`` and
    ``||grad S_j u||_inf / (j+1)``, with suprema over ``j <= top``."""
    jm = j_max(u.n) if top is None else top
    rows = []
    for j in range(jm + 1):
        g = _grad_sup(low_pass(u, j))
        z = 2.0**j * dyadic_block(u, j).sup()
        rows.append((j, g, z, g / (j + 1)))
    return RegularityReport(
        lip_dyadic=max(r[1] for r in rows),
        zyg_dyadic=max(r[2] for r in rows),
        loglip_dyadic=max(r[3] for r in rows),
        per_j_profile=rows,
    )


def affine_trend(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope and coefficient of determination R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    return float(slope), r2


def spread(values: Sequence[float]) -> float:
    """max/min of a positive profile; inf if any entry vanishes."""
    v = np.abs(np.asarray(values, dtype=float))
    if v.min() <= 0:
        return float("inf")
    return float(v.max() / v.min())


def is_bounded_profile(values: Sequence[float], index: Sequence[float] | None = None,
                       max_spread: float = 10.0, r2_growth: float = 0.9,
                       rel_slope: float = 0.05) -> bool:
    """Finite-grid surrogate for ``sup_j < inf``.

    A profile counts as bounded when its spread is below ``max_spread`` and it
    shows no significant affine growth (R^2 above ``r2_growth`` together with
    a slope above ``rel_slope`` times the mean level).
    """
    v = np.asarray(values, dtype=float)
    idx = np.arange(v.size) if index is None else np.asarray(index, dtype=float)
    if spread(v) >= max_spread:
        return False
    slope, r2 = affine_trend(idx, v)
    return not (r2 > r2_growth and slope > rel_slope * float(np.mean(np.abs(v))))


def weierstrass(x, terms: int, kind: str = "sin", amplitude: float = 1.0, first: int = 1):
    """Lacunary series ``amplitude * sum_{h=first}^{terms} 2^-h trig(2^h x)``.

    The sine version attains the partial-sum bound ``||(S_j u)'||_inf = j``
    at x = 0, which makes the non-Lipschitz growth exactly affine.
    """
    trig = {"sin": np.sin, "cos": np.cos}[kind]
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for h in range(first, terms + 1):
        out = out + 2.0**-h * trig(2.0**h * x)
    return amplitude * out


def triangle_wave(x, slope: float = 1.0):
    """2 pi-periodic triangle wave with |derivative| = slope, values in [0, slope*pi]."""
    x = np.asarray(x, dtype=float)
    return slope * np.abs(np.mod(x + np.pi, 2 * np.pi) - np.pi)


# --- mollifier -----------------------------------------------------------------

def _bump_raw(t, order: int = 0):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = np.abs(t) < 1
    tm = t[m]
    q = 1.0 - tm**2
    base = np.exp(-1.0 / q)
    if order == 0:
        out[m] = base
    elif order == 1:
        out[m] = base * (-2 * tm / q**2)
    elif order == 2:
        d1 = -2 * tm / q**2
        d2 = -(2 + 6 * tm**2) / q**3
        out[m] = base * (d1**2 + d2)
    else:
        raise ValueError(f"kernel derivative order must be 0, 1 or 2, got {order}")
    return out


_S = np.linspace(-1, 1, 40001)
_BUMP_MASS = float(np.trapezoid(_bump_raw(_S), _S))


def bump(t, order: int = 0):
    """Unit-mass kernel ``c exp(-1/(1-t^2))`` on (-1, 1) and its derivatives."""
    return _bump_raw(t, order) / _BUMP_MASS


@dataclass(frozen=True)
class MollifierConfig:
    epsilon: float
    kernel: Callable = bump

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")


def _weights(offsets: np.ndarray, eps: float, order: int, kernel: Callable) -> np.ndarray:
    # Quadrature weights for rho_eps^(order)(offset) ds, normalised on moments so
    # order 0 is exact on constants, order 1 on linears, order 2 on quadratics.
    w = kernel(offsets / eps, order) / eps ** (order + 1)
    if order == 0:
        return w / w.sum()
    if order == 1:
        return w / -np.sum(w * offsets)
    # the sampled rho'' need not sum to zero; remove the leak onto constants
    w0 = kernel(offsets / eps, 0)
    w = w - w0 * (w.sum() / w0.sum())
    return w / np.sum(w * offsets**2 / 2)


def mollify(u, spacing: float, cfg: MollifierConfig, order: int = 0, periodic: bool = True) -> np.ndarray:
    """Discrete ``rho_eps^(order) * u`` for samples with the given spacing.

    ``order`` 1 and 2 return ``u_eps'`` and ``u_eps''`` by convolving with the
    differentiated kernel.

    Raises
    ------
    ResolutionError
        If epsilon is below two grid spacings.
    """
    eps = cfg.epsilon
    if eps < 2 * spacing * (1 - 1e-12):
        raise ResolutionError(f"epsilon={eps} below two grid spacings ({2 * spacing})")
    u = np.asarray(u)
    half = int(math.floor(eps / spacing))
    offs = spacing * np.arange(-half, half + 1)
    w = _weights(offs, eps, order, cfg.kernel)
    if periodic:
        if w.size > u.size:
            raise ResolutionError("kernel wider than the periodic sample")
        ker = np.zeros(u.size)
        idx = np.arange(-half, half + 1) % u.size
        np.add.at(ker, idx, w)
        out = np.fft.ifft(np.fft.fft(u) * np.fft.fft(ker))
        return out.real if np.isrealobj(u) else out
    return np.convolve(u, w, mode="same")


def mollify_function(f: Callable, t, epsilon: float, order: int = 0, nodes: int = 513,
                     kernel: Callable = bump) -> np.ndarray:
    """``(rho_eps^(order) * f)(t)`` for a callable ``f`` by quadrature on ``nodes`` points.

    ``u_eps(t) = int rho_eps(s) f(t - s) ds``; ``t`` may be an array.
    """
    if nodes < 17:
        raise ResolutionError(f"need at least 17 quadrature nodes, got {nodes}")
    t = np.asarray(t, dtype=float)
    s = np.linspace(-epsilon, epsilon, nodes)
    w = _weights(s, epsilon, order, kernel)
    vals = f(t[..., None] - s)
    return vals @ w


@dataclass
class MollifierTable:
    rows: list[tuple]  # (nu, eps, r1, r2, r3)

    def column(self, k: int) -> np.ndarray:
        return np.array([r[k] for r in self.rows])

    @property
    def spreads(self) -> tuple[float, float, float]:
        return spread(self.column(2)), spread(self.column(3)), spread(self.column(4))


def mollifier_estimate_check(u, spacing: float, nu_range: Sequence[int] = range(2, 11),
                             periodic: bool = True) -> MollifierTable:
    """Ratios ``sup|u_eps - u|/eps``, ``sup|u_eps'|/(1 + nu log 2)``,
    ``sup|u_eps''| eps`` for ``eps = 2^-nu``."""
    u = np.asarray(u)
    rows = []
    for nu in nu_range:
        cfg = MollifierConfig(2.0**-nu)
        eps = cfg.epsilon
        u0 = mollify(u, spacing, cfg, 0, periodic)
        u1 = mollify(u, spacing, cfg, 1, periodic)
        u2 = mollify(u, spacing, cfg, 2, periodic)
        r1 = float(np.max(np.abs(u0 - u))) / eps
        r2 = float(np.max(np.abs(u1))) / (1 + nu * math.log(2))
        r3 = float(np.max(np.abs(u2))) * eps
        rows.append((nu, eps, r1, r2, r3))
    return MollifierTable(rows)


def write_dyadic_csv(path, report: RegularityReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "grad_Sj_inf", "2^j_Dj_inf", "loglip_ratio"])
        for j, g, z, ll in report.per_j_profile:
            w.writerow([j, repr(g), repr(z), repr(ll)])


def write_mollifier_csv(path, table: MollifierTable) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["nu", "eps", "r1", "r2", "r3"])
        for row in table.rows:
            w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
