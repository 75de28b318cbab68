"""Coefficient fields ``a_jk(t, x)`` for strictly hyperbolic wave operators.

Every generator produces the separable form

    a_jk(t, x) = a(t) * (1 + mu_x * s(x)) * M_jk

with a 2 pi-periodic time profile ``a``, a Lipschitz space profile ``s`` with
values in [-1, 1] and a constant symmetric positive definite matrix ``M``.
Symmetry is therefore exact, and ellipticity reduces to a product bound.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .dyadic import grid_points
from .regularity import affine_trend, direct_seminorms, mollify, mollify_function, MollifierConfig, triangle_wave

__all__ = [
    "CLASS_TAGS",
    "EllipticityError",
    "RoughCoefficient",
    "HypothesisResult",
    "ValidationReport",
    "make_constant",
    "make_smooth",
    "make_zygmund_in_t",
    "make_loglip_in_t",
    "make_lipschitz",
    "make_resonant",
    "coefficient_from_config",
    "validate",
    "write_validation_csv",
]

CLASS_TAGS = ("smooth", "lipschitz_t", "zygmund_t", "loglip_t", "resonant_t")

# Hypotheses each class is built to satisfy (True) or to violate (False).
CLAIMS = {
    "smooth": {"zygmund_t": True, "lipschitz_x": True, "lipschitz_t": True},
    "lipschitz_t": {"zygmund_t": True, "lipschitz_x": True, "lipschitz_t": True},
    "zygmund_t": {"zygmund_t": True, "lipschitz_x": True, "lipschitz_t": False},
    "loglip_t": {"zygmund_t": False, "lipschitz_x": True, "lipschitz_t": False},
    "resonant_t": {"zygmund_t": False, "lipschitz_x": True, "lipschitz_t": True},
}

_T_PROBE = 2**14  # time samples per period for generator-side checks


class EllipticityError(ValueError):
    """The coefficient leaves the band ``[lambda0, Lambda0]`` at a probe point."""


def _space_profile(name: str, dim: int) -> tuple[Callable, float]:
    # Returns s and its Lipschitz constant (Euclidean gradient bound).
    if name == "none":
        one = lambda x: np.zeros_like(np.asarray(x, dtype=float))  # noqa: E731
        base, lip = one, 0.0
    elif name == "cos":
        base, lip = np.cos, 1.0
    elif name == "triangle":
        base = lambda x: 2.0 / np.pi * triangle_wave(x) - 1.0  # noqa: E731
        lip = 2.0 / np.pi
    else:
        raise ValueError(f"unknown space profile {name!r}")
    if dim == 1:
        return (lambda x: base(x)), lip
    # average of the two axes keeps values in [-1, 1]
    return (lambda x, y: 0.5 * (base(x) + base(y))), lip / math.sqrt(2.0)


@dataclass(frozen=True)
class RoughCoefficient:
    """Separable symmetric coefficient field with declared budgets.

    Attributes
    ----------
    time_profile : callable
        ``a(t)``, vectorized and 2 pi-periodic.
    space_profile : callable
        ``s(x)`` in 1-D, ``s(x, y)`` in 2-D, values in [-1, 1].
    C0 : float
        Declared Zygmund-in-t budget, ``|a(t+tau)+a(t-tau)-2a(t)| <= C0 |tau|``.
    C1 : float
        Declared Lipschitz-in-x budget, ``|a(t,x+y)-a(t,x)| <= C1 |y|``.
    """

    dim: int
    time_profile: Callable
    space_profile: Callable
    mu_x: float
    matrix: np.ndarray
    lambda0: float
    Lambda0: float
    C0: float
    C1: float
    class_tag: str
    space_lip: float = 0.0
    params: dict = field(default_factory=dict)

    def time_values(self, t):
        return np.asarray(self.time_profile(np.asarray(t, dtype=float)), dtype=float)

    def space_factor(self, *x):
        return 1.0 + self.mu_x * np.asarray(self.space_profile(*x), dtype=float)

    def scalar(self, t, *x):
        """``a(t) (1 + mu_x s(x))``; the entries are this times ``M``."""
        return self.time_values(t) * self.space_factor(*x)

    def entries(self, t, *x) -> np.ndarray:
        """Array of shape ``(dim, dim) + broadcast shape`` with ``a_jk(t, x)``."""
        sc = np.asarray(self.scalar(t, *x))
        return self.matrix.reshape(self.matrix.shape + (1,) * sc.ndim) * sc

    def mollified_time(self, t, epsilon: float, order: int = 0, nodes: int = 513):
        """``d^order/dt^order (rho_eps * a)(t)`` by kernel quadrature."""
        return mollify_function(self.time_profile, t, epsilon, order=order, nodes=nodes)

    def mollified_time_grid(self, nt: int, epsilon: float, order: int = 0) -> np.ndarray:
        """Same on the periodic grid ``2 pi k / nt`` via discrete convolution."""
        tt = grid_points(nt)
        return mollify(self.time_values(tt), 2 * np.pi / nt, MollifierConfig(epsilon), order)

    @property
    def max_entry(self) -> float:
        return float(np.max(np.abs(self.matrix)))


def _matrix(dim: int, matrix) -> np.ndarray:
    m = np.eye(dim) if matrix is None else np.array(matrix, dtype=float)
    if m.shape != (dim, dim):
        raise ValueError(f"matrix must be {dim}x{dim}, got {m.shape}")
    if not np.array_equal(m, m.T):
        raise ValueError("matrix must be symmetric")
    return m


def _ellipticity_bounds(time_profile, mu_x, m) -> tuple[float, float, float, float]:
    tt = grid_points(_T_PROBE)
    a = np.asarray(time_profile(tt), dtype=float)
    ev = np.linalg.eigvalsh(m)
    lo = a.min() * (1 - mu_x) * ev[0]
    hi = a.max() * (1 + mu_x) * ev[-1]
    return float(lo), float(hi), float(tt[np.argmin(a)]), float(tt[np.argmax(a)])


def _build(dim, time_profile, mu_x, space, matrix, lambda0, Lambda0, C0, sup_a, class_tag, params):
    if not 0 <= mu_x < 1:
        raise ValueError(f"mu_x must lie in [0, 1), got {mu_x}")
    m = _matrix(dim, matrix)
    s, lip = _space_profile(space, dim)
    lo, hi, t_lo, t_hi = _ellipticity_bounds(time_profile, mu_x, m)
    if lambda0 is None:
        lambda0 = lo
    if Lambda0 is None:
        Lambda0 = hi
    if lambda0 <= 0:
        raise EllipticityError(f"lambda0 must be positive, got {lambda0}")
    if lo < lambda0 * (1 - 1e-12):
        raise EllipticityError(f"quadratic form {lo:.6g} < lambda0={lambda0} at t={t_lo:.6g}, s(x)=-1")
    if hi > Lambda0 * (1 + 1e-12):
        raise EllipticityError(f"quadratic form {hi:.6g} > Lambda0={Lambda0} at t={t_hi:.6g}, s(x)=+1")
    C1 = sup_a * mu_x * lip * float(np.max(np.abs(m)))
    return RoughCoefficient(
        dim=dim, time_profile=time_profile, space_profile=s, mu_x=mu_x, matrix=m,
        lambda0=float(lambda0), Lambda0=float(Lambda0), C0=float(C0), C1=float(C1),
        class_tag=class_tag, space_lip=lip, params=dict(params, space=space),
    )


def _zyg_factor(mu_x, matrix, dim):
    return (1 + mu_x) * float(np.max(np.abs(_matrix(dim, matrix))))


def make_constant(value: float = 1.0, dim: int = 1, matrix=None) -> RoughCoefficient:
    """``a_jk = value * M_jk``; all budgets zero."""
    prof = lambda t: np.full(np.shape(t), float(value))  # noqa: E731
    return _build(dim, prof, 0.0, "none", matrix, None, None, 0.0, abs(value), "smooth",
                  {"value": value})


def make_smooth(base: float = 2.0, amplitude: float = 0.5, mu_x: float = 0.1, dim: int = 1,
                space: str = "cos", matrix=None, lambda0=None, Lambda0=None) -> RoughCoefficient:
    """``a(t) = base + amplitude sin t``."""
    prof = lambda t: base + amplitude * np.sin(t)  # noqa: E731
    # |sin(t+tau)+sin(t-tau)-2 sin t| <= tau^2 <= tau for tau <= 1
    c0 = abs(amplitude) * _zyg_factor(mu_x, matrix, dim)
    return _build(dim, prof, mu_x, space, matrix, lambda0, Lambda0, c0, base + abs(amplitude),
                  "smooth", {"base": base, "amplitude": amplitude})


def _lacunary_zygmund_bound(J: int) -> float:
    # sup over tau in (0, 1] of sum_j 2^-j min(4, (2^j tau)^2) / tau, which
    # dominates the second-difference quotient of sum_j 2^-j cos(2^j t).
    if J == 0:
        return 0.0
    tau = np.logspace(-12, 0, 4001)
    scale = 2.0 ** np.arange(1, J + 1)
    vals = np.minimum(4.0, (scale[:, None] * tau) ** 2) / scale[:, None]
    return float(np.max(vals.sum(axis=0) / tau))


def make_zygmund_in_t(J: int = 10, amplitude: float = 0.5, base: float = 2.0, mu_x: float = 0.1,
                      dim: int = 1, space: str = "cos", matrix=None, lambda0=None,
                      Lambda0=None) -> RoughCoefficient:
    """Lacunary witness ``a(t) = base + amplitude sum_{j=1}^J 2^-j cos(2^j t)``.

    Zygmund in t uniformly in J, while its Lipschitz constant grows like J.

    Raises
    ------
    EllipticityError
        If ``base - amplitude (1 - 2^-J)`` scaled by the space factor falls
        below ``lambda0``.
    """
    if J < 0:
        raise ValueError(f"J must be >= 0, got {J}")
    scale = 2.0 ** np.arange(1, J + 1)

    def prof(t):
        t = np.asarray(t, dtype=float)
        return base + amplitude * np.tensordot(1.0 / scale, np.cos(np.multiply.outer(scale, t)), axes=1)

    c0 = abs(amplitude) * _lacunary_zygmund_bound(J) * _zyg_factor(mu_x, matrix, dim)
    sup_a = base + abs(amplitude) * (1 - 2.0**-J)
    return _build(dim, prof, mu_x, space, matrix, lambda0, Lambda0, c0, sup_a, "zygmund_t",
                  {"J": J, "base": base, "amplitude": amplitude})


def _loglip_bump(t):
    m = np.minimum(np.abs(np.sin(np.asarray(t, dtype=float) / 2)), 0.5)
    safe = np.where(m > 0, m, 1.0)
    return np.where(m > 0, m * np.log(np.e / safe), 0.0)


def make_loglip_in_t(amplitude: float = 0.5, base: float = 2.0, mu_x: float = 0.1, dim: int = 1,
                     space: str = "cos", matrix=None, lambda0=None, Lambda0=None,
                     zyg_budget: float | None = None) -> RoughCoefficient:
    """``a(t) = base + amplitude m log(e/m)`` with ``m = min(|sin(t/2)|, 1/2)``.

    Log-Lipschitz but not Zygmund: the second-difference quotient at t = 0
    grows like ``log(1/tau)``. ``zyg_budget`` is the nominal Zygmund budget
    the coefficient is measured against (default ``8 * amplitude`` scaled).
    """
    prof = lambda t: base + amplitude * _loglip_bump(t)  # noqa: E731
    c0 = (8.0 * abs(amplitude) if zyg_budget is None else zyg_budget) * _zyg_factor(mu_x, matrix, dim)
    sup_a = base + abs(amplitude) * 0.5 * math.log(2 * math.e)
    return _build(dim, prof, mu_x, space, matrix, lambda0, Lambda0, c0, sup_a, "loglip_t",
                  {"base": base, "amplitude": amplitude})


def make_lipschitz(slope: float = 0.25, base: float = 1.5, mu_x: float = 0.1, dim: int = 1,
                   space: str = "cos", matrix=None, lambda0=None, Lambda0=None) -> RoughCoefficient:
    """Triangle wave in time, ``a(t) = base + triangle(t)`` with ``|a'| = slope``."""
    prof = lambda t: base + triangle_wave(t, slope)  # noqa: E731
    # second difference of a Lipschitz function: |.| <= 2 slope tau
    c0 = 2.0 * abs(slope) * _zyg_factor(mu_x, matrix, dim)
    sup_a = base + abs(slope) * np.pi
    return _build(dim, prof, mu_x, space, matrix, lambda0, Lambda0, c0, sup_a, "lipschitz_t",
                  {"slope": slope, "base": base})


def make_resonant(nu: int, delta: float = 0.3, base: float = 2.0, c: float = 1.0, mu_x: float = 0.1,
                  dim: int = 1, space: str = "cos", matrix=None, lambda0=None, Lambda0=None,
                  zyg_budget: float | None = None) -> RoughCoefficient:
    """``a(t) = base + delta sin(c 2^nu t)``, oscillating at the block-nu time scale.

    Smooth for each nu, but its Zygmund constant grows like ``2^nu``; it is
    measured against the nu-independent budget ``zyg_budget`` (default
    ``4 * delta`` scaled). ``c`` must be a positive integer multiple of
    ``2^-nu`` for the profile to stay 2 pi-periodic; non-periodic values are
    accepted for the simulator, which never wraps in time.
    """
    freq = c * 2.0**nu
    prof = lambda t: base + delta * np.sin(freq * np.asarray(t, dtype=float))  # noqa: E731
    c0 = (4.0 * abs(delta) if zyg_budget is None else zyg_budget) * _zyg_factor(mu_x, matrix, dim)
    return _build(dim, prof, mu_x, space, matrix, lambda0, Lambda0, c0, base + abs(delta),
                  "resonant_t", {"nu": nu, "delta": delta, "base": base, "c": c})


_CONFIG_KEYS = {"class_tag", "base", "amplitude", "J", "lambda0", "Lambda0", "mu_x", "seed",
                "dim", "space", "slope", "nu", "delta", "c", "value"}


def coefficient_from_config(cfg: Mapping[str, str | float]) -> RoughCoefficient:
    """Build a coefficient from a flat key-value mapping.

    Keys: ``class_tag`` (required), ``base``, ``amplitude``, ``J``, ``lambda0``,
    ``Lambda0``, ``mu_x``, ``seed``, ``dim``, ``space``, ``slope``, ``nu``,
    ``delta``, ``c``, ``value``. Unknown keys raise ``KeyError``.
    """
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise KeyError(f"unknown coefficient key(s): {', '.join(sorted(unknown))}")
    tag = str(cfg.get("class_tag", "zygmund_t"))
    f = lambda k, d: float(cfg[k]) if k in cfg else d  # noqa: E731
    common = dict(mu_x=f("mu_x", 0.1), dim=int(f("dim", 1)), space=str(cfg.get("space", "cos")),
                  lambda0=f("lambda0", None), Lambda0=f("Lambda0", None))
    if tag == "smooth":
        if "value" in cfg:
            return make_constant(f("value", 1.0), dim=common["dim"])
        return make_smooth(base=f("base", 2.0), amplitude=f("amplitude", 0.5), **common)
    if tag == "zygmund_t":
        return make_zygmund_in_t(J=int(f("J", 10)), amplitude=f("amplitude", 0.5), base=f("base", 2.0), **common)
    if tag == "loglip_t":
        return make_loglip_in_t(amplitude=f("amplitude", 0.5), base=f("base", 2.0), **common)
    if tag == "lipschitz_t":
        return make_lipschitz(slope=f("slope", 0.25), base=f("base", 1.5), **common)
    if tag == "resonant_t":
        return make_resonant(nu=int(f("nu", 6)), delta=f("delta", 0.3), base=f("base", 2.0),
                             c=f("c", 1.0), **common)
    raise ValueError(f"unknown class_tag {tag!r}; expected one of {CLASS_TAGS}")


# --- validation ------------------------------------------------------------------

@dataclass(frozen=True)
class HypothesisResult:
    name: str
    passed: bool
    measured: float
    budget: float
    witness: tuple


@dataclass
class ValidationReport:
    class_tag: str
    results: dict[str, HypothesisResult]

    def __getitem__(self, name: str) -> HypothesisResult:
        return self.results[name]

    def matches_claims(self) -> bool:
        """True when every claimed hypothesis passes and every disclaimed one fails."""
        ok = self.results["symmetry"].passed and self.results["ellipticity"].passed
        for name, expected in CLAIMS[self.class_tag].items():
            ok = ok and self.results[name].passed == expected
        return ok


def _grows(scales: np.ndarray, values: np.ndarray) -> bool:
    # Significant affine growth in log2(1/scale).
    if values.size < 3 or np.allclose(values, values[0]):
        return False
    slope, r2 = affine_trend(-np.log2(scales), values)
    return r2 > 0.9 and slope > 0.05 * float(np.mean(np.abs(values)))


def validate(c: RoughCoefficient, probe_density: int = 16, seed: int = 0, depth: int = 10) -> ValidationReport:
    """Check symmetry, ellipticity, Zygmund-in-t, Lipschitz-in-x and Lipschitz-in-t.

    Parameters
    ----------
    probe_density : int
        Number of x probe points per axis and of random directions for xi.
    seed : int
        Seeds the random xi directions; the report is deterministic given it.
    depth : int
        Shifts ``tau, |y| = 2^-m`` for ``m = 0..depth`` (time quotients are
        also taken on all finer grid shifts for the Zygmund sup).
    """
    rng = np.random.default_rng(seed)
    xs = grid_points(probe_density)
    tt = grid_points(_T_PROBE)
    dt = 2 * np.pi / _T_PROBE
    results: dict[str, HypothesisResult] = {}

    # symmetry and ellipticity on (t, x, xi) probes
    if c.dim == 1:
        xgrid = (xs,)
    else:
        xgrid = tuple(np.meshgrid(xs, xs, indexing="ij"))
    tp = tt[:: _T_PROBE // 256]
    ent = c.entries(tp[:, None] if c.dim == 1 else tp[:, None, None], *xgrid)
    asym = float(np.max(np.abs(ent - np.swapaxes(ent, 0, 1))))
    results["symmetry"] = HypothesisResult("symmetry", asym == 0.0, asym, 0.0, ())

    xi = rng.standard_normal((probe_density, c.dim))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    a_t = c.time_values(tt)
    sf = c.space_factor(*xgrid).ravel()
    ray = np.einsum("pj,jk,pk->p", xi, c.matrix, xi)
    lo_t, hi_t = int(np.argmin(a_t)), int(np.argmax(a_t))
    lo_x, hi_x = int(np.argmin(sf)), int(np.argmax(sf))
    q_lo = a_t[lo_t] * sf[lo_x] * ray.min()
    q_hi = a_t[hi_t] * sf[hi_x] * ray.max()
    ell_ok = q_lo >= c.lambda0 * (1 - 1e-12) and q_hi <= c.Lambda0 * (1 + 1e-12)
    bad = (tt[lo_t], lo_x, int(np.argmin(ray))) if q_lo < c.lambda0 * (1 - 1e-12) else (tt[hi_t], hi_x, int(np.argmax(ray)))
    results["ellipticity"] = HypothesisResult("ellipticity", bool(ell_ok), float(q_lo), c.lambda0,
                                              bad if not ell_ok else ())

    # time regularity on the full periodic time grid; the space factor only scales it
    sf_max = float(np.max(np.abs(sf))) * c.max_entry
    rep_t = direct_seminorms(a_t, dt, scale_range=(0.0, 1.0))
    prof = np.array(rep_t.per_scale_profile)
    zyg_meas = float(prof[:, 2].max()) * sf_max
    coarse = prof[prof[:, 0] >= 2.0**-depth * (1 - 1e-9)]
    fine = prof[prof[:, 0] <= 2.0**-4 * (1 + 1e-9)]
    zyg_grows = _grows(fine[:, 0], fine[:, 2])
    k_zyg = int(np.argmax(prof[:, 2]))
    results["zygmund_t"] = HypothesisResult(
        "zygmund_t", bool(zyg_meas <= c.C0 * (1 + 1e-9) and not zyg_grows), zyg_meas, c.C0,
        (float(prof[k_zyg, 0]),))
    lip_t = float(coarse[:, 1].max()) * sf_max
    lip_grows = _grows(coarse[coarse[:, 0] <= 0.5][:, 0], coarse[coarse[:, 0] <= 0.5][:, 1])
    results["lipschitz_t"] = HypothesisResult("lipschitz_t", not lip_grows, lip_t, float("nan"),
                                              (float(coarse[int(np.argmax(coarse[:, 1])), 0]),))

    # Lipschitz in x: first differences of the space factor along each axis
    nx = 2**12
    xf = grid_points(nx)
    if c.dim == 1:
        s_line = c.space_factor(xf)
    else:
        s_line = c.space_factor(xf, np.zeros_like(xf))
    rep_x = direct_seminorms(s_line, 2 * np.pi / nx, scale_range=(0.0, 1.0))
    px = np.array(rep_x.per_scale_profile)
    a_sup = float(np.max(np.abs(a_t))) * c.max_entry
    lip_x = float(px[:, 1].max()) * a_sup
    results["lipschitz_x"] = HypothesisResult(
        "lipschitz_x", bool(lip_x <= c.C1 * (1 + 1e-9) + 1e-15), lip_x, c.C1,
        (float(px[int(np.argmax(px[:, 1])), 0]),))
    return ValidationReport(class_tag=c.class_tag, results=results)


def write_validation_csv(path, report: ValidationReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hypothesis", "passed", "measured", "budget", "witness"])
        for r in report.results.values():
            w.writerow([r.name, int(r.passed), repr(r.measured), repr(r.budget),
                        " ".join(repr(float(v)) for v in r.witness)])
