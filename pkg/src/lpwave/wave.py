"""Pseudospectral leapfrog solver for ``d_t^2 u = sum d_j(a_jk d_k u) + f`` on the torus.

Spatial derivatives are spectral; products with the coefficient are
dealiased by the 2/3 rule. Time stepping is drift-kick-drift leapfrog with
the coefficient sampled at half steps, which is second order and exactly
time-reversible.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .coefficients import RoughCoefficient, make_constant, make_resonant, make_zygmund_in_t
from .dyadic import GridFunction, block_multiplier, block_support, grid_points, save_grid_function, sobolev_norm, wavenumbers
from .energy import EnergyConfig, energy_rate
from .regularity import affine_trend

__all__ = [
    "NumericalInstability",
    "SimConfig",
    "Trajectory",
    "GronwallReport",
    "LossDiagnostic",
    "SpatialOperator",
    "step",
    "run",
    "gronwall_check",
    "wave_packet",
    "amplification",
    "amplification_experiment",
    "family",
    "write_trajectory_csv",
    "write_amplification_csv",
    "save_checkpoint",
]

BLOWUP = 1e10


class NumericalInstability(RuntimeError):
    """Solution norm grew beyond the blow-up threshold."""


class SpatialOperator:
    """``u -> sum_jk M_jk d_j(a(t) s(x) d_k u)`` with 2/3-rule dealiasing."""

    def __init__(self, coef: RoughCoefficient, n: int):
        self.coef = coef
        self.n = n
        self.dim = coef.dim
        ks = wavenumbers(n, self.dim)
        mask = np.ones((n,) * self.dim, dtype=bool)
        for k in ks:
            mask &= np.abs(k) < n / 3
        self.mask = mask
        self.ik = [1j * k * mask for k in ks]
        x = grid_points(n)
        if self.dim == 1:
            self.space = coef.space_factor(x)
        else:
            xx, yy = np.meshgrid(x, x, indexing="ij")
            self.space = coef.space_factor(xx, yy)

    def __call__(self, u: np.ndarray, t: float) -> np.ndarray:
        a = float(self.coef.time_values(t)) * self.space
        uh = np.fft.fftn(u)
        grads = [np.fft.ifftn(ik * uh) for ik in self.ik]
        out = np.zeros(uh.shape, dtype=complex)
        m = self.coef.matrix
        for j in range(self.dim):
            flux = sum(m[j, k] * grads[k] for k in range(self.dim) if m[j, k] != 0)
            if isinstance(flux, int):
                continue
            out += self.ik[j] * np.fft.fftn(a * flux)
        return np.fft.ifftn(out)


def step(state: tuple[np.ndarray, np.ndarray], t: float, dt: float, op: SpatialOperator,
         f: Callable[[float], np.ndarray] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """One drift-kick-drift step from t to t + dt; ``state = (u, d_t u)``.

    Negative ``dt`` runs the same scheme backwards and undoes a forward step.
    """
    u, v = state
    th = t + dt / 2
    uh = u + 0.5 * dt * v
    acc = op(uh, th)
    if f is not None:
        acc = acc + f(th)
    v_new = v + dt * acc
    return uh + 0.5 * dt * v_new, v_new


@dataclass
class SimConfig:
    """Simulation setup; ``dt=None`` picks the CFL step ``cfl_factor (2 pi/N) / sqrt(Lambda0)``.

    ``forcing(t)`` returns samples of f on the grid. ``energy`` turns on
    E_theta tracking with its exact time derivative at every snapshot.
    """

    coef: RoughCoefficient
    u0: GridFunction
    u1: GridFunction
    T: float = 1.0
    dt: float | None = None
    forcing: Callable[[float], np.ndarray] | None = None
    theta: float = 0.0
    cadence: int = 1
    cfl_factor: float = 0.5
    energy: EnergyConfig | None = None
    keep_snapshots: bool = False

    @property
    def n(self) -> int:
        return self.u0.n

    def cfl_limit(self) -> float:
        return self.cfl_factor * (2 * np.pi / self.n) / math.sqrt(self.coef.Lambda0)

    def steps(self) -> tuple[int, float]:
        """Number of steps and the step that lands exactly on T."""
        limit = self.cfl_limit()
        dt = limit if self.dt is None else self.dt
        if dt > limit * (1 + 1e-12):
            raise ValueError(f"dt={dt} violates the CFL bound {limit}")
        count = max(1, int(math.ceil(self.T / dt - 1e-9)))
        return count, self.T / count


@dataclass
class Trajectory:
    t: np.ndarray
    u_norm: np.ndarray  # ||u||_{H^{1-theta}}
    ut_norm: np.ndarray  # ||d_t u||_{H^{-theta}}
    lu_norm: np.ndarray  # ||L u||_{H^{-theta}} = ||f||_{H^{-theta}}
    E_theta: np.ndarray | None = None
    dE_dt: np.ndarray | None = None
    tail: np.ndarray | None = None
    snapshots: list[tuple[float, GridFunction, GridFunction]] = field(default_factory=list)
    final: tuple[GridFunction, GridFunction] | None = None
    theta: float = 0.0


def run(cfg: SimConfig) -> Trajectory:
    """Integrate to ``cfg.T``, recording norm traces every ``cfg.cadence`` steps.

    Raises
    ------
    NumericalInstability
        If the solution exceeds ``1e10`` times its initial size.
    """
    op = SpatialOperator(cfg.coef, cfg.n)
    count, dt = cfg.steps()
    u, v = cfg.u0.samples.copy(), cfg.u1.samples.copy()
    ref = max(np.max(np.abs(u)), np.max(np.abs(v)), 1e-300)
    rec: dict[str, list] = {k: [] for k in ("t", "u", "ut", "lu", "E", "dE", "tail")}
    snaps = []
    zero = np.zeros_like(u)

    def record(t, u, v):
        gu, gv = GridFunction(u), GridFunction(v)
        f = cfg.forcing(t) if cfg.forcing is not None else zero
        rec["t"].append(t)
        rec["u"].append(sobolev_norm(gu, 1 - cfg.theta))
        rec["ut"].append(sobolev_norm(gv, -cfg.theta))
        rec["lu"].append(sobolev_norm(GridFunction(f), -cfg.theta))
        if cfg.energy is not None:
            acc = GridFunction(op(u, t) + f)
            br, rate = energy_rate(gu, gv, acc, t, cfg.coef, cfg.energy)
            rec["E"].append(br.E_theta)
            rec["dE"].append(rate)
            rec["tail"].append(br.tail)
        if cfg.keep_snapshots:
            snaps.append((t, gu, gv))

    record(0.0, u, v)
    for i in range(count):
        t = i * dt
        u, v = step((u, v), t, dt, op, cfg.forcing)
        if not (np.max(np.abs(u)) < BLOWUP * ref):
            raise NumericalInstability(f"norm growth beyond {BLOWUP:g} at t={t + dt:.6g}")
        if (i + 1) % cfg.cadence == 0 or i + 1 == count:
            record((i + 1) * dt, u, v)
    arr = lambda k: np.array(rec[k]) if rec[k] else None  # noqa: E731
    return Trajectory(t=arr("t"), u_norm=arr("u"), ut_norm=arr("ut"), lu_norm=arr("lu"),
                      E_theta=arr("E"), dE_dt=arr("dE"), tail=arr("tail"), snapshots=snaps,
                      final=(GridFunction(u), GridFunction(v)), theta=cfg.theta)


@dataclass
class GronwallReport:
    C: float  # smallest C with dE/dt <= C (E + E^1/2 ||Lu||) on all samples
    p95: float
    ratios: np.ndarray
    skipped: int
    C_centered: float | None = None  # same fit from centred differences of the E trace


def gronwall_check(traj: Trajectory) -> GronwallReport:
    """Fit ``dE_theta/dt <= C (E_theta + E_theta^{1/2} ||Lu||_{H^-theta})``.

    Uses the exact time derivative recorded along the trajectory; samples
    with ``E_theta = 0`` are skipped. ``C_centered`` repeats the fit with
    centred differences of the recorded trace as a cross-check.
    """
    if traj.E_theta is None:
        raise ValueError("trajectory has no energy trace")
    E, F, dE = traj.E_theta, traj.lu_norm, traj.dE_dt
    ok = E > 0
    rhs = E[ok] + np.sqrt(E[ok]) * F[ok]
    ratios = dE[ok] / rhs
    C = max(float(ratios.max()), 0.0)
    p95 = float(np.percentile(ratios, 95))
    cc = None
    if E.size >= 3 and np.all(ok):
        fd = (E[2:] - E[:-2]) / (traj.t[2:] - traj.t[:-2])
        cc = max(float(np.max(fd / (E[1:-1] + np.sqrt(E[1:-1]) * F[1:-1]))), 0.0)
    return GronwallReport(C=C, p95=p95, ratios=ratios, skipped=int(np.sum(~ok)), C_centered=cc)


def wave_packet(n: int, nu: int, theta: float = 0.0, dim: int = 1, width: float = 1.0,
                center: float = np.pi) -> GridFunction:
    """Gaussian-enveloped wave at frequency ``2^nu``, restricted to block nu and
    normalized so ``||u0||_{H^{1-theta}} = 1``.

    The envelope ``exp((cos(x - center) - 1) / width^2)`` is the periodic
    Gaussian, so the spectrum decays faster than exponentially.

    Raises
    ------
    ValueError
        If block nu reaches the 2/3 dealiasing cut ``N/3``.
    """
    if block_support(nu)[1] >= n / 3:
        raise ValueError(f"block {nu} is not resolved below the dealiasing cut N/3 for N={n}")
    x = grid_points(n)
    if dim == 1:
        env = np.exp((np.cos(x - center) - 1) / width**2)
        raw = env * np.exp(1j * 2.0**nu * x)
    else:
        xx, yy = np.meshgrid(x, x, indexing="ij")
        env = np.exp((np.cos(xx - center) + np.cos(yy - center) - 2) / width**2)
        raw = env * np.exp(1j * 2.0**nu * xx)
    u = GridFunction(raw).apply_multiplier(block_multiplier(n, dim, nu))
    return u * (1.0 / sobolev_norm(u, 1 - theta))


@dataclass
class LossDiagnostic:
    nus: np.ndarray
    A: np.ndarray
    beta_hat: float
    r2: float

    @property
    def spread(self) -> float:
        return float(self.A.max() / self.A.min())

    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.A) > 0))


def family(tag: str, **kw) -> Callable[[int], RoughCoefficient]:
    """Coefficient family indexed by the data block nu.

    ``zygmund_t`` and ``smooth`` ignore nu; ``resonant_t`` oscillates at
    ``2 sqrt(base) 2^nu``, twice the data's time frequency.
    """
    if tag == "zygmund_t":
        c = make_zygmund_in_t(**kw)
        return lambda nu: c
    if tag == "smooth":
        c = make_constant(**kw)
        return lambda nu: c
    if tag == "resonant_t":
        base = kw.pop("base", 2.0)
        return lambda nu: make_resonant(nu, base=base, c=2 * math.sqrt(base), **kw)
    raise ValueError(f"no amplification family for {tag!r}")


def amplification(coef: RoughCoefficient, n: int, nu: int, theta: float = 0.0, T: float = 1.0,
                  dt: float | None = None, cadence: int = 1) -> float:
    """``sup_t ||u(t)||_{H^{1-theta}}`` for block-nu packet data (unit initial bracket, f = 0)."""
    u0 = wave_packet(n, nu, theta, coef.dim)
    cfg = SimConfig(coef=coef, u0=u0, u1=u0 * 0.0, T=T, dt=dt, theta=theta, cadence=cadence)
    traj = run(cfg)
    bracket0 = traj.u_norm[0] + traj.ut_norm[0]
    return float(traj.u_norm.max() / bracket0)


def amplification_experiment(fam: Callable[[int], RoughCoefficient] | str, nu_list: Sequence[int],
                             n: int | None = None, theta: float = 0.0, T: float = 1.0,
                             cadence: int = 1) -> LossDiagnostic:
    """A(nu) over ``nu_list`` and the least-squares slope of ``log2 A`` on nu.

    ``n=None`` uses ``N = 2^(nu+3)`` per block, the smallest grid whose 2/3
    cut clears the block support.
    """
    if isinstance(fam, str):
        fam = family(fam)
    nus = np.array(list(nu_list))
    A = np.array([amplification(fam(int(nu)), 2 ** (int(nu) + 3) if n is None else n, int(nu), theta, T,
                                cadence=cadence) for nu in nus])
    slope, r2 = affine_trend(nus, np.log2(A))
    return LossDiagnostic(nus=nus, A=A, beta_hat=slope, r2=r2)


def write_trajectory_csv(path, traj: Trajectory) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "H1mtheta_u", "Hmtheta_ut", "Hmtheta_Lu", "E_theta"])
        for i, t in enumerate(traj.t):
            e = repr(float(traj.E_theta[i])) if traj.E_theta is not None else ""
            w.writerow([repr(float(t)), repr(float(traj.u_norm[i])), repr(float(traj.ut_norm[i])),
                        repr(float(traj.lu_norm[i])), e])


def write_amplification_csv(path, diag: LossDiagnostic) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["nu", "A", "beta_hat"])
        for nu, a in zip(diag.nus, diag.A):
            w.writerow([int(nu), repr(float(a)), repr(float(diag.beta_hat))])


def save_checkpoint(prefix, traj: Trajectory) -> list[str]:
    """Write the final ``u`` and ``d_t u`` in the grid-function binary format."""
    if traj.final is None:
        return []
    paths = [f"{prefix}_u.bin", f"{prefix}_ut.bin"]
    for p, g in zip(paths, traj.final):
        save_grid_function(p, g)
    return paths
