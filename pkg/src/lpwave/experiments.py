"""The twelve acceptance experiments, shared by the test suite and the CLI.

Each ``criterion_k`` runs at its stated size and tolerance and returns a
:class:`CriterionResult` with the measured numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import coefficients as co
from .dyadic import (
    GridFunction,
    block_support,
    dyadic_block,
    frequency_magnitude,
    grid_points,
    j_max,
    lp_decompose,
    lp_sobolev_sum,
    sobolev_norm,
)
from .energy import (
    EnergyConfig,
    commutator_aggregate,
    commutator_ratio,
    commutator_vanishing,
    sobolev_bracket,
    total_energy,
)
from .paradiff import adjoint_remainder, composition_remainder, kernel_diagnostics, positivity_check
from .regularity import (
    affine_trend,
    dyadic_indicators,
    is_bounded_profile,
    mollifier_estimate_check,
    spread,
    triangle_wave,
    weierstrass,
)
from .wave import (
    SimConfig,
    SpatialOperator,
    amplification_experiment,
    family,
    gronwall_check,
    run,
    step,
    wave_packet,
)

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "random_field"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    metrics: dict[str, float] = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        nums = " ".join(f"{k}={_fmt(v)}" for k, v in self.metrics.items())
        return f"[{tag}] {self.number:2d} {self.title}: {nums}"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.4g}"


def random_field(n: int, rng: np.random.Generator, band: float, slope: float = 0.0, dim: int = 1) -> GridFunction:
    """Complex Gaussian spectrum on ``|xi| <= band`` with amplitude ``(1+|xi|)^-slope``."""
    mag = frequency_magnitude(n, dim)
    shape = mag.shape
    spec = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * (mag <= band)
    return GridFunction.from_spectrum(spec * (1 + mag) ** -slope)


def _field_corpus(n: int, count: int, seed: int, band: float) -> list[GridFunction]:
    rng = np.random.default_rng(seed)
    return [random_field(n, rng, band, slope=rng.uniform(0, 3)) for _ in range(count)]


# --- 1-4: dyadic analysis --------------------------------------------------------------

def criterion_1(n: int = 1024, seed: int = 0) -> CriterionResult:
    jm = j_max(n)
    u = _field_corpus(n, 1, seed, 1.1 * 2.0**jm)[0]
    dec = lp_decompose(u)
    rel = np.linalg.norm(dec.reconstruct().spectrum - u.spectrum) / np.linalg.norm(u.spectrum)
    mag = frequency_magnitude(n)
    leak = 0.0
    for j, b in enumerate(dec.blocks):
        lo, hi = block_support(j)
        outside = (mag >= hi) | ((mag <= lo) & (lo > 0))
        leak = max(leak, float(np.max(np.abs(b.spectrum[outside]), initial=0.0)))
    leak /= float(np.max(np.abs(u.spectrum)))
    ok = rel <= 1e-10 and leak <= 1e-15
    return CriterionResult(1, "reconstruction and locality", ok, {"recon_rel": rel, "leak": leak})


def criterion_2(seed: int = 0, count: int = 100) -> CriterionResult:
    metrics, ok = {}, True
    for s in (-1.0, -0.5, 0.0, 0.5, 1.0):
        cs = []
        for n in (256, 512, 1024):
            ratios = []
            for u in _field_corpus(n, count, seed, 1.1 * 2.0 ** j_max(n)):
                ratios.append(lp_sobolev_sum(u, s) / sobolev_norm(u, s) ** 2)
            cs.append(max(max(ratios), 1.0 / min(ratios)))
        var = max(cs) / min(cs) - 1
        metrics[f"C[{s:g}]"] = max(cs)
        ok &= max(cs) <= 10 and var < 0.2
        metrics[f"var[{s:g}]"] = var
    return CriterionResult(2, "Sobolev characterization", ok, metrics)


def criterion_3(n: int = 1024) -> CriterionResult:
    x = grid_points(n)
    w = dyadic_indicators(GridFunction(weierstrass(x, 8)))
    t = dyadic_indicators(GridFunction(triangle_wave(x)))
    sel = w.js >= 3
    js = w.js[sel]
    zw, lw = w.column("2^j_Dj_inf")[sel], w.column("grad_Sj_inf")[sel]
    zt, lt = t.column("2^j_Dj_inf")[sel], t.column("grad_Sj_inf")[sel]
    slope_w, r2_w = affine_trend(js, lw)
    slope_t, r2_t = affine_trend(js, lt)
    weier_ok = spread(zw) < 3 and r2_w > 0.9 and slope_w > 0
    # reverse pattern: Lipschitz indicator bounded with no affine growth
    tri_ok = spread(lt) < 3 and is_bounded_profile(lt, js) and is_bounded_profile(zt, js)
    return CriterionResult(3, "dyadic regularity characterizations", weier_ok and tri_ok,
                           {"W_zyg_spread": spread(zw), "W_lip_R2": r2_w, "T_lip_spread": spread(lt),
                            "T_lip_R2": r2_t})


def criterion_4(nt: int = 2**16, terms: int = 15) -> CriterionResult:
    tt = 2 * np.pi * np.arange(nt) / nt
    tab = mollifier_estimate_check(weierstrass(tt, terms), 2 * np.pi / nt, range(2, 11))
    s1, s2, s3 = tab.spreads
    ok = max(s1, s2, s3) < 5
    return CriterionResult(4, "mollifier estimates", ok, {"spread1": s1, "spread2": s2, "spread3": s3})


# --- 5-7: paradifferential calculus ----------------------------------------------------

KERNEL_XI = (0.0, 1.0, 3.0, 6.0, 12.0, 24.0, 48.0, 96.0, 192.0, 320.0)


def criterion_5(gammas=(1.0, 4.0, 64.0), xi=KERNEL_XI) -> CriterionResult:
    reps = [kernel_diagnostics(g, xi) for g in gammas]
    zero = max(float(r.column("zero_mean").max()) for r in reps)
    metrics: dict[str, float] = {"zero_mean": zero}
    ok = zero <= 1e-12
    for col in ("l1", "moment", "dxi_l1"):
        sups = [float(r.column(col).max()) for r in reps]
        metrics[f"{col}_spread"] = spread(sups)
        ok &= spread(sups) < 5
    return CriterionResult(5, "psi_gamma kernel identities", ok, metrics)


def positivity_generators() -> dict[str, co.RoughCoefficient]:
    return {
        "constant": co.make_constant(1.5),
        "smooth": co.make_smooth(),
        "zygmund_t": co.make_zygmund_in_t(space="triangle", mu_x=0.3),
        "loglip_t": co.make_loglip_in_t(),
        "lipschitz_t": co.make_lipschitz(),
        "resonant_t": co.make_resonant(4),
    }


def criterion_6(n: int = 128, seed: int = 0) -> CriterionResult:
    metrics, ok = {}, True
    for name, c in positivity_generators().items():
        for m in (0, 2):
            worst = 1
            for t0 in (0.0, 1.3):
                raw = lambda x, xi, g, c=c, t0=t0, m=m: c.scalar(t0, x) * (g**2 + xi**2) ** (m / 2)  # noqa: E731
                rep = positivity_check(raw, c.lambda0, n=n, order=m, seed=seed)
                if rep.gamma_pass is None:
                    ok = False
                    worst = math.inf
                else:
                    worst = max(worst, rep.gamma_pass)
            metrics[f"{name}_m{m}"] = worst
    ok &= metrics["constant_m0"] == 1 and metrics["constant_m2"] == 1
    return CriterionResult(6, "positivity", ok, metrics)


def _tri(x):
    return 1 + 0.5 * (2 / np.pi * triangle_wave(x) - 1)


def criterion_7(n: int = 256, gammas=(1.0, 4.0, 16.0, 64.0)) -> CriterionResult:
    metrics, ok = {}, True
    b = lambda x, xi: (2 - _tri(x)) + 0 * xi  # noqa: E731
    for s in (-1.0, 0.0, 1.0):
        comp, adj = [], []
        for g in gammas:
            a1 = lambda x, xi, g=g: _tri(x) * np.sqrt(g**2 + xi**2)  # noqa: E731
            comp.append(composition_remainder(a1, b, s, g, n, m=1))
            adj.append(adjoint_remainder(lambda x, xi, a1=a1: a1(x, xi) * (1 + 0.3j), g, n, s, order=1))
        metrics[f"comp_spread[{s:g}]"] = spread(comp)
        metrics[f"adj_spread[{s:g}]"] = spread(adj)
        ok &= spread(comp) < 10 and spread(adj) < 10
    const = 0.0
    for g in gammas:
        ca = lambda x, xi: 1.7 + 0 * x + 0 * xi  # noqa: E731
        cb = lambda x, xi: -0.4 + 0 * x + 0 * xi  # noqa: E731
        const = max(const, composition_remainder(ca, cb, 0.0, g, n, exact=True),
                    adjoint_remainder(lambda x, xi: (1.7 + 0.2j) + 0 * x + 0 * xi, g, n, 0.0, exact=True))
    metrics["constant_remainder"] = const
    ok &= const == 0.0
    return CriterionResult(7, "symbolic calculus remainders", ok, metrics)


# --- 8-9: energy --------------------------------------------------------------------------

def criterion_8(seed: int = 1) -> CriterionResult:
    rng = np.random.default_rng(seed)
    metrics = {}
    n = 512
    u = random_field(n, rng, n / 4)
    a = GridFunction(1.5 + 0.5 * (2 / np.pi * triangle_wave(grid_points(n)) - 1))
    hs, nus = list(range(-1, 6)), list(range(0, 9))
    V = commutator_vanishing(a, u.derivative(), hs, nus)
    far = np.array([[abs(h + 3 - nu) >= 3 for nu in nus] for h in hs])
    metrics["far_max"] = float(V[far].max())
    metrics["near_max"] = float(V[~far].max())
    n = 1024
    u = random_field(n, rng, n / 3)
    a = GridFunction(1.5 + 0.5 * (2 / np.pi * triangle_wave(grid_points(n)) - 1))
    ratios = [commutator_ratio(a, u, nu) for nu in range(3, 9)]
    metrics["ratio_spread"] = spread(ratios)
    n = 512
    c = co.make_zygmund_in_t(space="triangle")
    cfg = EnergyConfig.for_grid(n, theta=0.5)
    u = random_field(n, rng, n / 4)
    agg = []
    for nu in (3, 4, 5, 6):
        ub = dyadic_block(u, nu)
        agg.append(commutator_aggregate(c, ub, ub * 0.0, 0.3, cfg))
    agg.append(commutator_aggregate(c, u, u * 0.0, 0.3, cfg))
    metrics["aggregate_max"] = max(agg)
    metrics["aggregate_spread"] = spread(agg)
    ok = metrics["far_max"] <= 1e-12 and metrics["ratio_spread"] < 10 and np.isfinite(max(agg)) \
        and metrics["aggregate_spread"] < 10
    return CriterionResult(8, "commutator structure", bool(ok), metrics)


def criterion_9(n: int = 256, count: int = 100, seed: int = 1) -> CriterionResult:
    rng = np.random.default_rng(seed)
    c = co.make_zygmund_in_t()
    metrics, ok = {}, True
    for theta in (0.0, 0.25, 0.5, 0.75):
        cfg = EnergyConfig.for_grid(n, theta=theta)
        band = 1.1 * 2.0**cfg.nu_max
        cache: dict = {}
        r = []
        for _ in range(count):
            u = random_field(n, rng, band, slope=rng.uniform(0, 2))
            ut = random_field(n, rng, band, slope=rng.uniform(0, 2))
            br = total_energy(u, ut, 0.3, c, cfg, cache)
            r.append(math.sqrt(br.E_theta) / sobolev_bracket(u, ut, theta))
        metrics[f"spread[{theta:g}]"] = spread(r)
        ok &= spread(r) < 10
    return CriterionResult(9, "energy equivalence", ok, metrics)


# --- 10-12: simulation -------------------------------------------------------------------

def gronwall_constant(c: co.RoughCoefficient, nu: int, n: int, theta: float = 0.0, samples: int = 400,
                      T: float = 1.0) -> float:
    """Fitted C along the trajectory from block-nu packet data, energy on blocks nu-1..nu+1."""
    u0 = wave_packet(n, nu, theta, c.dim)
    ecfg = EnergyConfig(theta=theta, nus=(nu - 1, nu, nu + 1), column_tol=1e-13)
    cfg = SimConfig(coef=c, u0=u0, u1=u0 * 0.0, T=T, theta=theta, energy=ecfg)
    count, _ = cfg.steps()
    cfg.cadence = max(1, count // samples)
    return gronwall_check(run(cfg)).C


def criterion_10(nus=(4, 5, 6, 7, 8), samples: int = 400) -> CriterionResult:
    c = co.make_zygmund_in_t()
    by_nu = [gronwall_constant(c, nu, 2 ** (nu + 4), samples=samples) for nu in nus]
    metrics = {f"C[nu={nu}]": v for nu, v in zip(nus, by_nu)}
    metrics["nu_spread"] = spread(by_nu)
    worst_n = 1.0
    for nu, base in zip(nus[:2], by_nu[:2]):
        fine = gronwall_constant(c, nu, 2 ** (nu + 5), samples=samples)
        metrics[f"C[nu={nu},2N]"] = fine
        worst_n = max(worst_n, spread([base, fine]))
    metrics["N_spread"] = worst_n
    ok = metrics["nu_spread"] < 2 and worst_n < 2
    return CriterionResult(10, "Gronwall constant stability", ok, metrics)


def criterion_11(nus=(4, 5, 6, 7, 8)) -> CriterionResult:
    metrics, ok = {}, True
    for theta in (0.0, 0.5):
        d = amplification_experiment("zygmund_t", nus, theta=theta)
        metrics[f"zyg_beta[{theta:g}]"] = d.beta_hat
        metrics[f"zyg_spread[{theta:g}]"] = d.spread
        ok &= abs(d.beta_hat) < 0.1 and d.spread < 2
    r = amplification_experiment("resonant_t", nus)
    metrics["res_beta"] = r.beta_hat
    metrics["res_monotone"] = r.monotone()
    ok &= r.beta_hat > 0.3 and r.monotone()
    return CriterionResult(11, "no-loss amplification", bool(ok), metrics)


def manufactured_errors(dts=(0.02, 0.01, 0.005), n: int = 32, T: float = 1.0) -> np.ndarray:
    """Max error at T against ``u = cos t sin x + sin(2t) cos(2x) / 2`` with matching forcing."""
    c = co.make_smooth()
    x = grid_points(n)
    op = SpatialOperator(c, n)
    um = lambda t: np.cos(t) * np.sin(x) + 0.5 * np.sin(2 * t) * np.cos(2 * x) + 0j  # noqa: E731
    ut = lambda t: -np.sin(t) * np.sin(x) + np.cos(2 * t) * np.cos(2 * x) + 0j  # noqa: E731
    utt = lambda t: -np.cos(t) * np.sin(x) - 2 * np.sin(2 * t) * np.cos(2 * x)  # noqa: E731
    f = lambda t: utt(t) - op(um(t), t)  # noqa: E731
    errs = []
    for dt in dts:
        cfg = SimConfig(coef=c, u0=GridFunction(um(0.0)), u1=GridFunction(ut(0.0)), T=T, dt=dt, forcing=f,
                        cadence=10**9)
        errs.append(float(np.max(np.abs(run(cfg).final[0].samples - um(T)))))
    return np.array(errs)


def plane_wave_error(n: int = 64, k: int = 5, value: float = 1.0, T: float = 1.0) -> tuple[float, float]:
    """Error of ``e^{iKx}`` data against ``cos(sqrt(value) K t) e^{iKx}`` and ``dt^2 K^2 T``."""
    c = co.make_constant(value)
    x = grid_points(n)
    cfg = SimConfig(coef=c, u0=GridFunction(np.exp(1j * k * x)), u1=GridFunction(0 * x + 0j), T=T,
                    cadence=10**9)
    _, dt = cfg.steps()
    u = run(cfg).final[0].samples
    exact = np.cos(math.sqrt(value) * k * T) * np.exp(1j * k * x)
    return float(np.max(np.abs(u - exact))), dt**2 * k**2 * T


def reversibility_error(n: int = 256, nu: int = 4, T: float = 1.0) -> float:
    c = co.make_smooth()
    u0 = wave_packet(n, nu)
    cfg = SimConfig(coef=c, u0=u0, u1=u0 * 0.0, T=T, cadence=10**9)
    count, dt = cfg.steps()
    u, v = run(cfg).final
    op = SpatialOperator(c, n)
    state = (u.samples, v.samples)
    for i in range(count):
        state = step(state, T - i * dt, -dt, op)
    return float(np.linalg.norm(state[0] - u0.samples) / np.linalg.norm(u0.samples))


def criterion_12() -> CriterionResult:
    errs = manufactured_errors()
    orders = np.log2(errs[:-1] / errs[1:])
    pw, bound = plane_wave_error()
    rev = reversibility_error()
    ok = bool(np.all(np.abs(orders - 2) <= 0.2)) and pw <= bound and rev <= 1e-6
    return CriterionResult(12, "solver correctness", ok,
                           {"order_min": orders.min(), "order_max": orders.max(), "plane_err": pw,
                            "plane_bound": bound, "reversal": rev})


CRITERIA: dict[int, tuple[Callable[[], CriterionResult], str]] = {
    1: (criterion_1, "lpwave decompose --part reconstruction"),
    2: (criterion_2, "lpwave decompose --part sobolev"),
    3: (criterion_3, "lpwave regularity"),
    4: (criterion_4, "lpwave mollify"),
    5: (criterion_5, "lpwave paradiff-check --part kernel"),
    6: (criterion_6, "lpwave paradiff-check --part positivity"),
    7: (criterion_7, "lpwave paradiff-check --part calculus"),
    8: (criterion_8, "lpwave energy --part commutator"),
    9: (criterion_9, "lpwave energy --part equivalence"),
    10: (criterion_10, "lpwave gronwall"),
    11: (criterion_11, "lpwave amplification --family zygmund_t --nu 4..8 --contrast resonant_t"),
    12: (criterion_12, "lpwave simulate --check"),
}


def run_criterion(k: int) -> CriterionResult:
    return CRITERIA[k][0]()
