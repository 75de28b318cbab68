"""Command-line front end: ``lpwave <command> [--config PATH] [--out DIR] [--seed N] [--set k=v]``.

Exit status: 0 success, 1 configuration error, 2 a checked invariant
failed, 3 numerical abort. Every run writes ``manifest.txt`` next to its CSVs.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import inspect
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .coefficients import EllipticityError, coefficient_from_config, validate, write_validation_csv
from .dyadic import GridFunction, TruncationError, export_spectrum_csv, grid_points, j_max, lp_decompose
from .energy import EnergyConfig, total_energy, write_energy_csv
from .experiments import CRITERIA, CriterionResult, random_field
from .paradiff import kernel_diagnostics, write_kernel_csv
from .regularity import (
    ResolutionError,
    dyadic_indicators,
    mollifier_estimate_check,
    triangle_wave,
    weierstrass,
    write_dyadic_csv,
    write_mollifier_csv,
)
from .wave import (
    NumericalInstability,
    SimConfig,
    amplification_experiment,
    run,
    save_checkpoint,
    wave_packet,
    write_amplification_csv,
    write_trajectory_csv,
)

COMMANDS = ("decompose", "regularity", "mollify", "paradiff-check", "energy", "simulate",
            "amplification", "gronwall", "sweep")

# Allowed config sections and keys; anything else is a configuration error.
SCHEMA = {
    "coefficient": {"class_tag", "base", "amplitude", "J", "lambda0", "Lambda0", "mu_x", "seed", "dim",
                    "space", "slope", "nu", "delta", "c", "value"},
    "simulation": {"n", "nu", "T", "theta", "dt", "cadence", "data", "k", "energy", "gamma",
                   "cfl_factor"},
    "sweep": {"workers", "criteria"},
}

NUMERICAL_ERRORS = (NumericalInstability, ResolutionError, TruncationError, EllipticityError,
                    FloatingPointError)


class ConfigError(ValueError):
    pass


def load_config(path: str | None, overrides: list[str]) -> dict[str, dict[str, str]]:
    """Parse the INI file and ``section.key=value`` overrides against :data:`SCHEMA`."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    if path:
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = {s: dict(parser[s]) for s in parser.sections()}
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.partition(".")
        if not sep or not dot:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        cfg.setdefault(section.strip(), {})[name.strip()] = value.strip()
    for section, entries in cfg.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        bad = sorted(set(entries) - SCHEMA[section])
        if bad:
            raise ConfigError(f"unknown config key(s) in [{section}]: {', '.join(bad)}")
    return cfg


def config_hash(command: str, cfg: dict, seed: int, extra: dict) -> str:
    canon = repr((command, sorted((s, sorted(v.items())) for s, v in cfg.items()), seed, sorted(extra.items())))
    return hashlib.sha256(canon.encode()).hexdigest()


def parse_range(text: str) -> list[int]:
    """``"4..8"`` or ``"4,6,8"`` to a list of ints."""
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",") if v]


def _write_metrics(path: Path, result: CriterionResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["criterion", "metric", "value"])
        for k, v in result.metrics.items():
            w.writerow([result.number, k, repr(float(v))])
        w.writerow([result.number, "passed", int(result.passed)])


def _call(k: int, seed: int) -> CriterionResult:
    fn = CRITERIA[k][0]
    if "seed" in inspect.signature(fn).parameters:
        return fn(seed=seed)
    return fn()


def _criterion(k: int, args, out: Path, files: list) -> tuple[int, str]:
    res = _call(k, args.seed)
    path = out / f"criterion_{k}.csv"
    _write_metrics(path, res)
    files.append(path)
    print(res.line())
    return (0, "") if res.passed else (2, f"criterion {k} ({res.title}) failed")


# --- commands -----------------------------------------------------------------------

def cmd_decompose(args, cfg, out, files):
    n = int(args.n)
    u = random_field(n, np.random.default_rng(args.seed), 1.1 * 2.0 ** j_max(n))
    dec = lp_decompose(u)
    path = out / "blocks.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "l2_norm"])
        for j, b in enumerate(dec.blocks):
            w.writerow([j, repr(b.norm())])
    export_spectrum_csv(out / "spectrum.csv", u)
    files += [path, out / "spectrum.csv"]
    return _criterion(1 if args.part == "reconstruction" else 2, args, out, files)


def cmd_regularity(args, cfg, out, files):
    x = grid_points(1024)
    write_dyadic_csv(out / "dyadic_weierstrass.csv", dyadic_indicators(GridFunction(weierstrass(x, 8))))
    write_dyadic_csv(out / "dyadic_triangle.csv", dyadic_indicators(GridFunction(triangle_wave(x))))
    files += [out / "dyadic_weierstrass.csv", out / "dyadic_triangle.csv"]
    if "coefficient" in cfg:
        rep = validate(coefficient_from_config(cfg["coefficient"]), seed=args.seed)
        write_validation_csv(out / "validation.csv", rep)
        files.append(out / "validation.csv")
        if not rep.matches_claims():
            return 2, "coefficient does not satisfy its claimed hypotheses"
    return _criterion(3, args, out, files)


def cmd_mollify(args, cfg, out, files):
    nt = 2**16
    tt = 2 * np.pi * np.arange(nt) / nt
    write_mollifier_csv(out / "mollifier.csv", mollifier_estimate_check(weierstrass(tt, 15), 2 * np.pi / nt))
    files.append(out / "mollifier.csv")
    return _criterion(4, args, out, files)


def cmd_paradiff(args, cfg, out, files):
    if args.part == "kernel":
        from .experiments import KERNEL_XI

        write_kernel_csv(out / "kernel.csv", [kernel_diagnostics(g, KERNEL_XI) for g in (1.0, 4.0, 64.0)])
        files.append(out / "kernel.csv")
    k = {"kernel": 5, "positivity": 6, "calculus": 7}[args.part]
    return _criterion(k, args, out, files)


def cmd_energy(args, cfg, out, files):
    n = 256
    c = coefficient_from_config(cfg.get("coefficient", {"class_tag": "zygmund_t"}))
    ecfg = EnergyConfig.for_grid(n, theta=float(cfg.get("simulation", {}).get("theta", 0.0)))
    rng = np.random.default_rng(args.seed)
    band = 1.1 * 2.0**ecfg.nu_max
    br = total_energy(random_field(n, rng, band), random_field(n, rng, band), 0.3, c, ecfg)
    write_energy_csv(out / "energy.csv", [br])
    files.append(out / "energy.csv")
    return _criterion(8 if args.part == "commutator" else 9, args, out, files)


def cmd_simulate(args, cfg, out, files):
    if args.check:
        return _criterion(12, args, out, files)
    sim = cfg.get("simulation", {})
    c = coefficient_from_config(cfg.get("coefficient", {"class_tag": "smooth", "value": "1.0"}))
    n = int(sim.get("n", 256))
    theta = float(sim.get("theta", 0.0))
    data = sim.get("data", "packet")
    if data == "packet":
        u0 = wave_packet(n, int(sim.get("nu", 4)), theta, c.dim)
    elif data == "plane":
        x = grid_points(n)
        u0 = GridFunction(np.exp(1j * int(sim.get("k", 5)) * x))
    else:
        raise ConfigError(f"unknown simulation data {data!r}; expected packet or plane")
    energy = None
    if sim.get("energy", "false").lower() in ("1", "true", "yes"):
        energy = EnergyConfig.for_grid(n, theta=theta, gamma=float(sim.get("gamma", 1.0)), column_tol=1e-13)
    run_cfg = SimConfig(coef=c, u0=u0, u1=u0 * 0.0, T=float(sim.get("T", 1.0)),
                        dt=float(sim["dt"]) if "dt" in sim else None, theta=theta,
                        cadence=int(sim.get("cadence", 1)), energy=energy,
                        cfl_factor=float(sim.get("cfl_factor", 0.5)))
    traj = run(run_cfg)
    write_trajectory_csv(out / "trajectory.csv", traj)
    files.append(out / "trajectory.csv")
    files += [Path(p) for p in save_checkpoint(out / "final", traj)]
    print(f"simulated {len(traj.t) - 1} samples to t={traj.t[-1]:.6g}; "
          f"sup ||u||_H^(1-theta) = {traj.u_norm.max():.6g}")
    return 0, ""


NO_LOSS = ("zygmund_t", "smooth", "lipschitz_t")


def cmd_amplification(args, cfg, out, files):
    nus = parse_range(args.nu)
    thetas = [float(v) for v in args.theta.split(",")]
    failures = []
    fams = [args.family] + ([args.contrast] if args.contrast else [])
    for fam in fams:
        for theta in thetas if fam == args.family else [thetas[0]]:
            d = amplification_experiment(fam, nus, theta=theta)
            path = out / f"amplification_{fam}_theta{theta:g}.csv"
            write_amplification_csv(path, d)
            files.append(path)
            print(f"{fam} theta={theta:g}: A={np.array2string(d.A, precision=4)} beta_hat={d.beta_hat:.4f}")
            if fam in NO_LOSS and not (abs(d.beta_hat) < 0.1 and d.spread < 2):
                failures.append(f"{fam} theta={theta:g}: |beta_hat| < 0.1 and A spread < 2")
            if fam == "resonant_t" and not (d.beta_hat > 0.3 and d.monotone()):
                failures.append(f"{fam}: beta_hat > 0.3 with A monotone")
    if failures:
        return 2, "failed: " + "; ".join(failures)
    return 0, ""


def cmd_gronwall(args, cfg, out, files):
    return _criterion(10, args, out, files)


def cmd_sweep(args, cfg, out, files):
    sw = cfg.get("sweep", {})
    ks = parse_range(args.criteria or sw.get("criteria", "1..12"))
    bad = [k for k in ks if k not in CRITERIA]
    if bad:
        raise ConfigError(f"unknown criteria {bad}")
    workers = int(args.workers or sw.get("workers", 1))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_call, ks, [args.seed] * len(ks)))
    else:
        results = [_call(k, args.seed) for k in ks]
    path = out / "acceptance.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["criterion", "title", "passed", "command"])
        for r in results:
            w.writerow([r.number, r.title, int(r.passed), CRITERIA[r.number][1]])
    files.append(path)
    for r in results:
        _write_metrics(out / f"criterion_{r.number}.csv", r)
        files.append(out / f"criterion_{r.number}.csv")
        print(r.line())
    failed = [r.number for r in results if not r.passed]
    return (2, f"criteria {failed} failed") if failed else (0, "")


HANDLERS = {
    "decompose": cmd_decompose,
    "regularity": cmd_regularity,
    "mollify": cmd_mollify,
    "paradiff-check": cmd_paradiff,
    "energy": cmd_energy,
    "simulate": cmd_simulate,
    "amplification": cmd_amplification,
    "gronwall": cmd_gronwall,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with [coefficient], [simulation], [sweep] sections")
    common.add_argument("--out", default="lpwave_out", help="output directory")
    common.add_argument("--seed", type=int, default=0, help="seed for every randomized corpus")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a config entry (repeatable)")
    p = argparse.ArgumentParser(prog="lpwave", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("decompose", parents=[common], help="dyadic blocks and Sobolev characterization")
    s.add_argument("--part", choices=("reconstruction", "sobolev"), default="reconstruction")
    s.add_argument("--n", type=int, default=1024)
    sub.add_parser("regularity", parents=[common], help="dyadic regularity indicators")
    sub.add_parser("mollify", parents=[common], help="mollifier estimates")
    s = sub.add_parser("paradiff-check", parents=[common], help="kernel, positivity and calculus checks")
    s.add_argument("--part", choices=("kernel", "positivity", "calculus"), default="kernel")
    s = sub.add_parser("energy", parents=[common], help="energy equivalence and commutators")
    s.add_argument("--part", choices=("commutator", "equivalence"), default="equivalence")
    s = sub.add_parser("simulate", parents=[common], help="run the wave solver")
    s.add_argument("--check", action="store_true", help="run the solver correctness checks")
    s = sub.add_parser("amplification", parents=[common], help="A(nu) and beta_hat for a family")
    s.add_argument("--family", default="zygmund_t", choices=("zygmund_t", "resonant_t", "smooth"))
    s.add_argument("--nu", default="4..8")
    s.add_argument("--theta", default="0,0.5", help="comma-separated theta values")
    s.add_argument("--contrast", choices=("resonant_t",), help="also run a contrast family")
    sub.add_parser("gronwall", parents=[common], help="Gronwall constant stability")
    s = sub.add_parser("sweep", parents=[common], help="run acceptance criteria")
    s.add_argument("--criteria", help="e.g. 1..12 or 1,4,9")
    s.add_argument("--workers", type=int)
    return p


def write_manifest(out: Path, args, digest: str, status: int, message: str, wall: float, files) -> None:
    lines = [
        f"command: {args.command}",
        f"argv: {' '.join(sys.argv[1:])}",
        f"config_hash: {digest}",
        f"seed: {args.seed}",
        f"lpwave: {__version__}",
        f"numpy: {np.__version__}",
        f"python: {platform.python_version()}",
        f"wall_time_s: {wall:.3f}",
        f"exit_status: {status}",
    ]
    if message:
        lines.append(f"message: {message}")
    lines.append("files:")
    lines += [f"  {Path(f).name}" for f in files]
    lines.append("criteria:")
    lines += [f"  {k}: {cmd}" for k, (_, cmd) in CRITERIA.items()]
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    out = Path(args.out)
    files: list = []
    out.mkdir(parents=True, exist_ok=True)
    try:
        cfg = load_config(args.config, args.set)
        status, message = HANDLERS[args.command](args, cfg, out, files)
    except (ConfigError, KeyError, ValueError) as exc:
        if isinstance(exc, NUMERICAL_ERRORS):
            status, message = 3, f"numerical abort: {exc}"
        else:
            status, message = 1, f"configuration error: {exc}"
    except NUMERICAL_ERRORS as exc:
        status, message = 3, f"numerical abort: {exc}"
    if message:
        print(message, file=sys.stderr)
    extra = {k: str(v) for k, v in vars(args).items() if k not in ("config", "out", "set", "seed")}
    digest = config_hash(args.command, cfg if status != 1 else {}, args.seed, extra)
    write_manifest(out, args, digest, status, message, time.perf_counter() - start, files)
    return status


if __name__ == "__main__":
    sys.exit(main())
