"""Littlewood-Paley analysis, paradifferential energies and a wave solver for
hyperbolic equations with rough coefficients on the torus."""

__version__ = "0.1.0"

from .coefficients import (
    RoughCoefficient,
    coefficient_from_config,
    make_constant,
    make_lipschitz,
    make_loglip_in_t,
    make_resonant,
    make_smooth,
    make_zygmund_in_t,
    validate,
)
from .dyadic import GridFunction, dyadic_block, lp_decompose, sobolev_norm, sobolev_norm_gamma
from .energy import EnergyConfig, energy_rate, total_energy
from .paradiff import apply, paraproduct, smooth_symbol
from .wave import SimConfig, amplification_experiment, gronwall_check, run, wave_packet

__all__ = [
    "GridFunction",
    "RoughCoefficient",
    "EnergyConfig",
    "SimConfig",
    "amplification_experiment",
    "apply",
    "coefficient_from_config",
    "dyadic_block",
    "energy_rate",
    "gronwall_check",
    "lp_decompose",
    "make_constant",
    "make_lipschitz",
    "make_loglip_in_t",
    "make_resonant",
    "make_smooth",
    "make_zygmund_in_t",
    "paraproduct",
    "run",
    "smooth_symbol",
    "sobolev_norm",
    "sobolev_norm_gamma",
    "total_energy",
    "validate",
    "wave_packet",
]
