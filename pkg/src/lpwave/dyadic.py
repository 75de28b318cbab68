"""Littlewood-Paley decomposition on the periodic torus [0, 2pi)^dim.

Functions live on a uniform grid with N points per axis (N a power of two).
Spectra are Fourier coefficients, ``u(x) = sum_k u_hat[k] exp(i k.x)``, so the
frequency index 0 is the mean value. All L2-type norms use the quadrature
weight ``(2 pi / N)^dim``, which by Parseval equals ``(2 pi)^dim sum |u_hat|^2``.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "CutoffProfile",
    "GridFunction",
    "LPDecomposition",
    "ParamSobolevConfig",
    "BernsteinReport",
    "TruncationError",
    "make_cutoff_profile",
    "chi",
    "varphi",
    "j_max",
    "block_support",
    "dyadic_block",
    "low_pass",
    "lp_decompose",
    "sobolev_norm",
    "sobolev_norm_gamma",
    "lp_sobolev_sum",
    "sobolev_equivalence_constant",
    "bernstein_check",
    "bernstein_ball_ratio",
    "save_grid_function",
    "load_grid_function",
    "export_spectrum_csv",
]

PLATEAU_ONE = 11 / 10
PLATEAU_ZERO = 19 / 10


class TruncationError(ValueError):
    """A dyadic block was requested that does not fit under the Nyquist ball."""


def _transition(s: np.ndarray) -> np.ndarray:
    # C-infinity step: 0 at s<=0, 1 at s>=1.
    s = np.asarray(s, dtype=float)
    out = np.where(s >= 1.0, 1.0, 0.0)
    inside = (s > 0.0) & (s < 1.0)
    if np.any(inside):
        si = s[inside]
        a = np.exp(-1.0 / si)
        b = np.exp(-1.0 / (1.0 - si))
        out[inside] = a / (a + b)
    return out


@dataclass(frozen=True)
class CutoffProfile:
    """Smooth non-increasing profile: 1 up to ``plateau_one``, 0 from ``plateau_zero``."""

    plateau_one: float = PLATEAU_ONE
    plateau_zero: float = PLATEAU_ZERO

    def __call__(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        width = self.plateau_zero - self.plateau_one
        out = _transition((self.plateau_zero - t) / width)
        return out if out.ndim else float(out)


def make_cutoff_profile() -> CutoffProfile:
    return CutoffProfile()


_PROFILE = CutoffProfile()


def chi(xi, profile: CutoffProfile = _PROFILE):
    """Low-pass symbol ``chi(xi) = psi(|xi|)``.

    ``xi`` is a scalar frequency, an array of frequencies, or an array of
    frequency magnitudes; the symbol is radial so only ``|xi|`` matters.
    """
    return profile(np.abs(xi))


def varphi(xi, profile: CutoffProfile = _PROFILE):
    """Annulus symbol ``chi(xi) - chi(2 xi)``; supported in 1/2 <= |xi| <= 2."""
    return profile(np.abs(xi)) - profile(2.0 * np.abs(xi))


def j_max(n: int) -> int:
    """Largest dyadic block whose annulus fits under the Nyquist ball."""
    return int(math.floor(math.log2(n / 2))) - 1


def block_support(j: int) -> tuple[float, float]:
    """Open interval of |xi| where block ``j`` can be non-zero."""
    if j == 0:
        return 0.0, PLATEAU_ZERO
    return PLATEAU_ONE * 2.0 ** (j - 1), PLATEAU_ZERO * 2.0**j


class GridFunction:
    """Complex samples on the uniform periodic grid, with their spectrum.

    Parameters
    ----------
    samples : array_like
        Shape ``(N,)`` or ``(N, N)``; N must be a power of two.
    """

    __slots__ = ("_samples", "_spectrum")

    def __init__(self, samples):
        arr = np.array(samples, dtype=complex)
        if arr.ndim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {arr.ndim}")
        n = arr.shape[0]
        if any(s != n for s in arr.shape):
            raise ValueError(f"grid must be square, got shape {arr.shape}")
        if n < 4 or n & (n - 1):
            raise ValueError(f"points per axis must be a power of two >= 4, got {n}")
        arr.setflags(write=False)
        self._samples = arr
        self._spectrum = None

    @classmethod
    def from_spectrum(cls, spectrum) -> "GridFunction":
        spec = np.asarray(spectrum, dtype=complex)
        out = cls(np.fft.ifftn(spec) * spec.size)
        s = spec.copy()
        s.setflags(write=False)
        out._spectrum = s
        return out

    @classmethod
    def from_function(cls, f: Callable, n: int, dim: int = 1) -> "GridFunction":
        """Sample ``f`` on the grid; in 2-D ``f(x, y)`` gets ``ij``-indexed meshes."""
        x = grid_points(n)
        if dim == 1:
            return cls(f(x))
        xx, yy = np.meshgrid(x, x, indexing="ij")
        return cls(f(xx, yy))

    @property
    def samples(self) -> np.ndarray:
        return self._samples

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            s = np.fft.fftn(self._samples) / self._samples.size
            s.setflags(write=False)
            self._spectrum = s
        return self._spectrum

    @property
    def dim(self) -> int:
        return self._samples.ndim

    @property
    def n(self) -> int:
        return self._samples.shape[0]

    @property
    def real(self) -> np.ndarray:
        return self._samples.real

    def wavenumbers(self) -> list[np.ndarray]:
        return wavenumbers(self.n, self.dim)

    def magnitude(self) -> np.ndarray:
        return frequency_magnitude(self.n, self.dim)

    def apply_multiplier(self, m) -> "GridFunction":
        return GridFunction.from_spectrum(self.spectrum * m)

    def norm(self) -> float:
        """L2 norm with quadrature weight (2 pi / N)^dim."""
        w = (2 * np.pi / self.n) ** self.dim
        return float(np.sqrt(w * np.sum(np.abs(self._samples) ** 2)))

    def sup(self) -> float:
        return float(np.max(np.abs(self._samples)))

    def inner(self, other: "GridFunction") -> complex:
        """L2 inner product ``(self, other)``, conjugate-linear in ``other``."""
        w = (2 * np.pi / self.n) ** self.dim
        return complex(w * np.sum(self._samples * np.conj(other.samples)))

    def derivative(self, axis: int = 0, order: int = 1) -> "GridFunction":
        k = self.wavenumbers()[axis]
        m = (1j * k) ** order
        if order % 2:
            m = np.where(np.abs(k) == self.n // 2, 0.0, m)
        return self.apply_multiplier(m)

    def __add__(self, other):
        if isinstance(other, GridFunction):
            return GridFunction(self._samples + other.samples)
        return GridFunction(self._samples + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            return GridFunction(self._samples - other.samples)
        return GridFunction(self._samples - other)

    def __neg__(self):
        return GridFunction(-self._samples)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            return GridFunction(self._samples * other.samples)
        return GridFunction(self._samples * other)

    __rmul__ = __mul__

    def __repr__(self):
        return f"GridFunction(dim={self.dim}, n={self.n})"


def grid_points(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n) / n


def wavenumbers(n: int, dim: int = 1) -> list[np.ndarray]:
    k = np.fft.fftfreq(n, d=1.0 / n)
    if dim == 1:
        return [k]
    kx, ky = np.meshgrid(k, k, indexing="ij")
    return [kx, ky]


def frequency_magnitude(n: int, dim: int = 1) -> np.ndarray:
    ks = wavenumbers(n, dim)
    if dim == 1:
        return np.abs(ks[0])
    return np.sqrt(ks[0] ** 2 + ks[1] ** 2)


def block_multiplier(n: int, dim: int, j: int) -> np.ndarray:
    xi = frequency_magnitude(n, dim)
    if j == 0:
        return chi(xi)
    return varphi(xi / 2.0**j)


def low_pass_multiplier(n: int, dim: int, k: int) -> np.ndarray:
    return chi(frequency_magnitude(n, dim) / 2.0**k)


def dyadic_block(u: GridFunction, j: int) -> GridFunction:
    """Dyadic block ``Delta_j u``; ``chi(D)`` for j = 0, ``varphi(2^-j D)`` above.

    Raises
    ------
    TruncationError
        If ``j`` exceeds :func:`j_max` for the grid, since the annulus would
        be cut by the Nyquist ball.
    """
    if j < 0:
        raise ValueError(f"block index must be >= 0, got {j}")
    top = j_max(u.n)
    if j > top:
        raise TruncationError(f"block {j} exceeds j_max={top} for N={u.n}")
    return u.apply_multiplier(block_multiplier(u.n, u.dim, j))


def low_pass(u: GridFunction, k: int) -> GridFunction:
    """``S_k u = F^-1(chi(2^-k xi) u_hat)``.

    Negative ``k`` is allowed (the paraproduct uses ``S_{mu-1}`` with mu = 0);
    on the integer torus ``S_k`` for k < 0 keeps only the mean.
    """
    return u.apply_multiplier(low_pass_multiplier(u.n, u.dim, k))


@dataclass
class LPDecomposition:
    blocks: list[GridFunction]
    j_max: int
    truncation: float = 0.0  # relative L2 mass above block j_max

    def reconstruct(self) -> GridFunction:
        total = np.zeros_like(self.blocks[0].spectrum)
        for b in self.blocks:
            total = total + b.spectrum
        return GridFunction.from_spectrum(total)


def lp_decompose(u: GridFunction, top: int | None = None) -> LPDecomposition:
    """All blocks ``Delta_0 u ... Delta_J u`` with the truncated tail mass."""
    jm = j_max(u.n) if top is None else top
    if jm > j_max(u.n):
        raise TruncationError(f"block {jm} exceeds j_max={j_max(u.n)} for N={u.n}")
    blocks = [dyadic_block(u, j) for j in range(jm + 1)]
    rest = u.spectrum * (1.0 - low_pass_multiplier(u.n, u.dim, jm))
    norm = np.linalg.norm(u.spectrum)
    trunc = float(np.linalg.norm(rest) / norm) if norm > 0 else 0.0
    return LPDecomposition(blocks=blocks, j_max=jm, truncation=trunc)


@dataclass(frozen=True)
class ParamSobolevConfig:
    s: float
    gamma: float = 1.0

    def __post_init__(self):
        if self.gamma < 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")


def sobolev_norm_gamma(u: GridFunction, cfg: ParamSobolevConfig | float, gamma: float | None = None) -> float:
    """``||u||_{H^s_gamma}``: quadrature of ``(gamma^2 + |xi|^2)^s |u_hat|^2``.

    Accepts a :class:`ParamSobolevConfig` or a bare exponent with ``gamma``.
    """
    if not isinstance(cfg, ParamSobolevConfig):
        cfg = ParamSobolevConfig(s=float(cfg), gamma=1.0 if gamma is None else gamma)
    xi2 = frequency_magnitude(u.n, u.dim) ** 2
    weight = (cfg.gamma**2 + xi2) ** cfg.s
    total = (2 * np.pi) ** u.dim * np.sum(weight * np.abs(u.spectrum) ** 2)
    return float(np.sqrt(total))


def sobolev_norm(u: GridFunction, s: float) -> float:
    return sobolev_norm_gamma(u, ParamSobolevConfig(s=s, gamma=1.0))


def lp_sobolev_sum(u: GridFunction, s: float, top: int | None = None) -> float:
    """``sum_j 2^{2js} ||Delta_j u||^2`` over the retained blocks."""
    jm = j_max(u.n) if top is None else top
    total = 0.0
    for j in range(jm + 1):
        total += 2.0 ** (2 * j * s) * dyadic_block(u, j).norm() ** 2
    return total


def sobolev_equivalence_constant(n: int, s: float, dim: int = 1, band: float | None = None) -> float:
    """Exact discrete constant ``C_s`` for the block characterization.

    Takes the sup and inf over retained frequencies of the multiplier ratio
    ``sum_j 2^{2js} m_j(xi)^2 / (1 + |xi|^2)^s``; every u has its ratio in
    ``[1/C_s, C_s]``.
    """
    xi = frequency_magnitude(n, dim)
    jm = j_max(n)
    num = np.zeros_like(xi)
    for j in range(jm + 1):
        num += 2.0 ** (2 * j * s) * block_multiplier(n, dim, j) ** 2
    if band is None:
        band = PLATEAU_ONE * 2.0**jm
    keep = xi <= band
    r = num[keep] / (1.0 + xi[keep] ** 2) ** s
    return float(max(r.max(), 1.0 / r.min()))


@dataclass(frozen=True)
class BernsteinReport:
    lower_ratio: float
    upper_ratio: float


def bernstein_check(u: GridFunction, j: int) -> BernsteinReport:
    """Gradient ratio ``||grad u|| / (2^j ||u||)`` and its reciprocal."""
    nu = u.norm()
    if nu <= 1e-300:
        raise ZeroDivisionError("Bernstein ratio undefined for u = 0")
    grad2 = sum(u.derivative(axis=a).norm() ** 2 for a in range(u.dim))
    r = math.sqrt(grad2) / (2.0**j * nu)
    return BernsteinReport(lower_ratio=r, upper_ratio=1.0 / r)


def bernstein_ball_ratio(u: GridFunction, j: int) -> float:
    """``||grad u||_inf / (2^j ||u||_inf)`` for u supported in a ball of radius ~2^j."""
    su = u.sup()
    if su <= 1e-300:
        raise ZeroDivisionError("Bernstein ratio undefined for u = 0")
    g = np.sqrt(sum(np.abs(u.derivative(axis=a).samples) ** 2 for a in range(u.dim)))
    return float(g.max() / (2.0**j * su))


_MAGIC = b"LPGF"
_HEADER = struct.Struct("<4sII8s")


def save_grid_function(path, u: GridFunction) -> None:
    """Binary dump: header {magic, dim, N, layout} then complex128 row-major."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, u.dim, u.n, b"rowmajor"))
        fh.write(np.ascontiguousarray(u.samples, dtype="<c16").tobytes())


def load_grid_function(path) -> GridFunction:
    data = Path(path).read_bytes()
    magic, dim, n, layout = _HEADER.unpack_from(data)
    if magic != _MAGIC or layout != b"rowmajor":
        raise ValueError(f"{path}: not a grid-function file")
    arr = np.frombuffer(data, dtype="<c16", offset=_HEADER.size)
    expected = n**dim
    if arr.size != expected:
        raise ValueError(f"{path}: expected {expected} samples, found {arr.size}")
    return GridFunction(arr.reshape((n,) * dim))


def export_spectrum_csv(path, u: GridFunction) -> None:
    ks = u.wavenumbers()
    amp = np.abs(u.spectrum)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if u.dim == 1:
            w.writerow(["xi", "abs_u_hat"])
            order = np.argsort(ks[0], kind="stable")
            for i in order:
                w.writerow([int(ks[0][i]), repr(float(amp[i]))])
        else:
            w.writerow(["xi1", "xi2", "abs_u_hat"])
            for idx in np.ndindex(amp.shape):
                w.writerow([int(ks[0][idx]), int(ks[1][idx]), repr(float(amp[idx]))])
