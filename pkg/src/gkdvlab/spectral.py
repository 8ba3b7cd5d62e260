"""Periodic grids, spectral fields and the Fourier multipliers acting on them.

Conventions on the torus R / (period * Z):

    u_hat(xi) = int_0^period exp(-2 pi i xi x) u(x) dx,    xi in Z / period
    u(x)      = (1 / period) * sum_xi u_hat(xi) exp(2 pi i xi x)

so that ||u||_{L^2}^2 = (1 / period) * sum |u_hat|^2.  Coefficients are
stored in FFT order: xi * period = 0, 1, ..., M/2, -M/2 + 1, ..., -1.  The
mode M/2 (the Nyquist mode) is synthesized as a cosine so that real fields
stay real off the sampling grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

__all__ = [
    "TorusGrid",
    "SpectralField",
    "MultiplierSymbol",
    "bracket",
    "m_symbol",
    "m_symbol_derivative",
    "synthesize",
    "analyze",
    "to_physical",
    "from_physical",
    "project_mean_zero",
    "airy_propagate",
    "apply_I",
    "rescale_field",
    "rescale_inverse",
    "random_field",
    "hs_norm",
    "l2_norm",
    "translate",
    "derivative",
]


def bracket(x):
    """Japanese bracket <x> = 1 + |x|."""
    return 1.0 + np.abs(x)


@dataclass(frozen=True)
class TorusGrid:
    """Fourier lattice Z/period truncated to ``modes`` wavenumbers."""

    period: float
    modes: int

    def __post_init__(self):
        if not float(self.period) >= 1.0:
            raise ValueError(f"period must be >= 1, got {self.period}")
        if int(self.modes) != self.modes or self.modes < 4 or self.modes % 2:
            raise ValueError(f"modes must be an even integer >= 4, got {self.modes}")
        object.__setattr__(self, "period", float(self.period))
        object.__setattr__(self, "modes", int(self.modes))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = np.fft.fftfreq(self.modes, 1.0 / self.modes)
        k[self.modes // 2] = self.modes // 2
        k.flags.writeable = False
        return k

    @cached_property
    def frequencies(self) -> np.ndarray:
        xi = self.wavenumbers / self.period
        xi.flags.writeable = False
        return xi

    @property
    def nyquist(self) -> int:
        return self.modes // 2

    def points(self, oversample: int = 1) -> np.ndarray:
        n = self.modes * oversample
        return np.arange(n) * (self.period / n)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SpectralField:
    """One time slice of a periodic field, stored as Fourier coefficients."""

    grid: TorusGrid
    coeffs: np.ndarray
    real: bool = False
    mean_zero: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.shape != (self.grid.modes,):
            raise ValueError(
                f"expected {self.grid.modes} coefficients, got shape {c.shape}"
            )
        object.__setattr__(self, "coeffs", _frozen(c))
        if self.mean_zero and self.coeffs[0] != 0:
            raise ValueError("field flagged mean-zero has a nonzero mean coefficient")

    def replace(self, coeffs, real=None, mean_zero=None) -> "SpectralField":
        return SpectralField(
            self.grid,
            coeffs,
            real=self.real if real is None else real,
            mean_zero=(coeffs[0] == 0) if mean_zero is None else mean_zero,
        )

    @classmethod
    def zeros(cls, grid: TorusGrid, real: bool = True) -> "SpectralField":
        return cls(grid, np.zeros(grid.modes), real=real, mean_zero=True)

    @classmethod
    def from_modes(cls, grid: TorusGrid, modes: dict, real=None) -> "SpectralField":
        """Build a field from ``{wavenumber: coefficient}`` (wavenumber = xi * period)."""
        c = np.zeros(grid.modes, dtype=complex)
        for k, v in modes.items():
            c[_index(grid, k)] = v
        f = cls(grid, c, real=False, mean_zero=c[0] == 0)
        if real is None:
            real = _is_conjugate_symmetric(c)
        return f.replace(c, real=real)

    def __add__(self, other):
        _check_same_grid(self, other)
        return self.replace(self.coeffs + other.coeffs, real=self.real and other.real)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return self.replace(self.coeffs - other.coeffs, real=self.real and other.real)

    def __mul__(self, c):
        c = complex(c)
        return self.replace(self.coeffs * c, real=self.real and c.imag == 0)

    __rmul__ = __mul__

    def coefficient(self, k: int) -> complex:
        return complex(self.coeffs[_index(self.grid, k)])


def _index(grid: TorusGrid, k: int) -> int:
    k = int(k)
    M = grid.modes
    if not -M // 2 < k <= M // 2:
        raise IndexError(f"wavenumber {k} outside grid of {M} modes")
    return k % M


def _check_same_grid(a: SpectralField, b: SpectralField):
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


def _is_conjugate_symmetric(c: np.ndarray, rtol: float = 1e-12) -> bool:
    M = c.size
    scale = max(np.max(np.abs(c)), 1e-300)
    mirrored = np.conj(c[(-np.arange(M)) % M])
    body = np.abs(c - mirrored)
    body[M // 2] = abs(c[M // 2].imag)
    return bool(np.max(body) <= rtol * scale)


# ---------------------------------------------------------------------------
# the I-operator symbol


# quintic Hermite blend on 1 <= |x| <= 2; C^2 joins to 1 and to 1/|x|
_M_COEFFS = (1.0, 0.0, 0.0, -31.0 / 8.0, 11.0 / 2.0, -17.0 / 8.0)


def m_symbol(x):
    """The smooth symbol m: 1 on |x| <= 1, 1/|x| on |x| >= 2."""
    ax = np.abs(np.asarray(x, dtype=float))
    t = np.clip(ax - 1.0, 0.0, 1.0)
    blend = np.polynomial.polynomial.polyval(t, _M_COEFFS)
    out = np.where(ax <= 1.0, 1.0, np.where(ax >= 2.0, 1.0 / np.maximum(ax, 2.0), blend))
    return out if out.ndim else float(out)


def m_symbol_derivative(x):
    """d/d|x| of m, evaluated at |x|."""
    ax = np.abs(np.asarray(x, dtype=float))
    t = np.clip(ax - 1.0, 0.0, 1.0)
    dcoef = np.polynomial.polynomial.polyder(_M_COEFFS)
    blend = np.polynomial.polynomial.polyval(t, dcoef)
    out = np.where(ax <= 1.0, 0.0, np.where(ax >= 2.0, -1.0 / np.maximum(ax, 2.0) ** 2, blend))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MultiplierSymbol:
    """I_N^alpha: the Fourier multiplier m(xi / N) ** alpha."""

    alpha: float
    cutoff: float
    interpolant: str = dc_field(default="quintic-hermite", compare=False)

    def __post_init__(self):
        if not self.cutoff > 0:
            raise ValueError(f"cutoff must be positive, got {self.cutoff}")

    def __call__(self, xi):
        return m_symbol(np.asarray(xi, dtype=float) / self.cutoff) ** self.alpha


# ---------------------------------------------------------------------------
# transforms


def synthesize(field: SpectralField, points) -> np.ndarray:
    """Evaluate the trigonometric polynomial at arbitrary points."""
    x = np.atleast_1d(np.asarray(points, dtype=float))
    g = field.grid
    c = field.coeffs.copy()
    xi = g.frequencies
    nyq = c[g.nyquist]
    c[g.nyquist] = 0
    phase = np.exp(2j * np.pi * np.outer(x, xi))
    vals = phase @ c
    vals = vals + nyq * np.cos(2 * np.pi * xi[g.nyquist] * x)
    return vals / g.period


def analyze(samples, grid: TorusGrid, real=None) -> SpectralField:
    """Coefficients of the unique grid-band-limited field matching ``samples``."""
    samples = np.asarray(samples)
    if samples.shape != (grid.modes,):
        raise ValueError(
            f"expected {grid.modes} samples on the uniform grid, got shape {samples.shape}"
        )
    if real is None:
        real = not np.iscomplexobj(samples)
    c = np.fft.fft(samples) * (grid.period / grid.modes)
    if real:
        c = _enforce_real(c)
    return SpectralField(grid, c, real=real, mean_zero=c[0] == 0)


def _enforce_real(c: np.ndarray) -> np.ndarray:
    M = c.size
    c = 0.5 * (c + np.conj(c[(-np.arange(M)) % M]))
    c[M // 2] = c[M // 2].real
    return c


def pad_coeffs(c: np.ndarray, size: int) -> np.ndarray:
    """Zero-pad FFT-ordered coefficients to ``size`` entries; the Nyquist mode is split evenly."""
    M = c.shape[-1]
    if size < M:
        raise ValueError("pad size smaller than mode count")
    out = np.zeros(c.shape[:-1] + (size,), dtype=complex)
    h = M // 2
    out[..., :h] = c[..., :h]
    out[..., size - h + 1:] = c[..., h + 1:]
    if size == M:
        out[..., h] = c[..., h]
    else:
        out[..., h] = 0.5 * c[..., h]
        out[..., size - h] = 0.5 * c[..., h]
    return out


def truncate_coeffs(C: np.ndarray, modes: int, keep_nyquist: bool = False) -> np.ndarray:
    """Inverse of :func:`pad_coeffs` for band-limited data; drops the Nyquist mode by default."""
    L = C.shape[-1]
    h = modes // 2
    out = np.zeros(C.shape[:-1] + (modes,), dtype=complex)
    out[..., :h] = C[..., :h]
    out[..., h + 1:] = C[..., L - h + 1:]
    if keep_nyquist:
        out[..., h] = C[..., h] + C[..., L - h] if L > modes else C[..., h]
    return out


def to_physical(field: SpectralField, size: int | None = None) -> np.ndarray:
    """Values on the uniform grid of ``size`` points (default: the mode count)."""
    g = field.grid
    size = g.modes if size is None else size
    vals = np.fft.ifft(pad_coeffs(field.coeffs, size)) * (size / g.period)
    return vals.real if field.real else vals


def from_physical(samples, grid: TorusGrid, real: bool = False, keep_nyquist=False) -> SpectralField:
    """Project oversampled physical values back to the grid's modes."""
    samples = np.asarray(samples)
    L = samples.shape[-1]
    C = np.fft.fft(samples) * (grid.period / L)
    c = truncate_coeffs(C, grid.modes, keep_nyquist=keep_nyquist)
    if real:
        c = _enforce_real(c)
    return SpectralField(grid, c, real=real, mean_zero=c[0] == 0)


# ---------------------------------------------------------------------------
# multipliers


def project_mean_zero(field: SpectralField) -> SpectralField:
    c = field.coeffs.copy()
    c[0] = 0
    return field.replace(c, mean_zero=True)


def airy_propagate(field: SpectralField, t: float) -> SpectralField:
    """Free Airy flow: multiply mode xi by exp(2 pi i xi^3 t).

    For real fields the Nyquist cosine is left untouched, which keeps the
    flow a real isometric group on the grid.
    """
    xi = field.grid.frequencies
    mult = np.exp(2j * np.pi * xi**3 * t)
    if field.real:
        mult[field.grid.nyquist] = 1.0
    return field.replace(field.coeffs * mult)


def apply_I(field: SpectralField, sym: MultiplierSymbol) -> SpectralField:
    return field.replace(field.coeffs * sym(field.grid.frequencies))


def translate(field: SpectralField, shift) -> SpectralField:
    """x -> u(x - shift), as an exact phase rotation (Nyquist cosine untouched)."""
    xi = field.grid.frequencies
    mult = np.exp(-2j * np.pi * xi * shift)
    if field.real:
        mult[field.grid.nyquist] = 1.0
    return field.replace(field.coeffs * mult)


def derivative(field: SpectralField, order: int = 1) -> SpectralField:
    xi = field.grid.frequencies.copy()
    xi[field.grid.nyquist] = 0.0
    return field.replace(field.coeffs * (2j * np.pi * xi) ** order)


def rescale_field(field: SpectralField, lam: float) -> SpectralField:
    """u0 -> lam^{-2/3} u0(x / lam), moving from period 1 to period lam.

    Mode k of the input becomes mode k / lam; with this transform
    normalization its coefficient picks up lam^{1/3}.
    """
    if lam < 1:
        raise ValueError(f"rescaling factor must be >= 1, got {lam}")
    if field.grid.period != 1.0:
        raise ValueError("rescale_field expects a field on the unit torus")
    grid = TorusGrid(lam, field.grid.modes)
    return SpectralField(grid, field.coeffs * lam ** (1.0 / 3.0), field.real, field.mean_zero)


def rescale_inverse(field: SpectralField, lam: float) -> SpectralField:
    if lam < 1:
        raise ValueError(f"rescaling factor must be >= 1, got {lam}")
    if not np.isclose(field.grid.period, lam, rtol=1e-15, atol=0):
        raise ValueError("field period does not match the rescaling factor")
    grid = TorusGrid(1.0, field.grid.modes)
    return SpectralField(grid, field.coeffs * lam ** (-1.0 / 3.0), field.real, field.mean_zero)


def random_field(grid: TorusGrid, decay: float, seed: int) -> SpectralField:
    """Real mean-zero field, complex Gaussian modes with E|c|^2 = <xi>^{-2 decay}."""
    if decay < 0:
        raise ValueError("decay must be nonnegative")
    rng = np.random.default_rng(seed)
    M = grid.modes
    h = M // 2
    xi = grid.frequencies[1:h]
    z = (rng.standard_normal(h - 1) + 1j * rng.standard_normal(h - 1)) / np.sqrt(2.0)
    c = np.zeros(M, dtype=complex)
    c[1:h] = z * bracket(xi) ** (-decay)
    c[h + 1:] = np.conj(c[1:h][::-1])
    return SpectralField(grid, c, real=True, mean_zero=True)


def hs_norm(field: SpectralField, s: float) -> float:
    g = field.grid
    w = bracket(g.frequencies) ** (2 * s)
    return float(np.sqrt(np.sum(w * np.abs(field.coeffs) ** 2) / g.period))


def l2_norm(field: SpectralField) -> float:
    return float(np.sqrt(np.sum(np.abs(field.coeffs) ** 2) / field.grid.period))
