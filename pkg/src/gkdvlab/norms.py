"""Space-time fields, their windowed transform, and every norm used in the lab.

The time transform is taken in the modulation frame: for each spatial mode
the profile exp(-2 pi i xi^3 t) u_hat(xi, t) is transformed, so that its
frequency variable is sigma = tau - xi^3 directly.  This is an exact change
of variable (u_hat(xi, sigma + xi^3) is the profile's transform at sigma) and
keeps the sampling requirement tied to the slow dynamics rather than to the
dispersion.  ``frame="lab"`` gives the plain transform on a tau grid shared by
all modes.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .spectral import SpectralField, TorusGrid, bracket, hs_norm, pad_coeffs
from .waves import WaveSum
from .window import bump

__all__ = [
    "SpaceTimeField",
    "SpaceTimeSpectrum",
    "NormSpec",
    "WindowError",
    "spacetime_transform",
    "norm",
    "duality_pairing",
    "physical_values",
]

NORM_KINDS = ("Hs", "Xsb", "Ys", "Zs", "LqtLrx", "Lpxt")


class WindowError(ValueError):
    """The sampled time window cannot support the requested operation."""


@dataclass(frozen=True)
class SpaceTimeField:
    """Coefficients u_hat(xi, t_n) on t_n = t0 + n * dt, n < len(coeffs).

    ``window="bump"`` means the field is multiplied by eta(t) before any
    space-time transform or Lebesgue norm; ``"none"`` means the samples are
    used as they are (already cut off by the caller).
    """

    grid: TorusGrid
    t0: float
    dt: float
    coeffs: np.ndarray
    window: str = "bump"
    real: bool = True

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex, copy=True)
        if c.ndim != 2 or c.shape[1] != self.grid.modes:
            raise ValueError(f"coeffs must have shape (n_times, {self.grid.modes})")
        if c.shape[0] < 2:
            raise ValueError("need at least two time samples")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.window not in ("bump", "none"):
            raise ValueError(f"unknown window {self.window!r}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def n_times(self) -> int:
        return self.coeffs.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_times)

    @property
    def t1(self) -> float:
        return self.t0 + self.dt * self.n_times

    @property
    def window_length(self) -> float:
        return self.dt * self.n_times

    def slice(self, n: int) -> SpectralField:
        c = self.coeffs[n]
        return SpectralField(self.grid, c, real=self.real, mean_zero=c[0] == 0)

    @property
    def slices(self) -> list[SpectralField]:
        return [self.slice(n) for n in range(self.n_times)]

    def index_of(self, t: float, tol: float = 1e-9) -> int:
        n = (t - self.t0) / self.dt
        i = int(round(n))
        if abs(n - i) > tol or not 0 <= i < self.n_times:
            raise WindowError(f"time {t} is not a sample of this field")
        return i

    def windowed(self) -> np.ndarray:
        if self.window == "bump":
            return self.coeffs * bump(self.times)[:, None]
        return self.coeffs

    def describe(self) -> dict:
        return {
            "t0": self.t0,
            "t1": self.t1,
            "dt": self.dt,
            "n_times": self.n_times,
            "window": self.window,
            "period": self.grid.period,
            "modes": self.grid.modes,
        }

    def replace(self, coeffs, window=None, real=None) -> "SpaceTimeField":
        return SpaceTimeField(
            self.grid,
            self.t0,
            self.dt,
            coeffs,
            self.window if window is None else window,
            self.real if real is None else real,
        )

    def __add__(self, other):
        self._check(other)
        return self.replace(self.coeffs + other.coeffs, real=self.real and other.real)

    def __sub__(self, other):
        self._check(other)
        return self.replace(self.coeffs - other.coeffs, real=self.real and other.real)

    def __mul__(self, c):
        c = complex(c)
        return self.replace(self.coeffs * c, real=self.real and c.imag == 0)

    __rmul__ = __mul__

    def _check(self, other):
        if (
            self.grid != other.grid
            or self.n_times != other.n_times
            or not np.isclose(self.t0, other.t0)
            or not np.isclose(self.dt, other.dt)
            or self.window != other.window
        ):
            raise ValueError("space-time fields live on different grids or windows")

    @classmethod
    def sample(
        cls,
        fn: Callable[[float], SpectralField],
        grid: TorusGrid,
        t0: float = -2.0,
        t1: float = 2.0,
        per_unit: int = 64,
        window: str = "bump",
    ) -> "SpaceTimeField":
        n = int(round((t1 - t0) * per_unit))
        dt = (t1 - t0) / n
        rows = []
        real = True
        for t in t0 + dt * np.arange(n):
            f = fn(t)
            rows.append(f.coeffs)
            real = real and f.real
        return cls(grid, t0, dt, np.array(rows), window, real)

    @classmethod
    def free_evolution(
        cls, u0: SpectralField, t0=-2.0, t1=2.0, per_unit=64, window="bump"
    ) -> "SpaceTimeField":
        """S(t) u0 sampled on the window (eta applied lazily when window='bump')."""
        n = int(round((t1 - t0) * per_unit))
        dt = (t1 - t0) / n
        t = t0 + dt * np.arange(n)
        xi = u0.grid.frequencies
        ph = np.exp(2j * np.pi * np.outer(t, xi**3))
        if u0.real:
            ph[:, u0.grid.nyquist] = 1.0
        return cls(u0.grid, t0, dt, ph * u0.coeffs, window, u0.real)

    @classmethod
    def from_waves(
        cls, ws: WaveSum, grid: TorusGrid, t0=-2.0, t1=2.0, per_unit=64, real: bool = False
    ) -> "SpaceTimeField":
        """Sample a wave sum (envelope included; window 'none')."""
        n = int(round((t1 - t0) * per_unit))
        dt = (t1 - t0) / n
        t = t0 + dt * np.arange(n)
        ws.coefficients_at(0.0, grid)  # band check
        vals = np.exp(2j * np.pi * np.outer(t, ws.omega)) * ws.amp
        if ws.power:
            vals *= (bump(t) ** ws.power)[:, None]
        rows = np.zeros((n, grid.modes), dtype=complex)
        np.add.at(rows.T, ws.k % grid.modes, vals.T)
        return cls(grid, t0, dt, rows, "none", real)


@dataclass(frozen=True)
class SpaceTimeSpectrum:
    """u_hat(xi, tau) on the spatial lattice times a uniform frequency grid.

    In the modulation frame ``values[j, i]`` is u_hat(xi_i, sigma_j + xi_i^3);
    in the lab frame it is u_hat(xi_i, sigma_j), i.e. ``sigma`` is tau itself.
    """

    grid: TorusGrid
    sigma: np.ndarray
    values: np.ndarray
    frame: str
    window: dict = dc_field(default_factory=dict)

    @property
    def dsigma(self) -> float:
        return float(self.sigma[1] - self.sigma[0]) if self.sigma.size > 1 else 1.0

    def tau(self) -> np.ndarray:
        """tau grid per mode, shape (n_sigma, modes)."""
        if self.frame == "lab":
            return np.broadcast_to(self.sigma[:, None], self.values.shape)
        return self.sigma[:, None] + self.grid.frequencies[None, :] ** 3

    def modulation(self) -> np.ndarray:
        """tau - xi^3 per sample, shape (n_sigma, modes)."""
        if self.frame == "modulation":
            return np.broadcast_to(self.sigma[:, None], self.values.shape)
        return self.sigma[:, None] - self.grid.frequencies[None, :] ** 3


def spacetime_transform(
    u: SpaceTimeField, frame: str = "modulation", require_support=False, time_pad: int = 1
) -> SpaceTimeSpectrum:
    """Windowed discrete-time transform, mode by mode.

    u_hat(xi, sigma_j) = dt * sum_n profile(xi, t_n) exp(-2 pi i sigma_j t_n),
    sigma_j = j / (time_pad * (t1 - t0)) on the symmetric FFT grid.  With
    ``time_pad > 1`` the (cut off) samples are zero-extended, refining the
    sigma grid without changing the data.
    """
    if u.window == "bump" and (u.t0 > -2.0 + 1e-12 or u.t1 < 2.0 - 1e-12):
        raise WindowError(f"window [{u.t0}, {u.t1}] does not contain the bump support [-2, 2]")
    if require_support and u.window == "none" and (u.t0 > -2.0 + 1e-12 or u.t1 < 2.0 - 1e-12):
        raise WindowError("X/Y/Z norms need a window containing [-2, 2]")
    if frame not in ("modulation", "lab"):
        raise ValueError(f"unknown frame {frame!r}")
    t = u.times
    prof = u.windowed()
    if frame == "modulation":
        prof = prof * np.exp(-2j * np.pi * np.outer(t, u.grid.frequencies**3))
    n = u.n_times * int(time_pad)
    sigma = np.fft.fftfreq(n, u.dt)
    vals = np.fft.fft(prof, n=n, axis=0) * u.dt
    vals *= np.exp(-2j * np.pi * sigma * u.t0)[:, None]
    order = np.argsort(sigma, kind="stable")
    meta = u.describe()
    meta["time_pad"] = int(time_pad)
    return SpaceTimeSpectrum(u.grid, sigma[order], vals[order], frame, meta)


@dataclass(frozen=True)
class NormSpec:
    kind: str
    s: float = 0.0
    b: float = 0.0
    p: float = 2.0
    q: float = 2.0
    r: float = 2.0

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}; expected one of {NORM_KINDS}")
        for name in ("p", "q", "r"):
            v = getattr(self, name)
            if not v >= 1:
                raise ValueError(f"Lebesgue exponent {name}={v} must lie in [1, inf]")

    def label(self) -> str:
        k = self.kind
        if k == "Xsb":
            return f"X^{{{self.s},{self.b}}}"
        if k in ("Hs", "Ys", "Zs"):
            return f"{k[0]}^{{{self.s}}}"
        if k == "LqtLrx":
            return f"L^{self.q}_t L^{self.r}_x"
        return f"L^{self.p}_{{x,t}}"


def _xsb_sq(spec: SpaceTimeSpectrum, s, b) -> float:
    g = spec.grid
    w = bracket(g.frequencies)[None, :] ** (2 * s) * bracket(spec.modulation()) ** (2 * b)
    return float(np.sum(np.abs(spec.values) ** 2 * w) * spec.dsigma / g.period)


def _l2l1(spec: SpaceTimeSpectrum, s, inv_mod: bool) -> float:
    g = spec.grid
    mag = np.abs(spec.values)
    if inv_mod:
        mag = mag / bracket(spec.modulation())
    inner = np.sum(mag, axis=0) * spec.dsigma
    return float(np.sqrt(np.sum(bracket(g.frequencies) ** (2 * s) * inner**2) / g.period))


def physical_values(u: SpaceTimeField, oversample: int = 2) -> np.ndarray:
    """Windowed samples u(x_j, t_n) on an oversampled spatial grid, shape (n_times, M*oversample)."""
    L = u.grid.modes * oversample
    vals = np.fft.ifft(pad_coeffs(u.windowed(), L), axis=1) * (L / u.grid.period)
    return vals.real if u.real else vals


def _lebesgue(vals: np.ndarray, dx: float, dt: float, q: float, r: float) -> float:
    a = np.abs(vals)
    if np.isinf(r):
        inner = np.max(a, axis=1)
    else:
        inner = (np.sum(a**r, axis=1) * dx) ** (1.0 / r)
    if np.isinf(q):
        return float(np.max(inner))
    return float((np.sum(inner**q) * dt) ** (1.0 / q))


def norm(u, spec: NormSpec, oversample: int = 2, time_pad: int = 1) -> float:
    """Discretized norm of a SpectralField, SpaceTimeField or WaveSum."""
    k = spec.kind
    if isinstance(u, SpectralField):
        if k != "Hs":
            raise TypeError(f"a single time slice only supports Hs norms, not {k}")
        return hs_norm(u, spec.s)
    if isinstance(u, WaveSum):
        return _wave_norm(u, spec)
    if not isinstance(u, SpaceTimeField):
        raise TypeError(f"cannot take a norm of {type(u).__name__}")
    if k == "Hs":
        raise TypeError("Hs norms apply to SpectralField slices; use LqtLrx for space-time fields")
    if k in ("LqtLrx", "Lpxt"):
        vals = physical_values(u, oversample)
        dx = u.grid.period / vals.shape[1]
        q, r = (spec.q, spec.r) if k == "LqtLrx" else (spec.p, spec.p)
        return _lebesgue(vals, dx, u.dt, q, r)
    st = spacetime_transform(u, require_support=True, time_pad=time_pad)
    if k == "Xsb":
        return float(np.sqrt(_xsb_sq(st, spec.s, spec.b)))
    if k == "Ys":
        return float(np.sqrt(_xsb_sq(st, spec.s, 0.5))) + _l2l1(st, spec.s, inv_mod=False)
    return float(np.sqrt(_xsb_sq(st, spec.s, -0.5))) + _l2l1(st, spec.s, inv_mod=True)


def _wave_norm(u: WaveSum, spec: NormSpec) -> float:
    k = spec.kind
    if k == "Xsb":
        parts = u.norm_parts(spec.s, (spec.b,))
        return float(np.sqrt(parts["x2"][spec.b]))
    if k == "Ys":
        parts = u.norm_parts(spec.s, (0.5,))
        return float(np.sqrt(parts["x2"][0.5]) + np.sqrt(parts["l1"]))
    if k == "Zs":
        parts = u.norm_parts(spec.s, (-0.5,))
        return float(np.sqrt(parts["x2"][-0.5]) + np.sqrt(parts["l1_inv"]))
    raise TypeError(f"{k} norms of wave sums: sample them with SpaceTimeField.from_waves first")


def duality_pairing(u: SpaceTimeField, v: SpaceTimeField):
    """int int chi_[0,1](t) u v dx dt: Parseval in x, trapezoid in t."""
    if u.grid != v.grid or u.n_times != v.n_times or not np.isclose(u.t0, v.t0) or not np.isclose(u.dt, v.dt):
        raise ValueError("pairing needs fields on the same grid and time samples")
    i0, i1 = u.index_of(0.0), u.index_of(1.0)
    cu, cv = u.windowed()[i0:i1 + 1], v.windowed()[i0:i1 + 1]
    M = u.grid.modes
    neg = (-np.arange(M)) % M
    spatial = np.sum(cu * cv[:, neg], axis=1) / u.grid.period
    val = np.trapezoid(spatial, dx=u.dt) if hasattr(np, "trapezoid") else np.trapz(spatial, dx=u.dt)
    if u.real and v.real:
        return float(val.real)
    return complex(val)
