"""Sparse space-time trigonometric sums.

A :class:`WaveSum` represents

    u(x, t) = eta(t)**power * (1 / period) * sum_j amp_j exp(2 pi i (xi_j x + omega_j t))

with xi_j = k_j / period and omega_j = w_j / period**3 for integers k_j, w_j.
Free Airy waves have w = k**3, and products of them keep integer numerators,
so resonance (omega = xi**3) is decided exactly.  Space-time norms are
computed from the closed-form spectrum  sum_j amp_j * eta_hat_p(tau - omega_j),
which stays accurate at frequencies far beyond anything a sampled time grid
could resolve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SpectralField, TorusGrid, bracket
from .window import SPECTRAL_RADIUS, bump, bump_transform

_SIGMA_STEP = 1.0 / 32.0


@dataclass(frozen=True)
class WaveSum:
    period: float
    k: np.ndarray
    w: np.ndarray
    amp: np.ndarray
    power: int = 1

    def __post_init__(self):
        k = np.asarray(self.k, dtype=np.int64)
        w = np.asarray(self.w, dtype=np.int64)
        amp = np.asarray(self.amp, dtype=complex)
        if not (k.shape == w.shape == amp.shape) or k.ndim != 1:
            raise ValueError("k, w, amp must be 1-d arrays of equal length")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "amp", amp)

    @classmethod
    def free(cls, field: SpectralField, power: int = 1) -> "WaveSum":
        """eta(t)**power * S(t) field, one term per nonzero mode."""
        g = field.grid
        k = g.wavenumbers.astype(np.int64)
        c = field.coeffs.copy()
        h = g.nyquist
        if c[h] != 0:
            # Nyquist cosine = half-amplitude waves at +-M/2
            k = np.append(k, -h)
            c = np.append(c, 0.5 * c[h])
            c[h] *= 0.5
        keep = c != 0
        return cls(g.period, k[keep], k[keep] ** 3, c[keep], power).combined()

    @classmethod
    def from_terms(cls, period, terms, power=1) -> "WaveSum":
        """``terms``: iterable of (k, w, amp)."""
        terms = list(terms)
        if not terms:
            return cls(period, [], [], [], power)
        k, w, a = zip(*terms)
        return cls(period, k, w, a, power).combined()

    def __len__(self):
        return self.k.size

    def combined(self) -> "WaveSum":
        """Merge terms sharing (k, w) and drop exact zeros."""
        if self.k.size == 0:
            return self
        keys = np.stack([self.k, self.w])
        uniq, inv = np.unique(keys, axis=1, return_inverse=True)
        amp = np.zeros(uniq.shape[1], dtype=complex)
        np.add.at(amp, inv.ravel(), self.amp)
        keep = amp != 0
        return WaveSum(self.period, uniq[0, keep], uniq[1, keep], amp[keep], self.power)

    def scaled(self, c) -> "WaveSum":
        return WaveSum(self.period, self.k, self.w, self.amp * c, self.power)

    def __add__(self, other: "WaveSum") -> "WaveSum":
        self._check(other)
        if self.power != other.power:
            raise ValueError("cannot add wave sums with different envelopes")
        return WaveSum(
            self.period,
            np.concatenate([self.k, other.k]),
            np.concatenate([self.w, other.w]),
            np.concatenate([self.amp, other.amp]),
            self.power,
        ).combined()

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, WaveSum):
            return self.scaled(other)
        self._check(other)
        k = np.add.outer(self.k, other.k).ravel()
        w = np.add.outer(self.w, other.w).ravel()
        a = np.multiply.outer(self.amp, other.amp).ravel() / self.period
        return WaveSum(self.period, k, w, a, self.power + other.power).combined()

    __rmul__ = scaled

    def _check(self, other):
        if self.period != other.period:
            raise ValueError("period mismatch")

    def dx(self) -> "WaveSum":
        return WaveSum(self.period, self.k, self.w, self.amp * (2j * np.pi * self.k / self.period), self.power)

    def mean_zero(self) -> "WaveSum":
        keep = self.k != 0
        return WaveSum(self.period, self.k[keep], self.w[keep], self.amp[keep], self.power)

    @property
    def xi(self):
        return self.k / self.period

    @property
    def omega(self):
        return self.w / self.period**3

    @property
    def modulation(self):
        """omega - xi**3 per term (exact integers scaled by period**-3)."""
        return (self.w - self.k**3) / self.period**3

    def evaluate(self, x, t):
        """u(x, t) on the outer grid x by t (shape len(t) x len(x))."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = np.atleast_1d(np.asarray(t, dtype=float))
        ph_x = np.exp(2j * np.pi * np.outer(self.xi, x))
        ph_t = np.exp(2j * np.pi * np.outer(t, self.omega))
        vals = (ph_t * self.amp) @ ph_x / self.period
        if self.power:
            vals = vals * (bump(t) ** self.power)[:, None]
        return vals

    def coefficients_at(self, t: float, grid: TorusGrid) -> SpectralField:
        """Spatial coefficients at time t, placed on ``grid`` (out-of-band terms raise)."""
        if grid.period != self.period:
            raise ValueError("grid period mismatch")
        h = grid.nyquist
        if np.any(np.abs(self.k) > h) or np.any(self.k == -h):
            raise ValueError(f"wave sum has modes outside a grid of {grid.modes} modes")
        c = np.zeros(grid.modes, dtype=complex)
        vals = self.amp * np.exp(2j * np.pi * self.omega * t)
        if self.power:
            vals = vals * bump(t) ** self.power
        np.add.at(c, self.k % grid.modes, vals)
        return SpectralField(grid, c, real=False, mean_zero=c[0] == 0)

    # ------------------------------------------------------------------
    # space-time norms from the closed-form spectrum

    def _clusters(self):
        """Yield (xi, sigma grid, spectrum on that grid) per spatial mode."""
        if self.power < 1:
            raise ValueError("space-time norms need a windowed wave sum (power >= 1)")
        ws = self.combined()
        if len(ws) == 0:
            return
        order = np.lexsort((ws.w, ws.k))
        k, sig, amp = ws.k[order], ws.modulation[order], ws.amp[order]
        B = SPECTRAL_RADIUS
        h = _SIGMA_STEP
        width = int(round(2 * B / h)) + 1
        offs = np.arange(width) * h - B
        starts = np.flatnonzero(np.r_[True, k[1:] != k[:-1]])
        ends = np.r_[starts[1:], k.size]
        for a, b in zip(starts, ends):
            xi = k[a] / self.period
            s_k, a_k = sig[a:b], amp[a:b]
            order_s = np.argsort(s_k, kind="stable")
            s_k, a_k = s_k[order_s], a_k[order_s]
            cuts = np.flatnonzero(np.diff(s_k) > 2 * B) + 1
            for grp_s, grp_a in zip(np.split(s_k, cuts), np.split(a_k, cuts)):
                lo = np.floor((grp_s[0] - B) / h) * h
                n = int(np.ceil((grp_s[-1] + B - lo) / h)) + 2
                grid = lo + np.arange(n) * h
                spec = np.zeros(n, dtype=complex)
                for s_j, a_j in zip(grp_s, grp_a):
                    i0 = int(np.floor((s_j - B - lo) / h))
                    i0 = max(i0, 0)
                    idx = np.arange(i0, min(i0 + width + 1, n))
                    spec[idx] += a_j * bump_transform(grid[idx] - s_j, self.power)
                yield xi, grid, spec

    def norm_parts(self, s: float, b_values=()) -> dict:
        """Weighted spectral integrals needed by the X/Y/Z norms.

        Returns squared X^{s,b} norms for each b in ``b_values`` plus the
        L^2_xi L^1_tau pieces ``l1`` (unweighted in tau) and ``l1_inv``
        (weighted by 1/<tau - xi^3>), all with the <xi>^s weight.
        """
        h = _SIGMA_STEP
        xs = {b: 0.0 for b in b_values}
        per_xi_l1: dict = {}
        per_xi_l1inv: dict = {}
        for xi, sigma, spec in self._clusters():
            wx = bracket(xi) ** (2 * s)
            mag = np.abs(spec)
            br = bracket(sigma)
            for b in b_values:
                xs[b] += wx * np.sum(mag**2 * br ** (2 * b)) * h
            per_xi_l1[xi] = per_xi_l1.get(xi, 0.0) + np.sum(mag) * h
            per_xi_l1inv[xi] = per_xi_l1inv.get(xi, 0.0) + np.sum(mag / br) * h
        l1 = sum(bracket(xi) ** (2 * s) * v**2 for xi, v in per_xi_l1.items())
        l1inv = sum(bracket(xi) ** (2 * s) * v**2 for xi, v in per_xi_l1inv.items())
        lam = self.period
        return {
            "x2": {b: v / lam for b, v in xs.items()},
            "l1": l1 / lam,
            "l1_inv": l1inv / lam,
        }


def duhamel_at(ws: WaveSum, t: float) -> WaveSum:
    """int_0^t S(t - t') F(t') dt' for an unwindowed wave sum F, as a time-t snapshot.

    The result is returned as a wave sum with w = k**3 whose amplitudes are
    the coefficients at time t rotated back by the free phase, so that
    ``result.coefficients_at(t, grid)`` gives the spatial field.
    """
    if ws.power != 0:
        raise ValueError("closed-form Duhamel integral needs an unwindowed sum")
    lam3 = ws.period**3
    mis = ws.w - ws.k**3
    resonant = mis == 0
    dw = np.where(resonant, 1, mis) / lam3
    # coefficient at time t = amp * e^{2 pi i xi^3 t} * factor
    factor = np.where(
        resonant,
        t,
        (np.exp(2j * np.pi * dw * t) - 1.0) / (2j * np.pi * dw),
    )
    return WaveSum(ws.period, ws.k, ws.k**3, ws.amp * factor, 0).combined()
