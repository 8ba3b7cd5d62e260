"""Pseudospectral integration of u_t + (1/4 pi^2) u_xxx + F(u)_x = 0 on R / period Z.

Time stepping is integrating-factor RK4: the Airy part exp(2 pi i xi^3 t) is
applied exactly per mode, the nonlinear flux by classical RK4.  Products are
formed on a zero-padded physical grid large enough that the retained modes
are alias-free, then truncated back (the Nyquist mode is never populated).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from . import snapshot
from .report import ExperimentReport
from .spectral import (
    SpectralField,
    TorusGrid,
    l2_norm,
    pad_coeffs,
    translate,
    truncate_coeffs,
)

log = logging.getLogger(__name__)

BLOWUP_THRESHOLD = 1e12


class BlowUpError(RuntimeError):
    def __init__(self, t: float, reason: str = "coefficient overflow"):
        super().__init__(f"solution blew up at t={t:.6g} ({reason})")
        self.t = t


def _oversample_for(degree: int) -> int:
    # alias-free retained modes for a degree-d product: L >= (d + 1) M / 2
    return max(2, math.ceil((degree + 1) / 2))


@dataclass(frozen=True)
class GkdvProblem:
    """Cauchy problem for periodic gKdV.

    ``nonlinearity`` lists polynomial coefficients of F in increasing degree,
    e.g. ``[0, 0, 1]`` for F(u) = u^2 and ``[0, 0, 0, 0, 0.25]`` for u^4 / 4.
    """

    grid: TorusGrid
    nonlinearity: Sequence[float]
    u0: SpectralField
    horizon: float
    dt: float
    gauge: bool = False
    forcing: Optional[Callable[[float], np.ndarray]] = dc_field(default=None, compare=False)
    save_every: int = 1

    def __post_init__(self):
        F = np.trim_zeros(np.asarray(self.nonlinearity, dtype=float), "b")
        if F.size and (F.size < 3 or np.any(F[:2] != 0)):
            raise ValueError("F must have degree >= 2 and no constant or linear term")
        object.__setattr__(self, "nonlinearity", tuple(float(c) for c in F))
        if self.u0.grid != self.grid:
            raise ValueError("initial data lives on a different grid")
        if not self.u0.real:
            raise ValueError("initial data must be a real field")
        if not (self.dt > 0 and self.horizon > 0):
            raise ValueError("dt and horizon must be positive")
        if self.save_every < 1:
            raise ValueError("save_every must be >= 1")

    @property
    def degree(self) -> int:
        return max(len(self.nonlinearity) - 1, 0)

    @property
    def n_steps(self) -> int:
        return math.ceil(self.horizon / self.dt - 1e-9)

    def flux_derivative(self) -> np.ndarray:
        """Coefficients of F'."""
        if not self.nonlinearity:
            return np.zeros(1)
        return P.polyder(np.asarray(self.nonlinearity))

    def potential(self) -> np.ndarray:
        """Coefficients of the antiderivative of F (the Hamiltonian potential)."""
        if not self.nonlinearity:
            return np.zeros(1)
        return P.polyint(np.asarray(self.nonlinearity))


QUINTIC = (0.0, 0.0, 0.0, 0.0, 0.25)  # F(u) = u^4 / 4, i.e. F'(u) = u^3


def _physical(c: np.ndarray, L: int, period: float) -> np.ndarray:
    return (np.fft.ifft(pad_coeffs(c, L)) * (L / period)).real


def _spectral(vals: np.ndarray, M: int, period: float) -> np.ndarray:
    L = vals.shape[-1]
    return truncate_coeffs(np.fft.fft(vals) * (period / L), M)


class _Rhs:
    """Nonlinear part of the right-hand side in coefficient space (batched over leading axes)."""

    def __init__(self, problem: GkdvProblem):
        g = problem.grid
        self.M, self.period = g.modes, g.period
        xi = g.frequencies.copy()
        xi[g.nyquist] = 0.0
        self.ik = 2j * np.pi * xi
        self.F = np.asarray(problem.nonlinearity) if problem.nonlinearity else None
        self.dF = problem.flux_derivative()
        self.gauge = problem.gauge
        self.L = self.M * _oversample_for(problem.degree)
        self.forcing = problem.forcing

    def __call__(self, c: np.ndarray, t: float) -> np.ndarray:
        if self.F is None:
            out = np.zeros_like(c)
        elif self.gauge:
            u = _physical(c, self.L, self.period)
            ux = _physical(self.ik * c, self.L, self.period)
            a = P.polyval(u, self.dF)
            a -= a.mean(axis=-1, keepdims=True)
            out = -_spectral(a * ux, self.M, self.period)
            out[..., 0] = 0.0
        else:
            u = _physical(c, self.L, self.period)
            out = -self.ik * _spectral(P.polyval(u, self.F), self.M, self.period)
        if self.forcing is not None:
            out = out + self.forcing(t)
        return out


def _linear_multiplier(grid: TorusGrid, dt: float) -> np.ndarray:
    xi = grid.frequencies
    E = np.exp(2j * np.pi * xi**3 * dt)
    E[grid.nyquist] = 1.0
    return E


def _ifrk4(c, t, dt, rhs, E_half, E_full):
    k1 = rhs(c, t)
    k2 = rhs(E_half * (c + 0.5 * dt * k1), t + 0.5 * dt)
    k3 = rhs(E_half * c + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = rhs(E_full * c + dt * E_half * k3, t + dt)
    return E_full * c + (dt / 6.0) * (E_full * k1 + 2.0 * E_half * (k2 + k3) + k4)


def _check_finite(c: np.ndarray, t: float):
    if not np.all(np.isfinite(c)):
        raise BlowUpError(t, "non-finite coefficient")
    if np.max(np.abs(c)) > BLOWUP_THRESHOLD:
        raise BlowUpError(t)


def step(state: SpectralField, problem: GkdvProblem, t: float = 0.0) -> SpectralField:
    """Advance ``state`` by one step of size ``problem.dt``."""
    if state.grid != problem.grid:
        raise ValueError("state lives on a different grid")
    rhs = _Rhs(problem)
    dt = problem.dt
    c = _ifrk4(
        state.coeffs,
        t,
        dt,
        rhs,
        _linear_multiplier(problem.grid, 0.5 * dt),
        _linear_multiplier(problem.grid, dt),
    )
    _check_finite(c, t + dt)
    return state.replace(c, real=state.real)


def hamiltonian(v: SpectralField, potential: Optional[np.ndarray] = None) -> float:
    """H(v) = int (1/8 pi^2) v_x^2 - G(v) dx, with G(v) = v^5 / 20 by default."""
    if not v.real:
        raise ValueError("the Hamiltonian is defined for real fields")
    parts = energy_parts(v, potential)
    return parts[0] - parts[1]


def energy_parts(v: SpectralField, potential: Optional[np.ndarray] = None) -> tuple[float, float]:
    """(kinetic, potential) pieces of the Hamiltonian."""
    g = v.grid
    xi = g.frequencies
    kinetic = float(np.sum(xi**2 * np.abs(v.coeffs) ** 2) / (2.0 * g.period))
    G = np.array([0, 0, 0, 0, 0, 1.0 / 20.0]) if potential is None else np.asarray(potential)
    deg = max(len(G) - 1, 1)
    L = g.modes * _oversample_for(deg)
    u = _physical(v.coeffs, L, g.period)
    pot = float(np.mean(P.polyval(u, G)) * g.period)
    return kinetic, pot


@dataclass
class Trajectory:
    problem: GkdvProblem
    times: np.ndarray
    coeffs: np.ndarray
    diagnostics: dict
    gauged: bool = False
    shift: Optional[np.ndarray] = None

    def __len__(self):
        return self.times.size

    def snapshot(self, i: int) -> SpectralField:
        c = self.coeffs[i]
        return SpectralField(self.problem.grid, c, real=True, mean_zero=c[0] == 0)

    @property
    def snapshots(self) -> list[SpectralField]:
        return [self.snapshot(i) for i in range(len(self))]

    @property
    def final(self) -> SpectralField:
        return self.snapshot(len(self) - 1)

    def diagnostics_rows(self):
        d = self.diagnostics
        for i, t in enumerate(self.times):
            yield {"t": float(t), "mean": d["mean"][i], "l2": d["l2"][i], "hamiltonian": d["hamiltonian"][i]}

    def to_report(self, name: str = "solve") -> ExperimentReport:
        """Snapshots as one GKDV1 stream plus the diagnostics table."""
        p = self.problem
        rep = ExperimentReport(
            name,
            metadata={
                "grid": {"period": p.grid.period, "modes": p.grid.modes},
                "nonlinearity": list(p.nonlinearity),
                "horizon": p.horizon,
                "dt": p.dt,
                "gauge": p.gauge,
                "save_every": p.save_every,
            },
        )
        tab = rep.table(
            "diagnostics",
            ["t", "mean", "l2", "hamiltonian"],
            units={
                "t": ("time", "snapshot time"),
                "mean": ("amplitude", "zero Fourier coefficient"),
                "l2": ("L2 norm", "Parseval sum"),
                "hamiltonian": ("energy", "kinetic minus potential"),
            },
        )
        for r in self.diagnostics_rows():
            tab.add(r["t"], float(r["mean"]), float(r["l2"]), float(r["hamiltonian"]))
        rep.attachments["trajectory.gkdv"] = b"".join(snapshot.encode(f) for f in self.snapshots)
        d = self.diagnostics
        rep.summary.update(
            {
                "snapshots": len(self),
                "final_time": float(self.times[-1]),
                "mean_drift": float(np.max(np.abs(np.asarray(d["mean"]) - d["mean"][0]))),
                "l2_drift": float(np.max(np.abs(np.asarray(d["l2"]) - d["l2"][0]))),
                "hamiltonian_drift": float(np.max(np.abs(np.asarray(d["hamiltonian"]) - d["hamiltonian"][0]))),
            }
        )
        return rep


def _diagnose(c: np.ndarray, grid: TorusGrid, G: np.ndarray) -> tuple[float, float, float]:
    f = SpectralField(grid, c, real=True)
    return float(c[0].real), l2_norm(f), hamiltonian(f, G)


def integrate(problem: GkdvProblem, progress: Optional[Callable[[int, float], None]] = None) -> Trajectory:
    """ceil(horizon / dt) steps with per-snapshot diagnostics (mean, L2, H)."""
    g = problem.grid
    dt = problem.dt
    rhs = _Rhs(problem)
    E_half = _linear_multiplier(g, 0.5 * dt)
    E_full = _linear_multiplier(g, dt)
    G = problem.potential()
    n = problem.n_steps
    c = problem.u0.coeffs.copy()
    times, rows, diag = [0.0], [c.copy()], [_diagnose(c, g, G)]
    t = 0.0
    for i in range(1, n + 1):
        c = _ifrk4(c, t, dt, rhs, E_half, E_full)
        t = i * dt
        _check_finite(c, t)
        if i % problem.save_every == 0 or i == n:
            times.append(t)
            rows.append(c.copy())
            diag.append(_diagnose(c, g, G))
            if progress is not None:
                progress(i, t)
    diag = np.array(diag)
    return Trajectory(
        problem,
        np.array(times),
        np.array(rows),
        {"mean": diag[:, 0], "l2": diag[:, 1], "hamiltonian": diag[:, 2]},
        gauged=problem.gauge,
    )


# ---------------------------------------------------------------------------
# gauge transformation


def flux_mean(c: np.ndarray, grid: TorusGrid, dF: np.ndarray) -> float:
    """Spatial average (1 / period) int F'(u) dx, exact for band-limited u."""
    deg = max(len(dF) - 1, 1)
    u = _physical(c, grid.modes * _oversample_for(deg), grid.period)
    return float(np.mean(P.polyval(u, dF)))


def gauge_drift(traj: Trajectory) -> np.ndarray:
    """c(t) = int_0^t mean_x F'(u) dt' by the trapezoid rule on snapshot times."""
    dF = traj.problem.flux_derivative()
    g = traj.problem.grid
    m = np.array([flux_mean(c, g, dF) for c in traj.coeffs])
    out = np.zeros_like(m)
    out[1:] = np.cumsum(0.5 * (m[1:] + m[:-1]) * np.diff(traj.times))
    return out


def _shifted(traj: Trajectory, shifts: np.ndarray) -> np.ndarray:
    return np.array([translate(traj.snapshot(i), s).coeffs for i, s in enumerate(shifts)])


def gauge_forward(u: Trajectory) -> Trajectory:
    """v(x, t) = u(x + c(t), t): the frame in which the transport term loses its mean."""
    if u.gauged:
        raise ValueError("trajectory is already gauged")
    c = gauge_drift(u)
    return Trajectory(u.problem, u.times.copy(), _shifted(u, -c), dict(u.diagnostics), True, c)


def gauge_inverse(v: Trajectory) -> Trajectory:
    """u(x, t) = v(x - c(t), t) with c built from v (the drift is translation invariant)."""
    if not v.gauged:
        raise ValueError("trajectory is not gauged")
    c = gauge_drift(v)
    return Trajectory(v.problem, v.times.copy(), _shifted(v, c), dict(v.diagnostics), False, c)
