"""Picard iterates, the Duhamel integral, and the high-frequency norm-inflation family."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson

from .norms import NormSpec, SpaceTimeField, WindowError, norm
from .report import ExperimentReport, loglog_fit
from .solver import QUINTIC, BlowUpError, GkdvProblem, _Rhs
from .spectral import SpectralField, TorusGrid, bracket
from .waves import WaveSum, duhamel_at
from .window import bump


@dataclass(frozen=True)
class CounterexampleFamily:
    """Five frequencies N_0..N_4 summing to zero with cube sum 90 for every N."""

    N: int
    s: float = 0.25
    eps: float = 0.1

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 8:
            raise ValueError("N must be an integer >= 8")
        object.__setattr__(self, "N", int(self.N))

    @property
    def frequencies(self) -> tuple[int, int, int, int, int]:
        N = self.N
        return (6, N - 4, 2 * N + 1, -N - 4, -2 * N + 1)

    @property
    def output_mode(self) -> int:
        """N_4, where the near-resonant quartic interaction lands."""
        return self.frequencies[4]

    def frequency_sum(self) -> int:
        return sum(self.frequencies)

    def cube_sum(self) -> int:
        return sum(n**3 for n in self.frequencies)

    def amplitudes(self) -> list[float]:
        return [self.eps * abs(n) ** (-self.s) for n in self.frequencies]

    def waves(self) -> WaveSum:
        """u0 = eps * sum |N_j|^-s cos(2 pi N_j x) as free waves on the unit period."""
        terms = []
        for n, a in zip(self.frequencies, self.amplitudes()):
            terms += [(n, n**3, a / 2), (-n, -(n**3), a / 2)]
        return WaveSum.from_terms(1.0, terms, power=0)

    def initial_data(self, grid: TorusGrid) -> SpectralField:
        if grid.period != 1.0:
            raise ValueError("the family lives on the unit period")
        top = max(abs(n) for n in self.frequencies)
        if top >= grid.nyquist:
            raise ValueError(f"grid of {grid.modes} modes cannot hold frequency {top}")
        modes: dict = {}
        for n, a in zip(self.frequencies, self.amplitudes()):
            modes[n] = modes.get(n, 0) + a / 2
            modes[-n] = modes.get(-n, 0) + a / 2
        return SpectralField.from_modes(grid, modes, real=True)


# ---------------------------------------------------------------------------
# sampled Duhamel integral and iterates


def _dispersion_phase(grid: TorusGrid, times: np.ndarray, real: bool) -> np.ndarray:
    ph = np.exp(2j * np.pi * np.outer(times, grid.frequencies**3))
    if real:
        ph[:, grid.nyquist] = 1.0
    return ph


def duhamel(F: SpaceTimeField, window: str = "none", min_samples: int = 8) -> SpaceTimeField:
    """int_0^t S(t - t') F(t') dt' per mode, by cumulative Simpson in the interaction frame.

    The field must contain t = 0 as a sample; the integral runs backwards for t < 0.
    """
    try:
        i0 = F.index_of(0.0)
    except WindowError:
        raise WindowError("the Duhamel integral needs t = 0 on the sample grid") from None
    if F.n_times - i0 < min_samples:
        raise WindowError(f"fewer than {min_samples} samples after t = 0")
    ph = _dispersion_phase(F.grid, F.times, F.real)
    profile = F.windowed() / ph
    acc = cumulative_simpson(profile.real, dx=F.dt, axis=0, initial=0) + 1j * cumulative_simpson(
        profile.imag, dx=F.dt, axis=0, initial=0
    )
    acc -= acc[i0]
    return F.replace(ph * acc, window=window)


def projected_nonlinearity(v: SpaceTimeField, problem: GkdvProblem) -> SpaceTimeField:
    """P(P(F'(v)) v_x) at every time sample."""
    rhs = _Rhs(dataclasses.replace(problem, gauge=True, forcing=None))
    return v.replace(-rhs(v.windowed(), 0.0), window="none")


@dataclass
class IterateStack:
    iterates: list
    residuals: list
    spec: NormSpec
    converged: bool = False

    def __len__(self):
        return len(self.iterates)

    @property
    def last(self) -> SpaceTimeField:
        return self.iterates[-1]


def _check_iterate(u: SpaceTimeField):
    c = u.coeffs
    if not np.all(np.isfinite(c)) or np.max(np.abs(c)) > 1e12:
        raise BlowUpError(float("nan"), "Picard iterate overflow")


def picard_iterate(
    u0: SpectralField,
    problem: GkdvProblem,
    count: int,
    per_unit: int = 64,
    residual_spec: NormSpec = NormSpec("Ys", s=0.5),
    tol: Optional[float] = None,
) -> IterateStack:
    """u^(0) = eta S(t) u0, u^(n+1) = eta (S(t) u0 - Duhamel[P(P(F'(u^(n))) u^(n)_x)]).

    Iterates are sampled on [-2, 2] with the cutoff applied (window "none").
    ``count`` further iterates are built after u^(0); with ``tol`` set, the
    loop stops once the relative residual drops below it.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    base = SpaceTimeField.free_evolution(u0, -2.0, 2.0, per_unit, window="none")
    cut = bump(base.times)[:, None]
    lin = base.replace(base.coeffs * cut)
    stack = IterateStack([lin], [], residual_spec)
    for _ in range(count):
        v = stack.last
        d = duhamel(projected_nonlinearity(v, problem))
        nxt = base.replace(cut * (base.coeffs - d.coeffs))
        _check_iterate(nxt)
        res = norm(nxt - v, residual_spec)
        stack.iterates.append(nxt)
        stack.residuals.append(res)
        if tol is not None:
            scale = norm(nxt, residual_spec)
            if res <= tol * max(scale, np.finfo(float).tiny):
                stack.converged = True
                break
    return stack


def fixed_point(
    u0: SpectralField, problem: GkdvProblem, per_unit: int = 64, tol: float = 1e-8, max_iter: int = 25
) -> IterateStack:
    """Run the contraction map until the relative Y^s residual is below ``tol``."""
    return picard_iterate(u0, problem, max_iter, per_unit, tol=tol)


# ---------------------------------------------------------------------------
# norm inflation


def first_iterate_nonlinear(waves: WaveSum, t: float) -> WaveSum:
    """Duhamel part of u^(1)(t) for F(u) = u^4 / 4 in projected form, exactly.

    u^(1)(t) = S(t) u0 - (returned sum).  Evaluated in closed form, since the
    integrand oscillates at |omega - xi^3| ~ N^3, far beyond any time grid.
    """
    cube = (waves * waves * waves).mean_zero()
    return duhamel_at((cube * waves.dx()).mean_zero(), t)


def _band_limited(ws: WaveSum, modes: int) -> tuple[np.ndarray, np.ndarray]:
    """(k, coefficient) of a free sum, keeping |k| < modes / 2 and merging equal k."""
    keep = np.abs(ws.k) < modes // 2
    k, inv = np.unique(ws.k[keep], return_inverse=True)
    c = np.zeros(k.size, dtype=complex)
    np.add.at(c, inv, ws.amp[keep])
    return k, c


def inflation_point(fam: CounterexampleFamily, t: float, modes: int) -> dict:
    grid = TorusGrid(1.0, modes)
    fam.initial_data(grid)  # size check
    u0 = fam.waves()
    d = first_iterate_nonlinear(u0, t)
    k, c = _band_limited(d, modes)
    c = c * np.exp(2j * np.pi * k.astype(float) ** 3 * t)
    n4 = fam.output_mode
    n4_coeff = float(np.abs(c[k == n4]).sum())
    hs_nl = float(np.sqrt(np.sum(bracket(k) ** (2 * fam.s) * np.abs(c) ** 2)))
    # full u^(1)(t): add the free part on the same modes
    k0, c0 = _band_limited(u0, modes)
    c0 = c0 * np.exp(2j * np.pi * k0.astype(float) ** 3 * t)
    allk = np.union1d(k, k0)
    full = np.zeros(allk.size, dtype=complex)
    full[np.searchsorted(allk, k0)] += c0
    full[np.searchsorted(allk, k)] -= c
    hs_full = float(np.sqrt(np.sum(bracket(allk) ** (2 * fam.s) * np.abs(full) ** 2)))
    return {"N": fam.N, "hs_norm": hs_nl, "n4_coeff": n4_coeff, "hs_norm_full": hs_full}


def inflation_experiment(
    s: float = 0.25,
    eps: float = 0.1,
    N_list: Sequence[int] = (32, 64, 128, 256, 512, 1024),
    t: float = 0.01,
    modes: int = 8192,
    discard: int = 2,
    threads: int = 1,
) -> ExperimentReport:
    """H^s growth of the first Picard iterate on the counterexample family.

    ``hs_norm`` is the H^s norm of the nonlinear (Duhamel) part of u^(1)(t);
    ``hs_norm_full`` adds the free part, which is O(eps) and N-independent.
    Slopes are fitted after dropping the ``discard`` smallest N.
    """
    N_list = sorted(int(n) for n in N_list)
    fams = [CounterexampleFamily(n, s, eps) for n in N_list]
    for f in fams:
        if f.frequency_sum() != 0:
            raise AssertionError("frequency bookkeeping failed")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(lambda f: inflation_point(f, t, modes), fams))

    rep = ExperimentReport(
        "inflate",
        metadata={
            "s": s,
            "eps": eps,
            "t": t,
            "N_list": N_list,
            "nonlinearity": list(QUINTIC),
            "route": "closed-form first iterate",
        },
    )
    tab = rep.table(
        "inflation",
        ["N", "hs_norm", "n4_coeff", "hs_norm_full", "cube_sum"],
        units={
            "N": ("integer", "family parameter"),
            "hs_norm": ("H^s norm", "Duhamel part of the first iterate at time t"),
            "n4_coeff": ("coefficient modulus", "mode N_4 of the Duhamel part"),
            "hs_norm_full": ("H^s norm", "free part plus Duhamel part"),
            "cube_sum": ("integer", "sum of N_j^3, exact"),
        },
    )
    for f, r in zip(fams, rows):
        tab.add(r["N"], r["hs_norm"], r["n4_coeff"], r["hs_norm_full"], f.cube_sum())

    used = slice(min(discard, max(len(rows) - 2, 0)), None)
    Ns = np.array(N_list, float)[used]
    hs = np.array([r["hs_norm"] for r in rows])[used]
    n4 = np.array([r["n4_coeff"] for r in rows])[used]
    slope_hs, icpt_hs = loglog_fit(Ns, hs)
    slope_c, icpt_c = loglog_fit(Ns, n4)
    c_t = n4 / (eps**4 * Ns ** (1 - 3 * s))
    rep.summary.update(
        {
            "slope_hs": slope_hs,
            "slope_coeff": slope_c,
            "intercepts": {"hs": icpt_hs, "coeff": icpt_c},
            "expected_slope_hs": 1 - 2 * s,
            "expected_slope_coeff": 1 - 3 * s,
            "c_t": float(np.median(c_t)),
            "points_used": [int(n) for n in Ns],
            "window": {"kind": "exact", "t": t},
            "grid": {"period": 1.0, "modes": modes},
        }
    )
    return rep
