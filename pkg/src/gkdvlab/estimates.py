"""Empirical probes of the multilinear and embedding estimates.

Every ratio reported here is a lower bound for an operator norm, never a
certificate; acceptance is on trends across sweeps.

Two sweep kinds exist.  Multilinear probes (``main-est``, ``star``) sweep the
frequency scale N and use exact wave sums, because products of waves at
scale N have modulations ~ N^3 that no sampled time grid resolves.
Embedding probes sweep the spatial grid size M on band-limited inputs and
evaluate the Lebesgue side on sampled fields.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .norms import NormSpec, SpaceTimeField, SpaceTimeSpectrum, duality_pairing, norm, physical_values
from .picard import CounterexampleFamily
from .report import ExperimentReport, loglog_fit
from .solver import energy_parts
from .spectral import SpectralField, TorusGrid, bracket, hs_norm, m_symbol, pad_coeffs
from .waves import WaveSum

MULTILINEAR = ("main-est", "star")
EMBEDDINGS = (
    "strich-4",
    "strich-6",
    "strich-q",
    "2-sob",
    "energy",
    "infty",
    "cook",
    "sup-est",
    "grow",
    "duality",
    "gagliardo",
)
PROBES = MULTILINEAR + EMBEDDINGS
FAMILIES = ("random", "airy", "counterexample", "high-low")
LABEL = "lower-bound evidence"


# ---------------------------------------------------------------------------
# multilinear forms on the hyperplane


@dataclass(frozen=True)
class GammaForm:
    """int_{Gamma_n} m(xi_1, tau_1, ..., xi_n, tau_n) prod f_i(xi_i, tau_i).

    ``symbol(xis, taus)`` receives lists of n broadcastable arrays; ``None``
    means m = 1.
    """

    n: int
    symbol: Optional[Callable] = None
    name: str = ""

    def __post_init__(self):
        if not 2 <= self.n <= 4:
            raise ValueError("arity must be between 2 and 4")


MAX_FORM_TERMS = 10**9


def evaluate_gamma_form(form: GammaForm, fs: Sequence[SpaceTimeSpectrum]) -> complex:
    """Direct sum over xi_1 + ... + xi_n = 0 and tau_1 + ... + tau_n = 0.

    Spectra must share the spatial grid and a lab-frame tau grid symmetric
    about 0.  The measure is (1/period)^(n-1) (d tau)^(n-1); no index wraps.
    """
    n = form.n
    if len(fs) != n:
        raise ValueError(f"form of arity {n} needs {n} inputs")
    g = fs[0].grid
    tau = fs[0].sigma
    for f in fs:
        if f.frame != "lab":
            raise ValueError("Gamma forms need lab-frame spectra")
        if f.grid != g or f.sigma.shape != tau.shape or not np.allclose(f.sigma, tau):
            raise ValueError("inputs must share spatial and tau grids")
    M, T = g.modes, tau.size
    if float(M * T) ** (n - 1) > MAX_FORM_TERMS:
        raise OverflowError("grid too large for a direct hyperplane sum")
    dtau = fs[0].dsigma
    j0 = int(np.argmin(np.abs(tau)))
    if abs(tau[j0]) > 1e-9 * dtau:
        raise ValueError("tau grid must contain 0")
    jlo, jhi = -j0, T - 1 - j0
    h = M // 2
    kvals = np.arange(-h + 1, h)  # the Nyquist mode is dropped
    # tables indexed [k + h - 1, j + j0]
    tabs = [f.values[:, kvals % M].T for f in fs]
    K2, J2 = np.meshgrid(kvals, np.arange(jlo, jhi + 1), indexing="ij")
    pairs = list(itertools.product(range(kvals.size), range(T)))
    total = 0.0 + 0.0j
    for head in itertools.product(pairs, repeat=n - 2):
        ks = [int(kvals[a]) for a, _ in head]
        js = [b - j0 for _, b in head]
        w = np.prod([tabs[i][a, b] for i, (a, b) in enumerate(head)]) if head else 1.0
        if w == 0:
            continue
        kl = -(sum(ks) + K2)
        jl = -(sum(js) + J2)
        ok = (np.abs(kl) < h) & (jl >= jlo) & (jl <= jhi)
        if not ok.any():
            continue
        vals = tabs[n - 2][ok] * tabs[n - 1][kl[ok] + h - 1, jl[ok] + j0]
        if form.symbol is not None:
            xis = [np.full(vals.shape, k / g.period) for k in ks] + [K2[ok] / g.period, kl[ok] / g.period]
            taus = [np.full(vals.shape, j * dtau) for j in js] + [J2[ok] * dtau, jl[ok] * dtau]
            vals = vals * form.symbol(xis, taus)
        total += w * vals.sum()
    return complex(total * (dtau / g.period) ** (n - 1))


def physical_product_integral(us: Sequence[SpaceTimeField]) -> complex:
    """int int u_1 ... u_n dx dt, exact in x (padded grid) and a Riemann sum in t."""
    n = len(us)
    L = us[0].grid.modes * max(2, (n + 2) // 2 + 1)
    prod = np.ones((us[0].n_times, L), dtype=complex)
    for u in us:
        prod = prod * np.fft.ifft(pad_coeffs(u.windowed(), L), axis=1) * (L / u.grid.period)
    return complex(prod.sum() * (us[0].grid.period / L) * us[0].dt)


# ---------------------------------------------------------------------------
# input families


def family_waves(family: str, N: int, rng: np.random.Generator, decay: float = 1.0, terms: int = 6,
                 s: float = 0.25, power: int = 1) -> WaveSum:
    """One windowed input at frequency scale N (period 1)."""
    if family == "random":
        k = rng.integers(1, N + 1, size=terms) * rng.choice([-1, 1], size=terms)
        mod = rng.integers(-16, 17, size=terms)
        amp = (rng.normal(size=terms) + 1j * rng.normal(size=terms)) * bracket(k) ** (-decay) / bracket(mod)
        return WaveSum(1.0, k, k**3 + mod, amp, power).combined()
    if family == "airy":
        return WaveSum(1.0, [N], [N**3], [1.0], power)
    if family == "counterexample":
        w = CounterexampleFamily(max(int(N), 8), s, 1.0).waves()
        return WaveSum(1.0, w.k, w.w, w.amp, power)
    if family == "high-low":
        lo = int(rng.integers(1, 4))
        return WaveSum(1.0, [N, lo], [N**3, lo**3], [1.0, 1.0], power)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def real_part(ws: WaveSum) -> WaveSum:
    """(u + conj u) / 2 as a wave sum."""
    conj = WaveSum(ws.period, -ws.k, -ws.w, np.conj(ws.amp), ws.power)
    return (ws + conj).scaled(0.5)


# ---------------------------------------------------------------------------
# probes


@dataclass(frozen=True)
class EstimateProbe:
    name: str
    s: float = 0.5
    k: int = 3
    sweep: tuple = (8, 16, 32, 64)
    family: str = "random"
    trials: int = 8
    seed: int = 0
    decay: float = 1.0
    band: int = 6
    per_unit: int = 1024

    def __post_init__(self):
        if self.name not in PROBES:
            raise ValueError(f"unknown estimate {self.name!r}; expected one of {PROBES}")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        object.__setattr__(self, "sweep", tuple(int(v) for v in self.sweep))

    @property
    def sweep_kind(self) -> str:
        return "frequency" if self.name in MULTILINEAR else "grid"


def _multilinear_ratio(probe: EstimateProbe, N: int, rng) -> tuple[float, float]:
    k, s = probe.k, probe.s
    count = k if probe.name == "main-est" else k + 1
    fam = probe.family
    if fam == "counterexample":
        # all inputs equal: the data whose first iterate inflates
        u = family_waves(fam, N, rng, s=s)
        us = [u] * count
    elif fam == "high-low":
        us = [family_waves("airy", N, rng)] + [family_waves("airy", int(rng.integers(1, 4)), rng)
                                              for _ in range(count - 1)]
    else:
        us = [family_waves(fam, N, rng, probe.decay) for _ in range(count)]
    Y = NormSpec("Ys", s=s)
    rhs = float(np.prod([norm(u, Y) for u in us]))
    prod = us[0]
    for u in us[1:k]:
        prod = prod * u
    if probe.name == "main-est":
        lhs = norm(prod, NormSpec("Xsb", s=s - 1, b=0.5))
    else:
        out = (prod.mean_zero() * us[k].dx()).mean_zero()
        lhs = norm(out, NormSpec("Zs", s=s))
    return lhs, rhs


_EMBEDDING_SPECS = {
    # name: (lhs kind and exponents, rhs spec)
    "strich-4": (("Lpxt", 4, 4), NormSpec("Xsb", s=0.0, b=1 / 3)),
    "strich-6": (("Lpxt", 6, 6), NormSpec("Xsb", s=0.1, b=0.5)),
    "strich-q": (("Lpxt", 5, 5), NormSpec("Xsb", s=0.1, b=0.45)),
    "2-sob": (("LqtLrx", 2, 4), NormSpec("Xsb", s=0.25, b=0.0)),
    "energy": (("LqtLrx", np.inf, 4), NormSpec("Xsb", s=0.25, b=0.6)),
    "infty": (("Lpxt", np.inf, np.inf), NormSpec("Xsb", s=0.6, b=0.6)),
    "cook": (("LqtLrx", 4, 4), NormSpec("Xsb", s=0.3, b=0.3)),
}


def _embedding_ratio(probe: EstimateProbe, M: int, ws: WaveSum, partner: Optional[WaveSum]) -> tuple[float, float]:
    grid = TorusGrid(1.0, M)
    name = probe.name
    if name == "gagliardo":
        v = real_part(ws).coefficients_at(0.0, grid)
        return gagliardo_sides(SpectralField(grid, v.coeffs, real=True))
    if name == "grow":
        u0 = ws.coefficients_at(0.0, grid)
        free = WaveSum.free(u0)
        return norm(free, NormSpec("Ys", s=probe.s)), hs_norm(u0, probe.s)
    u = SpaceTimeField.from_waves(ws, grid, per_unit=probe.per_unit)
    if name == "sup-est":
        lhs = max(hs_norm(u.slice(i), probe.s) for i in range(u.n_times))
        return lhs, norm(ws, NormSpec("Ys", s=probe.s))
    if name == "duality":
        v = SpaceTimeField.from_waves(partner, grid, per_unit=probe.per_unit)
        lhs = abs(duality_pairing(u, v))
        return lhs, norm(ws, NormSpec("Ys", s=probe.s)) * norm(partner, NormSpec("Zs", s=-probe.s))
    (kind, q, r), rhs_spec = _EMBEDDING_SPECS[name]
    spec = NormSpec(kind, q=q, r=r) if kind == "LqtLrx" else NormSpec(kind, p=q)
    return norm(u, spec), norm(ws, rhs_spec)


def gagliardo_sides(v: SpectralField) -> tuple[float, float]:
    """(|int v^5|, (int v_x^2)^(3/4) ||v||_2^(7/2)) for a real field."""
    kinetic, pot = energy_parts(v)  # pot = int v^5 / 20
    grad2 = 8 * np.pi**2 * kinetic
    l2 = hs_norm(v, 0.0)
    return abs(20.0 * pot), grad2**0.75 * l2**3.5


def probe_estimate(probe: EstimateProbe, threads: int = 1) -> ExperimentReport:
    """Ratio statistics per sweep value and log-log trends of max and median."""
    rep = ExperimentReport(
        probe.name,
        metadata={
            "probe": dict(probe.__dict__),
            "sweep_kind": probe.sweep_kind,
            "label": LABEL,
            "window": {"kind": "bump", "support": [-2.0, 2.0]},
        },
    )
    tab = rep.table(
        "ratios",
        ["sweep_value", "trial", "lhs", "rhs", "ratio"],
        units={
            "sweep_value": ("frequency scale N" if probe.sweep_kind == "frequency" else "grid modes M", "sweep"),
            "lhs": ("norm", "left side of the estimate"),
            "rhs": ("norm product", "right side of the estimate"),
            "ratio": ("dimensionless", LABEL),
        },
    )
    per_point: dict = {}
    for trial in range(probe.trials):
        # inputs depend on (seed, trial) only, so grid sweeps refine fixed data
        if probe.sweep_kind == "grid":
            rng = np.random.default_rng([probe.seed, trial])
            ws = family_waves(probe.family, probe.band, rng, probe.decay)
            partner = family_waves(probe.family, probe.band, rng, probe.decay)
        for val in probe.sweep:
            if probe.sweep_kind == "frequency":
                rng = np.random.default_rng([probe.seed, trial, val])
                lhs, rhs = _multilinear_ratio(probe, val, rng)
            else:
                lhs, rhs = _embedding_ratio(probe, val, ws, partner)
            if lhs == 0 and rhs == 0:
                continue
            ratio = lhs / rhs if rhs else float("inf")
            tab.add(val, trial, float(lhs), float(rhs), float(ratio))
            per_point.setdefault(val, []).append(ratio)
    vals = sorted(per_point)
    mx = [max(per_point[v]) for v in vals]
    md = [float(np.median(per_point[v])) for v in vals]
    summary = {
        "label": LABEL,
        "s": probe.s,
        "k": probe.k,
        "max_ratio": {str(v): m for v, m in zip(vals, mx)},
        "median_ratio": {str(v): m for v, m in zip(vals, md)},
        "overall_max": max(mx) if mx else None,
    }
    if len(vals) >= 2 and all(np.isfinite(mx)) and min(mx) > 0:
        summary["slope_max"], summary["intercept_max"] = loglog_fit(vals, mx)
        summary["slope_median"], _ = loglog_fit(vals, md)
    rep.summary.update(summary)
    return rep


# ---------------------------------------------------------------------------
# mean-value bound for the multiplier


def mean_value_ratio(x, xp, s: float):
    """|m^(1-s)(x + x') - m^(1-s)(x)| |x| / (|x'| m^(1-s)(x)), 0 where x' = 0."""
    x = np.asarray(x, float)
    xp = np.asarray(xp, float)
    a = 1.0 - s
    mx = m_symbol(x) ** a
    diff = np.abs(m_symbol(x + xp) ** a - mx)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = diff * np.abs(x) / (np.abs(xp) * mx)
    return np.where(xp == 0, 0.0, r)


def _mean_value_max(s: float, samples: int, x_max: float) -> tuple[float, float, float]:
    x = np.linspace(0.2, x_max, samples)
    xp = np.linspace(-0.04, 0.04, 2 * (samples // 2) + 1)
    xp = xp[xp != 0]
    X, XP = np.meshgrid(np.concatenate([x, -x]), xp, indexing="ij")
    r = mean_value_ratio(X, XP, s)
    i = np.unravel_index(np.argmax(r), r.shape)
    return float(r[i]), float(X[i]), float(XP[i])


def mean_value_m_check(s: float = 0.5, N: float = 1.0, samples: int = 400, x_max: float = 8.0) -> ExperimentReport:
    """Sup of the mean-value ratio over |xi| >= N/5, |xi'| <= 0.04 N.

    The ratio is invariant under xi -> N xi, so sampling is done in units of N.
    """
    rep = ExperimentReport("mean-value-m", metadata={"s": s, "N": N, "interpolant": "quintic-hermite", "x_max": x_max})
    tab = rep.table("refinement", ["samples", "max_ratio", "xi", "xi_prime"],
                    units={"xi": ("frequency / N", "argmax"), "xi_prime": ("frequency / N", "argmax")})
    out = []
    for n in (samples, 2 * samples):
        m, x, xp = _mean_value_max(s, n, x_max)
        tab.add(n, m, x * N, xp * N)
        out.append(m)
    rep.summary.update(
        {
            "max_ratio": out[1],
            "refinement_change": abs(out[1] - out[0]) / out[1],
            "label": LABEL,
        }
    )
    return rep
