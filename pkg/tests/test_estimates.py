import numpy as np
import pytest

from gkdvlab.estimates import (
    EMBEDDINGS,
    LABEL,
    EstimateProbe,
    GammaForm,
    evaluate_gamma_form,
    family_waves,
    gagliardo_sides,
    mean_value_m_check,
    mean_value_ratio,
    physical_product_integral,
    probe_estimate,
    real_part,
)
from gkdvlab.imethod import gn_check
from gkdvlab.norms import SpaceTimeField, spacetime_transform
from gkdvlab.spectral import SpectralField, TorusGrid, m_symbol, random_field

PER_UNIT = 32


def random_input(seed, M=8, period=1.0):
    g = TorusGrid(period, M)
    f = random_field(g, 2.0, seed)
    return SpaceTimeField.sample(lambda t: f * np.exp(1j * np.pi * t), g, -2, 2, PER_UNIT, window="bump")


def spectra(us, n):
    return [spacetime_transform(u, frame="lab", time_pad=n) for u in us]


# Gamma forms ---------------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("period", [1.0, 2.5])
def test_gamma_form_matches_physical_route(n, period):
    us = [random_input(10 * n + i, period=period) for i in range(n)]
    a = evaluate_gamma_form(GammaForm(n), spectra(us, n))
    b = physical_product_integral(us)
    assert abs(a - b) <= 1e-8 * abs(b)


def test_gamma_form_parseval_by_hand():
    # n = 2, m = 1: int f1(zeta) f2(-zeta) equals the space-time integral of u1 u2
    u = random_input(1)
    v = random_input(2)
    lhs = evaluate_gamma_form(GammaForm(2), spectra([u, v], 2))
    ref = np.sum(np.fft.ifft(u.windowed(), axis=1) * np.fft.ifft(v.windowed(), axis=1)) * 8 * u.dt
    assert lhs == pytest.approx(complex(ref), rel=1e-8)


def test_gamma_form_factorizable_symbol():
    # m = (2 pi i xi_1): same as differentiating the first input
    us = [random_input(20 + i) for i in range(3)]
    form = GammaForm(3, symbol=lambda xis, taus: 2j * np.pi * xis[0])
    du = us[0].replace(us[0].coeffs * 2j * np.pi * us[0].grid.frequencies)
    a = evaluate_gamma_form(form, spectra(us, 3))
    b = physical_product_integral([du, us[1], us[2]])
    assert abs(a - b) <= 1e-8 * abs(b)


def test_gamma_form_zero_input():
    us = [random_input(3), random_input(4) * 0.0, random_input(5)]
    assert evaluate_gamma_form(GammaForm(3), spectra(us, 3)) == 0


def test_gamma_form_validation():
    with pytest.raises(ValueError):
        GammaForm(5)
    sp = spectra([random_input(0)], 2)
    with pytest.raises(ValueError):
        evaluate_gamma_form(GammaForm(2), sp)
    big = spacetime_transform(random_input(0, M=64), frame="lab", time_pad=4)
    with pytest.raises(OverflowError):
        evaluate_gamma_form(GammaForm(4), [big] * 4)
    mod = spacetime_transform(random_input(0), frame="modulation", time_pad=2)
    with pytest.raises(ValueError):
        evaluate_gamma_form(GammaForm(2), [mod, mod])


# input families --------------------------------------------------------------------


def test_families_are_deterministic_and_at_scale():
    a = family_waves("random", 32, np.random.default_rng(4))
    b = family_waves("random", 32, np.random.default_rng(4))
    assert np.array_equal(a.amp, b.amp) and np.max(np.abs(a.k)) <= 32
    airy = family_waves("airy", 16, np.random.default_rng(0))
    assert list(airy.k) == [16] and list(airy.w) == [16**3]
    with pytest.raises(ValueError):
        family_waves("gaussian", 8, np.random.default_rng(0))


def test_real_part_is_real():
    ws = family_waves("random", 8, np.random.default_rng(1))
    x, t = np.linspace(0, 1, 7), np.full(7, 0.3)
    vals = real_part(ws).evaluate(x, t)
    assert np.allclose(vals.imag, 0, atol=1e-12)
    assert np.allclose(vals.real, ws.evaluate(x, t).real)


# probes --------------------------------------------------------------------------


def test_probe_validation():
    with pytest.raises(ValueError):
        EstimateProbe("nonsense")
    with pytest.raises(ValueError):
        EstimateProbe("star", trials=0)
    with pytest.raises(ValueError):
        EstimateProbe("star", family="gaussian")
    assert EstimateProbe("star").sweep_kind == "frequency"
    assert EstimateProbe("strich-4").sweep_kind == "grid"


@pytest.mark.parametrize("name", EMBEDDINGS)
def test_every_embedding_probe_runs_and_is_flat(name):
    rep = probe_estimate(EstimateProbe(name, s=0.5, sweep=(32, 64), trials=2, band=4, per_unit=256))
    assert rep.summary["label"] == LABEL
    ratios = rep.tables["ratios"].column("ratio")
    assert all(np.isfinite(ratios))
    if "slope_max" in rep.summary:
        assert abs(rep.summary["slope_max"]) <= 0.05


def test_main_estimate_bounded_at_half():
    rep = probe_estimate(EstimateProbe("main-est", s=0.5, k=3, sweep=(8, 16, 32, 64, 128, 256), trials=8))
    assert rep.summary["slope_max"] <= 0.05


def test_star_direction_on_counterexample():
    slopes = {}
    for s in (0.25, 0.5):
        rep = probe_estimate(EstimateProbe("star", s=s, family="counterexample", sweep=(16, 32, 64), trials=1))
        slopes[s] = rep.summary["slope_max"]
    assert slopes[0.25] >= 0.2
    assert slopes[0.25] > slopes[0.5]


def test_ratios_scale_invariant(monkeypatch):
    # the star estimate has k + 1 inputs on both sides
    from gkdvlab import estimates

    probe = EstimateProbe("star", s=0.5, family="random", sweep=(8,), trials=1)
    r1 = probe_estimate(probe).tables["ratios"].column("ratio")[0]
    orig = estimates.family_waves
    monkeypatch.setattr(estimates, "family_waves", lambda *a, **kw: orig(*a, **kw).scaled(3.7))
    r2 = probe_estimate(probe).tables["ratios"].column("ratio")[0]
    assert r2 == pytest.approx(r1, rel=1e-10)


def test_probe_report_columns(tmp_path):
    rep = probe_estimate(EstimateProbe("strich-4", sweep=(16, 32), trials=1, band=4, per_unit=128))
    rep.write(tmp_path)
    header = (tmp_path / "ratios.csv").read_text().splitlines()[0]
    assert header == "sweep_value,trial,lhs,rhs,ratio"


# Gagliardo-Nirenberg -------------------------------------------------------------


def test_gagliardo_examples():
    g = TorusGrid(1.0, 16)
    assert gn_check(SpectralField.zeros(g)) == (0.0, 0.0, 0.0)
    v = SpectralField.from_modes(g, {1: 1.0, -1: 1.0})
    lhs, rhs, ratio = gn_check(v)
    assert lhs == pytest.approx(0.0, abs=1e-14) and ratio == pytest.approx(0.0, abs=1e-14)
    # 2 cos: int v_x^2 = 8 pi^2, ||v||_2^2 = 2
    assert rhs == pytest.approx((8 * np.pi**2) ** 0.75 * 2**1.75)


def test_gagliardo_lhs_against_quadrature():
    g = TorusGrid(1.0, 16)
    v = random_field(g, 2.0, 9)
    x = np.linspace(0, 1, 4096, endpoint=False)
    vals = np.real(sum(v.coefficient(k) * np.exp(2j * np.pi * k * x) for k in range(-7, 8)))
    lhs, _ = gagliardo_sides(v)
    assert lhs == pytest.approx(abs(np.mean(vals**5)), rel=1e-10)


def test_gagliardo_needs_real_field():
    g = TorusGrid(1.0, 8)
    with pytest.raises(ValueError):
        gn_check(SpectralField.from_modes(g, {1: 1.0}, real=False))


# mean-value bound ------------------------------------------------------------------


def test_mean_value_ratio_zero_shift():
    assert mean_value_ratio(1.0, 0.0, 0.5) == 0.0


def test_mean_value_ratio_against_difference_quotient():
    # small shifts: ratio -> |x| |(m^a)'(x)| / m^a(x)
    x, h, a = 2.3, 1e-6, 0.5
    deriv = (m_symbol(x + h) ** a - m_symbol(x - h) ** a) / (2 * h)
    assert mean_value_ratio(x, 1e-7, 0.5) == pytest.approx(abs(deriv) * x / m_symbol(x) ** a, rel=1e-4)


def test_mean_value_check_bounded_and_stable():
    rep = mean_value_m_check(0.5, N=1.0, samples=200)
    assert 0 < rep.summary["max_ratio"] <= 4
    assert rep.summary["refinement_change"] < 0.05
    scaled = mean_value_m_check(0.5, N=7.0, samples=200)
    assert scaled.summary["max_ratio"] == pytest.approx(rep.summary["max_ratio"])
