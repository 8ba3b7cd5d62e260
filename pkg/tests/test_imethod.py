import numpy as np
import pytest

from gkdvlab.imethod import (
    IMethodConfig,
    SmallnessError,
    drift_experiment,
    modified_energy,
    prepare_rescaled_data,
)
from gkdvlab.solver import hamiltonian
from gkdvlab.spectral import (
    MultiplierSymbol,
    SpectralField,
    TorusGrid,
    airy_propagate,
    apply_I,
    hs_norm,
    l2_norm,
    project_mean_zero,
    random_field,
)


def small_data(M=64, amp=0.12, decay=2.0, seed=1):
    u0 = random_field(TorusGrid(1.0, M), decay, seed)
    return u0 * (amp / l2_norm(u0))


# config ----------------------------------------------------------------------------


@pytest.mark.parametrize(
    "kw",
    [{"s": 0.4}, {"s": 1.0}, {"eps": 0.0}, {"eps": 0.2}, {"lam": 0.5}, {"N": -1.0}, {"units": "hertz"}],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        IMethodConfig(**kw)


def test_auto_rule():
    cfg = IMethodConfig(s=0.5, eps=0.1, lam=64.0, C=2.0)
    # eps^4 lam^(4/3) / C at s = 1/2
    assert cfg.auto_N() == pytest.approx(1e-4 * 64 ** (4 / 3) / 2)
    assert cfg.cutoff() == cfg.auto_N()
    wn = IMethodConfig(s=0.5, eps=0.1, lam=64.0, C=2.0, units="wavenumber")
    assert wn.cutoff() == pytest.approx(64 * cfg.auto_N())


def test_units_give_the_same_symbol():
    f = IMethodConfig(lam=32.0, N=0.5).symbol(0.5)
    w = IMethodConfig(lam=32.0, N=16.0, units="wavenumber").symbol(16.0)
    assert f == w == MultiplierSymbol(0.5, 0.5)


# preparation -----------------------------------------------------------------------


def test_zero_data_is_trivially_small():
    p = prepare_rescaled_data(SpectralField.zeros(TorusGrid(1.0, 16)), IMethodConfig(lam=8.0, N=3.0))
    assert p.checks["sev_bound"] and p.checks["h1_bound"] and p.checks["hi_init"]
    assert p.checks["l2"] == 0 and p.N == 3.0


def test_rescaling_halves_l2_at_64():
    u0 = small_data(amp=0.15)
    p = prepare_rescaled_data(u0, IMethodConfig(lam=64.0, N=10.0))
    assert p.checks["l2"] == pytest.approx(0.075, rel=1e-12)
    assert p.field.grid.period == 64.0


def test_unit_data_needs_a_million():
    u0 = small_data(amp=1.0, decay=3.0)
    with pytest.raises(SmallnessError) as exc:
        prepare_rescaled_data(u0, IMethodConfig(lam=1e5, N=1.0))
    assert exc.value.measured["l2"] > 0.1
    assert not exc.value.measured["sev_bound"]
    p = prepare_rescaled_data(u0, IMethodConfig(lam=1e6, N=1.0))
    assert p.checks["l2"] == pytest.approx(0.1, rel=1e-9)


def test_complex_data_rejected():
    u = SpectralField.from_modes(TorusGrid(1.0, 8), {1: 1.0}, real=False)
    with pytest.raises(ValueError):
        prepare_rescaled_data(u, IMethodConfig())


# modified energy -------------------------------------------------------------------


def test_band_limited_data_is_left_alone():
    g = TorusGrid(16.0, 64)
    v = SpectralField.from_modes(g, {2: 0.1 + 0.05j, -2: 0.1 - 0.05j, 5: 0.03, -5: 0.03})
    # max frequency 5/16 is below the cutoff
    e = modified_energy(v, MultiplierSymbol(0.5, 5 / 16))
    assert e["H"] == hamiltonian(v)
    assert e["kinetic"] >= 0


def test_I_lowers_the_kinetic_part():
    g = TorusGrid(8.0, 64)
    v = random_field(g, 1.0, 3)
    full = modified_energy(v, None)
    cut = modified_energy(v, MultiplierSymbol(0.5, 0.5))
    assert 0 <= cut["kinetic"] < full["kinetic"]
    assert cut["h1"] < full["h1"] == pytest.approx(hs_norm(v, 1.0))


def test_I_commutes_with_airy_and_projection():
    g = TorusGrid(4.0, 32)
    v = random_field(g, 1.0, 5)
    sym = MultiplierSymbol(0.5, 1.5)
    a = apply_I(airy_propagate(v, 0.37), sym).coeffs
    b = airy_propagate(apply_I(v, sym), 0.37).coeffs
    assert np.max(np.abs(a - b)) <= 1e-14 * np.max(np.abs(a))
    assert np.array_equal(apply_I(project_mean_zero(v), sym).coeffs, project_mean_zero(apply_I(v, sym)).coeffs)


# drift -----------------------------------------------------------------------------


def small_config(**kw):
    base = dict(s=0.5, eps=0.1, lam=8.0, N=1.0, modes=64, dt=1e-3, horizon=0.2, units="wavenumber")
    base.update(kw)
    return IMethodConfig(**base)


def test_drift_records_are_consistent():
    rep = drift_experiment(small_data(), small_config(), N_list=[2, 4, 8, 1e9])
    assert [r["N"] for r in rep.records] == [2, 4, 8, 1e9]
    for r in rep.records:
        assert r["drift"] == abs(r["H1"] - r["H0"])
        assert r["H0"] == pytest.approx(r["kinetic0"] - r["potential0"], abs=1e-18)
        assert r["floor"] == rep.floor
    control = rep.records[-1]
    assert control["drift"] == pytest.approx(rep.floor, rel=1e-6, abs=1e-18)
    assert rep.l2_drift < 1e-12


def test_zero_data_has_no_drift():
    rep = drift_experiment(SpectralField.zeros(TorusGrid(1.0, 16)), small_config(modes=16), N_list=[1, 2])
    assert all(r["drift"] == 0 for r in rep.records)
    assert rep.exponent is None and rep.points_used == []


def test_drift_needs_one_sweep():
    with pytest.raises(ValueError):
        drift_experiment(small_data(), small_config())
    with pytest.raises(ValueError):
        drift_experiment(small_data(), small_config(), N_list=[1], lam_list=[8])


def test_covaried_lambda_mode():
    cfg = small_config(N="auto", units="frequency", horizon=0.05)
    rep = drift_experiment(small_data(amp=0.1), cfg, lam_list=[8, 16], threads=2)
    assert [r["lambda"] for r in rep.records] == [8.0, 16.0]
    for r in rep.records:
        assert r["N"] == pytest.approx(IMethodConfig(lam=r["lambda"]).auto_N())


def test_drift_report_tables(tmp_path):
    rep = drift_experiment(small_data(), small_config(), N_list=[2, 4]).to_report()
    rep.write(tmp_path)
    header = (tmp_path / "drift.csv").read_text().splitlines()[0]
    assert header == "N,lambda,H0,H1,drift,floor,h1_start,h1_end"
    assert {"exponent", "intercept", "points_used", "floor"} <= set(rep.summary)
