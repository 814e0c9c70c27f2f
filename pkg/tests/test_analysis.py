import math

import numpy as np
import pytest

from catscatter.analysis import (
    AsymmetrySpec,
    azimuthal_asymmetry,
    detect_oscillation,
    find_peak,
    peak_theta,
    sweep,
)
from catscatter.errors import DegenerateDenominator, FlatDistribution, TooFewPoints
from catscatter.scattering import ScatteringConfig
from catscatter.states import BeamState
from catscatter.targets import Kinematics, TargetProfile

DEG = math.pi / 180.0
WIDE = TargetProfile.wide()


def spec_for(state, theta_deg=10.0, p=10.0, metric="para_perp", phi_grid_n=16,
             method="auto"):
    return AsymmetrySpec(
        cfg=ScatteringConfig(state=state, target=WIDE),
        kin_base=Kinematics.elastic(p, theta_deg * DEG),
        phi_grid_n=phi_grid_n, metric=metric, method=method)


# -- zero tests ----------------------------------------------------------------


def test_gaussian_asymmetry_vanishes():
    res = azimuthal_asymmetry(spec_for(BeamState.gaussian(2.0)))
    assert abs(res.A) <= 1e-8
    assert all(v >= 0.0 for _, v in res.phi_scan)


def test_mixture_asymmetry_vanishes():
    res = azimuthal_asymmetry(spec_for(BeamState.incoherent_pair(2.0, 4.0)))
    assert abs(res.A) <= 1e-8


# -- magnitude bands ------------------------------------------------------------


def test_odd_cat_reference_band():
    res = azimuthal_asymmetry(spec_for(BeamState.odd_cat(2.0, 2.0)))
    assert 0.03 <= abs(res.A) <= 0.2
    assert abs(res.A) <= 1.0
    assert res.theta == pytest.approx(10.0 * DEG)


def test_metric_consistency():
    pp = azimuthal_asymmetry(spec_for(BeamState.odd_cat(2.0, 2.0)))
    mm = azimuthal_asymmetry(spec_for(BeamState.odd_cat(2.0, 2.0), metric="minmax"))
    assert mm.A >= abs(pp.A) - 1e-12
    assert 0.0 <= mm.A <= 1.0


def test_rotation_covariance():
    # Rotating the separation azimuth together with the kinematics leaves
    # the asymmetry unchanged.
    base = azimuthal_asymmetry(spec_for(BeamState.even_cat(2.0, 4.0)))
    rot = 0.8
    spec = AsymmetrySpec(
        cfg=ScatteringConfig(state=BeamState.even_cat(2.0, 4.0, phi_r0=rot), target=WIDE),
        kin_base=Kinematics.elastic(10.0, 10.0 * DEG, rot),
        phi_grid_n=16, metric="para_perp")
    res = azimuthal_asymmetry(spec)
    assert res.A == pytest.approx(base.A, rel=1e-10, abs=1e-14)


def test_degenerate_denominator():
    with pytest.raises(DegenerateDenominator):
        azimuthal_asymmetry(AsymmetrySpec(
            cfg=ScatteringConfig(state=BeamState.even_cat(2.0, 4.0), target=WIDE),
            kin_base=Kinematics.elastic(10.0, 10.0 * DEG),
            phi_grid_n=8, amplitude=lambda q: np.zeros_like(q)))


def test_phi_scan_contains_reference_azimuths():
    res = azimuthal_asymmetry(spec_for(BeamState.even_cat(2.0, 4.0, phi_r0=0.3)))
    phis = [p for p, _ in res.phi_scan]
    assert any(abs(p - 0.3) < 1e-12 for p in phis)
    assert any(abs(p - (0.3 + math.pi / 2)) < 1e-12 for p in phis)


# -- sweeps ---------------------------------------------------------------------


def test_r0_sweep_reference_points():
    rows = sweep(spec_for(BeamState.odd_cat(2.0, 2.0)), "r0", [2.0, 3.0, 4.0])
    assert [r.value for r in rows] == [2.0, 3.0, 4.0]
    for row in rows:
        assert row.result is not None
        assert abs(row.result.A) > 0.005


def test_sigma_sweep_fixed_ratio_scaling():
    rows = sweep(spec_for(BeamState.even_cat(2.0, 4.0)), "sigma_perp",
                 [2.0, 4.0], r0_ratio=2.0)
    a2, a4 = (abs(r.result.A) for r in rows)
    assert a4 < a2
    ratio = a4 / a2
    assert 0.25 / 3.0 <= ratio <= 0.25 * 3.0


def test_sweep_errors_recorded_in_row():
    rows = sweep(spec_for(BeamState.odd_cat(2.0, 2.0)), "r0", [2.0, -1.0, 3.0])
    assert rows[0].result is not None and rows[2].result is not None
    assert rows[1].result is None and "Error" in rows[1].error


def test_sweep_workers_preserve_order():
    seq = sweep(spec_for(BeamState.even_cat(2.0, 4.0)), "r0", [2.0, 3.0, 4.0])
    par = sweep(spec_for(BeamState.even_cat(2.0, 4.0)), "r0", [2.0, 3.0, 4.0],
                workers=3)
    assert [r.value for r in par] == [r.value for r in seq]
    assert [r.result.A for r in par] == [r.result.A for r in seq]


def test_sweep_rejects_bad_axis_and_empty_values():
    with pytest.raises(ValueError):
        sweep(spec_for(BeamState.gaussian(2.0)), "nope", [1.0])
    with pytest.raises(ValueError):
        sweep(spec_for(BeamState.gaussian(2.0)), "r0", [])


# -- oscillation detection --------------------------------------------------------


def test_constant_series_is_monotonic():
    rep = detect_oscillation([(float(i), 0.05) for i in range(6)])
    assert rep.sign_changes == 0
    assert rep.is_monotonic


def test_alternating_series_counts_changes():
    rep = detect_oscillation([(0, 1.0), (1, -1.0), (2, 1.0), (3, -1.0), (4, 1.0)])
    assert rep.sign_changes == 4
    assert not rep.is_monotonic


def test_too_few_points():
    with pytest.raises(TooFewPoints):
        detect_oscillation([(0, 1.0), (1, 2.0)])
    with pytest.raises(ValueError):
        detect_oscillation([(0, 1.0), (0, 2.0), (1, 1.0), (2, 1.0), (3, 1.0)])


def test_anisotropy_sweep_is_monotonic():
    series = []
    for ratio in np.linspace(1.0, 1.2, 5):
        res = azimuthal_asymmetry(spec_for(
            BeamState.anisotropic(2.0, 2.0 * ratio), metric="minmax", phi_grid_n=16))
        series.append((float(ratio), res.A))
    rep = detect_oscillation(series)
    assert rep.is_monotonic


def test_even_cat_r0_series_oscillates():
    th = peak_theta(ScatteringConfig(BeamState.even_cat(2.0, 2.0), WIDE), 20.0)
    rows = sweep(spec_for(BeamState.even_cat(2.0, 2.0), theta_deg=th.theta_star / DEG,
                          p=20.0),
                 "r0", list(np.linspace(2.0, 6.0, 9)))
    rep = detect_oscillation([(r.value, r.result.A) for r in rows])
    assert not rep.is_monotonic


# -- peak finding -----------------------------------------------------------------


def test_find_peak_parabolic_refinement():
    grid = np.linspace(0.0, 1.0, 51)
    true_peak = 0.437
    vals = np.exp(-0.5 * (grid - true_peak) ** 2 / 0.09)
    pk = find_peak(grid, vals)
    assert not pk.on_boundary
    assert pk.theta_star == pytest.approx(true_peak, abs=2e-4)


def test_find_peak_monotone_profile_flagged_on_boundary():
    grid = np.linspace(0.0, 1.0, 60)
    pk = find_peak(grid, np.exp(-3.0 * grid))
    assert pk.on_boundary
    assert pk.theta_star == 0.0


def test_find_peak_flat_profile_raises():
    grid = np.linspace(0.0, 1.0, 60)
    with pytest.raises(FlatDistribution):
        find_peak(grid, np.full_like(grid, 2.0) + 1e-6 * grid)


def test_gaussian_rate_peak_moves_down_with_energy():
    cfgg = ScatteringConfig(BeamState.gaussian(2.0), WIDE)
    pk30 = peak_theta(cfgg, 30.0)
    pk10 = peak_theta(cfgg, 10.0)
    assert pk10.theta_star > pk30.theta_star
    assert not pk30.on_boundary and not pk10.on_boundary


def test_cat_asymmetry_peak_tracks_reported_angles():
    # The asymmetry profile peaks near 2/p radians: about 3.7 deg at
    # p = 30/a and near 10 deg at p = 10/a.
    cfg = ScatteringConfig(BeamState.even_cat(2.0, 2.0), WIDE)
    pk30 = peak_theta(cfg, 30.0)
    pk10 = peak_theta(cfg, 10.0)
    assert 3.0 * DEG <= pk30.theta_star <= 7.0 * DEG
    assert 8.0 * DEG <= pk10.theta_star <= 14.0 * DEG


def test_peak_theta_grid_contract():
    cfg = ScatteringConfig(BeamState.gaussian(2.0), WIDE)
    with pytest.raises(ValueError):
        peak_theta(cfg, 10.0, theta_grid=np.linspace(2 * DEG, 45 * DEG, 60))
    with pytest.raises(ValueError):
        peak_theta(cfg, 10.0, theta_grid=np.linspace(1 * DEG, 45 * DEG, 20))
