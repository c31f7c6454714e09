"""Link budgets, the full-cooperation ceiling, saturation diagnostics, SIR CDF."""

import numpy as np
import pytest

from cooplim import (ClusterSpec, HexLayout, LinkBudget, SpectralEfficiencyCurve,
                     cinf_full_cooperation, harmonic_sinr, invert_effective_sir,
                     saturation_report, sir_cdf)
from cooplim.regimes import REGIME_DOF, REGIME_NOISE, REGIME_SATURATION

LAYOUT = HexLayout()


# ---------------------------------------------------------------------------
# harmonic SINR
# ---------------------------------------------------------------------------

def test_harmonic_of_equal_values():
    assert harmonic_sinr(8.0, 8.0) == pytest.approx(4.0)


def test_harmonic_infinite_sir_reverts_to_snr():
    assert harmonic_sinr(13.0, np.inf) == 13.0


def test_harmonic_saturates_at_sir():
    sir = 10 ** 0.92
    assert harmonic_sinr(1e12, sir) == pytest.approx(sir, rel=1e-10)


def test_harmonic_identity_property():
    rng = np.random.default_rng(6)
    snr = rng.uniform(0.01, 1e6, size=500)
    sir = rng.uniform(0.01, 1e6, size=500)
    sir[::7] = np.inf
    sinr = harmonic_sinr(snr, sir)
    assert np.allclose(1.0 / sinr, 1.0 / snr + 1.0 / sir, rtol=1e-12)


def test_link_budget_invariant():
    lb = LinkBudget.at_power([1.0, 10.0, 100.0], 8.0)
    assert np.allclose(1.0 / lb.sinr, 1.0 / lb.snr + 1.0 / lb.sir, rtol=1e-12)


def test_harmonic_rejects_nonpositive():
    with pytest.raises(ValueError):
        harmonic_sinr(0.0, 5.0)


# ---------------------------------------------------------------------------
# ceiling and its inverse
# ---------------------------------------------------------------------------

def test_ceiling_reference_point():
    # arbitrary-precision evaluation at sir = 1 (mpmath, 30 digits)
    assert cinf_full_cooperation(1.0) == pytest.approx(0.837423357042569895, rel=1e-14)


def test_ceiling_vanishes_at_zero_sir():
    assert cinf_full_cooperation(1e-12) == pytest.approx(0.0, abs=1e-11)


def test_ceiling_strictly_increasing():
    grid = np.logspace(-3, 6, 400)
    vals = cinf_full_cooperation(grid)
    assert np.all(np.diff(vals) > 0)


def test_ceiling_slope_monotone_toward_dof_limit():
    # in log2(SIR) the slope rises monotonically toward (and never crosses)
    # the one-bit-per-octave asymptote, the shape that makes the inversion
    # well posed
    grid = np.logspace(-3, 6, 200)
    slopes = np.diff(cinf_full_cooperation(grid)) / np.diff(np.log2(grid))
    assert np.all(np.diff(slopes) > 0)
    assert np.all(slopes < 1.0)


def test_ceiling_series_continuous_at_switch():
    below = cinf_full_cooperation(1e-6 * (1 - 1e-9))
    above = cinf_full_cooperation(1e-6 * (1 + 1e-9))
    assert below == pytest.approx(above, rel=1e-9)


def test_inversion_reference_points():
    assert 10 * np.log10(invert_effective_sir(11.86)) == pytest.approx(39.96, abs=0.05)
    assert 10 * np.log10(invert_effective_sir(7.98)) == pytest.approx(28.02, abs=0.05)


def test_inverse_round_trips():
    for x in (0.1, 1.0, 100.0):
        assert invert_effective_sir(cinf_full_cooperation(x)) == pytest.approx(x, rel=1e-8)
    for c in (0.5, 2.54, 11.86):
        assert cinf_full_cooperation(invert_effective_sir(c)) == pytest.approx(c, rel=1e-8)


def test_inversion_rejects_nonpositive():
    with pytest.raises(ValueError):
        invert_effective_sir(0.0)


# ---------------------------------------------------------------------------
# saturation reports
# ---------------------------------------------------------------------------

def _saturating_curve(sir_db, c_inf, lo=-10, hi=50, step=2.0):
    snr_db = np.arange(lo, hi + step, step)
    sinr = harmonic_sinr(10 ** (snr_db / 10), 10 ** (sir_db / 10))
    return SpectralEfficiencyCurve(snr_db=snr_db, se=c_inf * sinr / (1 + sinr))


def test_labels_monotone_and_boundaries():
    curve = _saturating_curve(20.0, 4.0)
    rep = saturation_report(curve, sir=10 ** 2.0)
    assert rep.snr_sat_db == pytest.approx(20.0)
    order = {REGIME_NOISE: 0, REGIME_DOF: 1, REGIME_SATURATION: 2}
    codes = [order[l] for l in rep.labels]
    assert codes == sorted(codes)
    assert REGIME_NOISE in rep.labels and REGIME_SATURATION in rep.labels


def test_infinite_sir_never_saturates():
    snr_db = np.arange(-10.0, 41.0, 2.0)
    curve = SpectralEfficiencyCurve(snr_db=snr_db, se=np.log2(1 + 10 ** (snr_db / 10)))
    rep = saturation_report(curve, sir=np.inf)
    assert REGIME_SATURATION not in rep.labels


def test_intersection_method_on_synthetic_line():
    # interference-free curve: exactly linear at 1 bit per 3 dB above 10 dB
    snr_db = np.arange(0.0, 42.0, 2.0)
    se = np.maximum(snr_db - 10.0, 0.1) / 3.0
    curve = SpectralEfficiencyCurve(snr_db=snr_db, se=se)
    rep = saturation_report(curve, c_inf=5.0)
    assert rep.snr_sat_db == pytest.approx(25.0, abs=1e-9)  # 5 bits * 3 dB + 10


def test_both_estimates_reported_when_both_inputs_given():
    snr_db = np.arange(0.0, 42.0, 2.0)
    se = np.maximum(snr_db - 10.0, 0.1) / 3.0
    curve = SpectralEfficiencyCurve(snr_db=snr_db, se=se)
    rep = saturation_report(curve, sir=10 ** 2.5, c_inf=5.0)
    assert rep.snr_sat_db == pytest.approx(25.0)
    assert rep.snr_sat_intersect_db == pytest.approx(25.0, abs=1e-9)


def test_short_curve_rejected():
    curve = SpectralEfficiencyCurve(snr_db=np.array([0.0, 5.0, 10.0]),
                                    se=np.array([1.0, 2.0, 3.0]))
    with pytest.raises(ValueError):
        saturation_report(curve, sir=10.0)


def test_need_sir_or_ceiling():
    with pytest.raises(ValueError):
        saturation_report(_saturating_curve(20.0, 4.0))


def test_unconverged_top_rejected():
    snr_db = np.arange(0.0, 22.0, 2.0)
    curve = SpectralEfficiencyCurve(snr_db=snr_db, se=snr_db / 3.0)
    with pytest.raises(ValueError):
        saturation_report(curve, sir=10.0)  # still climbing, no asymptote


# ---------------------------------------------------------------------------
# SIR distribution
# ---------------------------------------------------------------------------

def test_cdf_deterministic_per_seed():
    a = sir_cdf(LAYOUT, ClusterSpec.facing_three(), samples=400, seed=3)
    b = sir_cdf(LAYOUT, ClusterSpec.facing_three(), samples=400, seed=3)
    assert np.array_equal(a.values_db, b.values_db)


def test_cdf_centered_is_point_mass():
    d = sir_cdf(LAYOUT, ClusterSpec.facing_three(), samples=50, seed=1,
                randomize_in_cluster=False)
    assert np.ptp(d.values_db) < 1e-9
    assert d.median_db() == pytest.approx(9.2, abs=0.15)


def test_cdf_median_stable_across_seeds():
    a = sir_cdf(LAYOUT, ClusterSpec.facing_three(), samples=10_000, seed=5)
    b = sir_cdf(LAYOUT, ClusterSpec.facing_three(), samples=10_000, seed=6)
    # binomial quantile error at n = 3e4 values is ~0.05 dB here
    assert a.median_db() == pytest.approx(b.median_db(), abs=0.2)


def test_cdf_quantile_accessors():
    d = sir_cdf(LAYOUT, ClusterSpec.facing_three(), samples=2000, seed=9)
    assert d.values_db[0] <= d.quantile(0.1) <= d.quantile(0.9) <= d.values_db[-1]
    assert 0.0 <= d.fraction_below(20.0) <= 1.0


def test_cdf_rejects_whole_system():
    with pytest.raises(ValueError):
        sir_cdf(LAYOUT, ClusterSpec.whole_system(), samples=10, seed=0)


# ---------------------------------------------------------------------------
# end to end: coherent curve feeding a saturation report
# ---------------------------------------------------------------------------

def test_saturation_report_on_real_coherent_curve():
    from cooplim import (FadingModel, McConfig, UserPlacement, coherent_curve,
                         geometry_profile)

    cluster = ClusterSpec.facing_three()
    profile = geometry_profile(LAYOUT, cluster, UserPlacement.centered())
    curve = coherent_curve(LAYOUT, cluster, UserPlacement.centered(),
                           FadingModel.block(20000),
                           [-10.0, 0.0, 10.0, 20.0, 30.0, 40.0, 50.0],
                           McConfig(trials=1200, master_seed=33))
    rep = saturation_report(curve, sir=float(profile.sir[0]))
    assert rep.snr_sat_db == pytest.approx(9.2, abs=0.15)
    assert rep.c_inf == pytest.approx(2.54, abs=0.12)
    order = {REGIME_NOISE: 0, REGIME_DOF: 1, REGIME_SATURATION: 2}
    codes = [order[l] for l in rep.labels]
    assert codes == sorted(codes)


def test_sir_based_and_intersection_saturation_points_agree():
    # the two estimators come from different constructions; on the reference
    # cluster they must land within 3 dB of each other
    from cooplim import FadingModel, McConfig, UserPlacement, coherent_curve

    cluster = ClusterSpec.facing_three()
    free = coherent_curve(LAYOUT, cluster, UserPlacement.centered(),
                          FadingModel.block(20000), np.arange(0.0, 41.0, 5.0),
                          McConfig(trials=800, master_seed=37),
                          include_out_of_cluster=False)
    sir = 10 ** 0.91955
    rep = saturation_report(free, sir=sir, c_inf=2.54)
    assert rep.snr_sat_db == pytest.approx(9.1955, abs=1e-3)
    assert rep.snr_sat_intersect_db is not None
    assert abs(rep.snr_sat_intersect_db - rep.snr_sat_db) <= 3.0
