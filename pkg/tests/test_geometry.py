"""Geometry module: positions, sector pattern, lattice sums, profiles."""

import numpy as np
import pytest

from cooplim import (ClusterSpec, ConvergenceError, GeometryProfile, HexLayout,
                     SectorId, UserPlacement, average_power_gain, bs_position,
                     fragment_profile, geometry_profile,
                     lattice_interference_total, normalization_constant,
                     out_of_cluster_sir, sector_gain, sector_region_contains,
                     user_position)

SQRT3 = np.sqrt(3.0)
LAYOUT = HexLayout()  # gamma=3.8, Q=20 dB, R=1


# ---------------------------------------------------------------------------
# independent oracle: the closed-form user distances from the origin BS and
# the per-sector-class weights (reference receiver = sector-1 antenna)
# ---------------------------------------------------------------------------

def oracle_class_gains(u, v, gamma, q):
    """d_j(u,v)^-gamma with weights (1, 1/q, 1/q) for classes (1, 2, 3)."""
    d1 = np.sqrt((1.5 * u - 1 / 3) ** 2 + 3 * (v + u / 2 + 1 / 3) ** 2)
    d2 = np.sqrt((1.5 * u - 1 / 3) ** 2 + 3 * (v + u / 2 - 1 / 3) ** 2)
    d3 = np.sqrt((1.5 * u + 2 / 3) ** 2 + 3 * (v + u / 2) ** 2)
    return d1 ** -gamma + (d2 ** -gamma + d3 ** -gamma) / q


def oracle_lattice_sum(tier, gamma, q):
    rng = np.arange(-tier, tier + 1)
    uu, vv = np.meshgrid(rng, rng, indexing="ij")
    uu, vv = uu.ravel(), vv.ravel()
    keep = (np.abs(uu) + np.abs(vv) + np.abs(uu + vv)) // 2 <= tier
    return oracle_class_gains(uu[keep].astype(float), vv[keep].astype(float), gamma, q).sum()


# ---------------------------------------------------------------------------
# construction invariants
# ---------------------------------------------------------------------------

def test_layout_rejects_divergent_exponent():
    with pytest.raises(ValueError):
        HexLayout(decay_exponent=2.0)
    with pytest.raises(ValueError):
        HexLayout(decay_exponent=1.5)


def test_layout_rejects_negative_front_to_back():
    with pytest.raises(ValueError):
        HexLayout(front_to_back_db=-3.0)


def test_sector_id_range():
    with pytest.raises(ValueError):
        SectorId(0, 0, 4)


def test_cluster_members_distinct():
    with pytest.raises(ValueError):
        ClusterSpec(members=(SectorId(0, 0, 1), SectorId(0, 0, 1)))


def test_profile_rows_must_be_stochastic():
    with pytest.raises(ValueError):
        GeometryProfile(g=np.array([[0.5, 0.4]]), sir=np.array([1.0]))


# ---------------------------------------------------------------------------
# positions
# ---------------------------------------------------------------------------

def test_bs_position_formulas():
    assert np.allclose(bs_position(SectorId(0, 0, 1), LAYOUT), [0.0, 0.0])
    assert np.allclose(bs_position(SectorId(1, 0, 1), LAYOUT), [1.5, SQRT3 / 2])
    assert np.allclose(bs_position(SectorId(0, 1, 1), LAYOUT), [0.0, SQRT3])


def test_centered_user_positions():
    p3 = user_position(SectorId(0, 0, 3), UserPlacement.centered(), LAYOUT)
    assert np.allclose(p3, [2 / 3, 0.0])
    p1 = user_position(SectorId(0, 0, 1), UserPlacement.centered(), LAYOUT)
    assert np.allclose(p1, [-1 / 3, 1 / SQRT3])
    # all three centered users sit at distance 2R/3 from the BS
    for s in (1, 2, 3):
        p = user_position(SectorId(0, 0, s), UserPlacement.centered(), LAYOUT)
        assert np.hypot(*p) == pytest.approx(2 / 3, rel=1e-15)


def test_randomized_user_in_sector_region():
    placement = UserPlacement.randomized(seed=3)
    for s in (1, 2, 3):
        for sample in range(50):
            sid = SectorId(1, -1, s)
            p = user_position(sid, placement, LAYOUT, sample=sample)
            assert sector_region_contains(sid, p, LAYOUT)


def test_randomized_user_deterministic_and_sample_indexed():
    placement = UserPlacement.randomized(seed=9)
    sid = SectorId(0, 0, 2)
    a = user_position(sid, placement, LAYOUT, sample=4)
    b = user_position(sid, placement, LAYOUT, sample=4)
    c = user_position(sid, placement, LAYOUT, sample=5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


# ---------------------------------------------------------------------------
# sector pattern
# ---------------------------------------------------------------------------

def test_sector_gain_own_and_opposite():
    user3 = user_position(SectorId(0, 0, 3), UserPlacement.centered(), LAYOUT)
    assert sector_gain(SectorId(0, 0, 3), user3, LAYOUT) == 1.0
    assert sector_gain(SectorId(0, 0, 1), user3, LAYOUT) == pytest.approx(
        1.0 / LAYOUT.front_to_back_q)


def test_sector_gain_rejects_bs_location():
    with pytest.raises(ValueError):
        sector_gain(SectorId(0, 0, 1), [0.0, 0.0], LAYOUT)


def test_pattern_matches_class_rule_per_ring():
    """Per complete lattice ring, the azimuth pattern and the per-class
    bookkeeping (own class full gain, other classes 1/Q) sum identically."""
    gamma, q = LAYOUT.decay_exponent, LAYOUT.front_to_back_q
    rx = SectorId(0, 0, 1)
    centered = UserPlacement.centered()
    for tier in range(0, 6):
        rng = range(-tier, tier + 1)
        cells = [(u, v) for u in rng for v in rng
                 if (abs(u) + abs(v) + abs(u + v)) // 2 == tier]
        az_sum = sum(
            average_power_gain(rx, (SectorId(u, v, s), centered), LAYOUT)
            for (u, v) in cells for s in (1, 2, 3)
        )
        cl_sum = sum(oracle_class_gains(float(u), float(v), gamma, q) for (u, v) in cells)
        assert az_sum == pytest.approx(cl_sum, rel=1e-12)


def test_average_power_gain_own_user():
    # (2/3)^-3.8 against an arbitrary-precision oracle (mpmath, 30 digits)
    rx = SectorId(0, 0, 3)
    g = average_power_gain(rx, (rx, UserPlacement.centered()), LAYOUT)
    assert g == pytest.approx(4.66817130187624681, rel=1e-14)


def test_average_power_gain_d3_distance():
    # the class-3 user of the origin cell sits at exactly 2R/3
    d3 = np.sqrt((1.5 * 0 + 2 / 3) ** 2 + 3 * (0 + 0 / 2) ** 2)
    assert d3 == pytest.approx(2 / 3, abs=0)


def test_zero_exponent_degenerates_to_pattern():
    # construction forbids gamma <= 2; poke the internal field directly
    layout = HexLayout()
    object.__setattr__(layout, "decay_exponent", 0.0)
    rx = SectorId(0, 0, 3)
    own = average_power_gain(rx, (SectorId(0, 0, 3), UserPlacement.centered()), layout)
    other = average_power_gain(rx, (SectorId(2, 1, 1), UserPlacement.centered()), layout)
    assert own == 1.0
    assert other in (1.0, 1.0 / layout.front_to_back_q)


# ---------------------------------------------------------------------------
# lattice normalization
# ---------------------------------------------------------------------------

def test_normalization_constant_reference_value():
    assert normalization_constant(LAYOUT) == pytest.approx(0.157, abs=0.002)


def test_normalization_defining_property():
    d = normalization_constant(LAYOUT)
    assert d * lattice_interference_total(LAYOUT) == pytest.approx(1.0, abs=1e-9)


def test_normalization_against_brute_force():
    # truncated oracle sum, no tail model: tier 300 is good to ~1e-5 relative
    brute = oracle_lattice_sum(300, LAYOUT.decay_exponent, LAYOUT.front_to_back_q)
    assert lattice_interference_total(LAYOUT) == pytest.approx(brute, rel=2e-5)


def test_doubling_tier_cap_leaves_d_unchanged():
    # the tolerance rule stops the expansion well below the cap, so raising
    # the cap cannot change the result
    d1 = normalization_constant(HexLayout(max_tier=2500))
    d2 = normalization_constant(HexLayout(max_tier=5000))
    assert d1 == d2


def test_lattice_requires_enough_tiers():
    with pytest.raises(ConvergenceError):
        lattice_interference_total(HexLayout(max_tier=8))


def test_normalization_scales_with_radius():
    d1 = normalization_constant(HexLayout())
    d2 = normalization_constant(HexLayout(cell_radius=2.0))
    assert d2 / d1 == pytest.approx(2.0 ** LAYOUT.decay_exponent, rel=1e-12)


# ---------------------------------------------------------------------------
# out-of-cluster SIR and profiles
# ---------------------------------------------------------------------------

def test_facing_three_sir_reference_value():
    sir = out_of_cluster_sir(LAYOUT, ClusterSpec.facing_three(), UserPlacement.centered())
    sir_db = 10 * np.log10(sir)
    assert np.all(np.abs(sir_db - 9.2) < 0.15)
    # isotropy of the facing cluster: all three receivers identical
    assert np.ptp(sir_db) < 1e-9


def test_whole_system_sir_is_infinite():
    assert np.isinf(out_of_cluster_sir(LAYOUT, ClusterSpec.whole_system(),
                                       UserPlacement.centered()))


def test_single_sector_sir_against_brute_force():
    sir = out_of_cluster_sir(LAYOUT, ClusterSpec.single(), UserPlacement.centered())
    own = (2 / 3) ** -LAYOUT.decay_exponent
    total = oracle_lattice_sum(500, LAYOUT.decay_exponent, LAYOUT.front_to_back_q)
    assert sir[0] == pytest.approx(own / (total - own), rel=1e-4)


def test_geometry_profile_single():
    prof = geometry_profile(LAYOUT, ClusterSpec.single(), UserPlacement.centered())
    assert prof.g.shape == (1, 1)
    assert prof.g[0, 0] == 1.0


def test_facing_three_rows_are_permutations():
    prof = geometry_profile(LAYOUT, ClusterSpec.facing_three(), UserPlacement.centered())
    sorted_rows = np.sort(prof.g, axis=1)
    assert np.allclose(sorted_rows, sorted_rows[0], rtol=1e-12)
    assert np.allclose(prof.g.sum(axis=1), 1.0, atol=1e-12)


def test_whole_system_profile_rejected():
    with pytest.raises(ValueError):
        geometry_profile(LAYOUT, ClusterSpec.whole_system(), UserPlacement.centered())


def _random_cluster(rng, size):
    seen = set()
    while len(seen) < size:
        seen.add(SectorId(int(rng.integers(-2, 3)), int(rng.integers(-2, 3)),
                          int(rng.integers(1, 4))))
    return ClusterSpec(members=tuple(sorted(seen)))


def test_row_stochasticity_across_clusters_and_placements():
    rng = np.random.default_rng(11)
    for size in (1, 2, 3, 5, 8):
        cluster = _random_cluster(rng, size)
        for placement in (UserPlacement.centered(), UserPlacement.randomized(seed=5)):
            prof = geometry_profile(LAYOUT, cluster, placement, sample=2)
            assert np.allclose(prof.g.sum(axis=1), 1.0, atol=1e-12)
            assert np.all(prof.g >= 0)
            assert np.all(prof.sir > 0)


def test_scale_invariance_in_cell_radius():
    cluster = ClusterSpec.seven_cell()
    base = geometry_profile(LAYOUT, cluster, UserPlacement.centered())
    for radius in (0.5, 3.7):
        scaled = geometry_profile(HexLayout(cell_radius=radius), cluster,
                                  UserPlacement.centered())
        assert np.allclose(scaled.g, base.g, rtol=1e-12)
        assert np.allclose(scaled.sir, base.sir, rtol=1e-12)


def test_growing_cluster_never_lowers_retained_sir():
    base = ClusterSpec.facing_three()
    sir0 = out_of_cluster_sir(LAYOUT, base, UserPlacement.centered())
    for extra in (SectorId(0, 0, 1), SectorId(2, -1, 2), SectorId(0, 1, 3)):
        grown = ClusterSpec(members=base.members + (extra,))
        sir1 = out_of_cluster_sir(LAYOUT, grown, UserPlacement.centered())
        assert np.all(sir1[:3] >= sir0 - 1e-15)


def test_fragment_profile_shape_and_isotropy():
    prof = fragment_profile(LAYOUT, 4)
    assert prof.g.shape == (48, 48)
    assert np.allclose(prof.g.sum(axis=1), 1.0, atol=1e-12)
    assert np.allclose(prof.g, prof.g[0], atol=0)  # replicated central row
    assert np.all(np.isinf(prof.sir))
