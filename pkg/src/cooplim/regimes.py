"""Link budgets, the full-cooperation ceiling and its inversion, saturation
diagnostics, and SIR distributions over randomized user locations.

The working identity is the harmonic-mean SINR: 1/SINR = 1/SNR + 1/SIR.
Noise dominates at low power, the power-independent out-of-cluster
interference dominates above SNR_sat ~ SIR, and the spectral efficiency
saturates at a ceiling C_inf there.
"""

from dataclasses import dataclass

import numpy as np

from .curves import SpectralEfficiencyCurve
from .geometry import (ClusterSpec, HexLayout, UserPlacement,
                       _cluster_raw_gains, _owning_sector_float, _rhombus_edges,
                       bs_position, lattice_interference_total)

LOG2E = np.log2(np.e)

REGIME_NOISE = "noise"
REGIME_DOF = "dof"
REGIME_SATURATION = "saturation"

# reporting convention: the noise regime ends at SNR = 0 dB
_NOISE_DOF_BOUNDARY_DB = 0.0


def harmonic_sinr(snr, sir):
    """SINR as the harmonic mean of SNR and SIR; sir = +inf returns snr."""
    snr = np.asarray(snr, dtype=float)
    sir = np.asarray(sir, dtype=float)
    if np.any(snr <= 0) or np.any(sir <= 0):
        raise ValueError("snr and sir must be positive (sir may be +inf)")
    out = 1.0 / (1.0 / snr + 1.0 / sir)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class LinkBudget:
    """Per-receiver SNR/SIR and the derived harmonic-mean SINR."""

    snr: np.ndarray
    sir: np.ndarray
    sinr: np.ndarray

    @classmethod
    def at_power(cls, snr, sir) -> "LinkBudget":
        snr = np.atleast_1d(np.asarray(snr, dtype=float))
        sir = np.broadcast_to(np.asarray(sir, dtype=float), snr.shape).astype(float)
        return cls(snr=snr, sir=sir, sinr=np.atleast_1d(harmonic_sinr(snr, sir)))


def cinf_full_cooperation(sir) -> float:
    """Full-cooperation high-power ceiling as a function of the linear SIR:

        2 log2((1 + sqrt(1+4s))/2) - log2(e)/(4s) * (sqrt(1+4s) - 1)^2

    For s below 1e-6 the second-order series log2(e) * (s - s^2) avoids the
    cancellation in the second term.
    """
    s = np.asarray(sir, dtype=float)
    if np.any(s <= 0):
        raise ValueError("sir must be positive")
    small = s < 1e-6
    s_safe = np.where(small, 1.0, s)
    root = np.sqrt(1.0 + 4.0 * s_safe)
    exact = 2.0 * np.log2((1.0 + root) / 2.0) - LOG2E / (4.0 * s_safe) * (root - 1.0) ** 2
    series = LOG2E * (s - s * s)
    out = np.where(small, series, exact)
    return out if out.ndim else float(out)


def invert_effective_sir(c_inf: float) -> float:
    """Linear SIR whose full-cooperation ceiling equals ``c_inf``.

    Bisection on the strictly increasing ceiling to 1e-10 relative width.
    """
    if not c_inf > 0.0:
        raise ValueError("c_inf must be positive")
    lo, hi = 1e-12, 1.0
    while cinf_full_cooperation(hi) < c_inf:
        hi *= 4.0
        if hi > 1e30:
            raise ValueError(f"c_inf = {c_inf:g} is out of reach")
    while (hi - lo) > 1e-10 * hi:
        mid = 0.5 * (lo + hi)
        if cinf_full_cooperation(mid) < c_inf:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SaturationReport:
    """Ceiling, saturation point(s) and per-point regime labels for a curve."""

    c_inf: float
    snr_sat_db: float
    labels: tuple
    snr_sat_intersect_db: float | None = None


def _intersection_snr_sat(curve: SpectralEfficiencyCurve, c_inf: float) -> float:
    """Where the high-power straight-line expansion of an interference-free
    curve (fit over its top 10 dB) meets the ceiling."""
    top = curve.snr_db >= curve.snr_db[-1] - 10.0
    if top.sum() < 2:
        raise ValueError("curve needs at least two points in its top 10 dB")
    slope, icept = np.polyfit(curve.snr_db[top], curve.se[top], 1)
    if slope <= 0:
        raise ValueError("top of the curve is not increasing; cannot extrapolate")
    return float((c_inf - icept) / slope)


def saturation_report(curve: SpectralEfficiencyCurve, sir: float | None = None,
                      c_inf: float | None = None) -> SaturationReport:
    """Classify a curve into noise / DoF / saturation regimes.

    With a known linear ``sir``, SNR_sat = SIR (in dB) and the ceiling is
    read off the top of the curve (the last two points must agree within
    5%, certifying the asymptote).  With only ``c_inf`` given, the curve is
    taken to be the interference-free reference and SNR_sat comes from
    intersecting its top-10 dB straight-line expansion with the ceiling.
    When both are supplied, both estimates are reported.
    """
    if sir is None and c_inf is None:
        raise ValueError("need sir or c_inf to locate the saturation point")
    if curve.span_db < 20.0:
        raise ValueError("curve must span at least 20 dB to classify regimes")

    snr_sat_int = None
    if sir is not None:
        if np.isinf(sir):
            snr_sat = np.inf
            ceiling = float(curve.se[-1]) if c_inf is None else c_inf
        else:
            snr_sat = 10.0 * np.log10(sir)
            if c_inf is None:
                last, prev = float(curve.se[-1]), float(curve.se[-2])
                if abs(last - prev) > 0.05 * abs(last):
                    raise ValueError(
                        "curve top has not converged; extend the grid or pass c_inf"
                    )
                ceiling = last
            else:
                ceiling = c_inf
        if c_inf is not None and np.isfinite(snr_sat):
            snr_sat_int = _intersection_snr_sat(curve, c_inf)
    else:
        ceiling = c_inf
        snr_sat = _intersection_snr_sat(curve, c_inf)

    labels = tuple(
        REGIME_NOISE if x < _NOISE_DOF_BOUNDARY_DB
        else (REGIME_DOF if x < snr_sat else REGIME_SATURATION)
        for x in curve.snr_db
    )
    return SaturationReport(c_inf=float(ceiling), snr_sat_db=float(snr_sat),
                            labels=labels, snr_sat_intersect_db=snr_sat_int)


@dataclass(frozen=True)
class SirDistribution:
    """Empirical SIR distribution (dB), pooled over the cluster's receivers."""

    values_db: np.ndarray  # sorted ascending
    seed: int
    samples: int

    def quantile(self, p) -> float:
        return float(np.quantile(self.values_db, p))

    def median_db(self) -> float:
        return self.quantile(0.5)

    def fraction_below(self, threshold_db: float) -> float:
        return float(np.searchsorted(self.values_db, threshold_db) / self.values_db.size)


def sir_cdf(layout: HexLayout, cluster: ClusterSpec, samples: int, seed: int,
            randomize_in_cluster: bool = True) -> SirDistribution:
    """Empirical SIR distribution with randomized in-cluster user locations.

    Out-of-cluster users stay centered, so the denominator is the fixed
    lattice total minus the centered in-cluster gains; only the numerator
    is resampled.  Draws are uniform over each sector rhombus from a single
    Philox stream keyed by ``seed`` (sample-major layout), deterministic
    for a given seed.  ``randomize_in_cluster=False`` keeps everyone
    centered and yields a point mass at the centered SIR.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if cluster.is_whole_system:
        raise ValueError("whole-system clusters have no out-of-cluster SIR distribution")

    members = cluster.members
    k = len(members)
    centered = _cluster_raw_gains(layout, cluster, UserPlacement.centered())
    total = lattice_interference_total(layout)
    out_den = total - centered.sum(axis=1)

    if not randomize_in_cluster:
        sir_db = 10.0 * np.log10(centered.sum(axis=1) / out_den)
        values = np.sort(np.tile(sir_db, samples))
        return SirDistribution(values_db=values, seed=seed, samples=samples)

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=int(seed))))
    st = rng.random((samples, k, 2))

    pos = np.empty((samples, k, 2))
    for j, m in enumerate(members):
        a1, a2 = _rhombus_edges(m.sector, layout.cell_radius)
        base = bs_position(m, layout)
        pos[:, j, 0] = base[0] + st[:, j, 0] * a1[0] + st[:, j, 1] * a2[0]
        pos[:, j, 1] = base[1] + st[:, j, 0] * a1[1] + st[:, j, 1] * a2[1]

    gamma = layout.decay_exponent
    q = layout.front_to_back_q
    sirs = np.empty((samples, k))
    for i, m in enumerate(members):
        base = bs_position(m, layout)
        dx = pos[:, :, 0] - base[0]
        dy = pos[:, :, 1] - base[1]
        d2 = dx * dx + dy * dy
        w = np.where(_owning_sector_float(dx, dy) == m.sector, 1.0, 1.0 / q)
        g_in = (w * d2 ** (-gamma / 2.0)).sum(axis=1)
        sirs[:, i] = g_in / out_den[i]

    values = np.sort(10.0 * np.log10(sirs.ravel()))
    return SirDistribution(values_db=values, seed=seed, samples=samples)
