"""Hexagonal tri-sector cellular universe.

Cells of circumradius R sit on a triangular lattice indexed by integers
(u, v) with base-station coordinates x = (3/2)uR, y = sqrt(3)(v + u/2)R.
Every cell carries three 120-degree sectors; the sector-3 boresight points
along +x, sectors 1 and 2 point at +120 and -120 degrees.  One user per
sector, nominally centered in azimuth at distance 2R/3 from its BS.

Distance decay d^-gamma with gamma > 2 plus a front-to-back sector pattern
(unit gain inside the 120-degree span, 1/Q outside) give the average link
gains.  Out-of-cluster interference is summed over the infinite lattice:
exact tiers up to an adaptive radius plus a continuum tail integrated over
the complement of the covered (hexagon-shaped) region.

Span membership on lattice points is decided in exact integer arithmetic:
user coordinates are rationals with denominator 6, so 6x and 6*eta (where
y = sqrt(3)*eta) are integers and the three boundary-ray sign tests are
exact.  Spans are half-open, [boresight - 60, boresight + 60) degrees, each
span owning its clockwise boundary ray.  This keeps the pattern invariant
under the 120-degree lattice rotation, which is what makes the per-ring
sums match the per-sector-class bookkeeping used for the whole-system
reference sums.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError

SQRT3 = np.sqrt(3.0)
CELL_AREA = 1.5 * SQRT3  # hexagon of circumradius 1

SECTOR_BEARING = {1: 2 * np.pi / 3, 2: -2 * np.pi / 3, 3: 0.0}

# User offset from the serving BS in units of R/6: dx6 = 6*dx and
# deta6 = 6*eta with y = sqrt(3)*eta.  Sector 1: (-1/3, 1/sqrt3),
# sector 2: (-1/3, -1/sqrt3), sector 3: (2/3, 0).
_OFF_6X = {1: -2, 2: -2, 3: 4}
_OFF_6E = {1: 2, 2: -2, 3: 0}

_FACING_THREE = ((0, 0, 3), (1, 0, 2), (1, -1, 1))
_FIRST_TIER = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


@dataclass(frozen=True)
class HexLayout:
    """Static system parameters of the hexagonal universe.

    All distances are in units of ``cell_radius``; the front-to-back ratio
    is given in dB and used linearly internally.
    """

    decay_exponent: float = 3.8
    front_to_back_db: float = 20.0
    cell_radius: float = 1.0
    lattice_tolerance: float = 1e-9
    max_tier: int = 5000

    def __post_init__(self):
        if not self.decay_exponent > 2.0:
            raise ValueError(
                f"decay_exponent must exceed 2 (lattice sums diverge), got {self.decay_exponent}"
            )
        if self.front_to_back_db < 0.0:
            raise ValueError("front_to_back_db must be >= 0 (Q >= 1)")
        if self.cell_radius <= 0.0:
            raise ValueError("cell_radius must be positive")
        if self.lattice_tolerance <= 0.0 or self.max_tier < 1:
            raise ValueError("lattice_tolerance must be > 0 and max_tier >= 1")

    @property
    def front_to_back_q(self) -> float:
        return 10.0 ** (self.front_to_back_db / 10.0)


@dataclass(frozen=True, order=True)
class SectorId:
    u: int
    v: int
    sector: int

    def __post_init__(self):
        if self.sector not in (1, 2, 3):
            raise ValueError(f"sector must be 1, 2 or 3, got {self.sector}")


@dataclass(frozen=True)
class UserPlacement:
    """Where the one user of each sector sits.

    ``centered`` puts it on the sector boresight at distance 2R/3 from the
    BS.  ``randomized`` draws it uniformly over the sector region (the
    rhombus cut from the cell hexagon by the 120-degree wedge), with a
    stream derived from (seed, cell, sector, sample) so draws are
    reproducible and order-independent.
    """

    mode: str = "centered"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("centered", "randomized"):
            raise ValueError(f"unknown placement mode {self.mode!r}")

    @classmethod
    def centered(cls) -> "UserPlacement":
        return cls(mode="centered")

    @classmethod
    def randomized(cls, seed: int) -> "UserPlacement":
        return cls(mode="randomized", seed=seed)

    @property
    def is_random(self) -> bool:
        return self.mode == "randomized"


@dataclass(frozen=True)
class ClusterSpec:
    """The K = N cooperating sectors; ``members is None`` means the whole
    (infinite) system cooperates."""

    members: tuple | None

    def __post_init__(self):
        if self.members is not None:
            if len(self.members) < 1:
                raise ValueError("cluster must contain at least one sector")
            if len(set(self.members)) != len(self.members):
                raise ValueError("cluster members must be distinct")

    @property
    def is_whole_system(self) -> bool:
        return self.members is None

    @property
    def k(self) -> int:
        if self.members is None:
            raise ValueError("whole-system cluster has no finite size")
        return len(self.members)

    @classmethod
    def single(cls) -> "ClusterSpec":
        return cls(members=(SectorId(0, 0, 3),))

    @classmethod
    def facing_three(cls) -> "ClusterSpec":
        """Three sectors of mutually adjacent cells whose boresights point
        at their common lattice corner (1, 0)."""
        return cls(members=tuple(SectorId(*m) for m in _FACING_THREE))

    @classmethod
    def seven_cell(cls) -> "ClusterSpec":
        """Central cell plus its first tier, all three sectors each (K=21)."""
        cells = ((0, 0),) + _FIRST_TIER
        return cls(members=tuple(SectorId(u, v, s) for (u, v) in cells for s in (1, 2, 3)))

    @classmethod
    def whole_system(cls) -> "ClusterSpec":
        return cls(members=None)

    @classmethod
    def preset(cls, name: str) -> "ClusterSpec":
        table = {
            "single": cls.single,
            "facing3": cls.facing_three,
            "7cell": cls.seven_cell,
            "whole": cls.whole_system,
        }
        if name not in table:
            raise ValueError(f"unknown cluster preset {name!r}; choose from {sorted(table)}")
        return table[name]()


@dataclass(frozen=True)
class GeometryProfile:
    """Row-stochastic in-cluster gain shares plus per-receiver out-of-cluster SIR."""

    g: np.ndarray    # (N, K), rows sum to 1
    sir: np.ndarray  # (N,), linear, may be +inf

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        sir = np.atleast_1d(np.asarray(self.sir, dtype=float))
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "sir", sir)
        if g.ndim != 2:
            raise ValueError("g must be a 2-D array")
        if np.any(g < 0.0):
            raise ValueError("gain shares must be nonnegative")
        rowsum = g.sum(axis=1)
        if np.any(np.abs(rowsum - 1.0) > 1e-12):
            raise ValueError("each row of g must sum to 1 within 1e-12")
        if sir.shape != (g.shape[0],):
            raise ValueError("sir must have one entry per receiver row")
        if np.any(sir <= 0.0):
            raise ValueError("sir values must be positive")

    @property
    def n_receivers(self) -> int:
        return self.g.shape[0]

    @property
    def k_transmitters(self) -> int:
        return self.g.shape[1]

    @classmethod
    def from_shares(cls, g, sir=None) -> "GeometryProfile":
        """Build a profile from raw per-row shares, normalizing each row.

        ``sir=None`` means no out-of-cluster interference (+inf).
        """
        g = np.atleast_2d(np.asarray(g, dtype=float))
        g = g / g.sum(axis=1, keepdims=True)
        if sir is None:
            sir = np.full(g.shape[0], np.inf)
        return cls(g=g, sir=np.broadcast_to(np.asarray(sir, dtype=float), (g.shape[0],)).copy())


# ---------------------------------------------------------------------------
# positions and pattern
# ---------------------------------------------------------------------------

def bs_position(sector_id: SectorId, layout: HexLayout) -> np.ndarray:
    """Cartesian BS coordinates of the cell holding ``sector_id``."""
    r = layout.cell_radius
    return np.array([
        1.5 * sector_id.u * r,
        SQRT3 * (sector_id.v + sector_id.u / 2.0) * r,
    ])


def _rhombus_edges(sector: int, r: float) -> tuple:
    """The two edge vectors spanning the sector region from the BS.

    For sector 3 these are the hexagon vertices at -60 and +60 degrees;
    other sectors are the same pair rotated by the boresight.
    """
    b = SECTOR_BEARING[sector]
    c, s = np.cos(b), np.sin(b)
    a1 = np.array([0.5 * c - (SQRT3 / 2) * s, 0.5 * s + (SQRT3 / 2) * c]) * r
    a2 = np.array([0.5 * c + (SQRT3 / 2) * s, 0.5 * s - (SQRT3 / 2) * c]) * r
    return a1, a2


def _placement_rng(placement: UserPlacement, sector_id: SectorId, sample: int):
    def zz(n):  # zig-zag map to nonnegative ints for SeedSequence entropy
        return 2 * n if n >= 0 else -2 * n - 1

    ss = np.random.SeedSequence(
        entropy=[zz(placement.seed), zz(sector_id.u), zz(sector_id.v), sector_id.sector, zz(sample)]
    )
    return np.random.Generator(np.random.Philox(ss))


def user_position(sector_id: SectorId, placement: UserPlacement,
                  layout: HexLayout, sample: int = 0) -> np.ndarray:
    """Position of the sector's user.

    Centered: BS + the fixed boresight offset of length 2R/3.  Randomized:
    uniform over the sector rhombus via the exact affine map s*a1 + t*a2
    with s, t ~ U(0,1) (one draw pair per sample, seed-deterministic).
    """
    base = bs_position(sector_id, layout)
    r = layout.cell_radius
    if not placement.is_random:
        off = np.array([_OFF_6X[sector_id.sector], SQRT3 * _OFF_6E[sector_id.sector]]) * (r / 6.0)
        return base + off
    rng = _placement_rng(placement, sector_id, sample)
    s, t = rng.random(2)
    a1, a2 = _rhombus_edges(sector_id.sector, r)
    return base + s * a1 + t * a2


def sector_region_contains(sector_id: SectorId, point, layout: HexLayout) -> bool:
    """Whether ``point`` lies in the sector's rhombus region (boundary included)."""
    p = np.asarray(point, dtype=float) - bs_position(sector_id, layout)
    a1, a2 = _rhombus_edges(sector_id.sector, layout.cell_radius)
    st = np.linalg.solve(np.column_stack([a1, a2]), p)
    eps = 1e-12
    return bool(np.all(st >= -eps) and np.all(st <= 1.0 + eps))


def _owning_sector_float(dx, dy):
    """Span classification for arbitrary (float) offsets from a BS.

    Mirrors the exact integer rule: with eta = dy/sqrt(3),
      sector 3: eta + dx >= 0 and eta - dx < 0
      sector 1: eta - dx >= 0 and eta > 0
      sector 2: eta <= 0 and eta + dx < 0
    """
    eta = np.asarray(dy) / SQRT3
    dx = np.asarray(dx)
    out = np.zeros(np.broadcast(eta, dx).shape, dtype=np.int64)
    out[(eta + dx >= 0) & (eta - dx < 0)] = 3
    out[(eta - dx >= 0) & (eta > 0)] = 1
    out[(eta <= 0) & (eta + dx < 0)] = 2
    return out


def _owning_sector_int(ix6, ie6):
    """Exact span classification from integer 6*dx, 6*eta offsets."""
    out = np.zeros(np.broadcast(ix6, ie6).shape, dtype=np.int64)
    out[(ie6 + ix6 >= 0) & (ie6 - ix6 < 0)] = 3
    out[(ie6 - ix6 >= 0) & (ie6 > 0)] = 1
    out[(ie6 <= 0) & (ie6 + ix6 < 0)] = 2
    return out


def sector_gain(serving: SectorId, target_point, layout: HexLayout) -> float:
    """Antenna gain of ``serving``'s sector toward ``target_point``: 1 inside
    the half-open 120-degree span, 1/Q outside.  Errors if the target
    coincides with the BS (undefined azimuth)."""
    d = np.asarray(target_point, dtype=float) - bs_position(serving, layout)
    if d[0] == 0.0 and d[1] == 0.0:
        raise ValueError("target coincides with the BS; azimuth undefined")
    own = _owning_sector_float(d[0], d[1])
    return 1.0 if int(own) == serving.sector else 1.0 / layout.front_to_back_q


def average_power_gain(receiver: SectorId, transmitter_user, layout: HexLayout,
                       sample: int = 0) -> float:
    """Unnormalized average gain d^-gamma * sector_gain from a user to a
    sector antenna.  ``transmitter_user`` is a (SectorId, UserPlacement)
    pair.  Centered users on lattice points are classified exactly."""
    tx_id, placement = transmitter_user
    if not placement.is_random:
        du, dv = tx_id.u - receiver.u, tx_id.v - receiver.v
        ix6 = 9 * du + _OFF_6X[tx_id.sector]
        ie6 = 6 * dv + 3 * du + _OFF_6E[tx_id.sector]
        if ix6 == 0 and ie6 == 0:
            raise ValueError("transmitter coincides with the receiving BS")
        d2 = ((ix6 / 6.0) ** 2 + 3.0 * (ie6 / 6.0) ** 2) * layout.cell_radius ** 2
        own = int(_owning_sector_int(np.asarray(ix6), np.asarray(ie6)))
        w = 1.0 if own == receiver.sector else 1.0 / layout.front_to_back_q
        return float(w * d2 ** (-layout.decay_exponent / 2.0))
    pos = user_position(tx_id, placement, layout, sample=sample)
    rel = pos - bs_position(receiver, layout)
    d = float(np.hypot(rel[0], rel[1]))
    if d == 0.0:
        raise ValueError("transmitter coincides with the receiving BS")
    return sector_gain(receiver, pos, layout) * d ** (-layout.decay_exponent)


# ---------------------------------------------------------------------------
# infinite-lattice sums
# ---------------------------------------------------------------------------

def _cells_in_tiers(t_lo: int, t_hi: int):
    """All cell indices with hex distance in [t_lo, t_hi]."""
    rng = np.arange(-t_hi, t_hi + 1)
    uu, vv = np.meshgrid(rng, rng, indexing="ij")
    uu = uu.ravel()
    vv = vv.ravel()
    hexd = (np.abs(uu) + np.abs(vv) + np.abs(uu + vv)) // 2
    m = (hexd >= t_lo) & (hexd <= t_hi)
    return uu[m], vv[m]


def _tier_block_gains(gamma: float, q: float, t_lo: int, t_hi: int, rx_sector: int = 3):
    """Raw per-user gains d^-gamma * w for all users in tiers [t_lo, t_hi]
    around a receiver at the origin cell (R = 1 units)."""
    uu, vv = _cells_in_tiers(t_lo, t_hi)
    parts = []
    for s in (1, 2, 3):
        ix6 = 9 * uu + _OFF_6X[s]
        ie6 = 6 * vv + 3 * uu + _OFF_6E[s]
        d2 = (ix6 / 6.0) ** 2 + 3.0 * (ie6 / 6.0) ** 2
        w = np.where(_owning_sector_int(ix6, ie6) == rx_sector, 1.0, 1.0 / q)
        parts.append(w * d2 ** (-gamma / 2.0))
    return np.concatenate(parts)


@lru_cache(maxsize=32)
def _cos_power_integral(p: float) -> float:
    """integral of cos(phi)^p over [0, pi/6]; angular factor of the hexagon tail."""
    from scipy.integrate import quad

    val, _ = quad(lambda phi: np.cos(phi) ** p, 0.0, np.pi / 6, epsabs=1e-14, epsrel=1e-13)
    return val


def _hex_tail_moment(gamma: float, q: float, tier: int, power: int = 1) -> float:
    """Continuum estimate of sum (d^-gamma w)^power over all users beyond
    ``tier`` complete tiers (R = 1 units).

    The covered cells form a hexagon-shaped region; the complement integral
    uses the equal-area hexagon (inradius m) so the boundary is matched to
    first order:  rho_u * wbar * 12 * m^(2-p*gamma) * I(p*gamma-2) / (p*gamma-2).
    """
    n_cells = 1 + 3 * tier * (tier + 1)
    m = np.sqrt(n_cells * CELL_AREA / (2.0 * SQRT3))
    pg = power * gamma
    wbar = (1.0 + 2.0 * q ** (-power)) / 3.0
    rho_u = 3.0 / CELL_AREA
    return rho_u * wbar * 12.0 * m ** (2.0 - pg) * _cos_power_integral(pg - 2.0) / (pg - 2.0)


@lru_cache(maxsize=32)
def _lattice_total_unit(gamma: float, q: float, tol: float, max_tier: int):
    """Total raw gain sum over the infinite lattice at R = 1, tail-corrected.

    Tiers are added in geometric stages; the run stops once consecutive
    stage totals agree within tol (relative), which bounds the truncation
    plus tail-model error.  Returns (total, tiers_used).
    """
    tier = 16
    prev_tier = 0
    exact = 0.0
    last_total = None
    while True:
        tier = min(tier, max_tier)
        exact += _tier_block_gains(gamma, q, prev_tier + 1 if prev_tier else 0, tier).sum()
        total = exact + _hex_tail_moment(gamma, q, tier)
        if last_total is not None and abs(total - last_total) <= tol * abs(total):
            return total, tier
        if tier >= max_tier:
            raise ConvergenceError(
                f"lattice sum did not converge to {tol:g} within {max_tier} tiers"
            )
        last_total = total
        prev_tier = tier
        tier *= 2


def lattice_interference_total(layout: HexLayout) -> float:
    """Sum of raw gains d^-gamma * w from every user of the infinite system
    to one sector antenna.  Identical for all antennas by lattice symmetry."""
    total, _ = _lattice_total_unit(
        layout.decay_exponent, layout.front_to_back_q,
        layout.lattice_tolerance, layout.max_tier,
    )
    return total * layout.cell_radius ** (-layout.decay_exponent)


def normalization_constant(layout: HexLayout, receiver: SectorId | None = None) -> float:
    """The constant D that normalizes the whole-lattice gain sum to one.

    By the translation/rotation symmetry of the universe the value does not
    depend on the receiver; the argument is accepted for interface clarity.
    In R = 1 units, gamma = 3.8 and Q = 20 dB give D = 0.1576.
    """
    del receiver
    return 1.0 / lattice_interference_total(layout)


# ---------------------------------------------------------------------------
# cluster profiles
# ---------------------------------------------------------------------------

def _cluster_raw_gains(layout: HexLayout, cluster: ClusterSpec,
                       placement: UserPlacement, sample: int = 0) -> np.ndarray:
    """(N, K) raw gains between all cluster receivers and cluster users."""
    members = cluster.members
    k = len(members)
    gamma = layout.decay_exponent
    q = layout.front_to_back_q
    r = layout.cell_radius

    tu = np.array([m.u for m in members])
    tv = np.array([m.v for m in members])
    tsec = np.array([m.sector for m in members])
    rsec = tsec

    if not placement.is_random:
        du = tu[None, :] - tu[:, None]
        dv = tv[None, :] - tv[:, None]
        ix6 = 9 * du + np.array([_OFF_6X[s] for s in tsec])[None, :]
        ie6 = 6 * dv + 3 * du + np.array([_OFF_6E[s] for s in tsec])[None, :]
        d2 = ((ix6 / 6.0) ** 2 + 3.0 * (ie6 / 6.0) ** 2) * r * r
        w = np.where(_owning_sector_int(ix6, ie6) == rsec[:, None], 1.0, 1.0 / q)
        return w * d2 ** (-gamma / 2.0)

    pos = np.array([
        user_position(m, placement, layout, sample=sample) for m in members
    ])  # (K, 2)
    bs = np.array([bs_position(m, layout) for m in members])  # (N, 2)
    dx = pos[None, :, 0] - bs[:, 0, None]
    dy = pos[None, :, 1] - bs[:, 1, None]
    d2 = dx * dx + dy * dy
    if np.any(d2 == 0.0):
        raise ValueError("a randomized user landed exactly on a receiving BS")
    w = np.where(_owning_sector_float(dx, dy) == rsec[:, None], 1.0, 1.0 / q)
    return w * d2 ** (-gamma / 2.0)


def out_of_cluster_sir(layout: HexLayout, cluster: ClusterSpec,
                       placement: UserPlacement, sample: int = 0):
    """Per-receiver linear SIR against the rest of the infinite system.

    The numerator sums in-cluster user gains at the given placement; the
    denominator is the fixed all-centered whole-lattice total minus the
    centered in-cluster part (out-of-cluster users stay centered).
    Whole-system clusters see no outside interference: +inf.
    """
    if cluster.is_whole_system:
        return np.inf
    total = lattice_interference_total(layout)
    g_centered = _cluster_raw_gains(layout, cluster, UserPlacement.centered())
    out = total - g_centered.sum(axis=1)
    if np.any(out <= 0.0):
        raise ConvergenceError("out-of-cluster sum is not positive; lattice tolerance too loose")
    g_in = (
        g_centered if not placement.is_random
        else _cluster_raw_gains(layout, cluster, placement, sample=sample)
    )
    return g_in.sum(axis=1) / out


def geometry_profile(layout: HexLayout, cluster: ClusterSpec,
                     placement: UserPlacement, sample: int = 0) -> GeometryProfile:
    """Row-stochastic gain shares and out-of-cluster SIR for a finite cluster."""
    if cluster.is_whole_system:
        raise ValueError(
            "whole-system clusters have no finite profile; use fragment_profile "
            "or the infinite-system bound"
        )
    raw = _cluster_raw_gains(layout, cluster, placement, sample=sample)
    g = raw / raw.sum(axis=1, keepdims=True)
    sir = out_of_cluster_sir(layout, cluster, placement, sample=sample)
    return GeometryProfile(g=g, sir=np.asarray(sir, dtype=float))


def fragment_profile(layout: HexLayout, cells_per_side: int = 20) -> GeometryProfile:
    """Whole-system fragment of cells_per_side^2 cells (K = N = 3 per cell).

    The fragment spans the index square u, v in [0, cells_per_side); there
    is nothing outside it, so sir = +inf.  Gains follow the per-sector-class
    bookkeeping of the reference receiver -- the sector-1 antenna of the
    cell nearest the fragment centroid -- and, because the uplink treats the
    fragment as isotropic, every receiver row carries that same share set.
    """
    if cells_per_side < 1:
        raise ValueError("cells_per_side must be >= 1")
    n = cells_per_side
    gamma = layout.decay_exponent
    q = layout.front_to_back_q

    uu, vv = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    uu = uu.ravel()
    vv = vv.ravel()
    bx = 1.5 * uu
    by = SQRT3 * (vv + uu / 2.0)
    ic = int(np.argmin((bx - bx.mean()) ** 2 + (by - by.mean()) ** 2))
    cu, cv = int(uu[ic]), int(vv[ic])

    row = []
    for s in (1, 2, 3):
        ix6 = 9 * (uu - cu) + _OFF_6X[s]
        ie6 = 6 * (vv - cv) + 3 * (uu - cu) + _OFF_6E[s]
        d2 = (ix6 / 6.0) ** 2 + 3.0 * (ie6 / 6.0) ** 2
        w = 1.0 if s == 1 else 1.0 / q
        row.append(w * d2 ** (-gamma / 2.0))
    row = np.concatenate(row)
    row /= row.sum()
    k = row.size
    g = np.broadcast_to(row, (k, k)).copy()
    return GeometryProfile(g=g, sir=np.full(k, np.inf))
