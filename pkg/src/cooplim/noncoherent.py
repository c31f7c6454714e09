"""High-power spectral-efficiency upper bounds without receiver CSI.

With K > L transmitters per coherence block, even noiseless reception
cannot resolve the fading, and the spectral efficiency is capped at

    C_ub = -(1/K) sum_n (1/L) E[ log2 det( X^H G_n X ) ],

with X the K x L block of unit-variance signals and G_n the diagonal of
receiver n's gain shares.  A random-matrix fixed point turns the
expectation into a deterministic expression that becomes exact as K and L
grow: per receiver, a_n solves sum_k g_nk / (g_nk + 1/a_n) = L and

    C_ub ~ (N/K) log2 e + (1/K) sum_n [ log2(a_n/L)
           - (1/L) sum_k log2(1 + a_n g_nk) ].

The same fixed point evaluated over the infinite hexagonal lattice gives
the whole-system ceiling, with continuum tail corrections in the linear
regime a*g << 1.
"""

from dataclasses import dataclass

import numpy as np

from .coherent import McConfig
from .errors import ConvergenceError
from .fading import complex_normal, trial_rng
from .geometry import GeometryProfile, HexLayout, _hex_tail_moment, _tier_block_gains

METHOD_MC = "monte-carlo"
METHOD_ASYMPTOTIC = "asymptotic"
METHOD_INFINITE = "infinite-system"


@dataclass(frozen=True)
class FixedPointSolution:
    a: float
    residual: float
    iterations: int


@dataclass(frozen=True)
class BoundResult:
    c_ub: float
    method: str
    stderr: float | None = None


def _check_dims(k: int, length: int):
    if not k > length:
        raise ValueError(
            f"the bound needs more transmitters than block symbols (K > L); got K={k}, L={length}"
        )


def fixed_point_a(g_row, length: int) -> FixedPointSolution:
    """Nonnegative solution of sum_k g_k / (g_k + 1/a) = L for one gain row.

    The left side increases from 0 toward the number of nonzero gains, so a
    solution exists only with more than L nonzero entries; the bracket
    [0, a_hi] grows geometrically until it straddles L, then bisection runs
    to interval collapse (residuals land well below 1e-12 * L).
    """
    g = np.asarray(g_row, dtype=float)
    if g.ndim != 1:
        raise ValueError("g_row must be one-dimensional")
    _check_dims(g.size, length)
    if np.count_nonzero(g) <= length:
        raise ValueError(
            f"need more than L={length} nonzero gains, got {np.count_nonzero(g)}"
        )

    def f(a):
        return float(np.sum(g / (g + 1.0 / a)))

    hi = float(length)
    iters = 0
    while f(hi) < length:
        hi *= 2.0
        iters += 1
        if iters > 300:
            raise ConvergenceError("fixed-point bracket failed to close")
    lo = 0.0
    a = hi
    for _ in range(200):
        iters += 1
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        a = mid
        if f(mid) < length:
            lo = mid
        else:
            hi = mid
    return FixedPointSolution(a=a, residual=abs(f(a) - length), iterations=iters)


def _fixed_point_rows(g: np.ndarray, length: int) -> np.ndarray:
    """Row-wise bisection, vectorized over receivers."""
    if np.any(np.count_nonzero(g, axis=1) <= length):
        raise ValueError(f"every row needs more than L={length} nonzero gains")

    def f(a):
        return np.sum(g / (g + 1.0 / a[:, None]), axis=1)

    hi = np.full(g.shape[0], float(length))
    for _ in range(300):
        short = f(hi) < length
        if not short.any():
            break
        hi[short] *= 2.0
    else:
        raise ConvergenceError("fixed-point bracket failed to close")
    lo = np.zeros_like(hi)
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        below = f(mid) < length
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


_TRIAL_BLOCK = 512


def _batched_neg_logdet(x_block: np.ndarray, sqrt_row: np.ndarray, length: int) -> np.ndarray:
    """-(1/L) log2 det(X^H diag(g) X) for a block of signal draws, one gain row."""
    out = np.empty(x_block.shape[0])
    # slice so the scaled copies stay within a modest memory footprint
    step = max(1, 2_000_000 // max(1, x_block.shape[1] * length))
    for lo in range(0, x_block.shape[0], step):
        w = x_block[lo:lo + step] * sqrt_row[None, :, None]
        gram = w.conj().transpose(0, 2, 1) @ w
        _, logdet = np.linalg.slogdet(gram)
        out[lo:lo + step] = -logdet / (np.log(2.0) * length)
    return out


def mc_upper_bound(profile: GeometryProfile, length: int, mc: McConfig,
                   signal: str = "gaussian-iid") -> BoundResult:
    """Monte Carlo estimate of the noncoherent ceiling.

    Per trial one IID complex-Gaussian K x L block is drawn and the
    receiver average is taken over all N rows, or over a uniform
    without-replacement subsample of ``mc.receiver_subsample`` rows (the
    average over n is a mean, so subsampling stays unbiased).  Trials are
    drawn in fixed blocks of 512 from counter-based streams keyed by
    (master_seed, block index), so any block can be generated independently
    and the estimate does not depend on evaluation order.  Receiver rows
    that are exact duplicates share one log-det evaluation.
    """
    if signal != "gaussian-iid":
        raise ValueError(f"only IID complex-Gaussian signals are implemented, got {signal!r}")
    n, k = profile.g.shape
    _check_dims(k, length)

    uniq, inverse = np.unique(profile.g, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    sqrt_uniq = np.sqrt(uniq)
    m_sub = min(mc.receiver_subsample or n, n)

    per_trial = np.empty(mc.trials)
    for block_start in range(0, mc.trials, _TRIAL_BLOCK):
        b = min(_TRIAL_BLOCK, mc.trials - block_start)
        rng = trial_rng(mc.master_seed, block_start // _TRIAL_BLOCK)
        x = complex_normal(rng, (b, k, length))

        if uniq.shape[0] == 1:
            # all receivers identical: the row subsample cannot change the value
            per_trial[block_start:block_start + b] = _batched_neg_logdet(
                x, sqrt_uniq[0], length) * (n / k)
            continue

        if m_sub < n:
            # uniform without replacement per trial, from the same block stream
            order = np.argsort(rng.random((b, n)), axis=1)
            rows = order[:, :m_sub]
        else:
            rows = np.broadcast_to(np.arange(n), (b, n))

        totals = np.zeros(b)
        row_uids = inverse[rows]  # (b, m)
        for uid in np.unique(row_uids):
            counts = (row_uids == uid).sum(axis=1)
            active = np.nonzero(counts)[0]
            vals = _batched_neg_logdet(x[active], sqrt_uniq[uid], length)
            totals[active] += counts[active] * vals
        per_trial[block_start:block_start + b] = totals * (n / rows.shape[1]) / k

    stderr = float(per_trial.std(ddof=1) / np.sqrt(mc.trials)) if mc.trials > 1 else 0.0
    return BoundResult(c_ub=float(per_trial.mean()), method=METHOD_MC, stderr=stderr)


def asymptotic_upper_bound(profile: GeometryProfile, length: int) -> BoundResult:
    """Deterministic large-system evaluation of the ceiling via the
    per-receiver fixed points."""
    n, k = profile.g.shape
    _check_dims(k, length)
    a = _fixed_point_rows(profile.g, length)
    term = np.log2(a / length) - np.sum(np.log1p(a[:, None] * profile.g), axis=1) / (np.log(2.0) * length)
    c = (n / k) * np.log2(np.e) + term.sum() / k
    return BoundResult(c_ub=float(c), method=METHOD_ASYMPTOTIC)


def isotropic_upper_bound(g_set, length: int, n_over_k: float = 1.0) -> BoundResult:
    """Ceiling when every receiver sees the same gain multiset ``g_set``:
    a single fixed point serves all receivers."""
    g = np.asarray(g_set, dtype=float)
    if abs(g.sum() - 1.0) > 1e-9:
        raise ValueError("g_set must sum to 1")
    sol = fixed_point_a(g, length)
    c = n_over_k * (
        np.log2(np.e) + np.log2(sol.a / length)
        - np.sum(np.log1p(sol.a * g)) / (np.log(2.0) * length)
    )
    return BoundResult(c_ub=float(c), method=METHOD_ASYMPTOTIC)


def infinite_system_bound(layout: HexLayout, length: int) -> BoundResult:
    """Whole-system ceiling over the infinite lattice (K = N -> infinity).

    The fixed-point sum and the log sum run over exact tiers out to an
    adaptive radius; beyond it every term is in the linear regime
    a*g << 1, so the continuum first and second moments of the normalized
    gains supply the tail:  sum a g/(1+a g) ~ a*T1 - a^2*T2 and
    sum log2(1+a g) ~ log2(e) (a*T1 - a^2*T2/2).  Tiers expand until two
    consecutive stages agree to 1e-6 bits.
    """
    gamma = layout.decay_exponent
    q = layout.front_to_back_q

    def solve_at(tier):
        raw = _tier_block_gains(gamma, q, 0, tier)
        t1_raw = _hex_tail_moment(gamma, q, tier, power=1)
        t2_raw = _hex_tail_moment(gamma, q, tier, power=2)
        total = raw.sum() + t1_raw
        g = raw / total
        t1 = t1_raw / total
        t2 = t2_raw / total ** 2

        def f(a):
            return np.sum(g / (g + 1.0 / a)) + a * t1 - a * a * t2

        hi = float(length)
        grow = 0
        while f(hi) < length:
            hi *= 2.0
            grow += 1
            if grow > 300 or hi * t2 > 0.5 * t1:
                # the quadratic tail term is taking over: the exact region is
                # too small for this L, grow the tier budget instead
                return None, np.inf
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if f(mid) < length:
                lo = mid
            else:
                hi = mid
        a = 0.5 * (lo + hi)
        slog = (np.sum(np.log1p(a * g)) + a * t1 - 0.5 * a * a * t2) / np.log(2.0)
        c = np.log2(a * np.e / length) - slog / length
        # validity of the linearized tail: a*g at the truncation boundary
        # (full-gain user at the inner tier radius 1.5*tier) must be small
        edge = a * (1.5 * tier) ** (-gamma) / total
        return float(c), float(edge)

    # users within T tiers ~ 9 T^2; seed the expansion with a few L's worth
    tier = max(32, int(np.ceil(np.sqrt(length))))
    last = None
    while True:
        tier = min(tier, layout.max_tier)
        c, edge = solve_at(tier)
        if c is not None and last is not None and edge < 0.05 and abs(c - last) < 1e-6:
            return BoundResult(c_ub=c, method=METHOD_INFINITE)
        if tier >= layout.max_tier:
            raise ConvergenceError(
                f"infinite-system bound did not stabilize within {layout.max_tier} tiers"
            )
        last = c
        tier *= 2
