"""Small-scale fading: block and continuous-rectangular-Doppler models,
their coherence equivalence, and seeded Rayleigh channel draws.

A continuous channel with a rectangular Doppler spectrum of maximum
frequency f_D is equivalent, for channel-estimation purposes, to a block
channel that stays constant over L = 1/(2 f_D) symbols; that effective
length is the single knob the capacity formulas need.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import GeometryProfile


@dataclass(frozen=True)
class FadingModel:
    """Either ``block`` with an integer coherence length L, or
    ``continuous-rect`` with a normalized maximum Doppler f_D in (0, 1/2]."""

    kind: str
    block_length: int | None = None
    doppler: float | None = None

    def __post_init__(self):
        if self.kind == "block":
            if self.block_length is None or self.block_length < 1:
                raise ValueError("block fading needs an integer L >= 1")
        elif self.kind == "continuous-rect":
            if self.doppler is None or not (0.0 < self.doppler <= 0.5):
                raise ValueError("rectangular Doppler needs 0 < f_D <= 1/2")
        else:
            raise ValueError(f"unknown fading kind {self.kind!r}")

    @classmethod
    def block(cls, length: int) -> "FadingModel":
        return cls(kind="block", block_length=int(length))

    @classmethod
    def continuous_rect(cls, doppler: float) -> "FadingModel":
        return cls(kind="continuous-rect", doppler=float(doppler))


def effective_coherence(model: FadingModel) -> float:
    """Symbols per coherence block: L itself, or 1/(2 f_D) for the
    rectangular-Doppler continuous model."""
    if model.kind == "block":
        return float(model.block_length)
    return 1.0 / (2.0 * model.doppler)


def doppler_from_physical(velocity: float, wavelength: float,
                          coherence_bandwidth: float) -> float:
    """Normalized Doppler f_D = v / (lambda * B_c).

    Rejects nonpositive inputs and f_D > 1/2 (outside the model).
    """
    if velocity <= 0.0 or wavelength <= 0.0 or coherence_bandwidth <= 0.0:
        raise ValueError("velocity, wavelength and coherence bandwidth must be positive")
    f_d = velocity / (wavelength * coherence_bandwidth)
    if f_d > 0.5:
        raise ValueError(f"f_D = {f_d:g} exceeds 1/2; out of the fading model's range")
    return f_d


@dataclass(frozen=True)
class ChannelSample:
    """One N x K Rayleigh draw, entry (n, k) ~ CN(0, g_nk), plus its seed lineage."""

    matrix: np.ndarray
    master_seed: int
    trial_index: int


def _zz(n: int) -> int:
    return 2 * n if n >= 0 else -2 * n - 1


def trial_rng(master_seed: int, trial_index: int, *context: int) -> np.random.Generator:
    """Counter-based (Philox) stream for one Monte Carlo trial.

    The key is derived from (master_seed, trial_index, context...), so any
    trial can be generated independently of call order and in parallel.
    """
    ss = np.random.SeedSequence(entropy=[_zz(int(master_seed)), _zz(int(trial_index))]
                                + [_zz(int(c)) for c in context])
    return np.random.Generator(np.random.Philox(ss))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """IID CN(0, 1) array: real and imaginary parts N(0, 1/2)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_channel(profile: GeometryProfile, rng_seed: int, trial_index: int) -> ChannelSample:
    """Draw H with independent entries CN(0, g_nk).

    Entries come from the per-trial Philox stream in fixed row-major order,
    so a given (seed, trial) pair always produces the same matrix.
    """
    rng = trial_rng(rng_seed, trial_index)
    z = complex_normal(rng, profile.g.shape)
    return ChannelSample(
        matrix=np.sqrt(profile.g) * z,
        master_seed=rng_seed,
        trial_index=trial_index,
    )
