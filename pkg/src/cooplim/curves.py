"""Sampled spectral-efficiency curves shared by the coherent, noncoherent
and link-simulation paths."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SpectralEfficiencyCurve:
    """(SNR_dB, bits/s/Hz/user) samples plus metadata about how they were made."""

    snr_db: np.ndarray
    se: np.ndarray
    meta: dict = field(default_factory=dict)
    stderr: np.ndarray | None = None

    def __post_init__(self):
        snr = np.asarray(self.snr_db, dtype=float)
        se = np.asarray(self.se, dtype=float)
        object.__setattr__(self, "snr_db", snr)
        object.__setattr__(self, "se", se)
        if snr.shape != se.shape or snr.ndim != 1 or snr.size == 0:
            raise ValueError("snr_db and se must be equal-length 1-D arrays")
        if np.any(np.diff(snr) <= 0):
            raise ValueError("snr_db grid must be strictly increasing")

    @property
    def span_db(self) -> float:
        return float(self.snr_db[-1] - self.snr_db[0])

    def value_at(self, snr_db: float) -> float:
        """Curve value at a grid point (exact match required)."""
        idx = np.nonzero(np.isclose(self.snr_db, snr_db))[0]
        if idx.size == 0:
            raise KeyError(f"{snr_db} dB is not on the curve grid")
        return float(self.se[idx[0]])


def parse_snr_grid(spec: str) -> np.ndarray:
    """Parse 'lo:hi:step' in dB into an inclusive grid."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"SNR grid must be 'lo:hi:step', got {spec!r}")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0 or hi < lo:
        raise ValueError(f"bad SNR grid {spec!r}: need hi >= lo and step > 0")
    n = int(round((hi - lo) / step))
    return lo + step * np.arange(n + 1)
