"""cooplim: spectral-efficiency limits of cooperative cellular networks.

Geometry-driven SIR profiles on the hexagonal tri-sector universe,
pilot-assisted (coherent) Network MIMO spectral efficiency with optimized
overhead, noncoherent high-power upper bounds (Monte Carlo and
random-matrix fixed points), saturation-regime diagnostics, and a small
beamforming link simulator.
"""

__version__ = "0.1.0"

from .coherent import (DopplerSpectrum, McConfig, PilotConfig, coherent_curve,
                       effective_sinr, high_power_ceiling, mmse_block,
                       mmse_continuous, network_mimo_se, network_mimo_variances,
                       optimize_alpha)
from .curves import SpectralEfficiencyCurve, parse_snr_grid
from .errors import ConfigError, ConvergenceError
from .fading import (ChannelSample, FadingModel, doppler_from_physical,
                     effective_coherence, sample_channel)
from .geometry import (ClusterSpec, GeometryProfile, HexLayout, SectorId,
                       UserPlacement, average_power_gain, bs_position,
                       fragment_profile, geometry_profile,
                       lattice_interference_total, normalization_constant,
                       out_of_cluster_sir, sector_gain, sector_region_contains,
                       user_position)
from .linksim import (BeamformerState, MimoClusterConfig, draw_cluster_channels,
                      linksim_curve, max_sinr_solve, tdma_se)
from .noncoherent import (BoundResult, FixedPointSolution, asymptotic_upper_bound,
                          fixed_point_a, infinite_system_bound,
                          isotropic_upper_bound, mc_upper_bound)
from .regimes import (LinkBudget, SaturationReport, SirDistribution,
                      cinf_full_cooperation, harmonic_sinr, invert_effective_sir,
                      saturation_report, sir_cdf)

__all__ = [
    "BeamformerState", "BoundResult", "ChannelSample", "ClusterSpec",
    "ConfigError", "ConvergenceError", "DopplerSpectrum", "FadingModel",
    "FixedPointSolution", "GeometryProfile", "HexLayout", "LinkBudget",
    "McConfig", "MimoClusterConfig", "PilotConfig", "SaturationReport",
    "SectorId", "SirDistribution", "SpectralEfficiencyCurve", "UserPlacement",
    "asymptotic_upper_bound", "average_power_gain", "bs_position",
    "cinf_full_cooperation", "coherent_curve", "doppler_from_physical",
    "draw_cluster_channels", "effective_coherence", "effective_sinr",
    "fixed_point_a", "fragment_profile", "geometry_profile",
    "harmonic_sinr", "high_power_ceiling", "infinite_system_bound",
    "invert_effective_sir", "isotropic_upper_bound",
    "lattice_interference_total", "linksim_curve", "max_sinr_solve",
    "mc_upper_bound", "mmse_block", "mmse_continuous", "network_mimo_se",
    "network_mimo_variances", "normalization_constant", "optimize_alpha",
    "out_of_cluster_sir", "parse_snr_grid", "sample_channel",
    "saturation_report", "sector_gain", "sector_region_contains", "sir_cdf",
    "tdma_se", "user_position",
]
