"""Zero-forcing SINR fields and coherent signal volumes for cooperative
distributed-antenna downlinks."""
__version__ = "0.1.0"

from .channel import (PathSet, PropagationParams, Scenario, build_paths, channel_exact_at,
                      channel_matrix, channel_planewave_displaced, pathloss_gain)
from .config import ConfigError, ScenarioConfig, emit_config, parse_config, preset
from .precoding import Precoder, regularized, snr_at_origin, zero_forcing
from .se import sinr_to_se
from .sinr import (Downlink, coherent_radius, geometry_fractions, multipole_coeffs, channel_multipole,
                   sinr_exact, sinr_lorentzian, sinr_multipole, sinr_small_displacement,
                   small_displacement_radius)
from .volumes import GridSpec, compare_layouts, elongation_metrics, extract_volume, sample_field
