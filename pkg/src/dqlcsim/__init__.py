"""Zero-delay transmission of correlated Gaussian sources over fading MACs.

Distributed quantizer-linear mappings with a sphere-decoder-accelerated
mixture MMSE receiver, nonlinear Kalman filtering across time, mapping
parameter optimization, and an uncoded linear baseline — plus a CLI harness
that sweeps SNR grids over block-fading realizations and persists CSV rows.
"""

__version__ = "0.1.0"

from .baseline import LinearScheme, linear_encode, linear_kf_run, linear_mmse_decode
from .channel import ChannelRealization, draw_channel, real_channel_matrix, transmit
from .codec import DqlcParams, encode, gamma_power, quantizer_index
from .kalman import CarriedState, DecodeConfig, KfState, predict, run_block
from .lattice import (DecodeContext, LatticeProblem, build_context, build_lattice,
                      decode_mmse, decode_with_retries, sphere_enumerate)
from .metrics import SdrRecord, average_mse, sdr_db
from .optimizer import (OptimizerConfig, OptimizeResult, delta_from_powers,
                        gamma_inverse_guard, optimize, quantizer_error_bound,
                        uncoded_error_bound)
from .source import (CorrelationSpec, RealLayout, SourceBlock, SourceModel,
                     build_covariance, generate_block, to_real)
