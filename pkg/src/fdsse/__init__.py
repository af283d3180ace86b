"""DFT-s-OFDM uplink waveforms with frequency-domain spectral shaping and
spectrum extension: synthesis, PAPR/CM metrics, analytic PAPR bounds,
fading-channel rate analysis, and extension-size optimization."""

__version__ = "0.1.0"

from .bounds import (
    BoundResult,
    corrected_bound,
    neighbor_phase_diff,
    optimal_shift,
    papr_upper_gu,
    papr_upper_qam_approx,
    papr_upper_u,
    u_matrix,
)
from .channel import (
    ChannelProfile,
    ChannelRealization,
    awgn,
    effective_subcarrier_gain,
    realize,
    tdlc,
)
from .constellation import Constellation, draw_symbols, make_constellation, omega_set_of
from .metrics import (
    CcdfCurve,
    ccdf,
    cubic_metric,
    papr_instantaneous,
    papr_statistical,
    papr_trial_values,
)
from .optimizer import (
    SeSearchResult,
    TradeoffReport,
    search_ne_capa,
    search_ne_papr,
    tradeoff_report,
)
from .receiver import (
    RateResult,
    ber_qpsk_theoretical,
    demodulate_fft,
    effective_sinr,
    effective_sinr_basic,
    mmse_despread,
    mrc_combine,
    simulate_qpsk_ber,
)
from .streams import substream
from .waveform import (
    WaveformConfig,
    add_cyclic_prefix,
    dft_precode,
    modulate,
    pulse_kernel,
    pulses,
    spectrum_extend,
)
from .window import FdssWindow, deformed_hann, flat, kaiser, ripple_db, three_tap_equivalent
