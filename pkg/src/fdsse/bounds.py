"""Analytic PAPR upper bounds, optimal frequency shifts, and the empirical
bound correction.

The bound evaluates A_C^2/Nsc * max_n sum_{i,j} |p_i[n]||p_j[n]| u_{|i-j|}
with the pairwise coherence u_d = max_{omega} |cos(d*theta + omega)|,
theta = phi - (2L + Ne - 1) pi / Ndata. Since the pulses are regular
time shifts of one kernel, the quadratic form is periodic over
Nfft/Ndata samples whenever Ndata*phi = 0 (mod pi) -- always for QAM,
only for even Ndata with pi/2-BPSK -- and the search range is restricted
accordingly (full scan otherwise).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import Constellation, make_constellation
from .waveform import WaveformConfig, pulse_kernel
from .window import FdssWindow


@dataclass(frozen=True)
class BoundResult:
    value_db: float
    argmax_n: int  # within [0, Nfft/Ndata) when the restricted search applies
    variant: str  # "u" | "gu" | "qam_approx" | "corrected"
    search: str  # "restricted" | "full"


def round_half_down(x: float) -> int:
    """Nearest integer, ties toward the lower one.

    The tie rule makes the lambda=2 pi/2-BPSK shift land on the
    symmetric double-side layout L = Ndata - Ne/2 (either direction is
    equally optimal there).
    """
    return int(np.ceil(x - 0.5))


def restricted_search_exact(c: Constellation, ndata: int) -> bool:
    """True when the periodic max-search is exact: Ndata*phi = 0 (mod pi)."""
    frac = (ndata * c.phi / np.pi) % 1.0
    return min(frac, 1.0 - frac) < 1e-9


def pair_coherence(c: Constellation, cfg: WaveformConfig) -> np.ndarray:
    """u as a function of the index difference d = 0..Ndata-1 (even in d)."""
    theta = c.phi - (2 * cfg.shift_l + cfg.ne - 1) * np.pi / cfg.ndata
    d = np.arange(cfg.ndata)
    return np.abs(np.cos(d[:, None] * theta + c.omega_set[None, :])).max(axis=1)


def u_matrix(c: Constellation, cfg: WaveformConfig) -> np.ndarray:
    """The full Ndata x Ndata matrix u_{i,j}; depends only on |i-j|."""
    u = pair_coherence(c, cfg)
    idx = np.abs(np.arange(cfg.ndata)[:, None] - np.arange(cfg.ndata)[None, :])
    return u[idx]


def _quadratic_max(cfg: WaveformConfig, w: FdssWindow, u: np.ndarray, restricted: bool):
    if cfg.nfft % cfg.ndata != 0:
        raise ValueError("bound evaluation requires nfft divisible by ndata")
    q = cfg.nfft // cfg.ndata
    absp0 = np.abs(pulse_kernel(cfg, w))
    nrange = np.arange(q if restricted else cfg.nfft)
    A = absp0[(nrange[:, None] - q * np.arange(cfg.ndata)[None, :]) % cfg.nfft]
    U = u[np.abs(np.arange(cfg.ndata)[:, None] - np.arange(cfg.ndata)[None, :])]
    S = np.einsum("ni,ni->n", A @ U, A)
    n_arg = int(np.argmax(S))
    return float(S[n_arg]), n_arg


def papr_upper_u(c: Constellation, cfg: WaveformConfig, w: FdssWindow) -> BoundResult:
    """Constellation-aware PAPR upper bound [dB]."""
    restricted = restricted_search_exact(c, cfg.ndata)
    smax, n_arg = _quadratic_max(cfg, w, pair_coherence(c, cfg), restricted)
    value = 10.0 * np.log10(c.peak_amplitude_sq / cfg.nsc * smax)
    return BoundResult(value, n_arg, "u", "restricted" if restricted else "full")


def papr_upper_gu(c: Constellation, cfg: WaveformConfig, w: FdssWindow) -> BoundResult:
    """The general bound (u_{i,j} replaced by 1); depends on A_C and Ne only."""
    smax, n_arg = _quadratic_max(cfg, w, np.ones(cfg.ndata), True)
    value = 10.0 * np.log10(c.peak_amplitude_sq / cfg.nsc * smax)
    return BoundResult(value, n_arg, "gu", "restricted")


def papr_upper_qam_approx(c: Constellation, cfg: WaveformConfig, w: FdssWindow) -> BoundResult:
    """QAM bound via its peak-amplitude QPSK sub-constellation.

    A_C^2 [dB] plus the QPSK bound; for QPSK input this is the identity.
    pi/2-BPSK is rejected (no QPSK sub-constellation of its peak ring).
    """
    if c.kind not in ("qpsk", "16qam", "64qam"):
        raise ValueError("qam approximation applies to square QAM constellations")
    base = papr_upper_u(make_constellation("qpsk"), cfg, w)
    value = base.value_db + 10.0 * np.log10(c.peak_amplitude_sq)
    return BoundResult(value, base.argmax_n, "qam_approx", base.search)


def optimal_shift(c: Constellation, ndata: int, ne: int, lam: int | None = None) -> int:
    """Best circular shift: phase-aligning for pi/2-BPSK, pi/4-creating for QAM.

    lambda defaults to 2 for pi/2-BPSK (the symmetric double-side layout
    for even Ne) and 0 for QAM. Result reduced mod Ndata.
    """
    if ndata < 1:
        raise ValueError("ndata must be >= 1")
    if c.kind == "pi2bpsk":
        lam = 2 if lam is None else lam
        x = lam / 2.0 * ndata - (ne - 1) / 2.0
    else:
        lam = 0 if lam is None else lam
        x = (2 * lam + 1) / 8.0 * ndata - (ne - 1) / 2.0
    return round_half_down(x) % ndata


def neighbor_phase_diff(cfg: WaveformConfig) -> float:
    """Phase difference between neighboring pulses, -(2pi/Ndata)(L+(Ne-1)/2) mod pi."""
    return float((-2.0 * np.pi / cfg.ndata * (cfg.shift_l + (cfg.ne - 1) / 2.0)) % np.pi)


def corrected_bound(bound_db: float, k_db: float, ne: int, nsc: int) -> float:
    """Empirical tightening: bound - K(1 - Ne/Nsc), K the gap at Ne = 0."""
    if k_db < 0:
        raise ValueError("the calibrated gap must be >= 0")
    return bound_db - k_db * (1.0 - ne / nsc)


def calibrate_correction_db(
    c: Constellation,
    nsc: int,
    w: FdssWindow,
    level: float = 1e-2,
    trials: int = 100_000,
    seed: int = 0,
    oversample: int = 16,
) -> float:
    """Gap [dB] between the bound and the simulated CCDF quantile at Ne = 0."""
    from .metrics import papr_trial_values, quantile_db
    from .streams import substream

    cfg = WaveformConfig(ndata=nsc, nsc=nsc, nfft=oversample * nsc)
    bound = papr_upper_u(c, cfg, w).value_db
    vals = papr_trial_values(c, cfg, w, trials, substream(seed, "symbols"))
    return max(0.0, bound - quantile_db(vals, level))
