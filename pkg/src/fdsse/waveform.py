"""DFT-s-OFDM transmit chain with spectral shaping and spectrum extension.

Conventions (not the FFT library defaults): the precoder is the unitary
forward DFT X[h] = (1/sqrt(Ndata)) sum_m x[m] exp(-j2pi*hm/Ndata); the
modulator is s[n] = (1/sqrt(Nfft)) sum_k W[k] X_se[k] exp(+j2pi*nk/Nfft).
The stored symbol excludes the cyclic prefix; peak metrics search
n in [0, Nfft) and the CP (a copy) never changes the peak.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .window import FdssWindow


@dataclass(frozen=True)
class WaveformConfig:
    """Integer dimensions of one DFT-s-OFDM allocation.

    ndata: constellation symbols per OFDM symbol
    nsc:   modulated subcarriers; ne = nsc - ndata is the extension size
    nfft:  IFFT size (>= 4*ndata so the digital peak tracks the analog one)
    ncp:   cyclic prefix length in samples
    shift_l: circular shift applied to the precoded sequence (any integer)
    """

    ndata: int
    nsc: int
    nfft: int
    ncp: int = 0
    shift_l: int = 0

    def __post_init__(self):
        if self.ndata < 1:
            raise ValueError("ndata must be >= 1")
        if self.nsc < self.ndata:
            raise ValueError("nsc must be >= ndata (ne = nsc - ndata >= 0)")
        if self.nfft < 4 * self.ndata:
            raise ValueError("nfft must be >= 4*ndata")
        if self.nsc > self.nfft:
            raise ValueError("nsc must be <= nfft")
        if self.ncp < 0:
            raise ValueError("ncp must be >= 0")

    @property
    def ne(self) -> int:
        return self.nsc - self.ndata


def dft_precode(x: np.ndarray) -> np.ndarray:
    """Unitary DFT of the symbol block (Parseval-preserving)."""
    x = np.asarray(x)
    n = x.shape[-1]
    if n < 1:
        raise ValueError("empty input")
    return sfft.fft(x, axis=-1) / np.sqrt(n)


def spectrum_extend(X: np.ndarray, nsc: int, shift_l: int) -> np.ndarray:
    """Periodic extension with circular shift: X_se[k] = X[(k+L) mod Ndata]."""
    X = np.asarray(X)
    ndata = X.shape[-1]
    if nsc < ndata:
        raise ValueError("nsc must be >= ndata")
    idx = (np.arange(nsc) + shift_l) % ndata
    return X[..., idx]


def modulate(cfg: WaveformConfig, w: FdssWindow, x: np.ndarray) -> np.ndarray:
    """One OFDM symbol (length nfft, CP excluded) from ndata symbols."""
    x = np.asarray(x)
    if x.shape[-1] != cfg.ndata:
        raise ValueError(f"expected {cfg.ndata} symbols, got {x.shape[-1]}")
    if w.nsc != cfg.nsc:
        raise ValueError("window length does not match nsc")
    xse = spectrum_extend(dft_precode(x), cfg.nsc, cfg.shift_l) * w.coeffs
    v = np.zeros(x.shape[:-1] + (cfg.nfft,), dtype=np.result_type(xse, np.complex128))
    v[..., : cfg.nsc] = xse
    return sfft.ifft(v, axis=-1) * np.sqrt(cfg.nfft)


def modulate_batch(
    cfg: WaveformConfig,
    w: FdssWindow,
    x: np.ndarray,
    dtype=np.complex128,
) -> np.ndarray:
    """Vectorized modulate for a (trials, ndata) block; dtype selects precision.

    complex64 is the Monte Carlo fast path (peak error ~1e-5 dB); the
    transform itself is identical to modulate().
    """
    if x.shape[-1] != cfg.ndata:
        raise ValueError(f"expected {cfg.ndata} symbols, got {x.shape[-1]}")
    if w.nsc != cfg.nsc:
        raise ValueError("window length does not match nsc")
    x = np.asarray(x, dtype=dtype)
    X = sfft.fft(x, axis=-1)
    X /= np.sqrt(np.asarray(cfg.ndata, dtype=x.real.dtype))
    idx = (np.arange(cfg.nsc) + cfg.shift_l) % cfg.ndata
    v = np.zeros(x.shape[:-1] + (cfg.nfft,), dtype=dtype)
    v[..., : cfg.nsc] = X[..., idx] * w.coeffs.astype(x.real.dtype)
    s = sfft.ifft(v, axis=-1, overwrite_x=True)
    s *= np.sqrt(np.asarray(cfg.nfft, dtype=x.real.dtype))
    return s


def add_cyclic_prefix(samples: np.ndarray, ncp: int) -> np.ndarray:
    """Prepend the last ncp samples (per row for batched input)."""
    if ncp == 0:
        return samples
    return np.concatenate([samples[..., -ncp:], samples], axis=-1)


def pulse_kernel(cfg: WaveformConfig, w: FdssWindow) -> np.ndarray:
    """Kernel pulse p0[n] = (1/sqrt(Ndata)) sum_k W[k] exp(j2pi*kn/Nfft)."""
    if w.nsc != cfg.nsc:
        raise ValueError("window length does not match nsc")
    v = np.zeros(cfg.nfft, dtype=np.complex128)
    v[: cfg.nsc] = w.coeffs
    return sfft.ifft(v) * cfg.nfft / np.sqrt(cfg.ndata)


def pulses(cfg: WaveformConfig, w: FdssWindow) -> np.ndarray:
    """The Ndata time/phase-shifted pulses, rows p_m[n].

    p_m[n] = exp(-j2pi*L*m/Ndata) * p0[(n - m*Nfft/Ndata) mod Nfft];
    requires Nfft divisible by Ndata (the shift is a whole number of
    samples only then).
    """
    if cfg.nfft % cfg.ndata != 0:
        raise ValueError("pulses require nfft divisible by ndata")
    p0 = pulse_kernel(cfg, w)
    q = cfg.nfft // cfg.ndata
    m = np.arange(cfg.ndata)
    idx = (np.arange(cfg.nfft)[None, :] - q * m[:, None]) % cfg.nfft
    phase = np.exp(-2j * np.pi * cfg.shift_l * m / cfg.ndata)
    return phase[:, None] * p0[idx]


def dirichlet_kernel(cfg: WaveformConfig) -> np.ndarray:
    """Closed form of the flat-window kernel (oracle for pulse_kernel).

    p0[n] = e^{j pi n (Nsc-1)/Nfft} sin(pi Nsc n/Nfft) / (sqrt(Ndata) sin(pi n/Nfft)).
    """
    n = np.arange(cfg.nfft)
    num = np.sin(np.pi * cfg.nsc * n / cfg.nfft)
    den = np.sin(np.pi * n / cfg.nfft)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(n == 0, cfg.nsc, num / np.where(n == 0, 1.0, den))
    return np.exp(1j * np.pi * n * (cfg.nsc - 1) / cfg.nfft) * ratio / np.sqrt(cfg.ndata)


def write_symbol_csv(samples: np.ndarray, path) -> None:
    """Dump one OFDM symbol as (n, re, im) rows for debugging."""
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["n", "re", "im"])
        for n, s in enumerate(np.asarray(samples)):
            wr.writerow([n, repr(float(s.real)), repr(float(s.imag))])
