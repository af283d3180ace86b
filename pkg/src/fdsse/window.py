"""FDSS window families: deformed Hann and Kaiser, single shaping parameter each.

Windows are real, symmetric, strictly positive and normalized so that
sum(W^2) = Nsc, which keeps the transmit power independent of the
spectrum-extension size.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq


@dataclass(frozen=True)
class FdssWindow:
    coeffs: np.ndarray
    family: str  # "flat" | "hann" | "kaiser"
    shape: float | None  # beta for hann, kappa for kaiser, None for flat
    nsc: int

    def __post_init__(self):
        self.coeffs.setflags(write=False)


def _normalized(coeffs: np.ndarray, family: str, shape, nsc: int) -> FdssWindow:
    coeffs = coeffs * np.sqrt(nsc / np.sum(coeffs**2))
    return FdssWindow(coeffs=coeffs, family=family, shape=shape, nsc=nsc)


def flat(nsc: int) -> FdssWindow:
    if nsc < 1:
        raise ValueError("nsc must be >= 1")
    return FdssWindow(np.ones(nsc), "flat", None, nsc)


def deformed_hann(nsc: int, beta: float) -> FdssWindow:
    """Deformed Hann window; beta=1 is flat, ripple approaches 20*log10(beta).

    The half-index shift is folded into the cosine argument so the window
    is exactly symmetric: W[k] = W[Nsc-1-k].
    """
    if nsc < 2:
        raise ValueError("nsc must be >= 2")
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must be in (0, 1]")
    k = np.arange(nsc)
    a = (1.0 - beta) / (1.0 + beta)
    w = 1.0 - a * np.cos((2.0 * np.pi * k + np.pi) / nsc)
    # numeric normalization equals the closed form sqrt(1 + a^2/2) for nsc >= 3
    return _normalized(w, "hann", beta, nsc)


def bessel_i0(x) -> np.ndarray:
    """Zeroth-order modified Bessel function of the first kind, by power series.

    Terms t_{k+1} = t_k * (x^2/4) / (k+1)^2; stops when the running term
    falls below 1e-16 of the partial sum (relative error < 1e-12 for the
    shaping range used here).
    """
    x = np.asarray(x, dtype=float)
    q = x * x / 4.0
    term = np.ones_like(q)
    acc = np.ones_like(q)
    k = 0
    while True:
        k += 1
        term = term * q / (k * k)
        acc = acc + term
        if np.all(term <= 1e-16 * acc):
            return acc


def kaiser(nsc: int, kappa: float) -> FdssWindow:
    """Kaiser window; kappa=0 is flat, ripple approaches -20*log10(I0(kappa))."""
    if nsc < 2:
        raise ValueError("nsc must be >= 2")
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    gamma = (nsc - 1) / 2.0
    k = np.arange(nsc)
    w = bessel_i0(kappa * np.sqrt(1.0 - ((k - gamma) / gamma) ** 2))
    return _normalized(w, "kaiser", kappa, nsc)


def three_tap_equivalent(nsc: int, b: float) -> FdssWindow:
    """Deformed Hann window equivalent to the 3-tap filter [-b, 1, -b].

    Solves 2b = (1-beta)/(1+beta). The 3-tap filter's linear phase ramp is
    a pure circular shift of the OFDM symbol, has no effect on the PAPR,
    and is dropped.
    """
    if not 0.0 <= b < 0.5:
        raise ValueError("b must be in [0, 1/2)")
    beta = (1.0 - 2.0 * b) / (1.0 + 2.0 * b)
    return deformed_hann(nsc, beta)


def hann_beta_to_tap(beta: float) -> float:
    """Inverse of the three_tap_equivalent change of variable."""
    return (1.0 - beta) / (2.0 * (1.0 + beta))


def ripple_db(w: FdssWindow) -> float:
    """Maximum power ripple 20*log10(min W / max W); 0 for a flat window."""
    c = w.coeffs
    if np.any(c <= 0):
        raise ValueError("ripple is defined for strictly positive windows")
    return float(20.0 * np.log10(c.min() / c.max()))


def hann_from_ripple(nsc: int, target_ripple_db: float) -> FdssWindow:
    """Deformed Hann with beta = 10^(ripple/20) (the config-file convention)."""
    if target_ripple_db > 0:
        raise ValueError("ripple must be <= 0 dB")
    return deformed_hann(nsc, 10.0 ** (target_ripple_db / 20.0))


def kaiser_from_ripple(nsc: int, target_ripple_db: float, kappa_max: float = 20.0) -> FdssWindow:
    """Kaiser window whose actual ripple_db equals the target, by root finding."""
    if target_ripple_db > 0:
        raise ValueError("ripple must be <= 0 dB")
    if target_ripple_db == 0:
        return kaiser(nsc, 0.0)
    kap = brentq(lambda k: ripple_db(kaiser(nsc, k)) - target_ripple_db, 1e-6, kappa_max)
    return kaiser(nsc, float(kap))


def window_from_config(spec: dict, nsc: int) -> FdssWindow:
    """Build a window from the config-file form.

    {family="flat"} | {family="hann", ripple_db=-11} |
    {family="kaiser", kappa=2} (or kaiser with ripple_db).
    """
    family = spec.get("family")
    if family == "flat":
        return flat(nsc)
    if family == "hann":
        if "ripple_db" in spec:
            return hann_from_ripple(nsc, float(spec["ripple_db"]))
        if "beta" in spec:
            return deformed_hann(nsc, float(spec["beta"]))
        raise ValueError("hann window needs 'ripple_db' or 'beta'")
    if family == "kaiser":
        if "kappa" in spec:
            return kaiser(nsc, float(spec["kappa"]))
        if "ripple_db" in spec:
            return kaiser_from_ripple(nsc, float(spec["ripple_db"]))
        raise ValueError("kaiser window needs 'kappa' or 'ripple_db'")
    raise ValueError(f"unknown window family: {family!r}")
