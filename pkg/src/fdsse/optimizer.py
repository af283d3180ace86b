"""Grid searches for the PAPR-optimal and rate-optimal extension sizes,
and the PAPR/rate trade-off report.

Monte Carlo searches reuse random draws across grid points (common
random numbers): symbol labels are drawn nsc wide under one substream
per point, and rate searches share one batch of channel realizations,
so optimum locations are differences of correlated curves.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import (
    calibrate_correction_db,
    corrected_bound,
    optimal_shift,
    papr_upper_qam_approx,
    papr_upper_u,
)
from .channel import ChannelProfile, realize_batch, sample_taps
from .constellation import Constellation, make_constellation
from .metrics import papr_trial_values, quantile_db
from .receiver import build_combined_gains, rate_of_gains
from .streams import substream
from .waveform import WaveformConfig
from .window import FdssWindow, ripple_db

BOUND_METHODS = ("bound_u", "qam_approx", "corrected")
WEAK_SHAPING_DB = -4.0  # bound searches need a guard above this ripple
WEAK_SHAPING_NE_CAP = 0.3


@dataclass
class SeSearchResult:
    ne_opt: int
    objective_at_opt: float
    curve: list = field(repr=False)  # (ne, objective) pairs in grid order
    method: str = ""
    details: dict = field(default_factory=dict)


def resolve_shift(policy, c: Constellation, ndata: int, ne: int) -> int:
    """Shift policies: an explicit integer, "zero", "symmetric", "optimal",
    "eq17" (phase-aligning) or "eq18" (pi/4-creating)."""
    if isinstance(policy, (int, np.integer)):
        return int(policy) % ndata
    if policy == "zero":
        return 0
    if policy == "symmetric":
        if ne % 2:
            raise ValueError("symmetric extension requires even ne")
        return (ndata - ne // 2) % ndata
    if policy == "optimal":
        return optimal_shift(c, ndata, ne)
    if policy == "eq17":
        return optimal_shift(make_constellation("pi2bpsk"), ndata, ne)
    if policy == "eq18":
        qc = c if c.kind != "pi2bpsk" else make_constellation("qpsk")
        return optimal_shift(qc, ndata, ne)
    raise ValueError(f"unknown shift policy: {policy!r}")


def _default_grid(nsc: int, step: int) -> np.ndarray:
    return np.arange(0, int(0.6 * nsc) + 1, step)


def _bound_objective(c, nsc, w, method, shift_policy, oversample, nfft, k_db):
    def objective(ne: int) -> float:
        ndata = nsc - ne
        cfg = WaveformConfig(
            ndata=ndata,
            nsc=nsc,
            nfft=oversample * ndata if nfft is None else nfft,
            shift_l=resolve_shift(shift_policy, c, ndata, ne),
        )
        if method == "qam_approx":
            value = papr_upper_qam_approx(c, cfg, w).value_db
        else:
            value = papr_upper_u(c, cfg, w).value_db
        if method == "corrected":
            value = corrected_bound(value, k_db, ne, nsc)
        return value

    return objective


def search_ne_papr(
    c: Constellation,
    nsc: int,
    w: FdssWindow,
    method: str = "bound_u",
    shift_policy="zero",
    ne_grid=None,
    level: float = 1e-2,
    trials: int = 100_000,
    seed: int = 0,
    oversample: int = 16,
    nfft: int | None = None,
    guard: str = "corrected",
    k_db: float | None = None,
    refine: bool = True,
) -> SeSearchResult:
    """Minimize a PAPR objective over the extension size.

    method: "bound_u" | "qam_approx" | "corrected" (analytic, per-ne
    nfft = oversample*ndata unless a fixed nfft is given, in which case
    the grid is filtered to sizes with ndata dividing nfft) or "mc"
    (level-CCDF quantile of seeded trials at a fixed nfft, default
    4*nsc, with common random numbers across grid points).

    For weak shaping (ripple above -4 dB) the bound's far minimum can be
    spurious; guard = "corrected" switches to the corrected bound
    (calibrating K at ne = 0 when not supplied), "restrict" clips the
    grid to ne <= 0.3*nsc, "off" disables the guard.
    """
    details: dict = {"shift_policy": str(shift_policy)}
    if method in BOUND_METHODS:
        if ne_grid is None:
            ne_grid = _default_grid(nsc, 1)
        ne_grid = np.asarray(ne_grid, dtype=int)
        if nfft is not None:
            ne_grid = ne_grid[nfft % (nsc - ne_grid) == 0]
        if guard not in ("corrected", "restrict", "off"):
            raise ValueError(f"unknown guard policy: {guard!r}")
        if guard != "off" and ripple_db(w) > WEAK_SHAPING_DB:
            if guard == "restrict":
                ne_grid = ne_grid[ne_grid <= WEAK_SHAPING_NE_CAP * nsc]
                details["guard"] = "restrict"
            else:
                method = "corrected"
                details["guard"] = "corrected"
        if len(ne_grid) == 0:
            raise ValueError("empty feasible ne grid")
        if method == "corrected" and k_db is None:
            k_db = calibrate_correction_db(
                c, nsc, w, level=level, trials=trials, seed=seed, oversample=oversample
            )
        if k_db is not None:
            details["k_db"] = k_db
        objective = _bound_objective(c, nsc, w, method, shift_policy, oversample, nfft, k_db)
        curve = [(int(ne), float(objective(int(ne)))) for ne in ne_grid]
    elif method == "mc":
        if nfft is None:
            nfft = 4 * nsc
        step = 2 if c.kind == "pi2bpsk" else 4
        if ne_grid is None:
            ne_grid = _default_grid(nsc, step)
        ne_grid = np.asarray(ne_grid, dtype=int)
        if len(ne_grid) == 0:
            raise ValueError("empty feasible ne grid")

        def objective(ne: int) -> float:
            ndata = nsc - ne
            cfg = WaveformConfig(
                ndata=ndata, nsc=nsc, nfft=nfft,
                shift_l=resolve_shift(shift_policy, c, ndata, ne),
            )
            vals = papr_trial_values(c, cfg, w, trials, substream(seed, "symbols"))
            return quantile_db(vals, level)

        curve = [(int(ne), float(objective(int(ne)))) for ne in ne_grid]
        if refine and len(ne_grid) > 1:
            grid_step = int(np.min(np.diff(np.sort(ne_grid)))) if len(ne_grid) > 1 else 1
            fine_step = 2 if c.kind == "pi2bpsk" else 1
            if grid_step > fine_step:
                known = dict(curve)
                ne0 = min(known, key=known.get)
                lo = max(0, ne0 - grid_step + 1)
                hi = min(nsc - 1, ne0 + grid_step - 1)
                for ne in range(lo, hi + 1, fine_step):
                    if ne not in known:
                        curve.append((ne, float(objective(ne))))
        details.update(level=level, trials=trials, nfft=nfft)
    else:
        raise ValueError(f"unknown search method: {method!r}")

    ne_opt, best = min(curve, key=lambda t: t[1])
    return SeSearchResult(
        ne_opt=int(ne_opt),
        objective_at_opt=float(best),
        curve=sorted(curve),
        method=method,
        details=details,
    )


def _capacity_cfg(nsc: int, profile: ChannelProfile, nfft: int | None) -> WaveformConfig:
    nfft = 4 * nsc if nfft is None else nfft
    cfg = WaveformConfig(ndata=nsc, nsc=nsc, nfft=nfft, ncp=0)
    if profile.is_fading:
        # cp large enough for the quantized taps; the rate path never uses it
        probe = WaveformConfig(ndata=nsc, nsc=nsc, nfft=nfft, ncp=nfft)
        delays, _ = sample_taps(profile, probe)
        cfg = WaveformConfig(ndata=nsc, nsc=nsc, nfft=nfft, ncp=int(delays.max()) + 1)
    return cfg


def search_ne_capa(
    nsc: int,
    w: FdssWindow,
    profile: ChannelProfile,
    snr_db: float,
    trials: int = 10_000,
    ne_grid=None,
    seed: int = 0,
    nfft: int | None = None,
    hbar: np.ndarray | None = None,
) -> SeSearchResult:
    """Maximize the Monte Carlo mean achievable rate over the extension size.

    One batch of channel realizations is shared by every grid point
    (the realizations do not depend on ne); AWGN needs a single one.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if ne_grid is None:
        ne_grid = np.arange(0, int(0.6 * nsc) + 1)
    ne_grid = np.asarray(ne_grid, dtype=int)
    if len(ne_grid) == 0:
        raise ValueError("empty feasible ne grid")
    base = _capacity_cfg(nsc, profile, nfft)
    if hbar is None:
        n = trials if profile.is_fading else 1
        hbar = realize_batch(profile, base, n, substream(seed, "channel"))
    snr = 10.0 ** (snr_db / 10.0)
    H2 = np.abs(np.sqrt(snr) * w.coeffs * hbar) ** 2
    curve = []
    for ne in ne_grid:
        cfg = WaveformConfig(ndata=nsc - int(ne), nsc=nsc, nfft=base.nfft, ncp=base.ncp)
        G = build_combined_gains(H2, cfg)
        curve.append((int(ne), float(np.mean(rate_of_gains(G, cfg)))))
    ne_opt, best = max(curve, key=lambda t: t[1])
    return SeSearchResult(
        ne_opt=int(ne_opt),
        objective_at_opt=float(best),
        curve=curve,
        method="capacity",
        details={"snr_db": snr_db, "trials": trials},
    )


@dataclass
class TradeoffReport:
    ne_papr: int
    ne_capa: int
    papr_db: dict  # keys "no_se", "ne_capa", "ne_papr"
    rate_bpcu: dict  # same keys
    rate_plain_bpcu: float  # flat window, no extension
    rate_loss: dict  # 1 - rate/rate_plain, same keys
    capa_leq_papr: bool  # observed ordering, reported not enforced


def tradeoff_report(
    c: Constellation,
    nsc: int,
    w: FdssWindow,
    profile: ChannelProfile,
    snr_db: float,
    papr_level: float = 1e-3,
    papr_trials: int = 400_000,
    rate_trials: int = 6000,
    seed: int = 0,
) -> TradeoffReport:
    """Both optima plus each metric cross-evaluated at the other's optimum.

    ne_papr comes from the (guarded) constellation bound, ne_capa from
    the capacity search; rates share one channel batch, including the
    plain DFT-s-OFDM reference (flat window, no extension).
    """
    from .window import flat

    base = _capacity_cfg(nsc, profile, None)
    n = rate_trials if profile.is_fading else 1
    hbar = realize_batch(profile, base, n, substream(seed, "channel"))

    ne_papr = search_ne_papr(c, nsc, w, method="bound_u", shift_policy="optimal", seed=seed).ne_opt
    ne_capa = search_ne_capa(nsc, w, profile, snr_db, trials=rate_trials, seed=seed, hbar=hbar).ne_opt

    snr = 10.0 ** (snr_db / 10.0)
    H2 = np.abs(np.sqrt(snr) * w.coeffs * hbar) ** 2
    H2_flat = snr * np.abs(hbar) ** 2

    def mean_rate(h2, ne):
        cfg = WaveformConfig(ndata=nsc - ne, nsc=nsc, nfft=base.nfft, ncp=base.ncp)
        return float(np.mean(rate_of_gains(build_combined_gains(h2, cfg), cfg)))

    def papr_at(ne):
        ndata = nsc - ne
        cfg = WaveformConfig(
            ndata=ndata, nsc=nsc, nfft=4 * nsc,
            shift_l=resolve_shift("optimal", c, ndata, ne),
        )
        vals = papr_trial_values(c, cfg, w, papr_trials, substream(seed, "symbols"))
        return quantile_db(vals, papr_level)

    keys = {"no_se": 0, "ne_capa": ne_capa, "ne_papr": ne_papr}
    rate = {k: mean_rate(H2, ne) for k, ne in keys.items()}
    papr = {k: papr_at(ne) for k, ne in keys.items()}
    rate_plain = mean_rate(H2_flat, 0)
    loss = {k: 1.0 - r / rate_plain for k, r in rate.items()}
    return TradeoffReport(
        ne_papr=ne_papr,
        ne_capa=ne_capa,
        papr_db=papr,
        rate_bpcu=rate,
        rate_plain_bpcu=rate_plain,
        rate_loss=loss,
        capa_leq_papr=bool(ne_capa <= ne_papr),
    )
