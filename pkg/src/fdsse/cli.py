"""Experiment runner: reproducible sweeps driven by TOML configs.

Subcommands: papr-ccdf, bound-sweep, se-opt, rate-sweep, ber, window-dump.
Every run validates the full config before any compute (no partial output
files), seeds named substreams from one master seed, and writes CSV for
curves plus JSON for scalars and run metadata.

Exit codes: 0 success, 2 config error, 3 runtime numeric error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np
import scipy.fft as sfft

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from .bounds import (
    calibrate_correction_db,
    corrected_bound,
    papr_upper_gu,
    papr_upper_qam_approx,
    papr_upper_u,
)
from .channel import profile_from_config, sample_taps
from .constellation import KINDS, make_constellation
from .metrics import papr_trial_values, quantile_db
from .optimizer import resolve_shift, search_ne_capa, search_ne_papr
from .receiver import average_rate, simulate_qpsk_ber
from .streams import substream
from .waveform import WaveformConfig
from .window import FdssWindow, hann_from_ripple, window_from_config
from .metrics import ccdf as make_ccdf


class ConfigError(ValueError):
    pass


def _load_toml(path: Path) -> dict:
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML in {path}: {e}")


class Experiment:
    """Validated experiment description (everything checked up front)."""

    def __init__(self, raw: dict, seed=None, trials=None):
        self.raw = raw
        wf = raw.get("waveform")
        if not isinstance(wf, dict) or "nsc" not in wf:
            raise ConfigError("missing [waveform] section with 'nsc'")
        self.nsc = int(wf["nsc"])
        self.ne = int(wf.get("ne", 0))
        if not 0 <= self.ne < self.nsc:
            raise ConfigError("waveform.ne must satisfy 0 <= ne < nsc")
        self.nfft = int(wf.get("nfft", 4 * self.nsc))
        self.ncp = int(wf.get("ncp", self.nfft // 8))
        self.shift = wf.get("shift", 0)
        if not (isinstance(self.shift, int) or self.shift in
                ("zero", "symmetric", "optimal", "eq17", "eq18")):
            raise ConfigError(f"unknown waveform.shift: {self.shift!r}")

        kind = raw.get("constellation", "qpsk")
        if kind not in KINDS:
            raise ConfigError(f"unknown constellation {kind!r}; pick one of {KINDS}")
        self.constellation = make_constellation(kind)

        if "window" not in raw:
            raise ConfigError("missing [window] section")
        try:
            self.window: FdssWindow = window_from_config(raw["window"], self.nsc)
        except (ValueError, KeyError) as e:
            raise ConfigError(f"bad [window] section: {e}")

        self.profile = None
        if "channel" in raw:
            try:
                self.profile = profile_from_config(raw["channel"])
            except (ValueError, KeyError) as e:
                raise ConfigError(f"bad [channel] section: {e}")

        met = raw.get("metrics", {})
        self.trials = int(trials if trials is not None else met.get("trials", 100_000))
        if self.trials < 1:
            raise ConfigError("metrics.trials must be >= 1")
        self.levels = [float(l) for l in met.get("levels", [1e-1, 1e-2, 1e-3])]
        if any(not 0 < l < 1 for l in self.levels):
            raise ConfigError("metrics.levels must lie in (0, 1)")
        self.seed = int(seed if seed is not None else met.get("seed", 0))
        self.definition = met.get("definition", "statistical")
        if self.definition not in ("statistical", "instantaneous"):
            raise ConfigError(f"unknown metrics.definition: {self.definition!r}")
        self.n_symbols = int(met.get("n_symbols", 1))

        sweep = raw.get("sweep")
        self.sweep_axis = None
        self.sweep_values = None
        if sweep is not None:
            self.sweep_axis = sweep.get("axis")
            if self.sweep_axis not in ("ne", "L", "ripple", "snr"):
                raise ConfigError(f"unknown sweep.axis: {self.sweep_axis!r}")
            values = sweep.get("values")
            if not values:
                raise ConfigError("sweep.values must be a nonempty list")
            self.sweep_values = list(values)

        # every sub-config must validate before any compute starts
        self.base_cfg()

    def base_cfg(self, ne=None, shift=None) -> WaveformConfig:
        ne = self.ne if ne is None else int(ne)
        ndata = self.nsc - ne
        if ndata < 1:
            raise ConfigError(f"ne={ne} leaves no data subcarriers")
        shift_l = resolve_shift(self.shift if shift is None else shift,
                                self.constellation, ndata, ne)
        try:
            return WaveformConfig(ndata=ndata, nsc=self.nsc, nfft=self.nfft,
                                  ncp=self.ncp, shift_l=shift_l)
        except ValueError as e:
            raise ConfigError(str(e))

    def metadata(self, command: str) -> dict:
        return {
            "command": command,
            "version": __version__,
            "seed": self.seed,
            "trials": self.trials,
            "nsc": self.nsc,
            "constellation": self.constellation.kind,
            "window": self.raw.get("window"),
        }


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(header)
        wr.writerows(rows)


def _write_json(path: Path, payload: dict):
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _papr_values(exp: Experiment, cfg: WaveformConfig, window=None):
    return papr_trial_values(
        exp.constellation,
        cfg,
        window if window is not None else exp.window,
        exp.trials,
        substream(exp.seed, "symbols"),
        definition=exp.definition,
        n_symbols=exp.n_symbols,
    )


def run_papr_ccdf(exp: Experiment, out: Path, stem: str):
    """CCDF curve (no sweep) or per-point quantile rows (with sweep)."""
    rows = []
    if exp.sweep_axis is None:
        cfg = exp.base_cfg()
        curve = make_ccdf(lambda n: _papr_values(exp, cfg), exp.trials,
                          exp.levels, seed=exp.seed)
        _write_csv(out / f"{stem}.csv", ["threshold_db", "ccdf"],
                   zip(np.round(curve.thresholds_db, 6), curve.ccdf))
        payload = exp.metadata("papr-ccdf")
        payload["quantiles_db"] = {f"{k:g}": v for k, v in curve.quantiles_db.items()}
        _write_json(out / f"{stem}.json", payload)
        return
    if exp.sweep_axis == "snr":
        raise ConfigError("papr-ccdf sweeps over ne, L or ripple")
    header = [exp.sweep_axis] + [f"papr_db_at_{l:g}" for l in exp.levels]
    for v in exp.sweep_values:
        if exp.sweep_axis == "ne":
            cfg, window = exp.base_cfg(ne=int(v)), exp.window
        elif exp.sweep_axis == "L":
            cfg, window = exp.base_cfg(shift=int(v)), exp.window
        else:  # ripple, deformed Hann family
            cfg, window = exp.base_cfg(), hann_from_ripple(exp.nsc, float(v))
        vals = _papr_values(exp, cfg, window)
        rows.append([v] + [round(quantile_db(vals, l), 6) for l in exp.levels])
    _write_csv(out / f"{stem}.csv", header, rows)
    payload = exp.metadata("papr-ccdf")
    payload["sweep"] = {"axis": exp.sweep_axis, "values": exp.sweep_values}
    _write_json(out / f"{stem}.json", payload)


def run_bound_sweep(exp: Experiment, out: Path, stem: str):
    """Bound columns per grid point (grid from the sweep or all feasible ne)."""
    if exp.sweep_axis not in (None, "ne"):
        raise ConfigError("bound-sweep sweeps over ne")
    if exp.sweep_values is not None:
        grid = [int(v) for v in exp.sweep_values]
    else:
        grid = [ne for ne in range(0, exp.nsc) if exp.nfft % (exp.nsc - ne) == 0]
    grid = [ne for ne in grid if exp.nfft % (exp.nsc - ne) == 0]
    if not grid:
        raise ConfigError("empty feasible ne grid (ndata must divide nfft)")
    k_db = exp.raw.get("bounds", {}).get("k_db")
    if k_db is None:
        k_db = calibrate_correction_db(
            exp.constellation, exp.nsc, exp.window,
            level=min(exp.levels), trials=exp.trials, seed=exp.seed,
        )
    qam_ok = exp.constellation.kind != "pi2bpsk"
    rows = []
    for ne in grid:
        cfg = exp.base_cfg(ne=ne)
        bu = papr_upper_u(exp.constellation, cfg, exp.window).value_db
        bgu = papr_upper_gu(exp.constellation, cfg, exp.window).value_db
        bqam = (papr_upper_qam_approx(exp.constellation, cfg, exp.window).value_db
                if qam_ok else "")
        rows.append([ne, cfg.shift_l, round(bu, 6), round(bgu, 6),
                     round(bqam, 6) if bqam != "" else "",
                     round(corrected_bound(bu, k_db, ne, exp.nsc), 6)])
    _write_csv(out / f"{stem}.csv",
               ["ne", "L", "bound_u_db", "bound_gu_db", "qam_approx_db", "corrected_db"],
               rows)
    payload = exp.metadata("bound-sweep")
    payload["k_db"] = k_db
    _write_json(out / f"{stem}.json", payload)


def run_se_opt(exp: Experiment, out: Path, stem: str):
    """SE-size optimization; JSON includes the full objective curve."""
    sect = exp.raw.get("seopt", {})
    objective = sect.get("objective", "papr")
    grid = sect.get("ne_grid")
    payload = exp.metadata("se-opt")
    payload["objective"] = objective
    if objective == "papr":
        method = sect.get("method", "mc")
        res = search_ne_papr(
            exp.constellation, exp.nsc, exp.window, method=method,
            shift_policy=exp.shift, ne_grid=grid, level=min(exp.levels),
            trials=exp.trials, seed=exp.seed,
        )
        payload["results"] = [{
            "ne_opt": res.ne_opt,
            "objective_at_opt": res.objective_at_opt,
            "method": res.method,
            "details": res.details,
            "curve": res.curve,
        }]
    elif objective == "capacity":
        if exp.profile is None:
            raise ConfigError("capacity optimization needs a [channel] section")
        snrs = sect.get("snr_db", 0.0)
        snrs = [float(s) for s in (snrs if isinstance(snrs, list) else [snrs])]
        results = []
        for snr_db in snrs:
            res = search_ne_capa(
                exp.nsc, exp.window, exp.profile, snr_db,
                trials=exp.trials, ne_grid=grid, seed=exp.seed,
            )
            results.append({
                "snr_db": snr_db,
                "ne_opt": res.ne_opt,
                "objective_at_opt": res.objective_at_opt,
                "curve": res.curve,
            })
        payload["results"] = results
    else:
        raise ConfigError(f"unknown seopt.objective: {objective!r}")
    _write_json(out / f"{stem}.json", payload)


def run_rate_sweep(exp: Experiment, out: Path, stem: str):
    """Rows (snr_db, ne, rate_bpcu, sinr_eff_db_mean)."""
    if exp.profile is None:
        raise ConfigError("rate-sweep needs a [channel] section")
    rate_sect = exp.raw.get("rate", {})
    if exp.sweep_axis == "snr":
        snrs = [float(v) for v in exp.sweep_values]
        nes = [int(v) for v in rate_sect.get("ne", [exp.ne])]
    elif exp.sweep_axis == "ne":
        nes = [int(v) for v in exp.sweep_values]
        snrs = [float(v) for v in np.atleast_1d(rate_sect.get("snr_db", [0.0]))]
    else:
        raise ConfigError("rate-sweep sweeps over snr or ne")
    for ne in nes:
        exp.base_cfg(ne=ne)  # fail fast before compute
    rows = []
    for snr_db in snrs:
        for ne in nes:
            cfg = exp.base_cfg(ne=ne)
            rate, sinr_db = average_rate(exp.profile, cfg, exp.window, snr_db,
                                         exp.trials, seed=exp.seed)
            rows.append([snr_db, ne, round(rate, 9), round(sinr_db, 9)])
    _write_csv(out / f"{stem}.csv",
               ["snr_db", "ne", "rate_bpcu", "sinr_eff_db_mean"], rows)
    _write_json(out / f"{stem}.json", exp.metadata("rate-sweep"))


def run_ber(exp: Experiment, out: Path, stem: str):
    """Simulated Gray-QPSK hard-decision BER plus the Q(sqrt(sinr)) theory column."""
    if exp.profile is None:
        raise ConfigError("ber needs a [channel] section")
    if exp.constellation.kind != "qpsk":
        raise ConfigError("ber mode simulates Gray QPSK")
    if exp.sweep_axis not in (None, "snr"):
        raise ConfigError("ber sweeps over snr")
    snrs = [float(v) for v in (exp.sweep_values or [0.0])]
    cfg = exp.base_cfg()
    n_blocks = int(exp.raw.get("ber", {}).get("blocks", max(1, exp.trials)))
    rows = []
    for snr_db in snrs:
        r = simulate_qpsk_ber(cfg, exp.window, exp.profile, snr_db, n_blocks,
                              seed=exp.seed)
        rows.append([snr_db, r["ber_sim"], r["ber_theory"]])
    _write_csv(out / f"{stem}.csv", ["snr_db", "ber_sim", "ber_theory"], rows)
    payload = exp.metadata("ber")
    payload["blocks"] = n_blocks
    payload["bits_per_point"] = 2 * cfg.ndata * n_blocks
    _write_json(out / f"{stem}.json", payload)


def run_window_dump(exp: Experiment, out: Path, stem: str):
    _write_csv(out / f"{stem}.csv", ["index", "coefficient"],
               [(k, repr(float(v))) for k, v in enumerate(exp.window.coeffs)])


RUNNERS = {
    "papr-ccdf": run_papr_ccdf,
    "bound-sweep": run_bound_sweep,
    "se-opt": run_se_opt,
    "rate-sweep": run_rate_sweep,
    "ber": run_ber,
    "window-dump": run_window_dump,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fdsse", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--trials", type=int, default=None)
        sp.add_argument("--out", type=Path, default=Path("."))
        sp.add_argument("--threads", type=int, default=1)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = _load_toml(args.config)
        exp = Experiment(raw, seed=args.seed, trials=args.trials)
        if exp.profile is not None:
            sample_taps(exp.profile, exp.base_cfg())  # tap-vs-cp check up front
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    args.out.mkdir(parents=True, exist_ok=True)
    stem = args.config.stem
    try:
        with sfft.set_workers(max(1, args.threads)):
            RUNNERS[args.command](exp, args.out, stem)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (FloatingPointError, np.linalg.LinAlgError) as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
