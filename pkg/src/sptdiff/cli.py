"""Command-line orchestration and CSV/JSON result emission.

Verbs: analyze (normal approximation), bounds (converse/achievability),
simulate (coded waveform), payload (largest payload vs packet duration),
validate (config check only). Every run is a pure function of the config
plus the seed/worker overrides: rows are written with round-trip float
formatting and a JSON sidecar records the full config and a SHA-256 of the
CSV bytes.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import asdict, replace

from . import bounds as bounds_mod
from . import fbl, linksim
from .channel import derive_rng
from .config import (
    SIM_SCHEMES,
    ConfigError,
    ScenarioConfig,
    derive_layout,
    emit_config,
    parse_config,
)

__all__ = ["main", "run_verb", "sweep_records", "payload_records",
           "write_rows", "SWEEP_COLUMNS", "PAYLOAD_COLUMNS"]

SWEEP_COLUMNS = (
    "scheme", "M", "K", "combining", "fdTs", "N", "L", "snr_db",
    "analytic_bler", "is_bound", "dt_bound", "sim_bler", "sim_errors",
    "sim_trials", "ci_lo", "ci_hi", "seed", "censored", "capacity",
    "dispersion",
)

PAYLOAD_COLUMNS = (
    "scheme", "M", "K", "combining", "fdTs", "duration_ms", "N", "n_data",
    "eps", "snr_db", "payload_bits", "seed",
)


def _law(cfg: ScenarioConfig, rho: float) -> fbl.ChannelLaw:
    return fbl.scheme_law(cfg.scheme, cfg.m, rho, links=cfg.links,
                          combining=cfg.combining, fd_ts=cfg.fd_ts,
                          upsilon=cfg.upsilon)


def _rho(cfg: ScenarioConfig, snr_db: float, info_bits: int, n_symbols: int) -> float:
    lin = 10.0 ** (snr_db / 10.0)
    if cfg.snr_unit == "rho_db":
        return lin
    return lin * info_bits / n_symbols


def sweep_records(cfg: ScenarioConfig, with_analytic: bool, with_bounds: bool,
                  with_sim: bool) -> list[dict]:
    """One record per grid point with the sweep column set.

    Simulation-capable schemes delegate to linksim.sweep so the CLI and the
    library produce identical rows; analysis-only schemes (psk/qam/gaussian)
    are assembled here from the same per-point RNG streams.
    """
    if with_sim or cfg.scheme in SIM_SCHEMES:
        scn = linksim.build_scenario(
            cfg.scheme, cfg.m, cfg.packet_bytes, cfg.rc, links=cfg.links,
            combining=cfg.combining, fd_ts=cfg.fd_ts, upsilon=cfg.upsilon,
            list_size=cfg.list_size, design_snr_db=cfg.design_snr_db)
        return linksim.sweep(
            scn, cfg.snr_db_grid, cfg.seed, snr_unit=cfg.snr_unit,
            with_analytic=with_analytic, with_bounds=with_bounds,
            with_sim=with_sim, density_samples=cfg.density_samples,
            block_samples=cfg.block_samples, stop_errors=cfg.stop_errors,
            max_trials=cfg.max_trials, workers=cfg.workers)

    n_symbols, n_data, info_bits = derive_layout(cfg)
    records = []
    for pt, snr_db in enumerate(cfg.snr_db_grid):
        rho = _rho(cfg, snr_db, info_bits, n_symbols)
        law = _law(cfg, rho)
        rec = dict.fromkeys(SWEEP_COLUMNS)
        rec.update(scheme=cfg.scheme, M=cfg.m, K=cfg.links,
                   combining=cfg.combining, fdTs=cfg.fd_ts, N=n_symbols,
                   L=info_bits, snr_db=float(snr_db), seed=cfg.seed)
        if with_analytic:
            rng = derive_rng(cfg.seed, linksim._KEY_ANALYTIC, pt)
            _, bler, cd = fbl.corollary_rate_bler(
                law, n_data, info_bits, 1e-5, cfg.density_samples, rng)
            rec["analytic_bler"] = bler
            rec["capacity"] = cd.capacity
            rec["dispersion"] = cd.dispersion
        if with_bounds:
            rng = derive_rng(cfg.seed, linksim._KEY_BOUNDS, pt)
            lo, hi = bounds_mod.evaluate_bounds(law, n_data, info_bits,
                                                cfg.block_samples, rng)
            rec["is_bound"] = lo.value
            rec["dt_bound"] = hi.value
        records.append(rec)
    return records


def payload_records(cfg: ScenarioConfig) -> list[dict]:
    """Largest supported payload per (duration, eps) at the configured
    operating SNR (rho_db, per-symbol)."""
    if cfg.rho_db is None:
        raise ConfigError(["payload sweep needs rho_db"])
    rho = 10.0 ** (cfg.rho_db / 10.0)
    bad = []
    layouts = []
    for dur in cfg.duration_ms_grid:
        n = round(dur / cfg.ts_ms)
        if n < 1:
            bad.append(f"duration {dur} ms is under one symbol at ts_ms={cfg.ts_ms}")
            continue
        if cfg.scheme in ("pilot_psk", "pilot_qam"):
            period = cfg.upsilon + 1
            if n % period:
                bad.append(f"duration {dur} ms gives N={n}, not divisible by "
                           f"pilot period {period}")
                continue
            n_data = n - n // period
        else:
            n_data = n
        layouts.append((dur, n, n_data))
    if bad:
        raise ConfigError(bad)
    law = _law(cfg, rho)
    records = []
    for pt, (dur, n, n_data) in enumerate(layouts):
        for eps in cfg.eps:
            rng = derive_rng(cfg.seed, linksim._KEY_ANALYTIC, pt)
            payload = fbl.max_payload(law, n_data, eps, cfg.density_samples, rng)
            records.append({
                "scheme": cfg.scheme, "M": cfg.m, "K": cfg.links,
                "combining": cfg.combining, "fdTs": cfg.fd_ts,
                "duration_ms": float(dur), "N": n, "n_data": n_data,
                "eps": float(eps), "snr_db": float(cfg.rho_db),
                "payload_bits": payload, "seed": cfg.seed,
            })
    return records


# ------------------------------------------------------------ file output

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if hasattr(value, "item"):  # numpy scalar
        return _fmt(value.item())
    return str(value)


def rows_to_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def write_rows(rows: list[dict], columns, cfg: ScenarioConfig, out_dir: str,
               stem: str) -> tuple[str, str]:
    """Write <stem>.csv and the <stem>.json sidecar; returns both paths."""
    os.makedirs(out_dir, exist_ok=True)
    text = rows_to_csv(rows, columns)
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    with open(csv_path, "w", newline="") as fh:
        fh.write(text)
    sidecar = {
        "config": asdict(cfg),
        "columns": list(columns),
        "rows": len(rows),
        "csv_sha256": hashlib.sha256(text.encode()).hexdigest(),
    }
    json_path = os.path.join(out_dir, f"{stem}.json")
    with open(json_path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path


# ------------------------------------------------------------------ verbs

def run_verb(verb: str, cfg: ScenarioConfig, out_dir: str) -> list[dict]:
    if verb == "analyze":
        rows = sweep_records(cfg, with_analytic=True, with_bounds=False,
                             with_sim=False)
        write_rows(rows, SWEEP_COLUMNS, cfg, out_dir, "analyze")
    elif verb == "bounds":
        rows = sweep_records(cfg, with_analytic=cfg.with_analytic,
                             with_bounds=True, with_sim=False)
        write_rows(rows, SWEEP_COLUMNS, cfg, out_dir, "bounds")
    elif verb == "simulate":
        rows = sweep_records(cfg, with_analytic=cfg.with_analytic,
                             with_bounds=cfg.with_bounds, with_sim=True)
        write_rows(rows, SWEEP_COLUMNS, cfg, out_dir, "simulate")
    elif verb == "payload":
        rows = payload_records(cfg)
        write_rows(rows, PAYLOAD_COLUMNS, cfg, out_dir, "payload")
    else:
        raise ValueError(f"unknown verb {verb!r}")
    return rows


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sptdiff",
        description="finite-blocklength analysis and coded link simulation "
                    "for differential and pilot-assisted modulation")
    parser.add_argument("verb", choices=["analyze", "bounds", "simulate",
                                         "payload", "validate"])
    parser.add_argument("--config", required=True, help="YAML scenario config")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--stop-errors", type=int, default=None)
    parser.add_argument("--max-trials", type=int, default=None)
    parser.add_argument("--list-size", type=int, default=None)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as err:
        print(f"config: {err}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(text)
    except ConfigError as err:
        for v in err.violations:
            print(f"config: {v}", file=sys.stderr)
        return 2
    overrides = {name: getattr(args, name) for name in
                 ("seed", "workers", "stop_errors", "max_trials", "list_size")
                 if getattr(args, name) is not None}
    if overrides:
        cfg = replace(cfg, **overrides)

    if args.verb == "validate":
        n_symbols, n_data, info_bits = derive_layout(cfg)
        print(f"ok: {cfg.scheme} M={cfg.m} K={cfg.links} {cfg.combining} "
              f"fdTs={cfg.fd_ts} N={n_symbols} data={n_data} L={info_bits}")
        print(emit_config(cfg), end="")
        return 0

    try:
        rows = run_verb(args.verb, cfg, args.out)
    except ConfigError as err:
        for v in err.violations:
            print(f"config: {v}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"output: {err}", file=sys.stderr)
        return 1
    print(f"{args.verb}: {len(rows)} rows -> "
          f"{os.path.join(args.out, args.verb + '.csv')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
