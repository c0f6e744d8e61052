"""Scenario configuration: YAML parsing, exhaustive validation, emission.

Validation collects every violation instead of stopping at the first, so a
config author sees the full damage report in one pass. Packet arithmetic is
re-derived here (coded bits from packet bytes, symbol counts from the
constellation order and pilot spacing) and cross-checked against any
explicitly configured blocklength.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import asdict, dataclass, fields

import yaml

__all__ = [
    "ScenarioConfig",
    "ConfigError",
    "parse_config",
    "emit_config",
    "validate_config",
    "derive_layout",
    "SIM_SCHEMES",
    "ANALYSIS_SCHEMES",
]

SIM_SCHEMES = ("dpsk", "pilot_psk", "pilot_qam")
ANALYSIS_SCHEMES = SIM_SCHEMES + ("psk", "qam", "gaussian")
_COMBINERS = ("mrc", "sc")
_SNR_UNITS = ("ebn0_db", "rho_db")


@dataclass(frozen=True)
class ScenarioConfig:
    scheme: str
    m: int = 4
    links: int = 1
    combining: str = "mrc"
    fd_ts: float = 0.0
    upsilon: int = 1
    packet_bytes: int = 32
    rc: float = 0.5
    n_symbols: int | None = None  # optional, cross-checked against derived
    snr_db_grid: tuple[float, ...] = ()
    snr_unit: str = "ebn0_db"
    eps: tuple[float, ...] = (1e-5,)
    seed: int = 0
    density_samples: int = 1_000_000
    block_samples: int = 1_000_000
    stop_errors: int = 100
    max_trials: int = 10_000_000
    list_size: int = 32
    design_snr_db: float = 1.0
    workers: int = 1
    with_analytic: bool = True
    with_bounds: bool = False
    with_sim: bool = False
    duration_ms_grid: tuple[float, ...] = ()
    ts_ms: float = 0.01
    rho_db: float | None = None  # operating point for payload sweeps


class ConfigError(ValueError):
    """Carries the full list of violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def _is_int(x) -> bool:
    return isinstance(x, numbers.Integral) and not isinstance(x, bool)


def _is_real(x) -> bool:
    return isinstance(x, numbers.Real) and not isinstance(x, bool)


def derive_layout(cfg: ScenarioConfig):
    """(n_symbols, n_data, info_bits) from the packet description.

    Raises ConfigError listing each arithmetic violation."""
    bad = []
    coded = cfg.packet_bytes * 8
    info = coded * cfg.rc
    if abs(info - round(info)) > 1e-9:
        bad.append(f"coded bits {coded} at rate {cfg.rc} give non-integer info bits {info}")
    info = int(round(info))
    if cfg.scheme == "gaussian":
        if cfg.n_symbols is None:
            bad.append("gaussian inputs need an explicit n_symbols")
            raise ConfigError(bad)
        if bad:
            raise ConfigError(bad)
        return cfg.n_symbols, cfg.n_symbols, info
    bps = int(math.log2(cfg.m)) if cfg.m >= 1 else 0
    if cfg.m < 2 or (1 << bps) != cfg.m:
        bad.append("modulation order must be a power of two")
        raise ConfigError(bad)
    if coded % bps:
        bad.append(f"{coded} coded bits do not fill {bps}-bit symbols")
        raise ConfigError(bad)
    n_data = coded // bps
    if cfg.scheme in ("pilot_psk", "pilot_qam"):
        if n_data % cfg.upsilon:
            bad.append(f"{n_data} data symbols not divisible by upsilon={cfg.upsilon}")
            raise ConfigError(bad)
        n_symbols = n_data + n_data // cfg.upsilon
    else:
        n_symbols = n_data
    if cfg.n_symbols is not None and cfg.n_symbols != n_symbols:
        bad.append(f"configured n_symbols={cfg.n_symbols} but layout derives {n_symbols}")
    if bad:
        raise ConfigError(bad)
    return n_symbols, n_data, info


def validate_config(cfg: ScenarioConfig) -> list[str]:
    """All violations for `cfg`; empty list when valid."""
    bad = []
    if cfg.scheme not in ANALYSIS_SCHEMES:
        bad.append(f"unknown scheme {cfg.scheme!r} (one of {', '.join(ANALYSIS_SCHEMES)})")
    if cfg.scheme != "gaussian":
        bps = int(math.log2(cfg.m)) if cfg.m >= 1 else 0
        if cfg.m < 2 or (1 << bps) != cfg.m:
            bad.append("modulation order must be a power of two")
    if cfg.links < 1:
        bad.append(f"links must be >= 1, got {cfg.links}")
    if cfg.combining not in _COMBINERS:
        bad.append(f"unknown combining {cfg.combining!r} (mrc or sc)")
    if cfg.fd_ts < 0.0:
        bad.append(f"fd_ts must be >= 0, got {cfg.fd_ts}")
    if cfg.upsilon < 1:
        bad.append(f"pilot spacing must be >= 1, got {cfg.upsilon}")
    if cfg.packet_bytes < 1:
        bad.append(f"packet_bytes must be >= 1, got {cfg.packet_bytes}")
    if not 0.0 < cfg.rc <= 1.0:
        bad.append(f"code rate must be in (0, 1], got {cfg.rc}")
    if cfg.snr_unit not in _SNR_UNITS:
        bad.append(f"unknown snr_unit {cfg.snr_unit!r} (ebn0_db or rho_db)")
    for e in cfg.eps:
        if not 0.0 < e < 1.0:
            bad.append(f"eps target must be in (0, 1), got {e}")
    if cfg.seed < 0:
        bad.append(f"seed must be >= 0, got {cfg.seed}")
    for name in ("density_samples", "block_samples", "stop_errors", "max_trials",
                 "list_size", "workers"):
        if getattr(cfg, name) < 1:
            bad.append(f"{name} must be >= 1, got {getattr(cfg, name)}")
    if cfg.ts_ms <= 0.0:
        bad.append(f"ts_ms must be > 0, got {cfg.ts_ms}")
    for d in cfg.duration_ms_grid:
        if d <= 0.0:
            bad.append(f"duration must be > 0 ms, got {d}")
    if cfg.with_sim and cfg.scheme not in SIM_SCHEMES and cfg.scheme in ANALYSIS_SCHEMES:
        bad.append(f"scheme {cfg.scheme!r} cannot be simulated "
                   f"(one of {', '.join(SIM_SCHEMES)})")
    packet_based = bool(cfg.snr_db_grid) or not cfg.duration_ms_grid
    if not bad and packet_based:
        # packet arithmetic only meaningful once the fields above hold; a
        # pure duration sweep sizes its packets from the grid instead
        try:
            derive_layout(cfg)
        except ConfigError as err:
            bad.extend(err.violations)
    return bad


_INT_FIELDS = {"m", "links", "upsilon", "packet_bytes", "n_symbols", "seed",
               "density_samples", "block_samples", "stop_errors", "max_trials",
               "list_size", "workers"}
_FLOAT_FIELDS = {"fd_ts", "rc", "design_snr_db", "ts_ms", "rho_db"}
_FLOAT_TUPLES = {"snr_db_grid", "eps", "duration_ms_grid"}
_BOOL_FIELDS = {"with_analytic", "with_bounds", "with_sim"}


def parse_config(text: str) -> ScenarioConfig:
    """YAML document -> validated ScenarioConfig; raises ConfigError with
    every violation found (types, unknown keys, ranges, packet arithmetic)."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError([f"not parseable YAML: {err}"]) from err
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError([f"top level must be a mapping, got {type(raw).__name__}"])

    known = {f.name for f in fields(ScenarioConfig)}
    bad = [f"unknown key {k!r}" for k in sorted(set(raw) - known)]

    clean = {}
    for key, val in raw.items():
        if key not in known:
            continue
        if key in _INT_FIELDS:
            if key == "n_symbols" and val is None:
                clean[key] = None
            elif _is_int(val):
                clean[key] = int(val)
            else:
                bad.append(f"{key} must be an integer, got {val!r}")
        elif key in _FLOAT_FIELDS:
            if key == "rho_db" and val is None:
                clean[key] = None
            elif _is_real(val):
                clean[key] = float(val)
            else:
                bad.append(f"{key} must be a number, got {val!r}")
        elif key in _FLOAT_TUPLES:
            if isinstance(val, (list, tuple)) and all(_is_real(v) for v in val):
                clean[key] = tuple(float(v) for v in val)
            else:
                bad.append(f"{key} must be a list of numbers, got {val!r}")
        elif key in _BOOL_FIELDS:
            if isinstance(val, bool):
                clean[key] = val
            else:
                bad.append(f"{key} must be true or false, got {val!r}")
        else:  # scheme, combining, snr_unit
            if isinstance(val, str):
                clean[key] = val
            else:
                bad.append(f"{key} must be a string, got {val!r}")

    if "scheme" not in clean:
        if "scheme" not in raw:
            bad.append("scheme is required")
    if bad:
        raise ConfigError(bad)

    cfg = ScenarioConfig(**clean)
    bad = validate_config(cfg)
    if bad:
        raise ConfigError(bad)
    return cfg


def emit_config(cfg: ScenarioConfig) -> str:
    """YAML text such that parse_config(emit_config(cfg)) == cfg."""
    doc = asdict(cfg)
    for key in _FLOAT_TUPLES:
        doc[key] = list(doc[key])
    return yaml.safe_dump(doc, sort_keys=True, default_flow_style=False)
