"""System configuration and frame arithmetic.

The configuration file format is flat ``key = value``, one per line, with
``#`` comments.  Keys match the :class:`SystemConfig` field names except
for the two decibel quantities, which are given as ``tx_power_dbm`` and
``noise_psd_dbm_hz`` and converted to linear SI units at parse time.
Internally everything is linear SI (W, Hz, s, m).
"""

import math
import os
from dataclasses import dataclass, fields, replace

try:
    from importlib.resources import files as _resource_files
except ImportError:  # pragma: no cover
    from importlib_resources import files as _resource_files

ENV_CONFIG_PATH = "MMWSCHED_CONFIG"
PROFILES = ("table1", "desk")


class ConfigError(ValueError):
    """Configuration rejected; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class SystemConfig:
    """All per-cell simulation parameters, in linear SI units."""

    # Cell population and hybrid architecture
    n_ues: int = 8
    n_bs_antennas: int = 128
    n_ue_antennas: int = 16
    n_bs_rf: int = 8
    n_ue_rf: int = 1
    rf_per_stream_bs: int = 1
    rf_per_stream_ue: int = 1
    bs_codebook_bits: int = 4
    ue_codebook_bits: int = 2

    # Radio
    tx_power: float = dbm_to_watts(30.0)        # W
    carrier_freq: float = 28e9                  # Hz
    bandwidth: float = 200e6                    # Hz (metadata; rates use Q*B_c)
    noise_psd: float = dbm_to_watts(-174.0)     # W/Hz

    # Frame structure
    coherence_time: float = 5e-3                # T_c, s
    coherence_bw: float = 8.64e6                # B_c, Hz
    prb_time: float = 0.125e-3                  # s
    prb_bw: float = 720e3                       # Hz
    n_time_slots: int = 40                      # per CB
    n_freq_subch: int = 12                      # per CB
    n_cbs_freq: int = 22                        # Q, CBs stacked per MB
    pf_window: int = 100                        # W, MBs
    n_mbs: int = 100                            # MBs scheduled per realization

    # Geometry
    cell_radius: float = 75.0                   # m
    exclusion_radius: float = 6.0               # m
    bs_height: float = 10.0                     # m

    # Channel model
    pathloss_intercept_db: float = 72.0         # a in a + 10 b log10(d)
    pathloss_exponent: float = 2.92             # b
    shadowing_std_db: float = 8.7
    n_clusters: int = 5
    n_paths_per_cluster: int = 10
    path_angle_spread_deg: float = 10.0

    # Scheduler
    pf_floor: float = 1e3                       # bits/s, initial R_u
    fw_rel_tol: float = 1e-6
    fw_max_iters: int = 20000
    max_beam_sets: int = 5000
    max_ue_tuples: int = 20000

    @property
    def max_streams(self) -> int:
        """L = K_b / K'_b."""
        return self.n_bs_rf // self.rf_per_stream_bs

    @property
    def noise_power_prb(self) -> float:
        """sigma^2 per PRB = delta_F * N0 (W)."""
        return self.prb_bw * self.noise_psd

    @property
    def usable_bandwidth(self) -> float:
        """Q * N_F * delta_F; all rate computations use this, never ``bandwidth``."""
        return self.n_cbs_freq * self.n_freq_subch * self.prb_bw

    @property
    def n_bs_beams(self) -> int:
        return 2 ** self.bs_codebook_bits

    @property
    def n_ue_beams(self) -> int:
        return 2 ** self.ue_codebook_bits


_COUNT_FIELDS = (
    "n_ues", "n_bs_antennas", "n_ue_antennas", "n_bs_rf", "n_ue_rf",
    "rf_per_stream_bs", "rf_per_stream_ue", "n_time_slots", "n_freq_subch",
    "n_cbs_freq", "pf_window", "n_mbs", "n_clusters", "n_paths_per_cluster",
    "fw_max_iters", "max_beam_sets", "max_ue_tuples",
)
_POSITIVE_FIELDS = (
    "tx_power", "carrier_freq", "bandwidth", "noise_psd", "coherence_time",
    "coherence_bw", "prb_time", "prb_bw", "cell_radius", "exclusion_radius",
    "pf_floor", "fw_rel_tol",
)


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Check every invariant; return the config unchanged if it passes."""
    for name in _COUNT_FIELDS:
        if getattr(cfg, name) < 1:
            raise ConfigError(name, f"must be >= 1, got {getattr(cfg, name)}")
    for name in _POSITIVE_FIELDS:
        if getattr(cfg, name) <= 0:
            raise ConfigError(name, f"must be > 0, got {getattr(cfg, name)}")
    if cfg.bs_codebook_bits < 0:
        raise ConfigError("bs_codebook_bits", "must be >= 0")
    if cfg.ue_codebook_bits < 0:
        raise ConfigError("ue_codebook_bits", "must be >= 0")
    if cfg.shadowing_std_db < 0:
        raise ConfigError("shadowing_std_db", "must be >= 0")
    if cfg.path_angle_spread_deg < 0:
        raise ConfigError("path_angle_spread_deg", "must be >= 0")
    if cfg.bs_height < 0:
        raise ConfigError("bs_height", "must be >= 0")

    if cfg.n_bs_rf % cfg.rf_per_stream_bs != 0:
        raise ConfigError(
            "n_bs_rf",
            f"K_b={cfg.n_bs_rf} not divisible by K'_b={cfg.rf_per_stream_bs}",
        )
    if cfg.n_ue_rf != cfg.rf_per_stream_ue:
        raise ConfigError(
            "n_ue_rf",
            f"single stream per UE requires K_u=K'_u, got {cfg.n_ue_rf}!={cfg.rf_per_stream_ue}",
        )
    if cfg.n_bs_antennas < cfg.rf_per_stream_bs:
        raise ConfigError("rf_per_stream_bs", "K'_b exceeds the BS antenna count")
    if cfg.n_ue_antennas < cfg.rf_per_stream_ue:
        raise ConfigError("rf_per_stream_ue", "K'_u exceeds the UE antenna count")

    if not math.isclose(cfg.coherence_time, cfg.n_time_slots * cfg.prb_time, rel_tol=1e-6):
        raise ConfigError(
            "coherence_time",
            f"T_c={cfg.coherence_time} != N_T*delta_T={cfg.n_time_slots * cfg.prb_time}",
        )
    if not math.isclose(cfg.coherence_bw, cfg.n_freq_subch * cfg.prb_bw, rel_tol=1e-6):
        raise ConfigError(
            "coherence_bw",
            f"B_c={cfg.coherence_bw} != N_F*delta_F={cfg.n_freq_subch * cfg.prb_bw}",
        )
    if cfg.exclusion_radius >= cfg.cell_radius:
        raise ConfigError(
            "exclusion_radius",
            f"{cfg.exclusion_radius} m must be smaller than cell_radius={cfg.cell_radius} m",
        )
    return cfg


@dataclass(frozen=True)
class FrameIndex:
    """Position of one PRB inside a realization (1-based, per frame layout)."""

    mb: int
    cb: int
    slot: int
    subch: int

    def validate(self, cfg: SystemConfig) -> "FrameIndex":
        if self.mb < 0:
            raise ConfigError("mb", "MB index must be >= 0")
        if not 1 <= self.cb <= cfg.n_cbs_freq:
            raise ConfigError("cb", f"CB index {self.cb} outside 1..{cfg.n_cbs_freq}")
        if not 1 <= self.slot <= cfg.n_time_slots:
            raise ConfigError("slot", f"slot {self.slot} outside 1..{cfg.n_time_slots}")
        if not 1 <= self.subch <= cfg.n_freq_subch:
            raise ConfigError("subch", f"subchannel {self.subch} outside 1..{cfg.n_freq_subch}")
        return self


# --- file parsing ---------------------------------------------------------

# File keys that are stored in dB and converted on load.
_DB_KEYS = {
    "tx_power_dbm": ("tx_power", dbm_to_watts),
    "noise_psd_dbm_hz": ("noise_psd", dbm_to_watts),
}

_FIELD_TYPES = {f.name: f.type for f in fields(SystemConfig)}


def _coerce(field: str, raw: str):
    is_int = _FIELD_TYPES[field] in (int, "int")
    try:
        value = float(raw)
    except ValueError as exc:
        raise ConfigError(field, f"cannot parse {raw!r}") from exc
    if is_int:
        if value != int(value):
            raise ConfigError(field, f"expected an integer, got {raw!r}")
        return int(value)
    return value


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines into a field dict (dB keys converted)."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(source, f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key in _DB_KEYS:
            field, conv = _DB_KEYS[key]
            values[field] = conv(float(raw))
        elif key in _FIELD_TYPES:
            values[key] = _coerce(key, raw)
        else:
            raise ConfigError(key, f"unknown configuration key (line {lineno} of {source})")
    return values


def apply_overrides(values: dict, overrides: dict) -> dict:
    """Merge CLI ``key=value`` overrides (strings) into a field dict."""
    merged = dict(values)
    for key, raw in overrides.items():
        if key in _DB_KEYS:
            field, conv = _DB_KEYS[key]
            merged[field] = conv(float(raw))
        elif key in _FIELD_TYPES:
            merged[key] = _coerce(key, str(raw))
        else:
            raise ConfigError(key, "unknown configuration key")
    return merged


def profile_path(name: str):
    if name not in PROFILES:
        raise ConfigError("profile", f"unknown profile {name!r}; choose from {PROFILES}")
    return _resource_files("mmwsched.data").joinpath(f"{name}.cfg")


def load_config(path: str | None = None, profile: str | None = None,
                overrides: dict | None = None) -> SystemConfig:
    """Load and validate a config.

    Resolution order: explicit ``path`` > ``$MMWSCHED_CONFIG`` > ``profile``
    (default ``table1``).  ``overrides`` are raw CLI strings applied last.
    """
    if path is None:
        path = os.environ.get(ENV_CONFIG_PATH) or None
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            values = parse_config_text(fh.read(), source=str(path))
    else:
        res = profile_path(profile or "table1")
        values = parse_config_text(res.read_text(encoding="utf-8"), source=str(res))
    if overrides:
        values = apply_overrides(values, overrides)
    return validate_config(SystemConfig(**values))


def with_overrides(cfg: SystemConfig, **changes) -> SystemConfig:
    """Validated copy of ``cfg`` with fields replaced."""
    return validate_config(replace(cfg, **changes))
