"""Experiment configuration: INI-style file, profiles and ``--set`` overrides.

Example::

    [link]
    waveform = qam_fbmc
    M = 256
    filter = type1
    channel = eva
    equalizer = mmse

    [sweep]
    axis = ebn0_db
    points = 0, 2, 4, 6
    bits_per_point = 2000000

Keys may be given as ``section.key`` or, when unambiguous, as bare ``key``.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .channel import PDP_PRESETS, PHASE_NOISE_PRESETS
from .filterbank import PRESETS as FILTER_PRESETS
from .txrx import QAM_ORDERS

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "PROFILES",
    "SCHEMA",
    "load_config",
    "resolve_config",
    "parse_override",
]

WAVEFORMS = ("qam_fbmc", "cp_ofdm")
AXES = ("ebn0_db", "sigma_er2", "phase_noise")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class ExperimentConfig:
    # link
    waveform: str = "qam_fbmc"
    M: int = 256
    B: int = 2
    L: int = 4
    filter: str = "type1"
    cp_len: int | None = None
    modulation: int = 4
    coding: str = "none"
    equalizer: str = "mmse"
    channel: str = "awgn"
    channel_delays_ns: tuple[float, ...] = ()
    channel_powers_db: tuple[float, ...] = ()
    sample_rate: float | None = None
    # impairments
    phase_noise: str = "none"
    phase_noise_sigma2: float = 1e-6
    phase_noise_mode: str = "exact"
    cpe_correction: str = "genie"
    sigma_er2: float = 0.0
    ebn0_db: float = 10.0
    # sweep
    axis: str = "ebn0_db"
    points: tuple = (0.0, 2.0, 4.0, 6.0)
    bits_per_point: int = 2_000_000
    trials: int = 16
    symbols_per_frame: int = 32
    seed: int = 1
    # psd
    psd_active: int | None = None
    psd_symbols: int = 600
    psd_nperseg: int = 4096
    psd_overlap: float = 0.5
    psd_window: str = "hann"
    psd_offsets: tuple[float, ...] = (1.5,)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    def config_hash(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# section -> keys; the section names only organise the file
SCHEMA = {
    "link": ("waveform", "M", "B", "L", "filter", "cp_len", "modulation", "coding", "equalizer",
             "channel", "channel_delays_ns", "channel_powers_db", "sample_rate"),
    "impairments": ("phase_noise", "phase_noise_sigma2", "phase_noise_mode", "cpe_correction",
                    "sigma_er2", "ebn0_db"),
    "sweep": ("axis", "points", "bits_per_point", "trials", "symbols_per_frame", "seed"),
    "psd": ("psd_active", "psd_symbols", "psd_nperseg", "psd_overlap", "psd_window", "psd_offsets"),
}
_SECTION_OF = {k: s for s, keys in SCHEMA.items() for k in keys}
_KEY_CASE = {k.lower(): k for k in _SECTION_OF}

PROFILES = {
    "desk": {"M": 256, "bits_per_point": 2_000_000},
    "paper": {"M": 1000, "bits_per_point": 2_000_000},
}


def _field_types() -> dict:
    return {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _parse_list(text: str, conv, name: str) -> tuple:
    items = [t.strip() for t in text.replace(";", ",").split(",") if t.strip()]
    try:
        return tuple(conv(t) for t in items)
    except ValueError:
        raise ConfigError(name, f"cannot parse list {text!r}") from None


def _parse_value(name: str, text: str):
    text = text.strip()
    kind = _field_types()[name]
    try:
        if name == "points":
            return tuple(items for items in _parse_list(text, str, name))
        if kind.startswith("tuple"):
            return _parse_list(text, float, name)
        if kind.startswith("int | None"):
            return None if text.lower() in ("", "auto", "none") else int(text)
        if kind.startswith("float | None"):
            return None if text.lower() in ("", "auto", "none") else float(text)
        if kind == "int":
            return int(text.replace("_", ""))
        if kind == "float":
            return float(text)
        return text
    except ValueError:
        raise ConfigError(name, f"cannot parse {text!r} as {kind}") from None


def _canonical_key(raw: str) -> str:
    raw = raw.strip()
    section, _, key = raw.rpartition(".")
    name = _KEY_CASE.get(key.lower())
    if name is None:
        raise ConfigError(raw, f"unknown key; valid keys are {sorted(_SECTION_OF)}")
    if section and section.lower() != _SECTION_OF[name]:
        raise ConfigError(raw, f"key {name!r} belongs to section [{_SECTION_OF[name]}]")
    return name


def parse_override(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep:
        raise ConfigError(text, "override must look like key=value")
    return _canonical_key(key), value


def load_config(path) -> dict[str, str]:
    """Raw ``key -> text`` values from a config file (sections validated)."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigError("--config", f"{path}: {exc.message.splitlines()[0]}") from None
    raw = {}
    for section in parser.sections():
        if section.lower() not in SCHEMA:
            raise ConfigError(f"[{section}]", f"unknown section; expected one of {sorted(SCHEMA)}")
        for key, value in parser.items(section):
            raw[_canonical_key(f"{section.lower()}.{key}")] = value
    return raw


def resolve_config(path=None, overrides=(), profile: str | None = None, seed: int | None = None) -> ExperimentConfig:
    """Defaults, then profile, then file, then ``key=value`` overrides, then ``seed``."""
    values: dict = {}
    if profile is not None:
        if profile not in PROFILES:
            raise ConfigError("--profile", f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
        values.update(PROFILES[profile])
    if path is not None:
        values.update({k: _parse_value(k, v) for k, v in load_config(path).items()})
    for item in overrides:
        key, text = parse_override(item) if isinstance(item, str) else item
        values[key] = _parse_value(key, text)
    if seed is not None:
        values["seed"] = seed
    cfg = ExperimentConfig(**values)
    return _normalize(cfg)


def _normalize(cfg: ExperimentConfig) -> ExperimentConfig:
    def bad(name, msg):
        raise ConfigError(name, msg)

    if cfg.waveform not in WAVEFORMS:
        bad("waveform", f"must be one of {WAVEFORMS}, got {cfg.waveform!r}")
    for name in ("M", "B", "L", "trials", "symbols_per_frame", "psd_symbols", "psd_nperseg"):
        if getattr(cfg, name) < 1:
            bad(name, "must be a positive integer")
    if cfg.M % cfg.B:
        bad("B", f"M={cfg.M} is not divisible by B={cfg.B}")
    if cfg.waveform == "qam_fbmc":
        if cfg.filter not in FILTER_PRESETS and not Path(cfg.filter).is_file():
            bad("filter", f"neither a preset {FILTER_PRESETS} nor an existing coefficient file: {cfg.filter!r}")
        if cfg.symbols_per_frame < cfg.L:
            bad("symbols_per_frame", f"must be at least L={cfg.L}")
    if cfg.cp_len is not None and not 0 <= cfg.cp_len < cfg.M:
        bad("cp_len", f"must satisfy 0 <= cp_len < M, got {cfg.cp_len}")
    if cfg.modulation not in QAM_ORDERS:
        bad("modulation", f"must be one of {QAM_ORDERS}, got {cfg.modulation}")
    if cfg.coding not in ("none", "conv_r12"):
        bad("coding", f"must be 'none' or 'conv_r12', got {cfg.coding!r}")
    if cfg.equalizer not in ("zf", "mmse"):
        bad("equalizer", f"must be 'zf' or 'mmse', got {cfg.equalizer!r}")
    if cfg.channel not in PDP_PRESETS and cfg.channel != "custom":
        bad("channel", f"must be one of {sorted(PDP_PRESETS) + ['custom']}, got {cfg.channel!r}")
    if cfg.channel == "custom":
        if not cfg.channel_delays_ns or len(cfg.channel_delays_ns) != len(cfg.channel_powers_db):
            bad("channel_delays_ns", "custom channel needs equally long delay and power lists")
    if cfg.sample_rate is not None and not cfg.sample_rate > 0:
        bad("sample_rate", "must be positive")
    if cfg.phase_noise not in PHASE_NOISE_PRESETS and cfg.phase_noise != "none":
        bad("phase_noise", f"must be one of {sorted(PHASE_NOISE_PRESETS) + ['none']}")
    if cfg.phase_noise_sigma2 < 0:
        bad("phase_noise_sigma2", "must be >= 0")
    if cfg.phase_noise_mode not in ("exact", "linearized"):
        bad("phase_noise_mode", "must be 'exact' or 'linearized'")
    if cfg.cpe_correction not in ("genie", "none"):
        bad("cpe_correction", "must be 'genie' or 'none'")
    if cfg.sigma_er2 < 0:
        bad("sigma_er2", "must be >= 0")
    if cfg.axis not in AXES:
        bad("axis", f"must be one of {AXES}, got {cfg.axis!r}")
    if not cfg.points:
        bad("points", "sweep needs at least one point")
    points = tuple(cfg.points)
    if cfg.axis == "phase_noise":
        for p in points:
            if p not in PHASE_NOISE_PRESETS and p != "none":
                bad("points", f"phase-noise sweep point {p!r} is not a preset")
        points = tuple(str(p) for p in points)
    else:
        try:
            points = tuple(float(p) for p in points)
        except (TypeError, ValueError):
            bad("points", f"sweep points must be numbers for axis {cfg.axis}")
        if not all(math.isfinite(p) for p in points):
            bad("points", "sweep points must be finite")
        if cfg.axis == "sigma_er2" and any(p < 0 for p in points):
            bad("points", "sigma_er2 points must be >= 0")
    if cfg.bits_per_point < 10_000:
        bad("bits_per_point", f"must be >= 10000, got {cfg.bits_per_point}")
    if not 0 <= cfg.seed < 2**64:
        bad("seed", "must be an unsigned 64-bit integer")
    if cfg.psd_active is None:
        # 150 of 256, 600 of 1024
        cfg = cfg.replace(psd_active=max(1, round(cfg.M * 75 / 128)))
    if not 0 < cfg.psd_active <= cfg.M:
        bad("psd_active", f"must lie in [1, M={cfg.M}]")
    if not 0 <= cfg.psd_overlap < 1:
        bad("psd_overlap", "must lie in [0, 1)")
    if any(o <= 0 for o in cfg.psd_offsets):
        bad("psd_offsets", "offsets are subcarrier spacings beyond the band edge and must be > 0")
    return cfg.replace(points=points)
