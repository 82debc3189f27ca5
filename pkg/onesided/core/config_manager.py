"""
Configuration management for onesided runs.

The primary format is flat `key = value` text with `#` comments and
comma-separated lists. YAML and JSON files holding the same flat keys are
accepted too.
"""

import json
import math
import yaml
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from .error_handler import (
    ConfigParseError,
    ConfigValidationError,
    ErrorHandler,
    ErrorSeverity,
)
from .model import ChannelParams
from .keyrate import RateMode
from .optimizer import SweepGrid


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one run (defaults: the reference fiber setup)."""
    eta_d: float = 0.40
    e_d: float = 0.015
    p_d: float = 3e-6
    f: float = 1.16
    alpha: float = 0.2
    mu_signal: Tuple[float, ...] = (0.45, 0.3, 0.1, 0.05)
    mu_decoy: float = 0.01
    eta_s_list: Tuple[float, ...] = (1.0, 0.95, 0.9, 0.85)
    mode: RateMode = RateMode.ASYMPTOTIC
    l_min: float = 0.0
    l_max: float = 200.0
    l_step: float = 1.0
    mc_trials: int = 10_000_000
    mc_seed: int = 20180116
    out: str = "keyrate.csv"

    @property
    def channel(self) -> ChannelParams:
        return ChannelParams(eta_d=self.eta_d, e_d=self.e_d, p_d=self.p_d,
                             f=self.f, alpha=self.alpha)

    @property
    def signal_by_eta_s(self) -> Dict[float, float]:
        """Signal intensity for each trust level, in eta_s_list order."""
        return dict(zip(self.eta_s_list, self.mu_signal))

    def grid(self) -> SweepGrid:
        return SweepGrid.from_range(self.l_min, self.l_max, self.l_step,
                                    eta_s_values=self.eta_s_list, mode=self.mode)

    def to_dict(self) -> Dict[str, Any]:
        result = {field.name: getattr(self, field.name) for field in fields(self)}
        result["mu_signal"] = list(self.mu_signal)
        result["eta_s_list"] = list(self.eta_s_list)
        result["mode"] = self.mode.value
        return result


CONFIG_KEYS = tuple(field.name for field in fields(RunConfig))
FLOAT_KEYS = ("eta_d", "e_d", "p_d", "f", "alpha", "mu_decoy", "l_min", "l_max", "l_step")
LIST_KEYS = ("mu_signal", "eta_s_list")
INT_KEYS = ("mc_trials", "mc_seed")


def _format_value(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, RateMode):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _to_float(key: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigValidationError(key, f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigValidationError(key, f"must be finite, got {text!r}")
    return value


def _to_int(key: str, text: str) -> int:
    value = _to_float(key, text)
    if value != int(value):
        raise ConfigValidationError(key, f"expected an integer, got {text!r}")
    return int(value)


def _coerce(key: str, text: str) -> Any:
    """Convert the raw text of one key into its typed value."""
    if key in FLOAT_KEYS:
        return _to_float(key, text)
    if key in INT_KEYS:
        return _to_int(key, text)
    if key in LIST_KEYS:
        items = [item.strip() for item in text.split(",")]
        if not items or any(not item for item in items):
            raise ConfigValidationError(key, f"expected a comma-separated list, got {text!r}")
        return tuple(_to_float(key, item) for item in items)
    if key == "mode":
        try:
            return RateMode(text.strip())
        except ValueError:
            choices = ", ".join(m.value for m in RateMode)
            raise ConfigValidationError(key, f"expected one of {choices}, got {text!r}") from None
    if key == "out":
        if not text.strip():
            raise ConfigValidationError(key, "output path must not be empty")
        return text.strip()
    raise ConfigValidationError(key, "unknown configuration key")


def _in_unit_interval(value: float) -> bool:
    return 0.0 <= value <= 1.0


def validate_config(values: Mapping[str, Any]) -> RunConfig:
    """
    Build a RunConfig from typed values; unset keys take their defaults.

    Raises:
        ConfigValidationError: naming the first offending key
    """
    for key in values:
        if key not in CONFIG_KEYS:
            raise ConfigValidationError(key, "unknown configuration key")

    merged = {**RunConfig().to_dict(), **values}
    merged["mode"] = RateMode(merged["mode"])
    merged["mu_signal"] = tuple(float(v) for v in merged["mu_signal"])
    merged["eta_s_list"] = tuple(float(v) for v in merged["eta_s_list"])

    for key in ("eta_d", "e_d", "p_d"):
        if not _in_unit_interval(merged[key]):
            raise ConfigValidationError(key, f"probability out of range [0, 1]: {merged[key]!r}")
    if merged["f"] < 1.0:
        raise ConfigValidationError("f", f"must be >= 1, got {merged['f']!r}")
    if merged["alpha"] <= 0.0:
        raise ConfigValidationError("alpha", f"must be > 0, got {merged['alpha']!r}")
    if merged["mu_decoy"] <= 0.0:
        raise ConfigValidationError("mu_decoy", f"must be > 0, got {merged['mu_decoy']!r}")

    eta_s_list = merged["eta_s_list"]
    if not all(_in_unit_interval(v) for v in eta_s_list):
        raise ConfigValidationError("eta_s_list", f"values must lie in [0, 1]: {eta_s_list}")
    if len(set(eta_s_list)) != len(eta_s_list):
        raise ConfigValidationError("eta_s_list", f"duplicate trust levels: {eta_s_list}")

    mu_signal = merged["mu_signal"]
    if len(mu_signal) == 1:
        mu_signal = mu_signal * len(eta_s_list)
    if len(mu_signal) != len(eta_s_list):
        raise ConfigValidationError(
            "mu_signal", f"{len(mu_signal)} intensities for {len(eta_s_list)} trust levels"
        )
    if not all(0.0 < mu <= 2.0 for mu in mu_signal):
        raise ConfigValidationError("mu_signal", f"intensities must lie in (0, 2]: {mu_signal}")
    if merged["mode"] is RateMode.TWO_DECOY and not all(mu > merged["mu_decoy"] for mu in mu_signal):
        raise ConfigValidationError("mu_signal", "signal intensities must exceed mu_decoy")
    merged["mu_signal"] = mu_signal

    if merged["l_min"] < 0.0:
        raise ConfigValidationError("l_min", f"must be >= 0, got {merged['l_min']!r}")
    if merged["l_max"] < merged["l_min"]:
        raise ConfigValidationError("l_max", "must be >= l_min")
    if merged["l_step"] <= 0.0:
        raise ConfigValidationError("l_step", f"must be > 0, got {merged['l_step']!r}")
    if merged["mc_trials"] < 1:
        raise ConfigValidationError("mc_trials", f"must be >= 1, got {merged['mc_trials']!r}")
    if merged["mc_seed"] < 0:
        raise ConfigValidationError("mc_seed", f"must be >= 0, got {merged['mc_seed']!r}")

    return RunConfig(**merged)


def parse_config(text: str) -> RunConfig:
    """
    Parse flat `key = value` text.

    Raises:
        ConfigParseError: malformed line, with its line number
        ConfigValidationError: unknown key or invalid value
    """
    values: Dict[str, Any] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got {raw.strip()!r}", line_number)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigParseError("missing key before '='", line_number)
        if key in values:
            raise ConfigParseError(f"duplicate key {key!r}", line_number)
        if key not in CONFIG_KEYS:
            raise ConfigValidationError(key, "unknown configuration key")
        values[key] = _coerce(key, value)
    return validate_config(values)


def serialize_config(config: RunConfig) -> str:
    """Flat `key = value` text that parses back to an equal RunConfig."""
    lines = ["# onesided run configuration"]
    for key, value in config.to_dict().items():
        lines.append(f"{key} = {_format_value(value)}")
    return "\n".join(lines) + "\n"


class ConfigManager:
    """Loads, validates and writes run configurations."""

    def __init__(self, error_handler: Optional[ErrorHandler] = None):
        self.error_handler = error_handler or ErrorHandler()
        self.default_config = RunConfig().to_dict()

    def load_config_file(self, config_file: Union[str, Path]) -> RunConfig:
        """
        Load a configuration from a .conf/.txt, .yaml/.yml or .json file.

        Raises:
            OSError: if the file cannot be read
            ConfigError: on malformed or invalid content
        """
        config_file = Path(config_file)
        try:
            text = self._decode(config_file.read_bytes())
            if config_file.suffix in (".yaml", ".yml"):
                return self._from_mapping(self._load_yaml(text))
            if config_file.suffix == ".json":
                return self._from_mapping(self._load_json(text))
            return parse_config(text)
        except Exception as e:
            self.error_handler.handle_error(e, {"path": str(config_file)}, ErrorSeverity.ERROR)
            raise

    @staticmethod
    def _decode(raw: bytes) -> str:
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as e:
            line = e.object[:e.start].count(b"\n") + 1
            raise ConfigParseError(f"invalid UTF-8 byte 0x{e.object[e.start]:02x}", line) from None

    def _load_yaml(self, text: str) -> Any:
        try:
            return yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise ConfigParseError(str(e), mark.line + 1 if mark else 1) from None

    def _load_json(self, text: str) -> Any:
        try:
            return json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as e:
            raise ConfigParseError(e.msg, e.lineno) from None

    def _from_mapping(self, data: Any) -> RunConfig:
        if not isinstance(data, dict):
            raise ConfigParseError("top level must be a mapping of flat keys", 1)
        values = {}
        for key, value in data.items():
            key = str(key)
            if key not in CONFIG_KEYS:
                raise ConfigValidationError(key, "unknown configuration key")
            values[key] = _coerce(key, _format_value(value))
        return validate_config(values)

    def create_default_config(self, directory: Union[str, Path] = ".",
                              config_type: str = "conf") -> Path:
        """
        Write the default configuration into `directory`.

        Args:
            directory: target directory
            config_type: "conf", "yaml" or "json"

        Returns:
            Path to the created config file
        """
        directory = Path(directory).resolve()
        try:
            if config_type == "yaml":
                config_file = directory / "onesided.yaml"
                with open(config_file, "w", encoding="utf-8") as f:
                    yaml.safe_dump(self.default_config, f, default_flow_style=False, sort_keys=False)
            elif config_type == "json":
                config_file = directory / "onesided.json"
                with open(config_file, "w", encoding="utf-8") as f:
                    json.dump(self.default_config, f, indent=2)
            elif config_type == "conf":
                config_file = directory / "onesided.conf"
                config_file.write_text(serialize_config(RunConfig()), encoding="utf-8")
            else:
                raise ValueError(f"unknown config type {config_type!r}")
            return config_file
        except Exception as e:
            self.error_handler.handle_error(e, {"path": str(directory)}, ErrorSeverity.ERROR)
            raise
