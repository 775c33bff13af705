# Runtime settings for the futon pattern runner

import logging
import os
from dataclasses import asdict, dataclass, fields, replace

from dotenv import dotenv_values, load_dotenv

from utils.errors import ConfigError


# Load variables from .env file
load_dotenv()

# Default pattern library root and trace directory
FUTON_LIBRARY = os.getenv("FUTON_LIBRARY", "library")
FUTON_TRACE_DIR = os.getenv("FUTON_TRACE_DIR", "traces")

# Optional engine config file (key=value lines)
FUTON_CONFIG = os.getenv("FUTON_CONFIG")

FUTON_LOG_LEVEL = os.getenv("FUTON_LOG_LEVEL", "WARNING")

# One pattern per file
PATTERN_FILE_EXTENSION = ".arg"

# Bumped whenever the event envelope or payload layout changes
TRACE_SCHEMA_VERSION = 1
ADAPTER_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class EngineConfig:
    """
    Tunable constants of the selection engine.

    Weights scale the additive terms of the expected free energy score;
    the tau_* / ewma_lambda / alpha / beta keys drive the policy precision
    update; min_samples is the exploratory trigger threshold.
    """

    w_prior: float = 1.0
    w_success: float = 1.0
    w_relevance: float = 1.0
    w_epistemic: float = 1.0
    tau_0: float = 1.0
    tau_min: float = 0.05
    tau_max: float = 5.0
    ewma_lambda: float = 0.2
    alpha: float = 1.0
    beta: float = 1.0
    min_samples: int = 5
    epsilon: float = 1e-9
    literal_tau_trigger: bool = False

    def __post_init__(self):
        if not 0 < self.tau_min <= self.tau_0 <= self.tau_max:
            raise ConfigError(
                f"tau bounds must satisfy 0 < tau_min <= tau_0 <= tau_max, got "
                f"{self.tau_min}, {self.tau_0}, {self.tau_max}"
            )

        if not 0 < self.ewma_lambda <= 1:
            raise ConfigError(f"ewma_lambda must lie in (0, 1], got {self.ewma_lambda}")

        if self.min_samples < 0:
            raise ConfigError(f"min_samples must be non-negative, got {self.min_samples}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "EngineConfig":
        """
        Build a config from loosely typed values (file text, CLI strings or JSON).

        :param values: mapping of config key to value
        :return: EngineConfig
        """
        return replace(cls(), **_coerce_engine_values(values))

    def with_overrides(self, values: dict) -> "EngineConfig":
        return replace(self, **_coerce_engine_values(values))


def _coerce_engine_values(values: dict) -> dict:
    """
    Convert raw config values to the declared field types.
    """

    field_types = {field.name: field.type for field in fields(EngineConfig)}
    coerced = {}

    for key, raw_value in values.items():
        if key not in field_types:
            raise ConfigError(f"Unknown engine config key: {key}")

        declared = field_types[key]

        try:
            if declared in (bool, "bool"):
                coerced[key] = parse_bool(raw_value)
            elif declared in (int, "int"):
                coerced[key] = int(raw_value)
            else:
                coerced[key] = float(raw_value)
        except (TypeError, ValueError) as error:
            raise ConfigError(f"Invalid value for {key}: {raw_value!r}") from error

    return coerced


def parse_bool(raw_value) -> bool:
    if isinstance(raw_value, bool):
        return raw_value

    text_value = str(raw_value).strip().lower()

    if text_value in ("1", "true", "yes", "on"):
        return True
    if text_value in ("0", "false", "no", "off"):
        return False

    raise ValueError(raw_value)


def read_config_file(config_path: str) -> dict:
    """
    Read a key=value config file.

    :param config_path: path to the file
    :return: dictionary of raw string values
    """

    if not os.path.isfile(config_path):
        raise ConfigError(f"Config file not found: {config_path}")

    return {key: value for key, value in dotenv_values(config_path).items() if value is not None}


def parse_assignments(assignments: list) -> dict:
    """
    Parse repeated `key=value` CLI overrides.
    """

    parsed = {}

    for assignment in assignments or []:
        key, separator, value = assignment.partition("=")

        if not separator or not key.strip():
            raise ConfigError(f"Expected key=value, got {assignment!r}")

        parsed[key.strip()] = value.strip()

    return parsed


def load_engine_config(config_path: str = None, overrides: dict = None) -> EngineConfig:
    """
    Resolve engine config: defaults < config file < CLI overrides.

    Keys in the file that belong to other consumers (the simulator) are
    ignored here; only engine keys are applied.
    """

    engine_keys = {field.name for field in fields(EngineConfig)}
    values = {}

    config_path = config_path or FUTON_CONFIG

    if config_path:
        file_values = read_config_file(config_path)
        values.update({key: value for key, value in file_values.items() if key in engine_keys})

    values.update(overrides or {})

    return EngineConfig.from_dict(values)


def configure_logging(level_name: str = None):
    """
    Configure the root logger once for CLI runs.
    """

    level_name = (level_name or FUTON_LOG_LEVEL).upper()
    level = logging.getLevelName(level_name)

    if not isinstance(level, int):
        raise ConfigError(f"Unknown log level: {level_name}")

    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
