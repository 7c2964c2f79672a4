"""Manage configuration settings for chafparse."""

import argparse
import dataclasses
import enum
import logging
import pathlib
import tomllib
from typing import Any, Optional


CONFIG_FILE_NAME = "chafparse.toml"

logger = logging.getLogger(__name__)


class ConfigError(Exception):
    """Errors when setting or accessing settings."""

    class ErrorType(enum.Enum):
        NOT_A_FILE = 1
        PATH_DOES_NOT_EXIST = 2
        BAD_VALUE = 3

    error_type: ErrorType

    def __init__(self, message: str, error_type: ErrorType) -> None:
        """Set error type."""
        super().__init__(message)
        self.error_type = error_type


@dataclasses.dataclass
class Settings:
    """Configuration data for chafparse.

    oracle_step_bound limits the breadth-first derivation searches of the
    brute-force oracle. max_parse_trees caps every all-trees enumeration, in
    the oracle and in the evaluator.
    """

    config_path: Optional[pathlib.Path] = None
    log_level: str = "WARNING"
    alias_suffix: str = "e"
    accept_suffix: str = "′"
    oracle_step_bound: int = 12
    oracle_max_len: int = 8
    max_parse_trees: int = 5000
    show_internal: bool = False
    stats_decimals: int = 4

    def update_from_args(self, args: argparse.Namespace) -> None:
        """Read settings from the config file named on the command line."""
        config_path = getattr(args, "config_path", None)
        if config_path is None:
            self.config_path = self._find_default_config()
        else:
            self.config_path = self._convert_path_to_absolute(config_path)
            if not self.config_path.exists():
                raise ConfigError(
                    f"Config file {self.config_path} does not exist.",
                    ConfigError.ErrorType.PATH_DOES_NOT_EXIST,
                )
            if not self.config_path.is_file():
                raise ConfigError(
                    f"{self.config_path} is not a file.",
                    ConfigError.ErrorType.NOT_A_FILE,
                )
        if self.config_path is not None:
            self._read_config_file()
        if getattr(args, "verbose", False):
            self.log_level = "DEBUG"

    @staticmethod
    def _convert_path_to_absolute(path: pathlib.Path | str) -> pathlib.Path:
        """Convert relative paths to absolute paths."""
        if isinstance(path, str):
            path = pathlib.Path(path)
        return path if path.is_absolute() else pathlib.Path.cwd() / path

    @staticmethod
    def _find_default_config() -> Optional[pathlib.Path]:
        """Look for a config file in the current working directory."""
        full_path = pathlib.Path.cwd() / CONFIG_FILE_NAME
        return full_path if full_path.is_file() else None

    def _read_config_file(self) -> None:
        """Read TOML configuration file."""
        if self.config_path is None:
            return
        app_settings = dataclasses.asdict(self)
        with open(self.config_path, "rb") as toml_file:
            file_settings = tomllib.load(toml_file)
        for setting_name, value in file_settings.items():
            if setting_name not in app_settings or setting_name == "config_path":
                logger.debug("Ignoring unknown setting %s", setting_name)
                continue
            if isinstance(value, str) and value.lower() in ["", "none", "null"]:
                continue
            setattr(self, setting_name, self._check_type(setting_name, value))

    def _check_type(self, setting_name: str, value: Any) -> Any:
        """Reject values whose type differs from the default's type."""
        default = getattr(Settings(), setting_name)
        if isinstance(default, bool) != isinstance(value, bool) or not isinstance(
            value, type(default)
        ):
            raise ConfigError(
                f"Setting {setting_name} must be of type {type(default).__name__},"
                f" got {value!r}.",
                ConfigError.ErrorType.BAD_VALUE,
            )
        if isinstance(value, int) and not isinstance(value, bool) and value < 0:
            raise ConfigError(
                f"Setting {setting_name} must not be negative.",
                ConfigError.ErrorType.BAD_VALUE,
            )
        return value

    def reset(self) -> None:
        """Restore default values."""
        for field in dataclasses.fields(self):
            setattr(self, field.name, field.default)


# Store settings in a module-level variable, which will be available from any
# other module that imports chafparse.config. This pattern is sometimes referred
# to as a Singleton pattern, because there is only a single instance of the
# Settings class.
settings = Settings()
