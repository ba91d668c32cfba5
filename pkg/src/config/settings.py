"""Run-configuration loader."""
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

import yaml
from pydantic import ValidationError

from .schema import RunConfig
from src.utils.logger import get_logger

logger = get_logger(__name__)


class ConfigurationError(Exception):
    """Raised when configuration is invalid or missing."""
    pass


def load_yaml_config(config_path: Path) -> Dict[str, Any]:
    """
    Load a JSON or YAML configuration file.

    Args:
        config_path: Path to the configuration file

    Returns:
        Configuration dictionary

    Raises:
        ConfigurationError: If file not found or unparseable
    """
    if not config_path.exists():
        raise ConfigurationError(f"Configuration file not found: {config_path}")

    try:
        with open(config_path, "r") as f:
            config = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Invalid configuration syntax in {config_path}: {e}")
    if config is None:
        return {}
    if not isinstance(config, dict):
        raise ConfigurationError(f"Configuration root in {config_path} must be a mapping")
    return config


def parse_override(override: str) -> tuple:
    """
    Split ``key.sub=value`` into its key path and YAML-parsed value.

    Raises:
        ConfigurationError: If the override has no ``=`` or an empty key
    """
    if "=" not in override:
        raise ConfigurationError(f"Override '{override}' must have the form key=value")
    key, raw = override.split("=", 1)
    parts = [p for p in key.strip().split(".") if p]
    if not parts:
        raise ConfigurationError(f"Override '{override}' has an empty key")
    try:
        value = yaml.safe_load(raw) if raw.strip() else ""
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Cannot parse value of override '{override}': {e}")
    return parts, value


def apply_overrides(config: Dict[str, Any], overrides: Iterable[str]) -> Dict[str, Any]:
    """
    Apply ``--set`` style overrides to a raw configuration dictionary.

    Intermediate sections are created as needed; the input is not modified.
    """
    merged = _deep_copy(config)
    for override in overrides:
        parts, value = parse_override(override)
        node = merged
        for part in parts[:-1]:
            child = node.get(part)
            if child is None:
                child = {}
                node[part] = child
            elif not isinstance(child, dict):
                raise ConfigurationError(f"Override '{override}': '{part}' is not a section")
            node = child
        node[parts[-1]] = value
    return merged


def _deep_copy(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _deep_copy(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_deep_copy(v) for v in value]
    return value


def load_settings(
    config_path: Optional[Path] = None,
    overrides: Iterable[str] = (),
) -> RunConfig:
    """
    Load and validate a run configuration.

    Args:
        config_path: JSON/YAML file; None starts from the built-in defaults
        overrides: ``key.sub=value`` strings applied before validation

    Returns:
        Validated RunConfig

    Raises:
        ConfigurationError: If configuration is invalid
    """
    config_dict: Dict[str, Any] = {}
    if config_path is not None:
        logger.info(f"Loading configuration from {config_path}")
        config_dict = load_yaml_config(Path(config_path))

    config_dict = apply_overrides(config_dict, overrides)

    try:
        settings = RunConfig(**config_dict)
    except ValidationError as e:
        logger.error(f"Configuration validation failed: {e}")
        raise ConfigurationError(f"Invalid configuration: {e}")
    except TypeError as e:
        raise ConfigurationError(f"Invalid configuration: {e}")
    logger.debug("Configuration loaded and validated successfully")
    return settings


def require_dataset(settings: RunConfig) -> Path:
    """
    Check that the configured dataset directory holds a manifest.

    Raises:
        ConfigurationError: If the dataset is missing
    """
    dataset_dir = Path(settings.data.dataset_dir)
    if not (dataset_dir / "manifest.json").exists():
        raise ConfigurationError(
            f"Dataset not found: {dataset_dir / 'manifest.json'} (run `ammsm synth` first)"
        )
    return dataset_dir
