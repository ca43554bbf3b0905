"""
Base class for RadChar management commands.

Translates application exceptions into ``CommandError`` with the exit code
of the exception class, loads ``--config`` YAML files, and renders rich
tables into the command's stdout.
"""

import io
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import yaml
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from rich.console import Console

from .exceptions import ConfigurationException, ErrorDetail, ExitCode, RadCharException

logger = logging.getLogger(__name__)

USER_ERROR_CODES = {ExitCode.USAGE, ExitCode.IO, ExitCode.FORMAT, ExitCode.MISMATCH}


def load_config_file(path: Path) -> Dict[str, Any]:
    """
    Read a YAML mapping of option names to values.

    Hyphenated keys are accepted and normalised to underscores.
    """
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = yaml.safe_load(handle)
        except yaml.YAMLError as exc:
            raise ConfigurationException(f"Config file {path} is not valid YAML: {exc}")

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationException(f"Config file {path} must contain a mapping")

    return {str(key).replace("-", "_"): value for key, value in data.items()}


class RadCharCommand(BaseCommand):
    """
    Management command with consistent error handling.

    Subclasses call ``super().add_arguments(parser)`` and read their options
    through ``self.option()``, which applies the precedence
    explicit flag, then config file, then default.
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.file_config: Dict[str, Any] = {}
        self.options: Dict[str, Any] = {}

    def add_arguments(self, parser):
        parser.add_argument(
            "--config",
            type=Path,
            help="YAML file whose keys override the defaults of the other flags",
        )

    def execute(self, *args, **options):
        try:
            self.options = options
            self.file_config = self.read_config(options)
            return super().execute(*args, **options)
        except RadCharException as exc:
            self.log_exception(exc)
            raise CommandError(exc.describe(), returncode=int(exc.exit_code)) from exc
        except OSError as exc:
            logger.warning("I/O failure: %s", exc)
            raise CommandError(f"[io_error] {exc}", returncode=int(ExitCode.IO)) from exc

    def read_config(self, options: Dict[str, Any]) -> Dict[str, Any]:
        path = options.get("config")
        if not path:
            return {}

        config = load_config_file(self.resolve_path(path))
        unknown = sorted(key for key in config if key not in options or key == "config")
        if unknown:
            raise ConfigurationException(
                "Config file contains unknown keys",
                details=[
                    ErrorDetail(message="unknown option", code="unknown_key", field=key)
                    for key in unknown
                ],
            )
        return config

    def option(self, name: str, default: Any = None, cast: Optional[Callable[[Any], Any]] = None) -> Any:
        """
        Return an option value: explicit flag, then config file, then ``default``.

        ``cast`` converts the value found (YAML reads ``5e-4`` as a string).
        """
        value = self.options.get(name)
        if value is None or value is False:
            if name in self.file_config and self.file_config[name] is not None:
                value = self.file_config[name]
            elif value is None:
                value = default
        if cast is None or value is None:
            return value
        try:
            return cast(value)
        except (TypeError, ValueError):
            raise ConfigurationException(
                f"Option {name} has an invalid value {value!r}",
                details=[ErrorDetail(message=f"expected {cast.__name__}", code="invalid_type", field=name)],
            ) from None

    def log_exception(self, exc: RadCharException) -> None:
        level = logging.WARNING if exc.exit_code in USER_ERROR_CODES else logging.ERROR
        logger.log(level, "%s failed: %s", self.__class__.__module__.rsplit(".", 1)[-1], exc.describe())

    @staticmethod
    def resolve_path(path, create_parent: bool = False) -> Path:
        """Resolve bare file names against ``RADCHAR_DATA_DIR``."""
        path = Path(path)
        if not path.is_absolute() and path.parent == Path("."):
            path = Path(settings.RADCHAR_DATA_DIR) / path
        if create_parent:
            path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def render(self, *renderables) -> None:
        """Render rich objects into ``self.stdout``."""
        buffer = io.StringIO()
        console = Console(file=buffer, width=110, color_system=None, force_terminal=False)
        for renderable in renderables:
            console.print(renderable)
        self.stdout.write(buffer.getvalue(), ending="")

    @property
    def show_progress(self) -> bool:
        return bool(settings.RADCHAR_PROGRESS) and self.options.get("verbosity", 1) > 0
