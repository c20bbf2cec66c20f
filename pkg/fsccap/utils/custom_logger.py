"""
Custom logger with color formatter.

inspired by:
https://gist.github.com/joshbode/58fac7ababc700f51e2a9ecdebe563ad
"""

import logging
import sys

from colorama import Back, Fore, Style

LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


class ColoredFormatter(logging.Formatter):
    """Colored log formatter."""

    def __init__(self, *args, colors=None, **kwargs):
        """Initialize the formatter with specified format strings."""
        super().__init__(*args, **kwargs)
        self.colors = colors if colors else {}

    def format(self, record):
        """Format the specified record as text."""
        record.color = self.colors.get(record.levelname, "")
        record.reset = Style.RESET_ALL
        record.default_color = Fore.WHITE
        return super().format(record)


def get_formatter():
    """Return the colored formatter used by the package."""
    return ColoredFormatter(
        "{default_color} {asctime} {reset}|{default_color} {name} {reset}|"
        "{color} {levelname:8} {reset}|{color} {message} {reset}",
        style="{",
        datefmt="%Y-%m-%d %H:%M:%S",
        colors={
            "DEBUG": Fore.CYAN,
            "INFO": Fore.GREEN,
            "WARNING": Fore.YELLOW,
            "ERROR": Fore.RED,
            "CRITICAL": Fore.RED + Back.WHITE + Style.BRIGHT,
        },
    )


def setup_logging(name="fsccap"):
    """
    Set up the logging.

    Parameters
    ----------
    name : str
        the name of the logger, usually `__name__` of the calling module

    Returns
    -------
    logger : logging.Logger
        The logger

    """
    root_logger = logging.getLogger()
    if not any(getattr(h, "_fsccap", False) for h in root_logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(get_formatter())
        handler._fsccap = True
        root_logger.handlers.clear()
        root_logger.addHandler(handler)
        root_logger.setLevel(logging.WARNING)

    package_logger = logging.getLogger(name)
    package_logger.setLevel(logging.INFO)

    return package_logger


def set_log_level(new_level, module_prefix="fsccap"):
    """
    Set the log level.

    Parameters
    ----------
    new_level : str
        the new log level
    module_prefix : str
        the module logger prefix to set the log level for

    """
    if new_level not in LEVELS:
        raise ValueError(f"Log level must be one of {LEVELS}")
    for logger_name, logger in logging.Logger.manager.loggerDict.items():
        if logger_name.startswith(module_prefix) and isinstance(
            logger, logging.Logger
        ):
            logger.setLevel(new_level)


def get_log_level(module_prefix="fsccap"):
    """
    Get the log level.

    Parameters
    ----------
    module_prefix : str
        the module logger prefix to get the log level for

    Returns
    -------
    str
        the log level

    """
    log_level = None
    for logger_name, logger in logging.Logger.manager.loggerDict.items():
        if logger_name.startswith(module_prefix) and isinstance(
            logger, logging.Logger
        ):
            log_level = logging.getLevelName(logger.getEffectiveLevel())
            break
    return log_level
