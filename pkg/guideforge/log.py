"""Logging setup shared by the CLI and the pipeline runner."""

import logging

from rich.console import Console
from rich.logging import RichHandler

LEVELS = {
    "quiet": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def setup_logging(verbosity: str = "info", console: Console | None = None) -> logging.Logger:
    """
    Attach a RichHandler to the package logger.

    Args:
        verbosity: one of "quiet", "info", "debug"
        console: console to write to (defaults to stderr)

    Returns:
        The configured ``guideforge`` logger
    """
    logger = logging.getLogger("guideforge")
    logger.setLevel(LEVELS.get(verbosity, logging.INFO))
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(
        console=console or Console(stderr=True),
        show_path=False,
        rich_tracebacks=False,
    )
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.propagate = False
    return logger
