import logging
import sys

from tqdm import tqdm

from configs import settings

ROOT_LOGGER = "distwit"
_configured = False


def configure_logging(level: str | None = None):
    """Called once by the CLI entry point; library code only asks for loggers."""
    global _configured
    level_name = (level or settings.LOG_LEVEL).upper()
    root = logging.getLogger(ROOT_LOGGER)
    root.setLevel(getattr(logging, level_name, logging.INFO))
    if not _configured:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(asctime)s [%(name)s] %(message)s", "%H:%M:%S"))
        root.addHandler(handler)
        root.propagate = False
        _configured = True
    return root


def get_logger(module: str) -> logging.Logger:
    return logging.getLogger(f"{ROOT_LOGGER}.{module}")


def progress(iterable, desc: str, total: int | None = None):
    """tqdm bar that stays quiet below INFO or when stderr is not a terminal."""
    quiet = logging.getLogger(ROOT_LOGGER).getEffectiveLevel() > logging.INFO or not sys.stderr.isatty()
    return tqdm(iterable, desc=desc, total=total, disable=quiet, leave=False)
