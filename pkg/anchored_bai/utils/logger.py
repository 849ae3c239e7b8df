import logging
import sys
from pathlib import Path
from typing import Optional

from anchored_bai.config.settings import get_settings

_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
_DATEFMT = '%Y-%m-%d %H:%M:%S'


def get_logger(name: str, level: Optional[str] = None) -> logging.Logger:
    """
    Get or create a logger with consistent configuration

    Args:
        name: Logger name (usually __name__ from calling module, or the
            package name to configure every module logger at once)
        level: Overrides Settings.log_level

    Returns:
        Configured logger instance
    """
    settings = get_settings()
    logger = logging.getLogger(name)
    resolved = (level or settings.log_level).upper()

    # Only configure if not already configured
    if not logger.handlers:
        formatter = logging.Formatter(_FORMAT, datefmt=_DATEFMT)

        # Console handler (stderr keeps stdout clean for JSON output)
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

        # File handler, only when a log file is configured
        if settings.log_file:
            log_path = Path(settings.log_file)
            log_path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_path)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

    logger.setLevel(resolved)
    for handler in logger.handlers:
        handler.setLevel(resolved)

    return logger
