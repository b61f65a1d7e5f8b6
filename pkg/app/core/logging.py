import logging
import sys
from typing import Optional

from app.core.config import get_settings

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_configured = False


class StderrHandler(logging.StreamHandler):
    """Writes to whatever ``sys.stderr`` is at emit time, so redirections made after setup still see the logs."""

    def __init__(self):
        super().__init__(sys.stderr)

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


def setup_logging(level: Optional[str] = None) -> None:
    """Configure the root logger once; later calls only adjust the level.

    Logs go to stderr so stdout stays free for the CLI summary.
    """
    global _configured
    level_name = (level or get_settings().log_level).upper()
    root = logging.getLogger()
    if not _configured:
        handler = StderrHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
        _configured = True
    root.setLevel(getattr(logging, level_name, logging.INFO))
