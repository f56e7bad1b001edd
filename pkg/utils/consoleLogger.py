"""
Console Logger
==============
Tee every message to a stream and an in-memory buffer so a run's console
output can be saved as a transcript afterwards.
"""

import sys
from io import StringIO
from pathlib import Path
from typing import Optional, TextIO


class ConsoleLogger:
    """Tee every message to the output stream and an in-memory buffer."""

    def __init__(self, stream: Optional[TextIO] = None, error_stream: Optional[TextIO] = None):
        self._stream = stream
        self._error_stream = error_stream
        self._buf = StringIO()

    # Streams are resolved lazily so pytest's capsys replacement is honoured
    @property
    def stream(self) -> TextIO:
        return self._stream if self._stream is not None else sys.stdout

    @property
    def error_stream(self) -> TextIO:
        return self._error_stream if self._error_stream is not None else sys.stderr

    def log(self, msg: str = "") -> None:
        print(msg, file=self.stream)
        self._buf.write(msg + "\n")

    def error(self, msg: str = "") -> None:
        print(msg, file=self.error_stream)
        self._buf.write(msg + "\n")

    def flush_to(self, path: Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(self._buf.getvalue())
