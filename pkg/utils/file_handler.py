# ============================================================================
# utils/file_handler.py - File Processing Utilities
# ============================================================================

import io
import os
import tempfile
import logging
from pathlib import Path
from typing import IO, Iterator, List, Sequence, Tuple, Union

import pandas as pd

logger = logging.getLogger(__name__)

TextSource = Union[str, bytes, IO]


class ParseError(ValueError):
    """Malformed input line; ``line_number`` is 1-based."""

    def __init__(self, message: str, line_number: int = None):
        self.line_number = line_number
        where = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{where}{message}")


def _as_text(source: TextSource) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    content = source.read()
    return content.decode("utf-8") if isinstance(content, bytes) else content


def iter_data_lines(source: TextSource) -> Iterator[Tuple[int, List[str]]]:
    """
    Yield ``(line_number, tokens)`` for every non-blank line;
    ``#`` starts a comment that runs to the end of the line
    """
    for number, raw in enumerate(io.StringIO(_as_text(source)), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line.split()


def read_text(path: Union[str, Path]) -> bytes:
    """Read a data file as bytes (parsers accept bytes or text)"""
    with open(path, "rb") as handle:
        return handle.read()


class ResultWriter:
    """
    Write CSV series with ``#``-prefixed provenance header lines.
    Output goes to a temporary file next to the target and is renamed
    into place, so a failed run never leaves a partial file behind.
    """

    def __init__(self, float_format: str = "%.12g"):
        self.float_format = float_format

    def render(self, header: Sequence[str], frame: pd.DataFrame) -> str:
        lines = [f"# {entry}" for entry in header]
        body = frame.to_csv(index=False, float_format=self.float_format, lineterminator="\n")
        return "\n".join(lines) + ("\n" if lines else "") + body

    def write(self, path: Union[str, Path], header: Sequence[str], frame: pd.DataFrame) -> Path:
        target = self.write_text(path, self.render(header, frame))
        logger.info(f"Wrote {len(frame)} rows to {target}")
        return target

    def write_text(self, path: Union[str, Path], text: str) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)

        fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            os.replace(tmp_name, target)
        except Exception as e:
            logger.error(f"Writing {target} failed: {str(e)}")
            if os.path.exists(tmp_name):
                os.remove(tmp_name)
            raise

        return target


def read_result_body(path: Union[str, Path]) -> str:
    """CSV body without header comment lines (used for determinism checks)"""
    with open(path, "r", encoding="utf-8") as handle:
        return "".join(line for line in handle if not line.startswith("#"))
