# =============================================================================
# RESULTS - CSV output of error series and energy spectra
# =============================================================================
"""
CSV artifacts written by the commands.

Error series::

    # <comment lines: configuration, flags, code version, run events>
    t,l2_abs,l2_rel,h1_rel,energy_residual
    0.0,0.7071067811865476,1.0,1.0,nan
    ...

Spectra use the header ``k,energy``. Floats are written with ``repr`` (the
shortest string that reads back to the same double), so a re-parse
reproduces the arrays exactly and identical inputs give identical bytes.
"""

from typing import Any, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from nles import logger
from nles.harness import ErrorSeries
from nles.spectral import EnergySpectrum


SERIES_HEADER = "t,l2_abs,l2_rel,h1_rel,energy_residual"
SPECTRUM_HEADER = "k,energy"


class ResultWriteError(OSError):
    """IO failure while writing or reading a result file; the message names the path."""

    def __init__(self, path: str, reason: str) -> None:
        self.path = path
        super().__init__(f"{path}: {reason}")


def _fmt(value: float) -> str:
    return repr(float(value))


def metadata_comments(metadata: Mapping[str, Any]) -> List[str]:
    """Flatten series metadata into ``key = value`` comment lines."""
    lines: List[str] = []
    for key, value in metadata.items():
        if key == "events":
            for event in value:
                lines.append(f"event = {event['message']}")
        elif isinstance(value, Mapping):
            for sub, item in value.items():
                lines.append(f"{key}.{sub} = {item}")
        else:
            lines.append(f"{key} = {value}")
    return lines


def _write_lines(path: str, lines: Iterable[str]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for line in lines:
                f.write(line)
                f.write("\n")
    except OSError as exc:
        raise ResultWriteError(path, exc.strerror or str(exc)) from exc


def write_series(series: ErrorSeries, path: str, comments: Optional[Sequence[str]] = None) -> None:
    """Write ``series`` as CSV; ``comments`` are echoed before the metadata."""
    lines = [f"# {c}" for c in comments or ()]
    lines += [f"# {c}" for c in metadata_comments(series.metadata)]
    lines.append(SERIES_HEADER)
    columns = (series.times, series.l2_abs, series.l2_rel, series.h1_rel, series.energy_residuals)
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    _write_lines(path, lines)
    logger.debug("results", f"wrote {len(series)} records to {path}")


def read_series(path: str) -> ErrorSeries:
    """Parse a CSV written by ``write_series``; comments land in ``metadata['comments']``."""
    comments: List[str] = []
    rows: List[List[float]] = []
    header_seen = False
    try:
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if line.startswith("#"):
                    comments.append(line[1:].strip())
                    continue
                if not line.strip():
                    continue
                if not header_seen:
                    if line.strip() != SERIES_HEADER:
                        raise ValueError(f"{path}: row {lineno}: expected header {SERIES_HEADER!r}")
                    header_seen = True
                    continue
                fields = line.split(",")
                if len(fields) != 5:
                    raise ValueError(f"{path}: row {lineno}: expected 5 columns, got {len(fields)}")
                try:
                    rows.append([float(x) for x in fields])
                except ValueError as exc:
                    raise ValueError(f"{path}: row {lineno}: {exc}") from exc
    except OSError as exc:
        raise ResultWriteError(path, exc.strerror or str(exc)) from exc
    if not header_seen:
        raise ValueError(f"{path}: missing header {SERIES_HEADER!r}")
    return ErrorSeries.from_records(rows, {"comments": comments})


def write_spectrum(spectrum: EnergySpectrum, path: str, comments: Optional[Sequence[str]] = None) -> None:
    lines = [f"# {c}" for c in comments or ()]
    lines.append(SPECTRUM_HEADER)
    for k, e in zip(np.asarray(spectrum.wavenumbers), np.asarray(spectrum.energy)):
        lines.append(f"{int(k)},{_fmt(e)}")
    _write_lines(path, lines)


def write_summary(path: str, header: str, rows: Sequence[Sequence[float]], comments: Optional[Sequence[str]] = None) -> None:
    """Generic numeric CSV (sweep summaries)."""
    lines = [f"# {c}" for c in comments or ()]
    lines.append(header)
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _write_lines(path, lines)
