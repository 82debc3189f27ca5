"""
CSV schemas for key-rate sweeps and pair statistics tables.

Files are written to a temporary sibling and renamed into place, so a failed
run never leaves a partial file behind.
"""

import csv
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, List, TextIO, Union

from ..core.error_handler import DomainError, join_flags
from ..core.model import BasisStatistics
from ..core.decoy import PAIR_INDICES, Basis, PairStatistics
from ..core.keyrate import KeyRatePoint


KEY_RATE_HEADER = ["distance_km", "eta_s", "mode", "mu", "nu", "rate", "flags"]
PAIR_STATISTICS_HEADER = ["basis", "i", "j", "gain", "qber"]


def _exact(value: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(value), ".17g")


def _short(value: float) -> str:
    return repr(float(value))


def _umask_mode() -> int:
    """Mode a plain open() would give a new file under the current umask."""
    mask = os.umask(0)
    os.umask(mask)
    return 0o666 & ~mask


@contextmanager
def atomic_write(path: Union[str, Path]) -> Iterator[TextIO]:
    """Open a temporary file next to `path`; rename it over `path` on success."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, temp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            yield handle
        os.chmod(temp_name, _umask_mode())
        os.replace(temp_name, path)
    except BaseException:
        try:
            os.unlink(temp_name)
        except FileNotFoundError:
            pass
        raise


def key_rate_rows(points: Iterable[KeyRatePoint]) -> List[List[str]]:
    return [
        [_short(p.distance_km), _short(p.eta_s), p.mode.value, _short(p.mu), _short(p.nu),
         _exact(p.rate), join_flags(p.flags)]
        for p in points
    ]


def write_key_rate_csv(points: Iterable[KeyRatePoint], path: Union[str, Path]) -> Path:
    """Write one row per point with the rate at 17 significant digits."""
    path = Path(path)
    with atomic_write(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(KEY_RATE_HEADER)
        writer.writerows(key_rate_rows(points))
    return path


def write_pair_statistics_csv(stats: PairStatistics, path: Union[str, Path]) -> Path:
    path = Path(path)
    with atomic_write(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(PAIR_STATISTICS_HEADER)
        for (basis, i, j), entry in stats:
            writer.writerow([basis.value, i, j, _exact(entry.gain), _exact(entry.qber)])
    return path


def read_pair_statistics_csv(path: Union[str, Path]) -> PairStatistics:
    """
    Read a table written by write_pair_statistics_csv.

    Raises:
        DomainError: on a wrong header, malformed rows or an incomplete table
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != PAIR_STATISTICS_HEADER:
            raise DomainError(f"{path}: expected header {PAIR_STATISTICS_HEADER}, got {header}")

        table = {}
        for row_number, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                basis, i, j, gain, qber = row
                key = (Basis(basis), int(i), int(j))
                entry = BasisStatistics(gain=float(gain), qber=float(qber), empty=float(gain) == 0.0)
            except ValueError as e:
                raise DomainError(f"{path}, row {row_number}: {e}") from None
            if key[1:] not in PAIR_INDICES:
                raise DomainError(f"{path}, row {row_number}: intensity index out of range")
            table[key] = entry
    return PairStatistics(table=table)
