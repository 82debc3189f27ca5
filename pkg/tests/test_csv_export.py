import csv
import os
import stat

import pytest

from onesided.core.error_handler import DomainError, PointFlag
from onesided.core.model import ChannelParams
from onesided.core.decoy import IntensitySet, observe
from onesided.core.keyrate import KeyRatePoint, RateMode
from onesided.utils.csv_export import (
    KEY_RATE_HEADER,
    atomic_write,
    key_rate_rows,
    read_pair_statistics_csv,
    write_key_rate_csv,
    write_pair_statistics_csv,
)


def _point(distance, rate, flags=()):
    return KeyRatePoint(distance_km=distance, mu=0.45, nu=0.45, eta_s=0.95, mode=RateMode.TWO_DECOY,
                        rate=rate, signed_rate=rate, flags=frozenset(flags))


def test_key_rate_rows_format():
    rows = key_rate_rows([_point(0.0, 1.0 / 3.0), _point(12.5, 0.0, {PointFlag.FLOORED, PointFlag.CLAMPED})])
    assert rows[0] == ["0.0", "0.95", "two-decoy", "0.45", "0.45", "0.33333333333333331", ""]
    assert rows[1][0] == "12.5"
    assert rows[1][5] == "0"
    assert rows[1][6] == "clamped|floored"


def test_write_key_rate_csv(tmp_path):
    path = write_key_rate_csv([_point(0.0, 2.5e-4), _point(1.0, 1e-20)], tmp_path / "rates.csv")
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == KEY_RATE_HEADER
    assert float(rows[1][5]) == 2.5e-4
    assert float(rows[2][5]) == 1e-20
    assert path.read_bytes().count(b"\r") == 0


def test_failed_write_leaves_nothing_behind(tmp_path):
    target = tmp_path / "rates.csv"
    with pytest.raises(RuntimeError):
        with atomic_write(target) as handle:
            handle.write("partial")
            raise RuntimeError("interrupted")
    assert list(tmp_path.iterdir()) == []


@pytest.mark.skipif(os.name != "posix", reason="permission bits are POSIX only")
def test_written_file_follows_the_umask(tmp_path):
    previous = os.umask(0o022)
    try:
        path = write_key_rate_csv([_point(0.0, 0.1)], tmp_path / "rates.csv")
    finally:
        os.umask(previous)
    assert stat.S_IMODE(path.stat().st_mode) == 0o644


def test_existing_file_is_replaced(tmp_path):
    target = tmp_path / "rates.csv"
    target.write_text("old\n")
    write_key_rate_csv([_point(0.0, 0.1)], target)
    assert target.read_text().startswith("distance_km,eta_s,mode,mu,nu,rate,flags\n")


def test_pair_statistics_survive_a_file(tmp_path):
    stats = observe(ChannelParams(), 35.0, IntensitySet(mu1=0.01, mu2=0.45))
    path = write_pair_statistics_csv(stats, tmp_path / "pairs.csv")
    assert read_pair_statistics_csv(path) == stats


def test_pair_statistics_reader_rejects_bad_files(tmp_path):
    bad_header = tmp_path / "header.csv"
    bad_header.write_text("basis,i,j,gain\n")
    with pytest.raises(DomainError):
        read_pair_statistics_csv(bad_header)

    bad_row = tmp_path / "row.csv"
    bad_row.write_text("basis,i,j,gain,qber\nYY,0,0,0.1,0.2\n")
    with pytest.raises(DomainError):
        read_pair_statistics_csv(bad_row)

    out_of_range = tmp_path / "index.csv"
    out_of_range.write_text("basis,i,j,gain,qber\nZZ,3,0,0.1,0.2\n")
    with pytest.raises(DomainError):
        read_pair_statistics_csv(out_of_range)

    incomplete = tmp_path / "incomplete.csv"
    incomplete.write_text("basis,i,j,gain,qber\nZZ,0,0,0.1,0.2\n")
    with pytest.raises(DomainError):
        read_pair_statistics_csv(incomplete)
