"""
CSV export and report display for the command line.
"""

from .csv_export import read_pair_statistics_csv, write_key_rate_csv, write_pair_statistics_csv

__all__ = ["read_pair_statistics_csv", "write_key_rate_csv", "write_pair_statistics_csv"]
