"""
Progress reporting for sweeps and Monte Carlo runs.
"""

import sys
import time
from typing import Callable, List
from dataclasses import dataclass
from enum import Enum


class ProgressType(Enum):
    """Types of progress reporting."""
    SILENT = "silent"
    SIMPLE = "simple"
    DETAILED = "detailed"
    VERBOSE = "verbose"


@dataclass
class ProgressState:
    """Current state of progress."""
    label: str = ""
    items_processed: int = 0
    total_items: int = 0
    start_time: float = 0.0
    last_update_time: float = 0.0


class ProgressReporter:
    """Reports progress of long computations on stderr, keeping stdout clean for results."""

    def __init__(self, progress_type: ProgressType = ProgressType.SIMPLE,
                 update_interval: float = 0.5, show_eta: bool = True, stream=None):
        self.progress_type = progress_type
        self.update_interval = update_interval
        self.show_eta = show_eta
        self.stream = stream or sys.stderr
        self.state = ProgressState()
        self.callbacks: List[Callable] = []

        self.state.start_time = time.time()
        self.state.last_update_time = self.state.start_time

    def start(self, label: str, total: int = 0):
        """Start a new operation of `total` items."""
        self.state = ProgressState(label=label, total_items=total)
        self.state.start_time = time.time()
        self.state.last_update_time = self.state.start_time

        if self.progress_type != ProgressType.SILENT:
            print(f"Starting {label}" + (f" ({total} items)" if total else ""), file=self.stream)

    def update_progress(self, items_processed: int):
        """Update progress state and display if needed."""
        self.state.items_processed = items_processed

        current_time = time.time()
        if (current_time - self.state.last_update_time) >= self.update_interval:
            self._display_progress()
            self.state.last_update_time = current_time

    def _display_progress(self):
        if self.progress_type == ProgressType.SILENT:
            return

        elapsed_time = time.time() - self.state.start_time

        if self.progress_type == ProgressType.SIMPLE:
            self._display_simple_progress(elapsed_time)
        elif self.progress_type == ProgressType.DETAILED:
            self._display_detailed_progress(elapsed_time)
        elif self.progress_type == ProgressType.VERBOSE:
            self._display_verbose_progress(elapsed_time)

    def _display_simple_progress(self, elapsed_time: float):
        """Display simple progress bar."""
        total = self.state.total_items
        done = self.state.items_processed

        if total > 0:
            percentage = (done / total) * 100
            bar_length = 30
            filled_length = int(bar_length * done // total)
            bar = '█' * filled_length + '-' * (bar_length - filled_length)

            eta_str = ""
            if self.show_eta and done > 0:
                eta_str = f" | ETA: {self._calculate_eta(done, total, elapsed_time)}"

            print(f"\rProgress: [{bar}] {percentage:.1f}% ({done}/{total}){eta_str}",
                  end="", flush=True, file=self.stream)

    def _display_detailed_progress(self, elapsed_time: float):
        print(f"\r{self.state.label}: {self.state.items_processed}/{self.state.total_items} | "
              f"Time: {elapsed_time:.1f}s", end="", flush=True, file=self.stream)

    def _display_verbose_progress(self, elapsed_time: float):
        rate = self.state.items_processed / elapsed_time if elapsed_time > 0 else 0.0
        print(f"\r[{elapsed_time:.1f}s] {self.state.label}: {self.state.items_processed}"
              f"/{self.state.total_items} ({rate:.1f} items/s)", end="", flush=True, file=self.stream)

    def _calculate_eta(self, processed: int, total: int, elapsed: float) -> str:
        """Calculate estimated time remaining."""
        if processed == 0:
            return "∞"

        rate = processed / elapsed if elapsed > 0 else 0
        remaining = total - processed
        eta_seconds = remaining / rate if rate > 0 else 0

        if eta_seconds < 60:
            return f"{eta_seconds:.0f}s"
        elif eta_seconds < 3600:
            return f"{eta_seconds/60:.0f}m"
        else:
            return f"{eta_seconds/3600:.1f}h"

    def finish(self):
        """Finish the operation and display the elapsed time."""
        total_time = time.time() - self.state.start_time

        if self.progress_type != ProgressType.SILENT:
            print(file=self.stream)
            print(f"{self.state.label} completed in {total_time:.2f} seconds "
                  f"({self.state.items_processed} items)", file=self.stream)

        for callback in self.callbacks:
            try:
                callback(self.state.items_processed, total_time)
            except Exception:
                pass  # callbacks never break the run

    def add_callback(self, callback: Callable):
        """Add a callback to be called when an operation finishes."""
        self.callbacks.append(callback)
