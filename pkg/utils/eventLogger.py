"""
Event Logger Utility
====================
Provides timing logs for spec evaluations and the queries inside them.

Usage:
    logger = EvaluationEventLogger(log_dir, spec_name)
    logger.log_evaluation_start()

    # For each query:
    query_logger = logger.start_query('born_rule')
    query_logger.log_event('query_started')
    query_logger.log_event('query_finished', '1.0')
    query_logger.save()

    logger.log_evaluation_end()
"""

import csv
import os
import threading
import time
from typing import Optional

CSV_HEADER = ['Event', 'Timestamp_ns', 'ms_since_last', 's_since_last']


def _write_rows(filepath: str, first_event: str, first_ns: int, events: list[tuple[str, int]]) -> None:
    with open(filepath, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        writer.writerow([first_event, first_ns, 0, 0.0])

        prev_ts = first_ns
        for event_desc, ts in events:
            delta_ns = ts - prev_ts
            writer.writerow([event_desc, ts, f'{delta_ns / 1_000_000:.3f}', f'{delta_ns / 1_000_000_000:.6f}'])
            prev_ts = ts


class QueryEventLogger:
    """Logger for a single query's events."""

    def __init__(self, query_name: str, log_dir: str, spec_name: str):
        self.query_name = query_name
        self.spec_name = spec_name
        self.events_folder = os.path.join(log_dir, f"events_{spec_name}")
        self.created_ns = time.perf_counter_ns()
        self.events: list[tuple[str, int]] = []

    def log_event(self, event_type: str, event_detail: str = "") -> None:
        """Log an event with the current perf_counter_ns timestamp."""
        timestamp_ns = time.perf_counter_ns()
        event_desc = f"{event_type}:{event_detail}" if event_detail else event_type
        self.events.append((event_desc, timestamp_ns))

    def save(self) -> str:
        """Save the query's event log to a CSV file and return its path."""
        os.makedirs(self.events_folder, exist_ok=True)
        filepath = os.path.join(self.events_folder, f'events_{self.query_name}.csv')
        _write_rows(filepath, 'query_created', self.created_ns, self.events)
        return filepath


class EvaluationEventLogger:
    """
    Event logger for one spec evaluation.

    Tracks evaluation-level timestamps and hands out per-query loggers.
    Query loggers may be created from worker threads.
    """

    def __init__(self, log_dir: str, spec_name: str):
        self.log_dir = log_dir
        self.spec_name = spec_name
        self.events_folder = os.path.join(log_dir, f"events_{spec_name}")
        self.evaluation_start_ns: Optional[int] = None
        self.evaluation_end_ns: Optional[int] = None
        self._query_loggers: list[QueryEventLogger] = []
        self._lock = threading.Lock()

    def log_evaluation_start(self) -> None:
        self.evaluation_start_ns = time.perf_counter_ns()

    def log_evaluation_end(self) -> None:
        """Log the evaluation end timestamp and save the timestamps file."""
        self.evaluation_end_ns = time.perf_counter_ns()
        self._save_evaluation_timestamps()

    def _save_evaluation_timestamps(self) -> None:
        os.makedirs(self.events_folder, exist_ok=True)
        filepath = os.path.join(self.events_folder, 'evaluation_timestamps.csv')
        start = self.evaluation_start_ns if self.evaluation_start_ns is not None else self.evaluation_end_ns
        events = [('evaluation_end', self.evaluation_end_ns)] if self.evaluation_end_ns is not None else []
        _write_rows(filepath, 'evaluation_start', start, events)

    def start_query(self, query_name: str) -> QueryEventLogger:
        """
        Create a new query event logger.

        Args:
            query_name: Declared name of the query

        Returns:
            QueryEventLogger instance for the query
        """
        query_logger = QueryEventLogger(query_name, self.log_dir, self.spec_name)
        with self._lock:
            self._query_loggers.append(query_logger)
        return query_logger

    @property
    def query_loggers(self) -> list[QueryEventLogger]:
        with self._lock:
            return list(self._query_loggers)


# Global logger instance; SpecEvaluator.run_queries falls back to it when no logger is passed
_global_logger: Optional[EvaluationEventLogger] = None


def init_global_logger(log_dir: str, spec_name: str) -> EvaluationEventLogger:
    """Initialize the global event logger."""
    global _global_logger
    _global_logger = EvaluationEventLogger(log_dir, spec_name)
    return _global_logger


def get_global_logger() -> Optional[EvaluationEventLogger]:
    return _global_logger


def clear_global_logger() -> None:
    global _global_logger
    _global_logger = None
