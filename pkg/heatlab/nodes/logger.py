"""
Run log.

Every CLI command and every acceptance criterion appends one JSON object
to logs/run_YYYYMMDD.jsonl, so a numerical result can be traced back to
the parameters and seed that produced it.
"""

import json
import logging
import time
from collections import deque
from datetime import datetime
from pathlib import Path
from typing import Dict, Any, Optional, List, Union
import uuid

from ..state import CriterionResult

OUTCOMES = ("ok", "failed", "error")


class RunLogger:
    """Appends command and criterion records to a daily JSONL file."""

    def __init__(self, log_dir: Union[str, Path] = "logs"):
        self.log_dir = Path(log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)
        self.log_file = self.log_dir / f"run_{datetime.now().strftime('%Y%m%d')}.jsonl"
        self.logger = logging.getLogger(__name__)

    def _append(self, entry: Dict[str, Any]) -> None:
        try:
            with open(self.log_file, 'a', encoding='utf-8') as f:
                f.write(json.dumps(entry, default=str, sort_keys=True) + '\n')
        except OSError as e:
            self.logger.error(f"Could not append to {self.log_file}: {e}")

    def log_run(
        self,
        command: str,
        params: Optional[Dict[str, Any]] = None,
        seed: Optional[int] = None,
        outcome: str = "ok",
        error: Optional[BaseException] = None,
        start_time: Optional[float] = None,
        end_time: Optional[float] = None,
        output_path: Optional[str] = None,
        metadata: Optional[Dict[str, Any]] = None
    ) -> str:
        """
        Record one CLI command.

        Args:
            command: Subcommand name
            params: Content parameters of the ExperimentSpec
            seed: Root seed
            outcome: One of "ok", "failed", "error"
            error: Exception that ended the run, if any
            start_time: time.time() at start; defaults to end_time
            end_time: time.time() at the end; defaults to now
            output_path: Artifact written by the command
            metadata: Extra fields such as the spec hash

        Returns:
            The run id
        """
        if outcome not in OUTCOMES:
            raise ValueError(f"outcome must be one of {OUTCOMES}, got {outcome!r}")
        run_id = str(uuid.uuid4())
        end_time = end_time or time.time()
        start_time = start_time or end_time
        self._append({
            "timestamp": datetime.utcnow().isoformat() + "Z",
            "run_id": run_id,
            "kind": "command",
            "command": command,
            "params": params or {},
            "seed": seed,
            "elapsed_ms": int((end_time - start_time) * 1000),
            "outcome": outcome,
            "error": f"{type(error).__name__}: {error}" if error else None,
            "output_path": output_path,
            "metadata": metadata or {},
        })
        return run_id

    def log_criterion(self, result: CriterionResult, suite: str, seed: Optional[int] = None) -> str:
        """Record one acceptance criterion with its measurements."""
        run_id = str(uuid.uuid4())
        self._append({
            "timestamp": datetime.utcnow().isoformat() + "Z",
            "run_id": run_id,
            "kind": "criterion",
            "command": result.id,
            "params": {"suite": suite},
            "seed": seed,
            "elapsed_ms": int(result.elapsed_s * 1000),
            "outcome": "error" if result.error else ("ok" if result.passed else "failed"),
            "error": result.error,
            "measured": result.measured,
        })
        return run_id

    def _entries(self):
        try:
            with open(self.log_file, 'r', encoding='utf-8') as f:
                for line in f:
                    try:
                        yield json.loads(line)
                    except json.JSONDecodeError:
                        self.logger.debug(f"Skipping malformed line in {self.log_file}")
        except FileNotFoundError:
            return

    def get_run_log(self, run_id: str) -> Optional[Dict[str, Any]]:
        """The entry with this run id, or None."""
        return next((e for e in self._entries() if e.get('run_id') == run_id), None)

    def get_recent_runs(self, limit: int = 10, command: Optional[str] = None) -> List[Dict[str, Any]]:
        """
        Most recent entries first, optionally only those for one command or criterion id.
        """
        recent = deque(
            (e for e in self._entries() if command is None or e.get('command') == command),
            maxlen=limit
        )
        return list(reversed(recent))
