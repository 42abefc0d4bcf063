from __future__ import annotations

import json
import os
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from rough1d.store.paths import run_log_path


@dataclass
class RunLogger:
    """Append-only JSONL log of CLI runs, one object per line."""

    base_dir: Path | None = None
    enabled: bool = True

    def _path(self, when: datetime) -> Path:
        if self.base_dir is not None:
            return self.base_dir / f"{when.date().isoformat()}.jsonl"
        return run_log_path(when.date())

    def append(self, *, when: datetime, event: dict) -> None:
        """Append a single JSON object as one line."""

        if not self.enabled:
            return
        path = self._path(when)
        path.parent.mkdir(parents=True, exist_ok=True)

        payload = {"ts": when.isoformat(), **event}
        line = json.dumps(payload, ensure_ascii=False, separators=(",", ":"), default=str)

        with path.open("a", encoding="utf-8") as f:
            f.write(line)
            f.write("\n")
            f.flush()
            os.fsync(f.fileno())

    def log_start(self, *, when: datetime, command: str, config: dict) -> None:
        self.append(when=when, event={"event": "run_start", "command": command, "config": config})

    def log_end(self, *, when: datetime, command: str, status: int) -> None:
        self.append(when=when, event={"event": "run_end", "command": command, "status": status})

    def log_error(self, *, when: datetime, command: str, error: BaseException) -> None:
        event = {
            "event": "error",
            "command": command,
            "type": type(error).__name__,
            "message": str(error),
        }
        self.append(when=when, event=event)

    def log_events(self, *, when: datetime, command: str, events) -> None:
        # Library diagnostics arrive as dicts carrying their own "event" name.
        for ev in events:
            self.append(when=when, event={"command": command, **ev})
