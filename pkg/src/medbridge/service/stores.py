"""Append-only JSONL persistence with full replay on startup.

Each store is a single file of one JSON object per line. Writers hold a
lock and write whole lines, so a reader (or a restart replay) never sees
a torn record; state is exactly the fold over the file.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path


def canonical(row: dict) -> dict:
    """Round-trip through JSON with sorted keys.

    Live state and replayed state must be byte-identical when
    serialized; normalizing key order at write time guarantees it.
    """
    return json.loads(json.dumps(row, sort_keys=True))


class JsonlLog:
    """The raw append-only file: replayable sequence of JSON rows."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, row: dict) -> None:
        line = json.dumps(row, sort_keys=True, separators=(",", ":"))
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()

    def replay(self) -> list[dict]:
        if not self.path.exists():
            return []
        rows = []
        with self.path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    rows.append(json.loads(line))
        return rows


class TraceStore:
    """Traces keyed by id; a row is {"id", "kind", "doc"}."""

    def __init__(self, path: str | Path):
        self._log = JsonlLog(path)
        self._rows: dict[str, dict] = {}
        self._lock = threading.Lock()
        for row in self._log.replay():
            self._rows[row["id"]] = row

    def new_id(self) -> str:
        with self._lock:
            return f"tr-{len(self._rows) + 1:06d}"

    def put(self, trace_id: str, kind: str, doc: dict) -> None:
        row = canonical({"id": trace_id, "kind": kind, "doc": doc})
        with self._lock:
            self._log.append(row)
            self._rows[trace_id] = row

    def get(self, trace_id: str) -> dict | None:
        return self._rows.get(trace_id)

    def __contains__(self, trace_id: str) -> bool:
        return trace_id in self._rows

    def __len__(self) -> int:
        return len(self._rows)


class SessionStore:
    """Sessions rebuilt from an event log of created/turn rows."""

    def __init__(self, path: str | Path):
        self._log = JsonlLog(path)
        self._sessions: dict[str, dict] = {}
        self._lock = threading.Lock()
        for row in self._log.replay():
            self._apply(row)

    def _apply(self, row: dict) -> None:
        if row["event"] == "created":
            self._sessions[row["session_id"]] = {
                "id": row["session_id"],
                "created_at": row["created_at"],
                "turns": [],
            }
        elif row["event"] == "turn":
            self._sessions[row["session_id"]]["turns"].append(
                {
                    "role": row["role"],
                    "text": row["text"],
                    "attachments": row["attachments"],
                }
            )

    def create(self, created_at: str) -> str:
        with self._lock:
            session_id = f"s-{len(self._sessions) + 1:06d}"
            row = {"event": "created", "session_id": session_id, "created_at": created_at}
            self._log.append(row)
            self._apply(row)
            return session_id

    def append_turn(
        self, session_id: str, role: str, text: str, attachments: dict | None = None
    ) -> None:
        with self._lock:
            if session_id not in self._sessions:
                raise KeyError(session_id)
            row = canonical(
                {
                    "event": "turn",
                    "session_id": session_id,
                    "role": role,
                    "text": text,
                    "attachments": attachments,
                }
            )
            self._log.append(row)
            self._apply(row)

    def get(self, session_id: str) -> dict | None:
        return self._sessions.get(session_id)

    def __contains__(self, session_id: str) -> bool:
        return session_id in self._sessions

    def __len__(self) -> int:
        return len(self._sessions)
