"""Append-only session log plus deterministic replay and latency export.

One JSON object per line. The first line is a header carrying the engine
version and the full canonical configuration (so a replay is self-contained),
plus its hash (so a replay against an explicit config can refuse drift).
Records follow as {"tick", "t_ms", "stream", "data"}: ticks never decrease
and within a tick the stream order is sensor_in* -> control -> state -> event*.

t_ms is the engine's monotonic clock, kept for latency analysis only; replay
never feeds it back into the simulation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, TextIO

from .config import ENGINE_VERSION, EngineConfig, config_from_dict
from .errors import CorruptLog, OrderingViolation, VersionMismatch

LOG_FORMAT = "ridesim-log"

STREAMS = ("sensor_in", "control", "state", "event")
_RANK = {name: i for i, name in enumerate(STREAMS)}
_ONCE_PER_TICK = ("control", "state")


@dataclass(frozen=True)
class LogRecord:
    tick: int
    t_ms: float
    stream: str
    data: dict[str, Any]


def canonical_data(data: dict[str, Any]) -> str:
    """Stable serialization used for bitwise state comparison."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


class LogWriter:
    """Ordered, append-only record sink. Single writer: the tick loop."""

    def __init__(self, path: str | Path, config: EngineConfig):
        self.path = Path(path)
        self._fh: TextIO = open(self.path, "w", encoding="utf-8")
        self._last: tuple[int, int] | None = None
        self._seen_in_tick: set[str] = set()
        header = {
            "format": LOG_FORMAT,
            "version": ENGINE_VERSION,
            "config": config.canonical_dict(),
            "config_hash": config.config_hash(),
        }
        self._fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")

    def append(self, rec: LogRecord) -> None:
        if rec.stream not in _RANK:
            raise OrderingViolation(f"unknown stream {rec.stream!r}")
        key = (rec.tick, _RANK[rec.stream])
        if self._last is not None:
            if key < self._last:
                raise OrderingViolation(
                    f"record {rec.stream}@{rec.tick} after "
                    f"{STREAMS[self._last[1]]}@{self._last[0]}")
            if rec.tick != self._last[0]:
                self._seen_in_tick.clear()
        if rec.stream in _ONCE_PER_TICK:
            if rec.stream in self._seen_in_tick:
                raise OrderingViolation(f"duplicate {rec.stream} record in tick {rec.tick}")
            self._seen_in_tick.add(rec.stream)
        self._last = key
        self._fh.write(json.dumps(
            {"tick": rec.tick, "t_ms": rec.t_ms, "stream": rec.stream, "data": rec.data},
            separators=(",", ":"), allow_nan=False) + "\n")

    def flush(self) -> None:
        self._fh.flush()

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.flush()
            self._fh.close()


def read_log(path: str | Path) -> tuple[dict[str, Any], list[LogRecord]]:
    """Parse a log file: (header, records).

    A partial final line (interrupted write) is ignored; anything else
    unparseable raises CorruptLog.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorruptLog(f"cannot read log {path}: {exc}") from exc
    lines = raw.split("\n")
    if raw.endswith("\n"):
        lines = lines[:-1]
    elif lines:
        lines = lines[:-1]  # drop the truncated tail
    if not lines:
        raise CorruptLog(f"log {path} has no header")

    def parse(i: int, line: str) -> dict[str, Any]:
        try:
            obj = json.loads(line)
        except ValueError as exc:
            raise CorruptLog(f"{path}:{i + 1}: unparseable record: {exc}") from exc
        if not isinstance(obj, dict):
            raise CorruptLog(f"{path}:{i + 1}: record is not an object")
        return obj

    header = parse(0, lines[0])
    if header.get("format") != LOG_FORMAT:
        raise CorruptLog(f"{path}: not a {LOG_FORMAT} file")
    records = []
    for i, line in enumerate(lines[1:], start=1):
        obj = parse(i, line)
        for name in ("tick", "t_ms", "stream", "data"):
            if name not in obj:
                raise CorruptLog(f"{path}:{i + 1}: record missing {name!r}")
        if obj["stream"] not in _RANK or not isinstance(obj["data"], dict):
            raise CorruptLog(f"{path}:{i + 1}: bad stream or data")
        records.append(LogRecord(tick=obj["tick"], t_ms=obj["t_ms"],
                                 stream=obj["stream"], data=obj["data"]))
    return header, records


def config_from_header(header: dict[str, Any],
                       expected: EngineConfig | None = None) -> EngineConfig:
    """Reconstruct the run configuration; refuse incompatible logs."""
    if header.get("version") != ENGINE_VERSION:
        raise VersionMismatch(
            f"log version {header.get('version')!r} != engine {ENGINE_VERSION!r}")
    try:
        cfg = config_from_dict(header["config"])
    except KeyError as exc:
        raise CorruptLog("log header has no config") from exc
    if cfg.config_hash() != header.get("config_hash"):
        raise VersionMismatch("log header config does not match its recorded hash")
    if expected is not None and expected.config_hash() != cfg.config_hash():
        raise VersionMismatch("log was recorded under a different configuration")
    return cfg


@dataclass
class ReplayResult:
    n_ticks: int
    states: list[dict[str, Any]]
    divergence_tick: int | None  # None when --verify passed or wasn't requested

    @property
    def identical(self) -> bool:
        return self.divergence_tick is None


def replay(path: str | Path, expected_config: EngineConfig | None = None,
           verify: bool = False) -> ReplayResult:
    """Re-inject logged inputs at their recorded ticks into a fresh engine.

    With verify=True, compares the regenerated state stream bitwise (on the
    canonical serialization) against the log's own state records.
    """
    from .session import Engine  # runtime import; session logs through this module
    from .wire import from_obj

    header, records = read_log(path)
    cfg = config_from_header(header, expected_config)

    inputs: dict[int, list[dict[str, Any]]] = {}
    recorded: list[dict[str, Any]] = []
    for rec in records:
        if rec.stream == "sensor_in":
            inputs.setdefault(rec.tick, []).append(rec.data)
        elif rec.stream == "state":
            recorded.append(rec.data)

    engine = Engine(cfg, log=None)
    states: list[dict[str, Any]] = []
    divergence: int | None = None
    for t in range(len(recorded)):
        for obj in inputs.get(t, ()):
            try:
                engine.inject(from_obj(obj))
            except Exception as exc:
                raise CorruptLog(f"tick {t}: bad sensor_in record: {exc}") from exc
        engine.tick()
        state = engine.last_state_payload
        states.append(state)
        if verify and divergence is None:
            if canonical_data(state) != canonical_data(recorded[t]):
                divergence = t
    return ReplayResult(n_ticks=len(recorded), states=states, divergence_tick=divergence)


def latency_rows(records: Iterable[LogRecord]) -> list[tuple[int, float]]:
    """Per-tick ingest-to-state latency in ms, for ticks that consumed input."""
    first_in: dict[int, float] = {}
    rows = []
    for rec in records:
        if rec.stream == "sensor_in" and rec.t_ms > 0:
            first_in.setdefault(rec.tick, rec.t_ms)
            first_in[rec.tick] = min(first_in[rec.tick], rec.t_ms)
        elif rec.stream == "state" and rec.tick in first_in and rec.t_ms > 0:
            rows.append((rec.tick, rec.t_ms - first_in[rec.tick]))
    return rows
