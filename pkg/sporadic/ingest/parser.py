"""Parser for the Intel Berkeley lab sensor log.

Each line holds whitespace-separated fields::

    date time epoch moteid temperature humidity light voltage

e.g. ``2004-02-28 00:59:16.02785 2 1 19.9884 37.0933 45.08 2.69964``.
Physical fields may be missing or malformed; such fields parse as absent.
Lines without a usable date, time or mote id are skipped, never fatal.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from datetime import UTC, datetime
from pathlib import Path
from typing import Final

import pandas as pd
from pydantic import BaseModel, Field

from ..core.config import settings
from ..core.errors import DataFileError

logger = logging.getLogger(__name__)

VARIABLES: Final[tuple[str, ...]] = ("temperature", "humidity", "light", "voltage")
MIN_SENSOR_ID: Final[int] = 1
MAX_SENSOR_ID: Final[int] = 58


@dataclass(frozen=True, slots=True)
class SensorRecord:
    time: float
    sensor: int
    temperature: float | None = None
    humidity: float | None = None
    light: float | None = None
    voltage: float | None = None

    def get(self, variable: str) -> float | None:
        value: float | None = getattr(self, variable)
        return value


@dataclass(frozen=True, slots=True)
class ParseSkip:
    reason: str


class IngestDiagnostics(BaseModel):
    lines: int = 0
    parsed: int = 0
    skipped: int = 0
    skip_reasons: dict[str, int] = Field(default_factory=dict)


def parse_timestamp(date: str, clock: str) -> float:
    """Wall-clock seconds since the Unix epoch (UTC) from date and time fields."""
    whole, _, frac = clock.partition(".")
    base = datetime.strptime(f"{date} {whole}", "%Y-%m-%d %H:%M:%S").replace(tzinfo=UTC)
    fraction = float(f"0.{frac}") if frac else 0.0
    return base.timestamp() + fraction


def _number(token: str | None) -> float | None:
    if token is None:
        return None
    try:
        value = float(token)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def parse_line(line: str) -> SensorRecord | ParseSkip:
    fields = line.split()
    if not fields:
        return ParseSkip("empty")
    if len(fields) < 4:
        return ParseSkip("missing mote id")
    try:
        time = parse_timestamp(fields[0], fields[1])
    except ValueError:
        return ParseSkip("bad timestamp")
    try:
        sensor = int(fields[3])
    except ValueError:
        return ParseSkip("bad mote id")
    if not MIN_SENSOR_ID <= sensor <= MAX_SENSOR_ID:
        return ParseSkip("mote id out of range")

    physical = [_number(fields[i]) if i < len(fields) else None for i in range(4, 8)]
    return SensorRecord(time, sensor, *physical)


def parse_lines(lines: Iterable[str], diagnostics: IngestDiagnostics) -> Iterator[SensorRecord]:
    reasons: Counter[str] = Counter(diagnostics.skip_reasons)
    for number, line in enumerate(lines, start=1):
        diagnostics.lines += 1
        parsed = parse_line(line)
        if isinstance(parsed, ParseSkip):
            diagnostics.skipped += 1
            reasons[parsed.reason] += 1
            if diagnostics.skipped <= settings.ingest_skip_samples:
                logger.debug("skipped line", extra={"line_no": number, "reason": parsed.reason})
            continue
        diagnostics.parsed += 1
        yield parsed
    diagnostics.skip_reasons = dict(sorted(reasons.items()))


def read_lab_file(path: Path) -> tuple[list[SensorRecord], IngestDiagnostics]:
    diagnostics = IngestDiagnostics()
    try:
        with open(path, encoding="utf-8", errors="replace") as f:
            records = list(parse_lines(f, diagnostics))
    except OSError as e:
        raise DataFileError(str(path), f"cannot read sensor log: {e}") from e
    logger.info(
        "sensor log parsed",
        extra={"path": str(path), "parsed": diagnostics.parsed, "skipped": diagnostics.skipped},
    )
    return records, diagnostics


def format_lab_line(record: SensorRecord, epoch: int = 0) -> str:
    """Render a record in the corpus line format (inverse of ``parse_line``)."""
    stamp = datetime.fromtimestamp(record.time, tz=UTC)
    clock = stamp.strftime("%H:%M:%S") + f".{stamp.microsecond:06d}"
    readings = (record.temperature, record.humidity, record.light, record.voltage)
    physical = ["" if v is None else repr(v) for v in readings]
    # Trailing absent fields are dropped, interior ones become nan
    while physical and physical[-1] == "":
        physical.pop()
    physical = [p if p else "nan" for p in physical]
    return " ".join([stamp.strftime("%Y-%m-%d"), clock, str(epoch), str(record.sensor), *physical])


def records_to_frame(records: Iterable[SensorRecord]) -> pd.DataFrame:
    rows = list(records)
    return pd.DataFrame(
        {
            "time": [r.time for r in rows],
            "sensor": [r.sensor for r in rows],
            **{v: [r.get(v) for r in rows] for v in VARIABLES},
        },
        columns=["time", "sensor", *VARIABLES],
    ).astype({"time": "float64", "sensor": "int64", **{v: "float64" for v in VARIABLES}})
