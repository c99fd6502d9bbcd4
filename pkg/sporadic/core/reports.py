from __future__ import annotations

import base64
import csv
import hashlib
import json
import logging
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any, Final

import yaml

from .errors import DataFileError, InvalidConfigError

logger = logging.getLogger(__name__)

DIGEST_ALGO: Final[str] = "sha256"


def canonical_json(payload: Mapping[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)


def digest_payload(payload: Mapping[str, Any]) -> str:
    digest = hashlib.sha256(canonical_json(payload).encode("utf-8")).digest()
    return base64.urlsafe_b64encode(digest).decode("ascii").rstrip("=")


def verify_digest(report: Mapping[str, Any]) -> bool:
    body = {k: v for k, v in report.items() if k != "digest"}
    return report.get("digest") == digest_payload(body)


def resolve_inside(output_dir: Path, name: str | Path) -> Path:
    """Resolve ``name`` under ``output_dir``; reject anything escaping it."""
    base = output_dir.resolve()
    target = (base / name).resolve()
    if target != base and base not in target.parents:
        raise InvalidConfigError(f"refusing to write outside output directory: {target}")
    return target


def write_report(path: Path, payload: Mapping[str, Any]) -> dict[str, Any]:
    """Write a deterministic YAML key-value report with a trailing content digest."""
    body = json.loads(canonical_json(payload))
    document = {**{k: body[k] for k in payload}, "digest": digest_payload(body)}
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            yaml.safe_dump(document, sort_keys=False, default_flow_style=False),
            encoding="utf-8",
        )
    except OSError as e:
        raise DataFileError(str(path), f"cannot write report: {e}") from e
    logger.info("report written", extra={"path": str(path)})
    return document


def read_report(path: Path) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise DataFileError(str(path), f"cannot read report: {e}") from e
    if not isinstance(data, dict):
        raise DataFileError(str(path), "report is not a key-value document")
    return data


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """Write a CSV table and return the number of data rows."""
    count = 0
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row in rows:
                writer.writerow(["" if v is None else _cell(v) for v in row])
                count += 1
    except OSError as e:
        raise DataFileError(str(path), f"cannot write table: {e}") from e
    return count


def read_rows(path: Path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            header = next(reader, [])
            return header, [list(r) for r in reader]
    except OSError as e:
        raise DataFileError(str(path), f"cannot read table: {e}") from e


def _cell(value: Any) -> str:
    # repr keeps floats round-trip exact
    if isinstance(value, float):
        return repr(float(value))
    return str(value)
