"""
Readers and writers of the files making up a run directory.
"""

import csv
import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

from .archive import EvaluationRecord
from .exceptions import MalformedGenomeString
from .gates import embedding_hash
from .genome import parse, to_string
from .surrogate import TrainingSet

__all__ = (
    "RECORD_COLUMNS",
    "RunManifest",
    "read_history",
    "read_records",
    "write_csv",
    "write_history",
    "write_json",
    "write_records",
    "write_training_set",
)

ARCHIVE = "archive.csv"
SCREENED = "screened.csv"
CONFIG = "config.json"
HISTORY = "history.jsonl"
SURROGATE_DATA = "surrogate_data.csv"
SURROGATE_MODEL = "surrogate.npz"
MANIFEST = "manifest-{command}.json"
REPORT = "report.csv"
FRONT = "front.csv"
LOSS_LOG = "loss_log.csv"
METRICS = "metrics.csv"
CHECKPOINT = "supernet.pt"

RECORD_COLUMNS = ("genome", "f1l", "f2l", "f3", "f1h", "f2h", "generation")


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_float(value: str) -> Optional[float]:
    return float(value) if value != "" else None


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", newline="") as file_:
        writer = csv.writer(file_, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(value) for value in row])


def read_csv(path) -> List[Dict[str, str]]:
    with open(path, newline="") as file_:
        return list(csv.DictReader(file_))


def write_records(path, records: Iterable[EvaluationRecord]) -> None:
    write_csv(
        path,
        RECORD_COLUMNS,
        (
            (
                to_string(record.genome),
                record.f1l,
                record.f2l,
                record.f3,
                record.f1h,
                record.f2h,
                record.generation,
            )
            for record in records
        ),
    )


def read_records(path) -> List[EvaluationRecord]:
    """
    Read records written by `write_records`.

    Raise `FileNotFoundError` if `path` is missing and `ValueError` when a row
    is malformed.
    """
    records = []
    for line, row in enumerate(read_csv(path), start=2):
        try:
            records.append(
                EvaluationRecord(
                    parse(row["genome"]),
                    f1l=_parse_float(row["f1l"]),
                    f2l=_parse_float(row["f2l"]),
                    f3=_parse_float(row["f3"]),
                    f1h=_parse_float(row["f1h"]),
                    f2h=_parse_float(row["f2h"]),
                    generation=int(row["generation"]),
                )
            )
        except (KeyError, TypeError, MalformedGenomeString, ValueError) as exc:
            raise ValueError(f"Malformed row {line} of {path}: {exc}") from exc
    return records


def write_training_set(path, training_set: TrainingSet) -> None:
    write_csv(
        path,
        ("genome", "embedding_hash", "f1h", "f2h", "label"),
        (
            (
                to_string(record.genome),
                embedding_hash(record.embedding),
                record.f1h,
                record.f2h,
                record.label,
            )
            for record in training_set
        ),
    )


def write_json(path, data: Any) -> None:
    with open(path, "w") as file_:
        json.dump(data, file_, indent=2, sort_keys=True)
        file_.write("\n")


def write_history(path, history: Iterable[Mapping[str, Any]]) -> None:
    with open(path, "w") as file_:
        for entry in history:
            file_.write(json.dumps(dict(entry), sort_keys=True))
            file_.write("\n")


def read_history(path) -> List[Dict[str, Any]]:
    with open(path) as file_:
        return [json.loads(line) for line in file_ if line.strip()]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class RunManifest:
    """
    Provenance of one command invocation, written to `manifest-<command>.json` before
    the command does any work and finalized once it's done.
    """

    command: str
    config: Dict[str, Any]
    master_seed: Optional[int]
    directory: str
    version: str = ""
    started_at: str = ""
    finished_at: Optional[str] = None
    outputs: List[str] = field(default_factory=list)
    arguments: Dict[str, Any] = field(default_factory=dict)

    @property
    def path(self) -> str:
        return os.path.join(self.directory, MANIFEST.format(command=self.command))

    @classmethod
    def start(
        cls,
        command: str,
        config: Dict[str, Any],
        master_seed: Optional[int],
        directory: str,
        arguments: Optional[Dict[str, Any]] = None,
    ) -> "RunManifest":
        from . import __version__

        os.makedirs(directory, exist_ok=True)
        manifest = cls(
            command,
            config,
            master_seed,
            directory,
            version=__version__,
            started_at=_now(),
            arguments=dict(arguments or {}),
        )
        manifest.write()
        return manifest

    def write(self) -> None:
        write_json(self.path, asdict(self))

    def finish(self, outputs: Iterable[str]) -> None:
        self.outputs = sorted(set(self.outputs) | set(outputs))
        self.finished_at = _now()
        self.write()

    @classmethod
    def load(cls, directory: str, command: str) -> "RunManifest":
        with open(os.path.join(directory, MANIFEST.format(command=command))) as file_:
            return cls(**json.load(file_))
