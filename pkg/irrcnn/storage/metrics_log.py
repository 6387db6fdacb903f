"""
CSV files written next to a run: per-epoch metrics and the LSUV report.
"""
import csv
from pathlib import Path
from typing import List, Sequence

from irrcnn.schemas.training import LsuvReportRow, MetricsRow

METRICS_COLUMNS = (
    "epoch",
    "train_loss",
    "train_acc",
    "val_loss",
    "val_acc",
    "top5_acc",
    "learning_rate",
    "seconds",
)
LSUV_COLUMNS = ("layer", "iterations", "variance", "converged")


def _cell(value: object) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


class MetricsLog:
    """Append-only metrics CSV; the header is written when the log is created."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("w", newline="") as f:
            csv.writer(f, lineterminator="\n").writerow(METRICS_COLUMNS)

    def append(self, row: MetricsRow) -> None:
        values = row.model_dump()
        with self.path.open("a", newline="") as f:
            csv.writer(f, lineterminator="\n").writerow(
                [_cell(values[column]) for column in METRICS_COLUMNS]
            )


def read_metrics(path: Path) -> List[MetricsRow]:
    """Parse a metrics CSV back into rows (validates the header)."""
    with Path(path).open(newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != METRICS_COLUMNS:
            raise ValueError(f"{path} does not have the metrics header")
        return [MetricsRow.model_validate(record) for record in reader]


def write_lsuv_report(path: Path, rows: Sequence[LsuvReportRow]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(LSUV_COLUMNS)
        for row in rows:
            writer.writerow([_cell(getattr(row, column)) for column in LSUV_COLUMNS])
    return path
