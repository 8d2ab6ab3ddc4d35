"""Sweep-report parsing.

The input contract is the CSV written by the experiment CLI's sweep
command, header `axis,value,epoch,loss_t,loss_a,nmse`, one row per
(value, epoch).  A `<csv>.config.json` sidecar, when present, carries the
resolved experiment config the sweep ran under; rate plots use it to
recover the quantities the swept axis held fixed.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

EXPECTED_HEADER = ["axis", "value", "epoch", "loss_t", "loss_a", "nmse"]


class ReportError(ValueError):
    """The report file does not satisfy the CSV contract."""


@dataclass(frozen=True)
class ReportRow:
    axis: str
    value: float
    epoch: int
    loss_t: float
    loss_a: float
    nmse: float

    def __post_init__(self):
        if self.nmse < 0:
            raise ReportError(f"negative NMSE {self.nmse!r}")


def load_report(path) -> list[ReportRow]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ReportError(f"{path}: empty report") from None
        if header != EXPECTED_HEADER:
            raise ReportError(
                f"{path}: header {header!r} does not match {EXPECTED_HEADER!r}")
        rows = []
        for lineno, fields in enumerate(reader, start=2):
            if not fields:
                continue
            if len(fields) != len(EXPECTED_HEADER):
                raise ReportError(f"{path}:{lineno}: expected "
                                  f"{len(EXPECTED_HEADER)} columns")
            try:
                rows.append(ReportRow(
                    axis=fields[0], value=float(fields[1]), epoch=int(fields[2]),
                    loss_t=float(fields[3]), loss_a=float(fields[4]),
                    nmse=float(fields[5]),
                ))
            except ValueError as exc:
                raise ReportError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ReportError(f"{path}: no data rows")
    return rows


def load_sidecar(csv_path) -> dict | None:
    """The resolved-config snapshot written next to the CSV, if any."""
    sidecar = Path(str(csv_path) + ".config.json")
    if not sidecar.exists():
        return None
    return json.loads(sidecar.read_text())


def final_nmse_by_value(rows: list[ReportRow]) -> dict[float, float]:
    """Last-epoch NMSE per swept value."""
    latest: dict[float, tuple[int, float]] = {}
    for row in rows:
        seen = latest.get(row.value)
        if seen is None or row.epoch > seen[0]:
            latest[row.value] = (row.epoch, row.nmse)
    return {value: nm for value, (_, nm) in latest.items()}
