"""Loading of the wide survey CSV into an immutable typed raw table.

The downloaded extract stores every response as an integer: wages in
cents, categorical codes as small positive integers, and five negative
sentinel codes for the different flavours of missingness.  Blank cells
(possible after external preprocessing) are kept as structural missing.
"""

from __future__ import annotations

import csv
import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .columns import (
    ColumnNameError,
    QuestionFamily,
    RawColumnDescriptor,
    parse_column_name,
)

logger = logging.getLogger(__name__)

__all__ = [
    "MissingReason",
    "Missing",
    "IngestError",
    "SentinelPolicy",
    "DEFAULT_SENTINELS",
    "RawColumn",
    "RawTable",
    "decode_cell",
    "load_raw_table",
]


class IngestError(ValueError):
    """The raw file violated an ingestion contract."""


class MissingReason(enum.Enum):
    REFUSAL = "refusal"
    DONT_KNOW = "dont_know"
    INVALID_SKIP = "invalid_skip"
    VALID_SKIP = "valid_skip"
    NON_INTERVIEW = "non_interview"
    STRUCTURAL_NA = "structural_na"


# Sentinel meanings from the public NLSY79 codebook; the mapping is
# injective over {-1..-5} and configurable through the pipeline config.
DEFAULT_SENTINELS: dict[int, MissingReason] = {
    -1: MissingReason.REFUSAL,
    -2: MissingReason.DONT_KNOW,
    -3: MissingReason.INVALID_SKIP,
    -4: MissingReason.VALID_SKIP,
    -5: MissingReason.NON_INTERVIEW,
}


@dataclass(frozen=True)
class Missing:
    """A decoded cell that carries no value, with the reason preserved."""

    reason: MissingReason


@dataclass(frozen=True)
class SentinelPolicy:
    """Which negative codes mean which kind of missing."""

    codes: Mapping[int, MissingReason] = field(
        default_factory=lambda: dict(DEFAULT_SENTINELS)
    )

    def reason_for(self, value: int) -> MissingReason:
        # Codes below the registered range are treated as invalid skips so
        # that decoding stays total.
        return self.codes.get(value, MissingReason.INVALID_SKIP)


def decode_cell(
    value: int | None,
    family: QuestionFamily,
    policy: SentinelPolicy | None = None,
) -> int | float | Missing:
    """Decode one raw integer cell.

    Negative sentinels become Missing with their reason; blank cells are
    structural missing; hourly-wage cells (stored in cents) become dollar
    floats; everything else passes through as an integer.  Total: never
    raises.
    """
    if value is None:
        return Missing(MissingReason.STRUCTURAL_NA)
    if value < 0:
        return Missing((policy or _DEFAULT_POLICY).reason_for(value))
    if family is QuestionFamily.HRP:
        return value / 100.0
    return int(value)


_DEFAULT_POLICY = SentinelPolicy()


@dataclass(frozen=True)
class RawColumn:
    name: str
    descriptor: RawColumnDescriptor
    values: np.ndarray  # int64; meaningless where blank is True
    blank: np.ndarray   # bool; True where the file cell was empty

    def cell(self, row: int) -> int | None:
        if self.blank[row]:
            return None
        return int(self.values[row])


@dataclass(frozen=True)
class RawTable:
    """Immutable wide table: parsed header descriptors plus integer cells."""

    path: str
    columns: tuple[RawColumn, ...]
    case_ids: tuple[int, ...]
    sentinel_policy: SentinelPolicy = field(default_factory=SentinelPolicy)

    @property
    def n_rows(self) -> int:
        return len(self.case_ids)

    @property
    def n_columns(self) -> int:
        return len(self.columns)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_by_name", {col.name: col for col in self.columns}
        )
        by_descriptor: dict[RawColumnDescriptor, RawColumn] = {}
        for col in self.columns:
            by_descriptor[col.descriptor] = col
        object.__setattr__(self, "_by_descriptor", by_descriptor)
        object.__setattr__(
            self, "_row_index", {cid: i for i, cid in enumerate(self.case_ids)}
        )

    def column(self, name: str) -> RawColumn | None:
        return self._by_name.get(name)  # type: ignore[attr-defined]

    def find(
        self,
        family: QuestionFamily,
        job_slot: int | None = None,
        year: int | None = None,
    ) -> RawColumn | None:
        key = RawColumnDescriptor(family=family, job_slot=job_slot, year=year)
        return self._by_descriptor.get(key)  # type: ignore[attr-defined]

    def family_columns(self, family: QuestionFamily) -> list[RawColumn]:
        return [col for col in self.columns if col.descriptor.family is family]

    def row_of(self, case_id: int) -> int:
        return self._row_index[case_id]  # type: ignore[attr-defined]

    def decoded(
        self, case_id: int, column: RawColumn
    ) -> int | float | Missing:
        return decode_cell(
            column.cell(self.row_of(case_id)),
            column.descriptor.family,
            self.sentinel_policy,
        )

    def sentinel_counts(self) -> dict[str, int]:
        """How many cells carried each missing reason (blank included)."""
        counts: dict[str, int] = {reason.value: 0 for reason in MissingReason}
        for col in self.columns:
            blanks = int(col.blank.sum())
            counts[MissingReason.STRUCTURAL_NA.value] += blanks
            present = col.values[~col.blank]
            negatives = present[present < 0]
            for code in np.unique(negatives):
                reason = self.sentinel_policy.reason_for(int(code))
                counts[reason.value] += int((negatives == code).sum())
        return counts


def _parse_header(names: Iterable[str]) -> list[RawColumnDescriptor]:
    descriptors = []
    for name in names:
        try:
            descriptors.append(parse_column_name(name))
        except ColumnNameError as exc:
            raise IngestError(f"cannot ingest header: {exc}") from exc
    return descriptors


def load_raw_table(
    path: str | Path,
    policy: SentinelPolicy | None = None,
) -> RawTable:
    """Load the wide CSV extract.

    Every header must parse under the column grammar, every cell must be
    an integer or empty, exactly one column must be the case id, and the
    case ids must be unique positive integers.  Loading is deterministic:
    the same file bytes always produce an identical table.
    """
    path = Path(path)
    policy = policy or SentinelPolicy()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc

    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError(f"{path} is empty: no header row") from None
    if len(set(header)) != len(header):
        raise IngestError(f"{path} has duplicate column names")
    descriptors = _parse_header(header)

    caseid_idx = [
        i for i, d in enumerate(descriptors) if d.family is QuestionFamily.CASEID
    ]
    if len(caseid_idx) != 1:
        raise IngestError(
            f"expected exactly one case-id column, found {len(caseid_idx)}"
        )
    id_col = caseid_idx[0]

    n_cols = len(header)
    raw_values: list[list[int]] = [[] for _ in range(n_cols)]
    raw_blank: list[list[bool]] = [[] for _ in range(n_cols)]
    for row_no, row in enumerate(reader, start=2):
        if len(row) != n_cols:
            raise IngestError(
                f"{path} line {row_no}: expected {n_cols} cells, got {len(row)}"
            )
        for i, cell in enumerate(row):
            cell = cell.strip()
            if cell == "" or cell == "NA":
                raw_values[i].append(0)
                raw_blank[i].append(True)
                continue
            try:
                parsed = int(cell)
            except ValueError:
                raise IngestError(
                    f"{path} line {row_no}, column {header[i]!r}:"
                    f" non-integer cell {cell!r}"
                ) from None
            raw_values[i].append(parsed)
            raw_blank[i].append(False)

    columns = tuple(
        RawColumn(
            name=header[i],
            descriptor=descriptors[i],
            values=np.asarray(raw_values[i], dtype=np.int64),
            blank=np.asarray(raw_blank[i], dtype=bool),
        )
        for i in range(n_cols)
    )

    ids_col = columns[id_col]
    if ids_col.blank.any():
        raise IngestError("case-id column contains blank cells")
    case_ids = tuple(int(v) for v in ids_col.values)
    if any(cid <= 0 for cid in case_ids):
        raise IngestError("case ids must be positive")
    if len(set(case_ids)) != len(case_ids):
        dupes = sorted({cid for cid in case_ids if case_ids.count(cid) > 1})
        raise IngestError(f"duplicate case ids: {dupes[:5]}")

    table = RawTable(
        path=str(path), columns=columns, case_ids=case_ids, sentinel_policy=policy
    )
    logger.info(
        "loaded %s: %d rows, %d columns", path, table.n_rows, table.n_columns
    )
    return table
