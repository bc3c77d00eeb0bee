"""CSV ingestion and fixed-width table rendering."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core_stats import IndexGroups
from .errors import DataError, DesignError, UnknownColumnError
from .factorial import DiscoTable, ModelFormula

__all__ = ["MISSING", "DataSet", "load_csv", "render_disco_table"]

MISSING = frozenset({"", "NA", "NaN", "nan", "N/A"})


@dataclass(frozen=True)
class DataSet:
    """Typed columns loaded for an analysis.

    ``numeric`` maps response column names to float vectors and ``factors``
    maps factor names to :class:`IndexGroups` (levels in first-appearance
    order).
    """

    numeric: Mapping[str, np.ndarray] = field(default_factory=dict)
    factors: Mapping[str, IndexGroups] = field(default_factory=dict)

    @property
    def n(self) -> int:
        for col in self.numeric.values():
            return col.size
        for f in self.factors.values():
            return f.n
        return 0

    @property
    def columns(self) -> tuple:
        return tuple(self.numeric) + tuple(self.factors)

    def response(self, names: Sequence[str]) -> np.ndarray:
        for name in names:
            if name not in self.numeric:
                raise UnknownColumnError(name, self.columns)
        return np.column_stack([self.numeric[name] for name in names])

    def bind(self, formula: ModelFormula):
        """Resolve a formula to ``(response matrix, {factor name: IndexGroups})``."""
        y = self.response(formula.response)
        factors = {}
        for name in formula.factors:
            if name not in self.factors:
                raise UnknownColumnError(name, self.columns)
            if self.factors[name].k < 2:
                raise DesignError(f"factor {name!r} has one level")
            factors[name] = self.factors[name]
        return y, factors

    def with_response(self, name: str, values) -> "DataSet":
        numeric = dict(self.numeric)
        numeric[name] = np.asarray(values, dtype=float)
        return DataSet(numeric, self.factors)


def load_csv(path, response_columns: Sequence[str], factor_columns: Sequence[str]) -> DataSet:
    """Read the named columns of a headed, comma-separated UTF-8 file.

    Response cells must parse as finite reals. Factor cells are kept as
    string labels. Missing values in any requested column are an error.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file (no header)") from None
        except csv.Error as exc:
            raise DataError(f"{path}: {exc}") from None
        positions = {}
        for name in list(response_columns) + list(factor_columns):
            if name not in header:
                raise UnknownColumnError(name, tuple(header))
            positions[name] = header.index(name)
        raw = {name: [] for name in positions}
        try:
            for row in reader:
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) != len(header):
                    raise DataError(
                        f"{path}: malformed row at line {reader.line_num}: "
                        f"expected {len(header)} fields, found {len(row)}"
                    )
                for name, j in positions.items():
                    raw[name].append((reader.line_num, row[j].strip()))
        except csv.Error as exc:
            raise DataError(f"{path}: line {reader.line_num}: {exc}") from None

    if not raw or not next(iter(raw.values())):
        raise DataError(f"{path}: no observations")
    numeric = {}
    for name in response_columns:
        vals = np.empty(len(raw[name]))
        for i, (line, cell) in enumerate(raw[name]):
            if cell in MISSING:
                raise DataError(f"{path}: missing value in column {name!r} at line {line}")
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: cannot parse {cell!r} as a number in column {name!r} at line {line}") from None
            if not math.isfinite(v):
                raise DataError(f"{path}: non-finite value {cell!r} in column {name!r} at line {line}")
            vals[i] = v
        numeric[name] = vals
    factors = {}
    for name in factor_columns:
        labels = []
        for line, cell in raw[name]:
            if cell in MISSING:
                raise DataError(f"{path}: missing value in column {name!r} at line {line}")
            labels.append(cell)
        factors[name] = IndexGroups.from_labels(labels)
    return DataSet(numeric, factors)


def _fmt(value: float, decimals: int, width: int) -> str:
    s = f"{value:.{decimals}f}"
    if s.startswith("-") and float(s) == 0.0:
        s = s[1:]
    return s.rjust(width)


def render_disco_table(table: DiscoTable) -> str:
    """Fixed-width text rendering of a distance components table.

    Dispersions are shown with 5 decimals, F ratios and p-values with 3.
    """
    lines = [
        f"Distance Components: index {table.alpha:.2f}",
        f"{'Source':<16}{'Df':>5}{'Sum Dist':>13}{'Mean Dist':>13}{'F-ratio':>11}{'p-value':>11}",
        "Between:",
    ]
    for r in table.rows:
        p = "" if r.p_value is None else _fmt(r.p_value, 3, 11)
        lines.append(
            f"  {r.term:<14}{r.df:>5}{_fmt(r.sum_dispersion, 5, 13)}"
            f"{_fmt(r.mean_dispersion, 5, 13)}{_fmt(r.f_ratio, 3, 11)}{p}"
        )
    lines.append(f"{'Within':<16}{table.within_df:>5}{_fmt(table.within, 5, 13)}{_fmt(table.mean_within, 5, 13)}")
    lines.append(f"{'Total':<16}{table.total_df:>5}{_fmt(table.total, 5, 13)}")
    lines.extend(table.notes)
    return "\n".join(lines) + "\n"
