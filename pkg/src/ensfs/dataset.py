"""In-memory model of a mixed-type tabular dataset with missing cells.

A :class:`Dataset` couples a column-typed feature table with a survival
target (months + censoring flag).  Numeric columns are stored as float64
with NaN marking missing cells; categorical columns (nominal or ordinal)
are stored as integer level codes with -1 marking missing cells, so
missingness is always distinguishable from data.

The on-disk format is a CSV file (empty string = missing cell) plus a YAML
sidecar declaring, for every feature, its kind, block and level list, and
naming the target and censoring columns.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .exceptions import InvalidLevel, SchemaMismatch, UnknownFeatureName

KINDS = ("numeric", "nominal", "ordinal")
MISSING_CODE = -1


@dataclass(frozen=True)
class FeatureMeta:
    """Declared name, kind, block and (for categoricals) ordered levels."""

    name: str
    kind: str
    block: str
    levels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise SchemaMismatch(f"feature {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "numeric" and self.levels:
            raise SchemaMismatch(f"numeric feature {self.name!r} must not declare levels")

    @property
    def is_categorical(self) -> bool:
        return self.kind in ("nominal", "ordinal")

    @property
    def n_levels(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by :func:`validate_dataset`."""

    row: int | None
    column: str | None
    rule: str

    def __str__(self) -> str:
        where = []
        if self.row is not None:
            where.append(f"row {self.row}")
        if self.column is not None:
            where.append(f"column {self.column!r}")
        prefix = ", ".join(where)
        return f"{prefix}: {self.rule}" if prefix else self.rule


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable mixed-type table plus survival target.

    Attributes
    ----------
    features : tuple of FeatureMeta
        Column declarations, in table order.
    columns : tuple of ndarray
        One array per feature, aligned with ``features``.  float64 with NaN
        for numeric features, int64 level codes with -1 for categoricals.
    target_months : ndarray
        Continuous survival months, float64, never missing.
    censored : ndarray
        Boolean censoring flags, never missing.
    target_name, censor_name : str
        Column names used on disk.
    """

    features: tuple[FeatureMeta, ...]
    columns: tuple[np.ndarray, ...]
    target_months: np.ndarray
    censored: np.ndarray
    target_name: str = "os_months"
    censor_name: str = "censored"
    _index: dict = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self) -> None:
        for arr in (*self.columns, self.target_months, self.censored):
            arr.setflags(write=False)
        object.__setattr__(
            self, "_index", {f.name: i for i, f in enumerate(self.features)}
        )

    @property
    def n_rows(self) -> int:
        return int(self.target_months.shape[0])

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[self._index[name]]
        except KeyError:
            raise UnknownFeatureName(f"no feature named {name!r}") from None

    def meta(self, name: str) -> FeatureMeta:
        try:
            return self.features[self._index[name]]
        except KeyError:
            raise UnknownFeatureName(f"no feature named {name!r}") from None

    def is_missing(self, name: str) -> np.ndarray:
        """Boolean mask of missing cells for one feature column."""
        col = self.column(name)
        meta = self.meta(name)
        if meta.kind == "numeric":
            return np.isnan(col)
        return col == MISSING_CODE

    def replace(self, *, features=None, columns=None, target_months=None,
                censored=None) -> "Dataset":
        """Copy with some fields swapped out."""
        return Dataset(
            features=tuple(features if features is not None else self.features),
            columns=tuple(columns if columns is not None else self.columns),
            target_months=(self.target_months if target_months is None
                           else np.asarray(target_months, dtype=np.float64)),
            censored=(self.censored if censored is None
                      else np.asarray(censored, dtype=bool)),
            target_name=self.target_name,
            censor_name=self.censor_name,
        )

    def take_rows(self, rows) -> "Dataset":
        """Row subset, preserving order of ``rows``."""
        rows = np.asarray(rows, dtype=np.intp)
        return self.replace(
            columns=tuple(col[rows].copy() for col in self.columns),
            target_months=self.target_months[rows].copy(),
            censored=self.censored[rows].copy(),
        )


def _parse_numeric(text: str, row: int, name: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InvalidLevel(
            f"row {row}, column {name!r}: {text!r} is not a number"
        ) from None
    if not math.isfinite(value):
        raise InvalidLevel(f"row {row}, column {name!r}: non-finite value {text!r}")
    return value


def _parse_flag(text: str, row: int, name: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true"):
        return True
    if lowered in ("0", "false"):
        return False
    raise InvalidLevel(f"row {row}, column {name!r}: {text!r} is not a 0/1 flag")


def load_dataset(data_path, meta_path) -> Dataset:
    """Read a CSV data file and its YAML metadata sidecar.

    Raises
    ------
    FileNotFoundError
        Either file is absent.
    SchemaMismatch
        Header and sidecar disagree, or the sidecar is malformed.
    InvalidLevel
        A cell is neither empty, a declared level, nor a finite number.
    """
    data_path, meta_path = Path(data_path), Path(meta_path)
    for p in (data_path, meta_path):
        if not p.exists():
            raise FileNotFoundError(str(p))

    with open(meta_path, "r", encoding="utf-8") as fh:
        meta = yaml.safe_load(fh)
    if not isinstance(meta, dict) or "features" not in meta:
        raise SchemaMismatch(f"{meta_path}: sidecar must map names to feature specs")
    target_name = str(meta.get("target", "os_months"))
    censor_name = str(meta.get("censored", "censored"))

    declared: dict[str, FeatureMeta] = {}
    for name, spec in meta["features"].items():
        if not isinstance(spec, dict) or "kind" not in spec:
            raise SchemaMismatch(f"{meta_path}: feature {name!r} needs a 'kind'")
        levels = tuple(str(v) for v in spec.get("levels", ()) or ())
        declared[str(name)] = FeatureMeta(
            name=str(name), kind=str(spec["kind"]),
            block=str(spec.get("block", "")), levels=levels,
        )

    with open(data_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{data_path}: empty file") from None
        rows = list(reader)

    if len(set(header)) != len(header):
        raise SchemaMismatch(f"{data_path}: duplicate column names in header")
    missing_cols = {target_name, censor_name} - set(header)
    if missing_cols:
        raise SchemaMismatch(f"{data_path}: missing column(s) {sorted(missing_cols)}")
    feature_header = [h for h in header if h not in (target_name, censor_name)]
    undeclared = set(feature_header) - set(declared)
    if undeclared:
        raise SchemaMismatch(f"data columns not in sidecar: {sorted(undeclared)}")
    unseen = set(declared) - set(feature_header)
    if unseen:
        raise SchemaMismatch(f"sidecar features not in data: {sorted(unseen)}")

    n_rows = len(rows)
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise SchemaMismatch(
                f"{data_path}: row {i} has {len(row)} cells, header has {len(header)}"
            )

    col_of = {h: j for j, h in enumerate(header)}
    features = tuple(declared[name] for name in feature_header)
    columns = []
    for fmeta in features:
        j = col_of[fmeta.name]
        if fmeta.kind == "numeric":
            arr = np.full(n_rows, np.nan)
            for i, row in enumerate(rows):
                cell = row[j].strip()
                if cell:
                    arr[i] = _parse_numeric(cell, i, fmeta.name)
        else:
            code_of = {lvl: c for c, lvl in enumerate(fmeta.levels)}
            arr = np.full(n_rows, MISSING_CODE, dtype=np.int64)
            for i, row in enumerate(rows):
                cell = row[j].strip()
                if not cell:
                    continue
                if cell not in code_of:
                    raise InvalidLevel(
                        f"row {i}, column {fmeta.name!r}: {cell!r} not in "
                        f"declared levels {list(fmeta.levels)}"
                    )
                arr[i] = code_of[cell]
        columns.append(arr)

    months = np.empty(n_rows)
    flags = np.empty(n_rows, dtype=bool)
    jt, jc = col_of[target_name], col_of[censor_name]
    for i, row in enumerate(rows):
        cell = row[jt].strip()
        if not cell:
            raise InvalidLevel(f"row {i}, column {target_name!r}: target is missing")
        months[i] = _parse_numeric(cell, i, target_name)
        flag_cell = row[jc].strip()
        if not flag_cell:
            raise InvalidLevel(f"row {i}, column {censor_name!r}: flag is missing")
        flags[i] = _parse_flag(flag_cell, i, censor_name)

    return Dataset(
        features=features, columns=tuple(columns),
        target_months=months, censored=flags,
        target_name=target_name, censor_name=censor_name,
    )


def _format_number(x: float) -> str:
    # repr round-trips float64 exactly; integers print without the trailing .0
    if float(x).is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


def save_dataset(ds: Dataset, data_path, meta_path) -> None:
    """Write ``ds`` so that :func:`load_dataset` reproduces it exactly."""
    data_path, meta_path = Path(data_path), Path(meta_path)
    data_path.parent.mkdir(parents=True, exist_ok=True)
    meta_path.parent.mkdir(parents=True, exist_ok=True)

    meta = {
        "target": ds.target_name,
        "censored": ds.censor_name,
        "features": {
            f.name: (
                {"kind": f.kind, "block": f.block}
                if f.kind == "numeric"
                else {"kind": f.kind, "block": f.block, "levels": list(f.levels)}
            )
            for f in ds.features
        },
    }
    with open(meta_path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(meta, fh, sort_keys=False, allow_unicode=True)

    with open(data_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([*ds.feature_names, ds.target_name, ds.censor_name])
        for i in range(ds.n_rows):
            row = []
            for fmeta, col in zip(ds.features, ds.columns):
                if fmeta.kind == "numeric":
                    row.append("" if np.isnan(col[i]) else _format_number(col[i]))
                else:
                    code = int(col[i])
                    row.append("" if code == MISSING_CODE else fmeta.levels[code])
            row.append(_format_number(ds.target_months[i]))
            row.append("1" if ds.censored[i] else "0")
            writer.writerow(row)


def validate_dataset(ds: Dataset) -> list[Violation]:
    """Check structural invariants; returns one Violation per breach."""
    out: list[Violation] = []
    if ds.n_rows < 1:
        out.append(Violation(None, None, "dataset has no rows"))

    seen: set[str] = set()
    for f in ds.features:
        if f.name in seen:
            out.append(Violation(None, f.name, "duplicate feature name"))
        seen.add(f.name)
        if f.is_categorical and f.n_levels < 2:
            out.append(Violation(
                None, f.name, f"{f.kind} feature needs >= 2 levels, has {f.n_levels}"
            ))

    for f, col in zip(ds.features, ds.columns):
        if col.shape[0] != ds.n_rows:
            out.append(Violation(
                None, f.name,
                f"column length {col.shape[0]} != row count {ds.n_rows}"
            ))
            continue
        if f.kind == "numeric":
            bad = np.flatnonzero(np.isinf(col))
            for i in bad:
                out.append(Violation(int(i), f.name, "non-finite numeric cell"))
        else:
            bad = np.flatnonzero((col != MISSING_CODE)
                                 & ((col < 0) | (col >= f.n_levels)))
            for i in bad:
                out.append(Violation(
                    int(i), f.name, f"level code {int(col[i])} out of range"
                ))

    for name, arr in ((ds.target_name, ds.target_months), (ds.censor_name, ds.censored)):
        if arr.shape[0] != ds.n_rows:
            out.append(Violation(None, name, "target length mismatch"))
    if np.any(~np.isfinite(ds.target_months)):
        for i in np.flatnonzero(~np.isfinite(ds.target_months)):
            out.append(Violation(int(i), ds.target_name, "non-finite target"))
    return out
