"""Categorical and target encoders plus the encoded-matrix container.

A categorical feature with c declared levels becomes c-1 binary columns,
one per level from the highest down to the second; the lowest level is the
all-zero row and is absorbed by the model intercept.  One-hot columns flag
equality with their level, ordinal columns flag reaching it, so an ordinal
row always reads (0,...,0,1,...,1) in the stored layout.

The survival target is bucketed into six 12-month classes; censoring is
only admissible past the last cutoff and always maps to the top bucket.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import MISSING_CODE, FeatureMeta
from .exceptions import CensoredBelowCutoff, UnknownLevel

TARGET_CUTOFFS = (12.0, 24.0, 36.0, 48.0, 60.0)
N_TARGET_LEVELS = 6


@dataclass(frozen=True)
class EncodedColumn:
    """Provenance of one column of an encoded matrix."""

    name: str
    source: str
    kind: str  # "numeric" | "onehot" | "ordinal"
    level: str | None = None
    level_index: int | None = None  # 1-based position in the declared order


@dataclass(frozen=True, eq=False)
class EncodedMatrix:
    """Fully numeric design matrix with column provenance and encoded target."""

    values: np.ndarray
    columns: tuple[EncodedColumn, ...]
    target: np.ndarray
    row_indices: tuple[int, ...]

    def __post_init__(self) -> None:
        self.values.setflags(write=False)
        self.target.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_columns(self) -> int:
        return int(self.values.shape[1])

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    @property
    def sources(self) -> tuple[str, ...]:
        return tuple(c.source for c in self.columns)


def _check_codes(codes: np.ndarray, meta: FeatureMeta) -> np.ndarray:
    codes = np.asarray(codes)
    if np.any(codes == MISSING_CODE):
        raise UnknownLevel(f"feature {meta.name!r}: missing cells cannot be encoded")
    if np.any((codes < 0) | (codes >= meta.n_levels)):
        raise UnknownLevel(
            f"feature {meta.name!r}: level code outside the declared range"
        )
    return codes.astype(np.int64)


def _column_meta(meta: FeatureMeta, kind: str) -> tuple[EncodedColumn, ...]:
    # highest level first; the lowest level never gets a column
    return tuple(
        EncodedColumn(
            name=f"{meta.name}={meta.levels[idx]}",
            source=meta.name,
            kind=kind,
            level=meta.levels[idx],
            level_index=idx + 1,
        )
        for idx in range(meta.n_levels - 1, 0, -1)
    )


def encode_onehot(codes, meta: FeatureMeta) -> tuple[np.ndarray, tuple[EncodedColumn, ...]]:
    """Binary equality indicators for the levels c..2, highest first."""
    codes = _check_codes(codes, meta)
    cols = _column_meta(meta, "onehot")
    out = np.empty((codes.shape[0], meta.n_levels - 1))
    for j, col in enumerate(cols):
        out[:, j] = (codes == col.level_index - 1).astype(np.float64)
    return out, cols


def encode_ordinal(codes, meta: FeatureMeta) -> tuple[np.ndarray, tuple[EncodedColumn, ...]]:
    """Cumulative reached-this-level indicators, highest level first."""
    codes = _check_codes(codes, meta)
    cols = _column_meta(meta, "ordinal")
    out = np.empty((codes.shape[0], meta.n_levels - 1))
    for j, col in enumerate(cols):
        out[:, j] = (codes >= col.level_index - 1).astype(np.float64)
    return out, cols


def encode_target(months: float, censored: bool) -> int:
    """Map survival months to the 1..6 bucket scale.

    Censored observations are only valid beyond the last cutoff (60 months)
    and always land in bucket 6.
    """
    if censored:
        if months <= TARGET_CUTOFFS[-1]:
            raise CensoredBelowCutoff(
                f"censored observation at {months} months (cutoff "
                f"{TARGET_CUTOFFS[-1]})"
            )
        return N_TARGET_LEVELS
    for bucket, cutoff in enumerate(TARGET_CUTOFFS, start=1):
        if months <= cutoff:
            return bucket
    return N_TARGET_LEVELS


def encode_target_vector(months, censored) -> np.ndarray:
    months = np.asarray(months, dtype=np.float64)
    censored = np.asarray(censored, dtype=bool)
    return np.array(
        [encode_target(float(m), bool(c)) for m, c in zip(months, censored)],
        dtype=np.int64,
    )


def validate_encoded(em: EncodedMatrix) -> list[str]:
    """Structural checks on an encoded matrix; returns violation messages."""
    out: list[str] = []
    if np.any(~np.isfinite(em.values)):
        out.append("matrix contains non-finite cells")
    if not (em.target.min(initial=1) >= 1 and em.target.max(initial=1) <= 6):
        out.append("target outside the 1..6 bucket range")
    if len(em.row_indices) != em.n_rows:
        out.append("row provenance length mismatch")

    groups: dict[tuple[str, str], list[int]] = {}
    for j, col in enumerate(em.columns):
        if col.kind in ("onehot", "ordinal"):
            groups.setdefault((col.source, col.kind), []).append(j)
    for (source, kind), idx in groups.items():
        block = em.values[:, idx]
        if not np.all((block == 0.0) | (block == 1.0)):
            out.append(f"{source}: non-binary cell in encoded group")
            continue
        if kind == "onehot":
            if np.any(block.sum(axis=1) > 1):
                out.append(f"{source}: more than one active one-hot bit in a row")
        else:
            # stored highest-level first, so bits must be nondecreasing
            if np.any(np.diff(block, axis=1) < 0):
                out.append(f"{source}: ordinal row is not of the 0..0 1..1 form")
    return out
