"""Synthetic mixed-type survival-bucket datasets with planted signal.

Every feature is driven by a latent standard-normal column.  Correlation
clusters mix a shared factor into their members' latents.  Numeric features
are affine (every fourth one monotone-skewed) images of their latent,
categorical features discretize theirs at equiprobable cutpoints.  The
continuous target is a linear combination of the planted features' latents
plus Gaussian noise, mapped affinely to a months scale that populates all
six target buckets; censoring only ever flags months beyond 60.  Junk
columns (heavy missingness) and corrupt rows (one block fully missing) can
be appended to exercise the cleaning steps.  Everything is drawn from one
seeded generator, so a spec maps to exactly one dataset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .dataset import MISSING_CODE, Dataset, FeatureMeta
from .exceptions import InfeasibleSpec

JUNK_MISSING_RATE = 0.5


@dataclass(frozen=True)
class PlantedEffect:
    """One feature contributing ``sign * effect`` (in noise-SD units)."""

    name: str
    effect: float
    sign: int = 1


@dataclass(frozen=True)
class ClusterSpec:
    """Features sharing a latent factor with target absolute correlation."""

    members: tuple[str, ...]
    corr: float


@dataclass(frozen=True)
class BlockSpec:
    """Feature counts of one block: numerics plus per-feature level counts."""

    n_numeric: int = 0
    nominal_levels: tuple[int, ...] = ()
    ordinal_levels: tuple[int, ...] = ()


@dataclass(frozen=True)
class SynthSpec:
    n_rows: int
    blocks: dict[str, BlockSpec]
    planted: tuple[PlantedEffect, ...] = ()
    noise_sd: float = 1.0
    missing_rate: float = 0.05
    clusters: tuple[ClusterSpec, ...] = ()
    censor_prob: float = 0.3
    seed: int = 0
    n_junk_columns: int = 0
    n_corrupt_rows: int = 0


def _real_features(spec: SynthSpec) -> list[FeatureMeta]:
    metas: list[FeatureMeta] = []
    for block, bs in spec.blocks.items():
        for i in range(bs.n_numeric):
            metas.append(FeatureMeta(f"{block}_num{i + 1}", "numeric", block))
        for i, c in enumerate(bs.nominal_levels):
            levels = tuple(chr(65 + l) for l in range(c))
            metas.append(FeatureMeta(f"{block}_nom{i + 1}", "nominal", block, levels))
        for i, c in enumerate(bs.ordinal_levels):
            levels = tuple(str(l) for l in range(c))
            metas.append(FeatureMeta(f"{block}_ord{i + 1}", "ordinal", block, levels))
    return metas


def feature_names(spec: SynthSpec) -> tuple[str, ...]:
    """Names of the real (non-junk) features, in table order."""
    return tuple(m.name for m in _real_features(spec))


def encoded_width(spec: SynthSpec) -> int:
    """Number of encoded columns the real features produce."""
    width = 0
    for bs in spec.blocks.values():
        width += bs.n_numeric
        width += sum(c - 1 for c in bs.nominal_levels)
        width += sum(c - 1 for c in bs.ordinal_levels)
    return width


def ground_truth(spec: SynthSpec) -> tuple[str, ...]:
    """Planted source-feature names."""
    return tuple(p.name for p in spec.planted)


def _validate(spec: SynthSpec, metas: list[FeatureMeta]) -> None:
    if spec.n_rows < 2:
        raise InfeasibleSpec(f"need at least 2 rows, got {spec.n_rows}")
    if not metas:
        raise InfeasibleSpec("spec declares no features")
    if not 0.0 <= spec.missing_rate < 1.0:
        raise InfeasibleSpec(f"missing_rate {spec.missing_rate} outside [0, 1)")
    if spec.noise_sd < 0.0:
        raise InfeasibleSpec("noise_sd must be nonnegative")
    names = {m.name for m in metas}
    for p in spec.planted:
        if p.name not in names:
            raise InfeasibleSpec(f"planted feature {p.name!r} is not generated")
        if p.effect < 0.0:
            raise InfeasibleSpec(f"planted effect for {p.name!r} must be >= 0")
        if p.sign not in (-1, 1):
            raise InfeasibleSpec(f"planted sign for {p.name!r} must be +-1")
    for cl in spec.clusters:
        if not 0.0 <= cl.corr < 1.0:
            raise InfeasibleSpec(f"cluster corr {cl.corr} outside [0, 1)")
        for name in cl.members:
            if name not in names:
                raise InfeasibleSpec(f"cluster member {name!r} is not generated")
    for bs in spec.blocks.values():
        for c in (*bs.nominal_levels, *bs.ordinal_levels):
            if c < 2:
                raise InfeasibleSpec("categorical features need >= 2 levels")
    if spec.n_corrupt_rows >= spec.n_rows:
        raise InfeasibleSpec("corrupt rows would consume the whole table")
    if not 0.0 <= spec.censor_prob <= 1.0:
        raise InfeasibleSpec("censor_prob outside [0, 1]")


def generate(spec: SynthSpec) -> Dataset:
    """Materialize a SynthSpec into a Dataset; deterministic per seed."""
    metas = _real_features(spec)
    _validate(spec, metas)
    rng = np.random.default_rng(spec.seed)
    m = spec.n_rows
    n_real = len(metas)
    name_to_idx = {meta.name: j for j, meta in enumerate(metas)}

    latent = rng.standard_normal((m, n_real))
    for cl in spec.clusters:
        shared = rng.standard_normal(m)
        for name in cl.members:
            j = name_to_idx[name]
            latent[:, j] = (np.sqrt(cl.corr) * shared
                            + np.sqrt(1.0 - cl.corr) * latent[:, j])

    columns: list[np.ndarray] = []
    numeric_counter = 0
    for j, meta in enumerate(metas):
        z = latent[:, j]
        if meta.kind == "numeric":
            scale = float(np.exp(rng.normal(0.0, 0.4)))
            shift = float(rng.normal(0.0, 5.0))
            numeric_counter += 1
            base = np.expm1(0.6 * z) if numeric_counter % 4 == 0 else z
            columns.append(shift + scale * base)
        else:
            c = meta.n_levels
            cuts = stats.norm.ppf(np.arange(1, c) / c)
            columns.append(np.searchsorted(cuts, z).astype(np.int64))

    signal = np.zeros(m)
    for p in spec.planted:
        signal += p.sign * p.effect * latent[:, name_to_idx[p.name]]
    t_cont = signal + spec.noise_sd * rng.standard_normal(m)
    sd = t_cont.std()
    t_std = (t_cont - t_cont.mean()) / sd if sd > 0 else np.zeros(m)
    months = np.clip(36.0 + 14.0 * t_std, 1.0, 71.0)
    censored = (months > 60.0) & (rng.random(m) < spec.censor_prob)

    if spec.missing_rate > 0.0:
        drop = rng.random((m, n_real)) < spec.missing_rate
        for j, meta in enumerate(metas):
            if meta.kind == "numeric":
                columns[j] = np.where(drop[:, j], np.nan, columns[j])
            else:
                columns[j] = np.where(drop[:, j], MISSING_CODE, columns[j])

    if spec.n_junk_columns > 0:
        block_names = list(spec.blocks.keys())
        junk_values = rng.standard_normal((m, spec.n_junk_columns))
        junk_drop = rng.random((m, spec.n_junk_columns)) < JUNK_MISSING_RATE
        for i in range(spec.n_junk_columns):
            block = block_names[i % len(block_names)]
            metas.append(FeatureMeta(f"{block}_junk{i + 1}", "numeric", block))
            columns.append(np.where(junk_drop[:, i], np.nan, junk_values[:, i]))

    if spec.n_corrupt_rows > 0:
        # blank out the largest block so the row trips the block threshold
        block_sizes: dict[str, int] = {}
        for meta in metas:
            block_sizes[meta.block] = block_sizes.get(meta.block, 0) + 1
        target_block = max(block_sizes, key=lambda b: (block_sizes[b], b))
        rows = rng.choice(m, size=spec.n_corrupt_rows, replace=False)
        for j, meta in enumerate(metas):
            if meta.block != target_block:
                continue
            col = columns[j].copy()
            col[rows] = np.nan if meta.kind == "numeric" else MISSING_CODE
            columns[j] = col

    return Dataset(
        features=tuple(metas),
        columns=tuple(np.ascontiguousarray(col) for col in columns),
        target_months=months,
        censored=censored,
    )


def default_profile(seed: int = 0, **overrides) -> SynthSpec:
    """A 63-row, five-block spec whose real features encode to 134 columns."""
    blocks = {
        "p": BlockSpec(n_numeric=4,
                       nominal_levels=(2,) * 13 + (3,) * 3,
                       ordinal_levels=(5,) + (3,) * 4),
        "b": BlockSpec(n_numeric=7, ordinal_levels=(3,) * 4),
        "h": BlockSpec(n_numeric=2,
                       nominal_levels=(2,) * 6 + (4,) * 4,
                       ordinal_levels=(4,) * 2),
        "i": BlockSpec(n_numeric=14, nominal_levels=(2,) + (4,) * 2),
        "t": BlockSpec(n_numeric=9,
                       nominal_levels=(2,) * 4 + (5,) * 3,
                       ordinal_levels=(4,) * 4),
    }
    planted = (
        PlantedEffect("p_num1", 1.4),
        PlantedEffect("p_ord1", 1.2),
        PlantedEffect("b_num1", 1.3, sign=-1),
        PlantedEffect("b_num2", 1.0),
        PlantedEffect("h_num1", 1.2),
        PlantedEffect("i_num1", 1.0, sign=-1),
        PlantedEffect("t_num1", 1.1),
        PlantedEffect("t_num2", 1.0),
    )
    clusters = (
        ClusterSpec(("b_num3", "b_num4", "b_num5"), 0.7),
        ClusterSpec(("i_num2", "i_num3", "i_num4", "i_num5"), 0.6),
    )
    defaults = dict(
        n_rows=63, blocks=blocks, planted=planted, noise_sd=1.0,
        missing_rate=0.02, clusters=clusters, censor_prob=0.3, seed=seed,
    )
    defaults.update(overrides)
    return SynthSpec(**defaults)
