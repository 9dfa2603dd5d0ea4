"""Cross-validated experiment protocol around the two ensemble selectors.

The outer resampling is a seeded K-fold split.  Hyperparameter search for
the elastic-net ensemble nests inside each outer fold and reuses the other
outer folds as inner folds, so one preprocessing fit per (outer, inner)
pair serves the whole grid.  Two structural facts keep the search cheap:

* the threshold pair (tau1, tau2) only filters already-computed ensemble
  criteria, so elementary ensembles are fitted once per (outer, inner,
  C, l1_ratio) and all threshold combinations sweep the cached criteria;
* the greedy relevance-redundancy pick order is nested in k, so one order
  table per training partition serves every set-size cap and every prior
  weight level.

All parallel work units are independent and seeded; results are reduced
in submission order, so worker count never changes any output.  BLAS pools
are pinned to one thread inside units to keep reductions bit-stable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from threadpoolctl import threadpool_limits

from .dataset import MISSING_CODE, Dataset
from .encoding import TARGET_CUTOFFS
from .exceptions import ConfigError, EnsfsWarning, NoFeasibleConfigWarning
from .metrics import elevated_fraction, redundancy_rate, rmse
from .models import KNNRegressor, OLSRegressor
from .preprocessing import TablePreprocessor, run_pipeline
from .rent import ensemble_weights, select_features, selection_criteria, t_critical
from .ubayfs import (DEFAULT_PRIOR, elementary_selection_orders,
                     posterior_scores, select_top, selection_counts)

DEFAULT_MAX_S_VALUES = (5, 10, 15, 20, 25, 30)
DEFAULT_W_VALUES = (0.1, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0,
                    90.0, 100.0, 110.0)
RESIDUAL_OUTLIER_THRESHOLD = 2.5

_SEED_PRESTUDY = 1
_SEED_SELECT = 2


# ---------------------------------------------------------------------------
# fold plan

@dataclass(frozen=True)
class FoldPlan:
    """Per-row fold ids for one seeded K-fold split."""

    n_folds: int
    assignment: np.ndarray
    seed: int

    def __post_init__(self):
        self.assignment.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.assignment.shape[0]

    def test_rows(self, fold: int) -> np.ndarray:
        self._check_fold(fold)
        return np.flatnonzero(self.assignment == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        self._check_fold(fold)
        return np.flatnonzero(self.assignment != fold)

    def inner_train_rows(self, outer: int, inner: int) -> np.ndarray:
        self._check_fold(outer)
        self._check_fold(inner)
        return np.flatnonzero((self.assignment != outer)
                              & (self.assignment != inner))

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.n_folds)

    def _check_fold(self, fold: int) -> None:
        if not 0 <= fold < self.n_folds:
            raise ValueError(f"fold {fold} outside [0, {self.n_folds})")


def make_folds(n_rows: int, n_folds: int = 5, seed: int = 0) -> FoldPlan:
    """Shuffle rows once, then chunk contiguously into near-equal folds."""
    if n_folds < 2:
        raise ValueError(f"need at least 2 folds, got {n_folds}")
    if n_rows < n_folds:
        raise ValueError(f"{n_rows} rows cannot fill {n_folds} folds")
    perm = np.random.default_rng(seed).permutation(n_rows)
    base, extra = divmod(n_rows, n_folds)
    assignment = np.empty(n_rows, dtype=np.int64)
    start = 0
    for fold in range(n_folds):
        size = base + (1 if fold < extra else 0)
        assignment[perm[start:start + size]] = fold
        start += size
    return FoldPlan(n_folds=n_folds, assignment=assignment, seed=seed)


# ---------------------------------------------------------------------------
# hyperparameter grid

def _default_l1_values() -> tuple[float, ...]:
    return tuple(i / 10 for i in range(11))


def _default_tau_values() -> tuple[float, ...]:
    return tuple(i / 20 for i in range(21))


@dataclass(frozen=True)
class GridSpec:
    """Search space for the elastic-net ensemble hyperparameters."""

    c_values: tuple[float, ...] = (1.0, 10.0, 100.0, 1000.0)
    l1_values: tuple[float, ...] = ()
    tau1_values: tuple[float, ...] = ()
    tau2_values: tuple[float, ...] = ()
    tau3: float | None = 0.975

    def __post_init__(self):
        if not self.l1_values:
            object.__setattr__(self, "l1_values", _default_l1_values())
        if not self.tau1_values:
            object.__setattr__(self, "tau1_values", _default_tau_values())
        if not self.tau2_values:
            object.__setattr__(self, "tau2_values", _default_tau_values())
        if not self.c_values:
            raise ConfigError("grid needs at least one C value")

    @property
    def n_points(self) -> int:
        return (len(self.c_values) * len(self.l1_values)
                * len(self.tau1_values) * len(self.tau2_values))

    def tau_pairs(self) -> list[tuple[float, float]]:
        return [(t1, t2) for t1 in self.tau1_values for t2 in self.tau2_values]

    def point(self, index: int) -> tuple[float, float, float, float]:
        """(C, l1_ratio, tau1, tau2) at a flat grid index."""
        if not 0 <= index < self.n_points:
            raise ValueError(f"grid index {index} out of range")
        n2 = len(self.tau2_values)
        n1 = len(self.tau1_values)
        nl = len(self.l1_values)
        index, t2 = divmod(index, n2)
        index, t1 = divmod(index, n1)
        ci, li = divmod(index, nl)
        return (self.c_values[ci], self.l1_values[li],
                self.tau1_values[t1], self.tau2_values[t2])


@dataclass(frozen=True)
class RentConfig:
    """One resolved hyperparameter setting for the elastic-net ensemble."""

    C: float
    l1_ratio: float
    tau1: float
    tau2: float
    tau3: float | None = 0.975
    grid_index: int = -1
    feasible: bool = True


@dataclass(frozen=True)
class HarnessSettings:
    """Knobs shared by the grid search and both experiments."""

    n_models: int = 100
    subsample_ratio: float = 0.75
    tau3: float | None = 0.975
    solver_tol: float = 1e-5
    solver_max_sweeps: int = 1000
    knn_k: int = 5
    max_col_missing: float = 0.25
    block_row_threshold: float = 0.5
    impute_k: int = 5
    seed: int = 0


def _unit_seed(*parts: int) -> int:
    entropy = [int(p) % (2 ** 32) for p in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def _prep_split(ds: Dataset, train_rows, test_rows, s: HarnessSettings):
    train_em, test_em, _ = run_pipeline(
        ds, train_rows, test_rows,
        max_col_missing=s.max_col_missing,
        block_row_threshold=s.block_row_threshold,
        n_neighbors=s.impute_k,
    )
    return train_em, test_em


def _holdout_rmse(X_tr, y_tr, X_te, y_te, mask) -> float:
    if not mask.any():
        pred = np.full(y_te.shape, float(y_tr.mean()))
    else:
        model = OLSRegressor().fit(X_tr[:, mask], y_tr)
        pred = model.predict(X_te[:, mask])
    return rmse(y_te, pred)


def _grid_unit(X_tr, y_tr, X_te, y_te, C, l1_ratio, tau_pairs, tau3, seed,
               s: HarnessSettings):
    """Sweep every (tau1, tau2) over one fitted ensemble; cache by mask."""
    with threadpool_limits(limits=1, user_api="blas"):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EnsfsWarning)
            weights, _, _ = ensemble_weights(
                X_tr, y_tr, n_models=s.n_models,
                subsample_ratio=s.subsample_ratio, C=C, l1_ratio=l1_ratio,
                seed=seed, solver_tol=s.solver_tol,
                solver_max_sweeps=s.solver_max_sweeps,
            )
            c1, c2, t_stat = selection_criteria(weights)
            t_crit = (t_critical(tau3, weights.shape[0])
                      if tau3 is not None else None)
            n = len(tau_pairs)
            rmse_out = np.empty(n)
            size_out = np.empty(n, dtype=np.int64)
            seen: dict[bytes, float] = {}
            for i, (t1, t2) in enumerate(tau_pairs):
                mask = select_features(c1, c2, t_stat, min_nonzero_frac=t1,
                                       min_sign_stability=t2, t_crit=t_crit)
                key = mask.tobytes()
                if key not in seen:
                    seen[key] = _holdout_rmse(X_tr, y_tr, X_te, y_te, mask)
                rmse_out[i] = seen[key]
                size_out[i] = int(mask.sum())
    return rmse_out, size_out


@dataclass
class PrestudyResult:
    """Inner-CV aggregates for every grid point, one row block per fold."""

    grid: GridSpec
    mean_rmse: np.ndarray   # (n_folds, n_points)
    mean_size: np.ndarray
    max_size: np.ndarray

    @property
    def n_folds(self) -> int:
        return self.mean_rmse.shape[0]

    def config_for(self, fold: int, max_s: int) -> RentConfig:
        """Best feasible grid point for one outer fold at a set-size cap."""
        if max_s < 1:
            raise ConfigError(f"max_s must be >= 1, got {max_s}")
        feasible = self.max_size[fold] <= max_s
        if feasible.any():
            pool = np.flatnonzero(feasible)
            flag = True
        else:
            warnings.warn(
                f"no grid point kept every inner selection within {max_s} "
                f"features on fold {fold}; relaxing to the smallest overshoot",
                NoFeasibleConfigWarning,
            )
            overshoot = self.max_size[fold]
            pool = np.flatnonzero(overshoot == overshoot.min())
            flag = False
        order = np.lexsort((pool, self.mean_size[fold][pool],
                            self.mean_rmse[fold][pool]))
        best = int(pool[order[0]])
        C, l1_ratio, tau1, tau2 = self.grid.point(best)
        return RentConfig(C=C, l1_ratio=l1_ratio, tau1=tau1, tau2=tau2,
                          tau3=self.grid.tau3, grid_index=best, feasible=flag)


def evaluate_grid(ds: Dataset, plan: FoldPlan, grid: GridSpec | None = None,
                  *, settings: HarnessSettings | None = None,
                  n_jobs: int = 1) -> PrestudyResult:
    """Inner-CV scores for every grid point and outer fold."""
    grid = grid if grid is not None else GridSpec()
    s = settings if settings is not None else HarnessSettings()
    tau_pairs = grid.tau_pairs()
    n_tau = len(tau_pairs)
    n_cl = len(grid.c_values) * len(grid.l1_values)

    splits = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EnsfsWarning)
        for outer in range(plan.n_folds):
            for inner in range(plan.n_folds):
                if inner == outer:
                    continue
                train_em, test_em = _prep_split(
                    ds, plan.inner_train_rows(outer, inner),
                    plan.test_rows(inner), s)
                splits.append((outer, inner,
                               train_em.values, train_em.target.astype(float),
                               test_em.values, test_em.target.astype(float)))

    tasks = []
    for outer, inner, X_tr, y_tr, X_te, y_te in splits:
        seed = _unit_seed(s.seed, _SEED_PRESTUDY, outer, inner)
        for C in grid.c_values:
            for l1_ratio in grid.l1_values:
                tasks.append((outer, X_tr, y_tr, X_te, y_te, C, l1_ratio,
                              seed))
    results = Parallel(n_jobs=n_jobs)(
        delayed(_grid_unit)(X_tr, y_tr, X_te, y_te, C, l1_ratio, tau_pairs,
                            grid.tau3, seed, s)
        for (_, X_tr, y_tr, X_te, y_te, C, l1_ratio, seed) in tasks)

    n_points = grid.n_points
    sum_rmse = np.zeros((plan.n_folds, n_points))
    sum_size = np.zeros((plan.n_folds, n_points))
    max_size = np.zeros((plan.n_folds, n_points), dtype=np.int64)
    n_inner = np.zeros(plan.n_folds, dtype=np.int64)
    for task, (rmse_vec, size_vec) in zip(tasks, results):
        outer = task[0]
        C, l1_ratio = task[5], task[6]
        ci = grid.c_values.index(C)
        li = grid.l1_values.index(l1_ratio)
        start = (ci * len(grid.l1_values) + li) * n_tau
        sl = slice(start, start + n_tau)
        sum_rmse[outer, sl] += rmse_vec
        sum_size[outer, sl] += size_vec
        np.maximum(max_size[outer, sl], size_vec, out=max_size[outer, sl])
    # every (C, l1_ratio) block appears once per inner fold
    for outer in range(plan.n_folds):
        n_inner[outer] = sum(1 for t in tasks if t[0] == outer) // n_cl
    mean_rmse = sum_rmse / n_inner[:, None]
    mean_size = sum_size / n_inner[:, None]
    return PrestudyResult(grid=grid, mean_rmse=mean_rmse,
                          mean_size=mean_size, max_size=max_size)


def prestudy_grid_search(ds: Dataset, plan: FoldPlan,
                         grid: GridSpec | None = None, max_s: int = 20, *,
                         settings: HarnessSettings | None = None,
                         n_jobs: int = 1) -> list[RentConfig]:
    """Per-outer-fold best hyperparameters at one set-size cap."""
    result = evaluate_grid(ds, plan, grid, settings=settings, n_jobs=n_jobs)
    return [result.config_for(fold, max_s) for fold in range(plan.n_folds)]


# ---------------------------------------------------------------------------
# experiment records

@dataclass
class FoldRecord:
    """Everything one (selector, setting, fold) cell contributes to reports."""

    experiment: str
    selector: str
    setting: float
    fold: int
    n_candidates: int
    selected_names: tuple[str, ...]
    selected_sources: tuple[str, ...]
    coefs: np.ndarray
    rmse_linear: float
    rmse_knn: float
    red: float
    perc: float
    feasible: bool
    config: RentConfig | None
    test_rows: np.ndarray
    y_true: np.ndarray
    pred_linear: np.ndarray
    pred_knn: np.ndarray


@dataclass
class ExperimentReport:
    name: str
    setting_label: str
    records: list[FoldRecord]
    universe_names: tuple[str, ...]
    universe_sources: tuple[str, ...]
    n_folds: int

    def settings_swept(self) -> list[float]:
        out: list[float] = []
        for rec in self.records:
            if rec.setting not in out:
                out.append(rec.setting)
        return out

    def selectors(self) -> list[str]:
        out: list[str] = []
        for rec in self.records:
            if rec.selector not in out:
                out.append(rec.selector)
        return out


def _downstream(experiment, selector, setting, fold, config, mask, em_tr,
                em_te, elevated_idx, feasible, s: HarnessSettings
                ) -> FoldRecord:
    X_tr = em_tr.values
    y_tr = em_tr.target.astype(float)
    X_te = em_te.values
    y_te = em_te.target.astype(float)
    idx = np.flatnonzero(mask)
    if idx.size:
        linear = OLSRegressor().fit(X_tr[:, idx], y_tr)
        knn = KNNRegressor(n_neighbors=s.knn_k).fit(X_tr[:, idx], y_tr)
        pred_lin = linear.predict(X_te[:, idx])
        pred_knn = knn.predict(X_te[:, idx])
        coefs = linear.coef_.copy()
    else:
        mean = float(y_tr.mean())
        pred_lin = np.full(y_te.shape, mean)
        pred_knn = np.full(y_te.shape, mean)
        coefs = np.empty(0)
    red = redundancy_rate(X_tr, idx)
    if elevated_idx is None or idx.size == 0:
        perc = float("nan")
    else:
        perc = elevated_fraction(idx.tolist(), elevated_idx.tolist())
    names = em_tr.names
    sources = em_tr.sources
    return FoldRecord(
        experiment=experiment, selector=selector, setting=setting, fold=fold,
        n_candidates=X_tr.shape[1],
        selected_names=tuple(names[j] for j in idx),
        selected_sources=tuple(sources[j] for j in idx),
        coefs=coefs,
        rmse_linear=rmse(y_te, pred_lin), rmse_knn=rmse(y_te, pred_knn),
        red=red, perc=perc, feasible=feasible, config=config,
        test_rows=np.asarray(em_te.row_indices),
        y_true=y_te, pred_linear=pred_lin, pred_knn=pred_knn,
    )


def _universe(per_fold_columns) -> tuple[tuple[str, ...], tuple[str, ...]]:
    names: list[str] = []
    sources: list[str] = []
    seen: set[str] = set()
    for fold_names, fold_sources in per_fold_columns:
        for name, source in zip(fold_names, fold_sources):
            if name not in seen:
                seen.add(name)
                names.append(name)
                sources.append(source)
    return tuple(names), tuple(sources)


# ---------------------------------------------------------------------------
# experiment 1: set-size sweep with both selectors

def _exp1_fold(ds, plan, fold, max_s_values, fold_configs, s: HarnessSettings):
    with threadpool_limits(limits=1, user_api="blas"):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EnsfsWarning)
            em_tr, em_te = _prep_split(ds, plan.train_rows(fold),
                                       plan.test_rows(fold), s)
            X_tr = em_tr.values
            y_tr = em_tr.target.astype(float)
            n_cols = X_tr.shape[1]
            seed = _unit_seed(s.seed, _SEED_SELECT, fold)
            records: list[FoldRecord] = []

            crit_cache: dict[tuple[float, float], tuple] = {}
            for max_s in max_s_values:
                cfg = fold_configs[max_s]
                key = (cfg.C, cfg.l1_ratio)
                if key not in crit_cache:
                    weights, _, _ = ensemble_weights(
                        X_tr, y_tr, n_models=s.n_models,
                        subsample_ratio=s.subsample_ratio, C=cfg.C,
                        l1_ratio=cfg.l1_ratio, seed=seed,
                        solver_tol=s.solver_tol,
                        solver_max_sweeps=s.solver_max_sweeps,
                    )
                    crit_cache[key] = (*selection_criteria(weights),
                                       weights.shape[0])
                c1, c2, t_stat, m_used = crit_cache[key]
                t_crit = (t_critical(cfg.tau3, m_used)
                          if cfg.tau3 is not None else None)
                mask = select_features(c1, c2, t_stat,
                                       min_nonzero_frac=cfg.tau1,
                                       min_sign_stability=cfg.tau2,
                                       t_crit=t_crit)
                records.append(_downstream(
                    "exp1", "rent", max_s, fold, cfg, mask, em_tr, em_te,
                    None, bool(mask.sum() <= max_s), s))

            k_cap = min(max(max_s_values), n_cols)
            orders, _ = elementary_selection_orders(
                X_tr, y_tr, k_max=k_cap, n_models=s.n_models,
                subsample_ratio=s.subsample_ratio, seed=seed)
            prior = np.full(n_cols, DEFAULT_PRIOR)
            for max_s in max_s_values:
                k = min(max_s, n_cols)
                counts = selection_counts(orders, n_cols, k=k)
                scores = posterior_scores(counts, prior)
                mask = select_top(scores, counts, k)
                records.append(_downstream(
                    "exp1", "ubayfs", max_s, fold, None, mask, em_tr, em_te,
                    None, True, s))
    return records, (em_tr.names, em_tr.sources)


def run_experiment1(ds: Dataset, plan: FoldPlan,
                    max_s_values=DEFAULT_MAX_S_VALUES, *,
                    prestudy: PrestudyResult | None = None,
                    grid: GridSpec | None = None,
                    settings: HarnessSettings | None = None,
                    n_jobs: int = 1) -> ExperimentReport:
    """Both selectors at each set-size cap, on each outer fold."""
    s = settings if settings is not None else HarnessSettings()
    max_s_values = tuple(int(v) for v in max_s_values)
    if not max_s_values or min(max_s_values) < 1:
        raise ConfigError("max_s_values must be positive integers")
    if prestudy is None:
        prestudy = evaluate_grid(ds, plan, grid, settings=s, n_jobs=n_jobs)
    configs = {fold: {max_s: prestudy.config_for(fold, max_s)
                      for max_s in max_s_values}
               for fold in range(plan.n_folds)}
    outputs = Parallel(n_jobs=n_jobs)(
        delayed(_exp1_fold)(ds, plan, fold, max_s_values, configs[fold], s)
        for fold in range(plan.n_folds))
    records: list[FoldRecord] = []
    for fold_records, _ in outputs:
        records.extend(fold_records)
    names, sources = _universe(cols for _, cols in outputs)
    # order rows by selector then setting then fold for stable reports
    records.sort(key=lambda r: (r.selector, r.setting, r.fold))
    return ExperimentReport(name="exp1", setting_label="max_s",
                            records=records, universe_names=names,
                            universe_sources=sources, n_folds=plan.n_folds)


# ---------------------------------------------------------------------------
# experiment 2: prior weight sweep for the count-fusion selector

def elevated_mask(names, sources, elevated) -> np.ndarray:
    """Columns whose own name or source feature is in the elevated set."""
    elev = set(elevated)
    return np.array([n in elev or s in elev
                     for n, s in zip(names, sources)], dtype=bool)


def _exp2_fold(ds, plan, fold, elevated, w_values, max_s,
               s: HarnessSettings):
    with threadpool_limits(limits=1, user_api="blas"):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EnsfsWarning)
            em_tr, em_te = _prep_split(ds, plan.train_rows(fold),
                                       plan.test_rows(fold), s)
            X_tr = em_tr.values
            y_tr = em_tr.target.astype(float)
            n_cols = X_tr.shape[1]
            elev = elevated_mask(em_tr.names, em_tr.sources, elevated)
            if not elev.any():
                raise ConfigError(
                    "no encoded column matches the elevated feature set")
            elev_idx = np.flatnonzero(elev)
            seed = _unit_seed(s.seed, _SEED_SELECT, fold)
            k = min(max_s, n_cols)
            orders, _ = elementary_selection_orders(
                X_tr, y_tr, k_max=k, n_models=s.n_models,
                subsample_ratio=s.subsample_ratio, seed=seed)
            counts = selection_counts(orders, n_cols, k=k)
            records: list[FoldRecord] = []
            for w in w_values:
                prior = np.where(elev, float(w), DEFAULT_PRIOR)
                scores = posterior_scores(counts, prior)
                mask = select_top(scores, counts, k)
                records.append(_downstream(
                    "exp2", "ubayfs", float(w), fold, None, mask, em_tr,
                    em_te, elev_idx, True, s))
    return records, (em_tr.names, em_tr.sources)


def run_experiment2(ds: Dataset, plan: FoldPlan, elevated,
                    w_values=DEFAULT_W_VALUES, *, max_s: int = 20,
                    settings: HarnessSettings | None = None,
                    n_jobs: int = 1) -> ExperimentReport:
    """Prior-weight sweep at a fixed set-size cap, count-fusion selector."""
    s = settings if settings is not None else HarnessSettings()
    elevated = tuple(elevated)
    if not elevated:
        raise ConfigError("elevated feature set must be non-empty")
    if max_s < 1:
        raise ConfigError(f"max_s must be >= 1, got {max_s}")
    w_values = tuple(float(w) for w in w_values)
    if not w_values or min(w_values) <= 0:
        raise ConfigError("prior weights must be positive")
    outputs = Parallel(n_jobs=n_jobs)(
        delayed(_exp2_fold)(ds, plan, fold, elevated, w_values, max_s, s)
        for fold in range(plan.n_folds))
    records: list[FoldRecord] = []
    for fold_records, _ in outputs:
        records.extend(fold_records)
    names, sources = _universe(cols for _, cols in outputs)
    records.sort(key=lambda r: (r.selector, r.setting, r.fold))
    return ExperimentReport(name="exp2", setting_label="w", records=records,
                            universe_names=names, universe_sources=sources,
                            n_folds=plan.n_folds)


# ---------------------------------------------------------------------------
# residuals

def residual_report(y, yhat, outlier_threshold: float = RESIDUAL_OUTLIER_THRESHOLD
                    ) -> dict:
    """Residuals (true minus predicted) and rows beyond the outlier bound."""
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape:
        raise ValueError(f"shape mismatch: {y.shape} vs {yhat.shape}")
    residuals = y - yhat
    outliers = np.flatnonzero(np.abs(residuals) > outlier_threshold)
    return {"residuals": residuals, "outliers": outliers}


# ---------------------------------------------------------------------------
# leakage instrumentation

_BUCKET_MIDPOINTS = (6.0, 18.0, 30.0, 42.0, 54.0, 66.0)


def perturb_rows(ds: Dataset, rows) -> Dataset:
    """Rewrite the given rows' values while preserving all missingness.

    Numeric cells shift affinely, categorical codes reverse within their
    level range, and targets move to their bucket midpoint, so the rows
    stay valid but carry different values.  Any fitted parameter that
    reacts to this rewrite must have read those rows.
    """
    rows = np.asarray(rows, dtype=np.intp)
    new_columns = []
    for j, meta in enumerate(ds.features):
        col = ds.columns[j].copy()
        if meta.kind == "numeric":
            col[rows] = 2.0 * col[rows] + 1.0
        else:
            codes = col[rows]
            observed = codes != MISSING_CODE
            codes[observed] = (meta.n_levels - 1) - codes[observed]
            col[rows] = codes
        new_columns.append(col)
    months = ds.target_months.copy()
    bucket = np.searchsorted(np.asarray(TARGET_CUTOFFS), months[rows],
                             side="left")
    months[rows] = np.asarray(_BUCKET_MIDPOINTS)[bucket]
    return ds.replace(columns=tuple(new_columns), target_months=months)


def _fit_side_state(ds: Dataset, train_rows, fold, rent_configs, max_s,
                    elevated, s: HarnessSettings) -> dict[str, bytes]:
    """Byte snapshots of every parameter fitted from the training partition."""
    state: dict[str, bytes] = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EnsfsWarning)
        prep = TablePreprocessor(
            max_col_missing=s.max_col_missing,
            block_row_threshold=s.block_row_threshold,
            n_neighbors=s.impute_k,
        ).fit(ds, rows=train_rows)
        state["dropped_columns"] = repr(sorted(prep.dropped_columns_)).encode()
        state["dropped_rows"] = np.asarray(prep.dropped_train_rows_).tobytes()
        state["transform_params"] = repr(prep.params_.to_dict()).encode()
        em_tr = prep.transform(ds, rows=train_rows)
        state["train_matrix"] = em_tr.values.tobytes()
        state["train_columns"] = "|".join(em_tr.names).encode()
        X_tr = em_tr.values
        y_tr = em_tr.target.astype(float)
        state["train_target"] = y_tr.tobytes()

        seen: set[tuple[float, float]] = set()
        for cfg in rent_configs:
            key = (cfg.C, cfg.l1_ratio)
            if key in seen:
                continue
            seen.add(key)
            weights, _, _ = ensemble_weights(
                X_tr, y_tr, n_models=s.n_models,
                subsample_ratio=s.subsample_ratio, C=cfg.C,
                l1_ratio=cfg.l1_ratio,
                seed=_unit_seed(s.seed, _SEED_SELECT, fold),
                solver_tol=s.solver_tol,
                solver_max_sweeps=s.solver_max_sweeps,
            )
            state[f"ensemble_weights_C{cfg.C}_l1{cfg.l1_ratio}"] = \
                weights.tobytes()
            c1, c2, t_stat = selection_criteria(weights)
            t_crit = (t_critical(cfg.tau3, weights.shape[0])
                      if cfg.tau3 is not None else None)
            mask = select_features(c1, c2, t_stat, min_nonzero_frac=cfg.tau1,
                                   min_sign_stability=cfg.tau2, t_crit=t_crit)
            idx = np.flatnonzero(mask)
            if idx.size:
                linear = OLSRegressor().fit(X_tr[:, idx], y_tr)
                state[f"linear_coefs_C{cfg.C}_l1{cfg.l1_ratio}"] = \
                    np.concatenate([[linear.intercept_], linear.coef_]).tobytes()

        k = min(max_s, X_tr.shape[1])
        orders, _ = elementary_selection_orders(
            X_tr, y_tr, k_max=k, n_models=s.n_models,
            subsample_ratio=s.subsample_ratio,
            seed=_unit_seed(s.seed, _SEED_SELECT, fold))
        state["selection_orders"] = orders.tobytes()
        counts = selection_counts(orders, X_tr.shape[1], k=k)
        state["selection_counts"] = counts.tobytes()
        if elevated:
            elev = elevated_mask(em_tr.names, em_tr.sources, elevated)
            prior = np.where(elev, 110.0, DEFAULT_PRIOR)
            mask = select_top(posterior_scores(counts, prior), counts, k)
            idx = np.flatnonzero(mask)
            linear = OLSRegressor().fit(X_tr[:, idx], y_tr)
            state["elevated_linear_coefs"] = \
                np.concatenate([[linear.intercept_], linear.coef_]).tobytes()
        knn = KNNRegressor(n_neighbors=s.knn_k).fit(X_tr, y_tr)
        state["knn_train"] = knn.X_.tobytes() + knn.y_.tobytes()
    return state


def check_leakage(ds: Dataset, plan: FoldPlan, *,
                  rent_configs_per_fold=None, max_s: int = 20,
                  elevated=(), settings: HarnessSettings | None = None
                  ) -> list[str]:
    """Refits every fold with its test rows rewritten; reports any change.

    Returns one message per fitted parameter that differs between the
    original and the rewritten run; an empty list means no test-row value
    reached any fit.
    """
    s = settings if settings is not None else HarnessSettings()
    violations: list[str] = []
    for fold in range(plan.n_folds):
        configs = (rent_configs_per_fold[fold]
                   if rent_configs_per_fold is not None
                   else [RentConfig(C=1.0, l1_ratio=0.3, tau1=0.3, tau2=0.3,
                                    tau3=s.tau3)])
        train_rows = plan.train_rows(fold)
        baseline = _fit_side_state(ds, train_rows, fold, configs, max_s,
                                   elevated, s)
        perturbed_ds = perturb_rows(ds, plan.test_rows(fold))
        rerun = _fit_side_state(perturbed_ds, train_rows, fold, configs,
                                max_s, elevated, s)
        for key in baseline:
            if baseline[key] != rerun.get(key):
                violations.append(f"fold {fold}: {key} depends on test rows")
        extra = set(rerun) - set(baseline)
        for key in sorted(extra):
            violations.append(f"fold {fold}: {key} appeared only in rerun")
    return violations
