"""Turn experiment records into the delimited report files and a summary.

All tables are emitted in a fixed order (selector, then swept setting,
then fold, then encoded-column order), so a rerun with the same inputs
writes byte-identical files regardless of worker count.
"""

from __future__ import annotations

import math
import warnings
from pathlib import Path

import numpy as np
import pandas as pd

from .exceptions import DegenerateStabilityWarning
from .harness import (RESIDUAL_OUTLIER_THRESHOLD, ExperimentReport,
                      residual_report)
from .metrics import selection_stability, sign_pattern


def _records_for(report: ExperimentReport, selector: str, setting: float):
    return [r for r in report.records
            if r.selector == selector and r.setting == setting]


def _config_stability(report: ExperimentReport, records) -> float:
    index = {name: i for i, name in enumerate(report.universe_names)}
    masks = []
    for rec in sorted(records, key=lambda r: r.fold):
        mask = np.zeros(len(index), dtype=bool)
        for name in rec.selected_names:
            mask[index[name]] = True
        masks.append(mask)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateStabilityWarning)
        return selection_stability(masks, len(index)).value


def aggregate_metrics(report: ExperimentReport) -> pd.DataFrame:
    """One row per (selector, setting): across-fold means, sd, stability."""
    rows = []
    for selector in report.selectors():
        for setting in report.settings_swept():
            recs = _records_for(report, selector, setting)
            if not recs:
                continue
            lin = np.array([r.rmse_linear for r in recs])
            knn = np.array([r.rmse_knn for r in recs])
            percs = np.array([r.perc for r in recs])
            have_perc = ~np.isnan(percs)
            rows.append({
                "selector": selector,
                report.setting_label: setting,
                "rmse_linear_mean": lin.mean(),
                "rmse_linear_sd": lin.std(ddof=1) if lin.size > 1 else 0.0,
                "rmse_knn_mean": knn.mean(),
                "rmse_knn_sd": knn.std(ddof=1) if knn.size > 1 else 0.0,
                "stability": _config_stability(report, recs),
                "red_mean": np.mean([r.red for r in recs]),
                "perc_mean": (percs[have_perc].mean()
                              if have_perc.any() else float("nan")),
                "mean_selected": np.mean([len(r.selected_names)
                                          for r in recs]),
            })
    return pd.DataFrame(rows)


def fold_metrics(report: ExperimentReport) -> pd.DataFrame:
    """One row per (selector, setting, fold) with the resolved config."""
    rows = []
    for rec in report.records:
        row = {
            "selector": rec.selector,
            report.setting_label: rec.setting,
            "fold": rec.fold,
            "n_candidates": rec.n_candidates,
            "n_selected": len(rec.selected_names),
            "feasible": rec.feasible,
            "rmse_linear": rec.rmse_linear,
            "rmse_knn": rec.rmse_knn,
            "red": rec.red,
            "perc": rec.perc,
        }
        if rec.config is not None:
            row.update({"C": rec.config.C, "l1_ratio": rec.config.l1_ratio,
                        "tau1": rec.config.tau1, "tau2": rec.config.tau2,
                        "tau3": rec.config.tau3})
        rows.append(row)
    return pd.DataFrame(rows)


def frequency_table(report: ExperimentReport) -> pd.DataFrame:
    """Per-column selection frequency and coefficient-sign pattern."""
    rows = []
    for selector in report.selectors():
        for setting in report.settings_swept():
            recs = sorted(_records_for(report, selector, setting),
                          key=lambda r: r.fold)
            if not recs:
                continue
            coefs_by_name: dict[str, list[float]] = {
                name: [] for name in report.universe_names}
            for rec in recs:
                for name, coef in zip(rec.selected_names, rec.coefs):
                    coefs_by_name[name].append(float(coef))
            for name, source in zip(report.universe_names,
                                    report.universe_sources):
                coefs = coefs_by_name[name]
                rows.append({
                    "selector": selector,
                    report.setting_label: setting,
                    "column": name,
                    "source": source,
                    "frequency": len(coefs),
                    "sign": sign_pattern(coefs),
                })
    return pd.DataFrame(rows)


def selected_sets_table(report: ExperimentReport) -> pd.DataFrame:
    """Every selected column with its downstream linear coefficient."""
    rows = []
    for rec in report.records:
        for name, source, coef in zip(rec.selected_names,
                                      rec.selected_sources, rec.coefs):
            rows.append({
                "selector": rec.selector,
                report.setting_label: rec.setting,
                "fold": rec.fold,
                "column": name,
                "source": source,
                "coef": float(coef),
            })
    return pd.DataFrame(
        rows, columns=["selector", report.setting_label, "fold", "column",
                       "source", "coef"])


def residual_table(report: ExperimentReport,
                   threshold: float = RESIDUAL_OUTLIER_THRESHOLD
                   ) -> pd.DataFrame:
    """Per-test-row residuals of both predictors, with outlier flags."""
    rows = []
    for rec in report.records:
        lin = residual_report(rec.y_true, rec.pred_linear, threshold)
        knn = residual_report(rec.y_true, rec.pred_knn, threshold)
        lin_out = set(lin["outliers"].tolist())
        knn_out = set(knn["outliers"].tolist())
        for i, row_idx in enumerate(rec.test_rows):
            rows.append({
                "selector": rec.selector,
                report.setting_label: rec.setting,
                "fold": rec.fold,
                "row": int(row_idx),
                "y_true": float(rec.y_true[i]),
                "pred_linear": float(rec.pred_linear[i]),
                "residual_linear": float(lin["residuals"][i]),
                "outlier_linear": i in lin_out,
                "pred_knn": float(rec.pred_knn[i]),
                "residual_knn": float(knn["residuals"][i]),
                "outlier_knn": i in knn_out,
            })
    return pd.DataFrame(rows)


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.3f}"


def text_summary(report: ExperimentReport) -> str:
    """One-screen digest: per-fold linear RMSE plus the aggregate table."""
    agg = aggregate_metrics(report)
    lines = [f"{report.name}: {report.n_folds} folds, "
             f"{len(report.universe_names)} encoded columns"]
    lines.append("")
    header = f"{'selector':8} {report.setting_label:>6} " + " ".join(
        f"{'fold' + str(k):>7}" for k in range(report.n_folds))
    lines.append("rmse (linear) per fold")
    lines.append(header)
    for selector in report.selectors():
        for setting in report.settings_swept():
            recs = sorted(_records_for(report, selector, setting),
                          key=lambda r: r.fold)
            if not recs:
                continue
            vals = " ".join(f"{r.rmse_linear:7.3f}" for r in recs)
            lines.append(f"{selector:8} {setting:6g} {vals}")
    lines.append("")
    lines.append(f"{'selector':8} {report.setting_label:>6} "
                 f"{'rmse_lin':>9} {'rmse_knn':>9} {'stability':>9} "
                 f"{'red':>6} {'perc':>6} {'mean|S|':>8}")
    for _, row in agg.iterrows():
        lines.append(
            f"{row['selector']:8} {row[report.setting_label]:6g} "
            f"{row['rmse_linear_mean']:9.3f} {row['rmse_knn_mean']:9.3f} "
            f"{row['stability']:9.3f} {_fmt(row['red_mean']):>6} "
            f"{_fmt(row['perc_mean']):>6} {row['mean_selected']:8.1f}")
    return "\n".join(lines) + "\n"


def write_report(report: ExperimentReport, outdir,
                 threshold: float = RESIDUAL_OUTLIER_THRESHOLD) -> list[Path]:
    """Write the four report tables plus the text summary; returns paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    tables = {
        "selection_frequencies.csv": frequency_table(report),
        "metrics.csv": aggregate_metrics(report),
        "metrics_by_fold.csv": fold_metrics(report),
        "selected_sets.csv": selected_sets_table(report),
        "residuals.csv": residual_table(report, threshold),
    }
    paths = []
    for name, frame in tables.items():
        path = outdir / name
        frame.to_csv(path, index=False, lineterminator="\n")
        paths.append(path)
    summary_path = outdir / "summary.txt"
    summary_path.write_text(text_summary(report))
    paths.append(summary_path)
    return paths
