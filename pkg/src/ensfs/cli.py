"""Config-driven command line around the pipeline.

Every knob lives in one YAML tree; flags override the file, and repeated
``--set dotted.key=value`` assignments override both.  The effective tree
is echoed into the output directory next to the tables it produced.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from .dataset import load_dataset, save_dataset
from .exceptions import ConfigError, EnsfsError
from .harness import (DEFAULT_MAX_S_VALUES, DEFAULT_W_VALUES, GridSpec,
                      HarnessSettings, evaluate_grid, make_folds,
                      run_experiment1, run_experiment2)
from .preprocessing import TablePreprocessor
from .reports import text_summary, write_report
from .synth import (BlockSpec, ClusterSpec, PlantedEffect, SynthSpec,
                    generate, ground_truth, default_profile)


def default_config() -> dict:
    return {
        "data": "data.csv",
        "meta": "data.meta.yaml",
        "outdir": "out",
        "seed": 0,
        "jobs": 1,
        "folds": {"k": 5, "seed": 0},
        "preprocessing": {
            "max_col_missing": 0.25,
            "block_row_threshold": 0.5,
            "impute_k": 5,
        },
        "ensemble": {
            "n_models": 100,
            "subsample_ratio": 0.75,
            "tau3": 0.975,
            "solver_tol": 1e-5,
            "solver_max_sweeps": 1000,
        },
        "predict": {"knn_k": 5},
        "grid": {
            "c": [1.0, 10.0, 100.0, 1000.0],
            "l1_ratio": [i / 10 for i in range(11)],
            "tau1": [i / 20 for i in range(21)],
            "tau2": [i / 20 for i in range(21)],
        },
        "prestudy": {"max_s": 20},
        "exp1": {"max_s_values": list(DEFAULT_MAX_S_VALUES)},
        "exp2": {
            "max_s": 20,
            "w_values": list(DEFAULT_W_VALUES),
            "elevated": [],
        },
        "synth": {
            "profile": "default",
            "seed": 0,
            "n_rows": None,
            "missing_rate": None,
            "noise_sd": None,
            "censor_prob": None,
            "n_junk_columns": 0,
            "n_corrupt_rows": 0,
            "blocks": None,
            "planted": None,
            "clusters": None,
        },
    }


def _merge(base: dict, override: dict, path: str = "") -> None:
    for key, value in override.items():
        here = f"{path}.{key}" if path else str(key)
        if key not in base:
            raise ConfigError(f"unknown config key: {here}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            _merge(base[key], value, here)
        else:
            base[key] = value


def _apply_set(cfg: dict, expr: str) -> None:
    if "=" not in expr:
        raise ConfigError(f"--set needs key=value, got {expr!r}")
    dotted, raw = expr.split("=", 1)
    keys = dotted.strip().split(".")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError:
        raise ConfigError(f"--set value for {dotted!r} is not valid YAML")
    node = cfg
    for i, key in enumerate(keys[:-1]):
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"unknown config key: {'.'.join(keys[:i + 1])}")
        if not isinstance(node[key], dict):
            raise ConfigError(
                f"config key {'.'.join(keys[:i + 1])} has no sub-keys")
        node = node[key]
    leaf = keys[-1]
    if leaf not in node:
        raise ConfigError(f"unknown config key: {dotted}")
    node[leaf] = value


def _yaml_error_text(err: yaml.YAMLError) -> str:
    mark = getattr(err, "problem_mark", None)
    problem = getattr(err, "problem", None) or str(err)
    if mark is not None:
        return f"line {mark.line + 1}, column {mark.column + 1}: {problem}"
    return str(err)


def load_config(args: argparse.Namespace) -> dict:
    cfg = default_config()
    if args.config is not None:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = yaml.safe_load(path.read_text())
        except yaml.YAMLError as err:
            raise ConfigError(f"{path}: {_yaml_error_text(err)}")
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        _merge(cfg, loaded)
    for name in ("data", "meta", "outdir", "seed", "jobs"):
        value = getattr(args, name, None)
        if value is not None:
            cfg[name] = value
    for expr in args.set or []:
        _apply_set(cfg, expr)
    return cfg


def _settings(cfg: dict) -> HarnessSettings:
    ens = cfg["ensemble"]
    prep = cfg["preprocessing"]
    return HarnessSettings(
        n_models=int(ens["n_models"]),
        subsample_ratio=float(ens["subsample_ratio"]),
        tau3=None if ens["tau3"] is None else float(ens["tau3"]),
        solver_tol=float(ens["solver_tol"]),
        solver_max_sweeps=int(ens["solver_max_sweeps"]),
        knn_k=int(cfg["predict"]["knn_k"]),
        max_col_missing=float(prep["max_col_missing"]),
        block_row_threshold=float(prep["block_row_threshold"]),
        impute_k=int(prep["impute_k"]),
        seed=int(cfg["seed"]),
    )


def _grid(cfg: dict) -> GridSpec:
    g = cfg["grid"]
    return GridSpec(
        c_values=tuple(float(v) for v in g["c"]),
        l1_values=tuple(float(v) for v in g["l1_ratio"]),
        tau1_values=tuple(float(v) for v in g["tau1"]),
        tau2_values=tuple(float(v) for v in g["tau2"]),
        tau3=(None if cfg["ensemble"]["tau3"] is None
              else float(cfg["ensemble"]["tau3"])),
    )


def _load(cfg: dict):
    ds = load_dataset(cfg["data"], cfg["meta"])
    plan = make_folds(ds.n_rows, int(cfg["folds"]["k"]),
                      int(cfg["folds"]["seed"]))
    return ds, plan


def _echo_config(cfg: dict, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config_echo.yaml").write_text(
        yaml.safe_dump(cfg, sort_keys=True))


def _synth_spec(cfg: dict) -> SynthSpec:
    sc = cfg["synth"]
    overrides = {}
    for key in ("n_rows", "missing_rate", "noise_sd", "censor_prob"):
        if sc[key] is not None:
            overrides[key] = sc[key]
    overrides["n_junk_columns"] = int(sc["n_junk_columns"])
    overrides["n_corrupt_rows"] = int(sc["n_corrupt_rows"])
    if sc["profile"] == "default":
        return default_profile(seed=int(sc["seed"]), **overrides)
    if sc["profile"] != "custom":
        raise ConfigError(f"unknown synth profile: {sc['profile']!r}")
    if not sc["blocks"]:
        raise ConfigError("custom synth profile needs synth.blocks")
    blocks = {}
    for name, bs in sc["blocks"].items():
        blocks[name] = BlockSpec(
            n_numeric=int(bs.get("n_numeric", 0)),
            nominal_levels=tuple(int(c) for c in bs.get("nominal_levels", [])),
            ordinal_levels=tuple(int(c) for c in bs.get("ordinal_levels", [])),
        )
    planted = tuple(
        PlantedEffect(p["name"], float(p["effect"]), int(p.get("sign", 1)))
        for p in (sc["planted"] or []))
    clusters = tuple(
        ClusterSpec(tuple(c["members"]), float(c["corr"]))
        for c in (sc["clusters"] or []))
    if sc["n_rows"] is None:
        raise ConfigError("custom synth profile needs synth.n_rows")
    return SynthSpec(
        n_rows=int(sc["n_rows"]),
        blocks=blocks,
        planted=planted,
        noise_sd=float(sc["noise_sd"] if sc["noise_sd"] is not None else 1.0),
        missing_rate=float(sc["missing_rate"]
                           if sc["missing_rate"] is not None else 0.05),
        clusters=clusters,
        censor_prob=float(sc["censor_prob"]
                          if sc["censor_prob"] is not None else 0.3),
        seed=int(sc["seed"]),
        n_junk_columns=int(sc["n_junk_columns"]),
        n_corrupt_rows=int(sc["n_corrupt_rows"]),
    )


def cmd_synth(cfg: dict) -> int:
    spec = _synth_spec(cfg)
    ds = generate(spec)
    data_path = Path(cfg["data"])
    meta_path = Path(cfg["meta"])
    data_path.parent.mkdir(parents=True, exist_ok=True)
    meta_path.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, data_path, meta_path)
    outdir = Path(cfg["outdir"]) / "synth"
    _echo_config(cfg, outdir)
    (outdir / "truth.yaml").write_text(
        yaml.safe_dump({"planted": list(ground_truth(spec))}))
    print(f"wrote {ds.n_rows} rows x {ds.n_features} features to {data_path}")
    return 0


def cmd_preprocess(cfg: dict) -> int:
    ds = load_dataset(cfg["data"], cfg["meta"])
    prep_cfg = cfg["preprocessing"]
    prep = TablePreprocessor(
        max_col_missing=float(prep_cfg["max_col_missing"]),
        block_row_threshold=float(prep_cfg["block_row_threshold"]),
        n_neighbors=int(prep_cfg["impute_k"]),
    )
    em = prep.fit_transform(ds)
    outdir = Path(cfg["outdir"]) / "preprocess"
    outdir.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(em.values, columns=list(em.names))
    frame.insert(0, "row", np.asarray(em.row_indices))
    frame.insert(1, "target", np.asarray(em.target))
    frame.to_csv(outdir / "encoded.csv", index=False, lineterminator="\n")
    prep.params_.to_yaml(outdir / "transform_params.yaml")
    dropped = pd.DataFrame(
        [{"column": name, "reason": reason}
         for name, reason in sorted(prep.dropped_columns_.items())])
    dropped.to_csv(outdir / "dropped_columns.csv", index=False,
                   lineterminator="\n")
    _echo_config(cfg, outdir)
    print(f"encoded {em.n_rows} rows x {em.n_columns} columns "
          f"({len(prep.dropped_columns_)} columns, "
          f"{len(prep.dropped_train_rows_)} rows dropped)")
    return 0


def cmd_prestudy(cfg: dict) -> int:
    ds, plan = _load(cfg)
    result = evaluate_grid(ds, plan, _grid(cfg), settings=_settings(cfg),
                           n_jobs=int(cfg["jobs"]))
    max_s = int(cfg["prestudy"]["max_s"])
    rows = []
    for fold in range(plan.n_folds):
        c = result.config_for(fold, max_s)
        rows.append({
            "fold": fold, "max_s": max_s, "C": c.C, "l1_ratio": c.l1_ratio,
            "tau1": c.tau1, "tau2": c.tau2, "tau3": c.tau3,
            "grid_index": c.grid_index, "feasible": c.feasible,
            "inner_rmse": result.mean_rmse[fold, c.grid_index],
            "inner_mean_size": result.mean_size[fold, c.grid_index],
        })
    outdir = Path(cfg["outdir"]) / "prestudy"
    outdir.mkdir(parents=True, exist_ok=True)
    table = pd.DataFrame(rows)
    table.to_csv(outdir / "configs.csv", index=False, lineterminator="\n")
    _echo_config(cfg, outdir)
    print(table.to_string(index=False))
    return 0


def cmd_exp1(cfg: dict) -> int:
    ds, plan = _load(cfg)
    settings = _settings(cfg)
    n_jobs = int(cfg["jobs"])
    report = run_experiment1(
        ds, plan, tuple(int(v) for v in cfg["exp1"]["max_s_values"]),
        grid=_grid(cfg), settings=settings, n_jobs=n_jobs)
    outdir = Path(cfg["outdir"]) / "exp1"
    write_report(report, outdir)
    _echo_config(cfg, outdir)
    print(text_summary(report), end="")
    return 0


def _elevated_names(cfg: dict) -> tuple[str, ...]:
    value = cfg["exp2"]["elevated"]
    if isinstance(value, str):
        path = Path(value)
        if not path.exists():
            raise ConfigError(f"elevated feature file not found: {path}")
        loaded = yaml.safe_load(path.read_text())
        if isinstance(loaded, dict):
            loaded = loaded.get("planted", [])
        value = loaded
    if not value:
        raise ConfigError("exp2.elevated must name at least one feature")
    return tuple(str(v) for v in value)


def cmd_exp2(cfg: dict) -> int:
    ds, plan = _load(cfg)
    report = run_experiment2(
        ds, plan, _elevated_names(cfg),
        tuple(float(w) for w in cfg["exp2"]["w_values"]),
        max_s=int(cfg["exp2"]["max_s"]), settings=_settings(cfg),
        n_jobs=int(cfg["jobs"]))
    outdir = Path(cfg["outdir"]) / "exp2"
    write_report(report, outdir)
    _echo_config(cfg, outdir)
    print(text_summary(report), end="")
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "preprocess": cmd_preprocess,
    "prestudy": cmd_prestudy,
    "exp1": cmd_exp1,
    "exp2": cmd_exp2,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ensfs",
        description="ensemble feature selection pipeline for small "
                    "mixed-type survival tables",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("synth", "generate a synthetic dataset with planted signal"),
        ("preprocess", "clean, impute, encode and transform a dataset"),
        ("prestudy", "nested grid search for ensemble hyperparameters"),
        ("exp1", "set-size sweep with both selectors"),
        ("exp2", "prior-weight sweep with the count-fusion selector"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="YAML config file")
        p.add_argument("--data", help="dataset CSV path")
        p.add_argument("--meta", help="metadata sidecar path")
        p.add_argument("--outdir", help="report output directory")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--jobs", type=int, help="parallel workers")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override any config key (dotted path)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except EnsfsError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # noqa: BLE001 - CLI boundary
        print(f"error: {err!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
