"""End-to-end command line tests driving ``ensfs.cli.main`` in-process."""

import filecmp
from pathlib import Path

import pandas as pd
import pytest
import yaml

from ensfs.cli import main

# tight caps on the tiny test grid overshoot by design
pytestmark = pytest.mark.filterwarnings(
    "ignore::ensfs.exceptions.NoFeasibleConfigWarning")

SYNTH_CFG = {
    "synth": {
        "profile": "custom",
        "n_rows": 40,
        "seed": 3,
        "noise_sd": 0.5,
        "missing_rate": 0.02,
        "blocks": {
            "p": {"n_numeric": 3, "nominal_levels": [2],
                  "ordinal_levels": [3]},
            "b": {"n_numeric": 2},
        },
        "planted": [
            {"name": "p_num1", "effect": 1.5},
            {"name": "b_num1", "effect": 1.2, "sign": -1},
        ],
    },
}

# keeps every harness-driven subcommand test under a couple of seconds
FAST_SETS = [
    "--set", "ensemble.n_models=8",
    "--set", "ensemble.solver_max_sweeps=400",
    "--set", "grid.c=[10.0]",
    "--set", "grid.l1_ratio=[0.5]",
    "--set", "grid.tau1=[0.2]",
    "--set", "grid.tau2=[0.2]",
    "--set", "preprocessing.impute_k=3",
]

REPORT_FILES = (
    "selection_frequencies.csv",
    "metrics.csv",
    "metrics_by_fold.csv",
    "selected_sets.csv",
    "residuals.csv",
    "summary.txt",
)
ALL_FILES = REPORT_FILES + ("config_echo.yaml",)


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfg_path = root / "synth.yaml"
    cfg_path.write_text(yaml.safe_dump(SYNTH_CFG))
    code = main([
        "synth", "--config", str(cfg_path),
        "--data", str(root / "data.csv"),
        "--meta", str(root / "data.meta.yaml"),
        "--outdir", str(root / "out"),
    ])
    assert code == 0
    return root


def _run(workdir, command, outdir, *extra):
    argv = [
        command,
        "--data", str(workdir / "data.csv"),
        "--meta", str(workdir / "data.meta.yaml"),
        "--outdir", str(outdir),
        *FAST_SETS,
        *extra,
    ]
    return main(argv)


class TestSynth:
    def test_writes_dataset_and_truth(self, workdir, capsys):
        assert (workdir / "data.csv").exists()
        assert (workdir / "data.meta.yaml").exists()
        truth = yaml.safe_load((workdir / "out/synth/truth.yaml").read_text())
        assert truth == {"planted": ["p_num1", "b_num1"]}
        assert (workdir / "out/synth/config_echo.yaml").exists()

    def test_prints_shape(self, workdir, tmp_path, capsys):
        cfg_path = workdir / "synth.yaml"
        code = main([
            "synth", "--config", str(cfg_path),
            "--data", str(tmp_path / "d.csv"),
            "--meta", str(tmp_path / "d.meta.yaml"),
            "--outdir", str(tmp_path / "out"),
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "wrote 40 rows x 7 features" in out

    def test_unknown_profile_is_config_error(self, tmp_path, capsys):
        code = main([
            "synth", "--outdir", str(tmp_path),
            "--data", str(tmp_path / "d.csv"),
            "--meta", str(tmp_path / "d.meta.yaml"),
            "--set", "synth.profile=weird",
        ])
        assert code == 2
        assert "profile" in capsys.readouterr().err

    def test_seed_changes_data(self, workdir, tmp_path):
        cfg_path = workdir / "synth.yaml"
        for seed, name in ((3, "a"), (4, "b")):
            code = main([
                "synth", "--config", str(cfg_path),
                "--data", str(tmp_path / f"{name}.csv"),
                "--meta", str(tmp_path / f"{name}.meta.yaml"),
                "--outdir", str(tmp_path / f"out_{name}"),
                "--set", f"synth.seed={seed}",
            ])
            assert code == 0
        assert not filecmp.cmp(tmp_path / "a.csv", tmp_path / "b.csv",
                               shallow=False)


class TestPreprocess:
    def test_writes_encoded_table(self, workdir, tmp_path, capsys):
        code = _run(workdir, "preprocess", tmp_path)
        assert code == 0
        outdir = tmp_path / "preprocess"
        frame = pd.read_csv(outdir / "encoded.csv")
        assert list(frame.columns[:2]) == ["row", "target"]
        assert frame.shape[0] == 40
        assert frame["target"].between(1, 6).all()
        assert (outdir / "transform_params.yaml").exists()
        assert (outdir / "dropped_columns.csv").exists()
        assert "encoded 40 rows" in capsys.readouterr().out

    def test_missing_data_file_exits_one(self, tmp_path, capsys):
        code = main([
            "preprocess",
            "--data", str(tmp_path / "nope.csv"),
            "--meta", str(tmp_path / "nope.meta.yaml"),
            "--outdir", str(tmp_path / "out"),
        ])
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestPrestudy:
    def test_writes_configs_csv(self, workdir, tmp_path, capsys):
        code = _run(workdir, "prestudy", tmp_path,
                    "--set", "prestudy.max_s=3")
        assert code == 0
        table = pd.read_csv(tmp_path / "prestudy/configs.csv")
        assert list(table.columns) == [
            "fold", "max_s", "C", "l1_ratio", "tau1", "tau2", "tau3",
            "grid_index", "feasible", "inner_rmse", "inner_mean_size",
        ]
        assert table.shape[0] == 5
        assert (table["grid_index"] == 0).all()
        assert (table["max_s"] == 3).all()
        assert "fold" in capsys.readouterr().out


class TestExp1:
    def test_writes_report_files(self, workdir, tmp_path, capsys):
        code = _run(workdir, "exp1", tmp_path,
                    "--set", "exp1.max_s_values=[3]")
        assert code == 0
        outdir = tmp_path / "exp1"
        for name in ALL_FILES:
            path = outdir / name
            assert path.exists() and path.stat().st_size > 0, name
        out = capsys.readouterr().out
        assert "rent" in out and "ubayfs" in out
        metrics = pd.read_csv(outdir / "metrics.csv")
        assert sorted(metrics["selector"]) == ["rent", "ubayfs"]

    def test_rerun_is_byte_identical(self, workdir, tmp_path):
        for sub in ("one", "two"):
            code = _run(workdir, "exp1", tmp_path / sub,
                        "--set", "exp1.max_s_values=[3]")
            assert code == 0
        # the echo is excluded: it records the differing outdir paths
        for name in REPORT_FILES:
            a = tmp_path / "one/exp1" / name
            b = tmp_path / "two/exp1" / name
            assert filecmp.cmp(a, b, shallow=False), name

    def test_jobs_flag_does_not_change_output(self, workdir, tmp_path):
        for sub, jobs in (("serial", "1"), ("parallel", "2")):
            code = _run(workdir, "exp1", tmp_path / sub,
                        "--jobs", jobs,
                        "--set", "exp1.max_s_values=[3]")
            assert code == 0
        for name in REPORT_FILES:
            a = tmp_path / "serial/exp1" / name
            b = tmp_path / "parallel/exp1" / name
            assert filecmp.cmp(a, b, shallow=False), name


class TestExp2:
    def test_inline_elevated_list(self, workdir, tmp_path, capsys):
        code = _run(workdir, "exp2", tmp_path,
                    "--set", "exp2.max_s=3",
                    "--set", "exp2.w_values=[0.1,110.0]",
                    "--set", "exp2.elevated=[p_num1,b_num1]")
        assert code == 0
        outdir = tmp_path / "exp2"
        for name in ALL_FILES:
            assert (outdir / name).exists(), name
        metrics = pd.read_csv(outdir / "metrics.csv")
        assert metrics.shape[0] == 2
        assert set(metrics["w"]) == {0.1, 110.0}
        capsys.readouterr()

    def test_elevated_from_truth_file(self, workdir, tmp_path, capsys):
        truth = workdir / "out/synth/truth.yaml"
        code = _run(workdir, "exp2", tmp_path,
                    "--set", "exp2.max_s=3",
                    "--set", "exp2.w_values=[110.0]",
                    "--set", f"exp2.elevated={truth}")
        assert code == 0
        capsys.readouterr()

    def test_empty_elevated_is_config_error(self, workdir, tmp_path, capsys):
        code = _run(workdir, "exp2", tmp_path,
                    "--set", "exp2.w_values=[0.1]")
        assert code == 2
        assert "elevated" in capsys.readouterr().err

    def test_missing_elevated_file_is_config_error(self, workdir, tmp_path,
                                                   capsys):
        code = _run(workdir, "exp2", tmp_path,
                    "--set", f"exp2.elevated={tmp_path / 'ghost.yaml'}")
        assert code == 2
        assert "not found" in capsys.readouterr().err


class TestConfigHandling:
    def test_malformed_yaml_reports_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("data: [unclosed\nseed: 1\n")
        code = main(["exp1", "--config", str(bad)])
        assert code == 2
        assert "line" in capsys.readouterr().err

    def test_unknown_key_in_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("verbosity: 3\n")
        code = main(["exp1", "--config", str(bad)])
        assert code == 2
        assert "unknown config key: verbosity" in capsys.readouterr().err

    def test_unknown_nested_key_names_path(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("ensemble:\n  m: 10\n")
        code = main(["exp1", "--config", str(bad)])
        assert code == 2
        assert "ensemble.m" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        code = main(["exp1", "--config", str(tmp_path / "none.yaml")])
        assert code == 2
        assert "not found" in capsys.readouterr().err

    def test_set_unknown_key(self, tmp_path, capsys):
        code = main(["exp1", "--outdir", str(tmp_path),
                     "--set", "nope=1"])
        assert code == 2
        assert "unknown config key" in capsys.readouterr().err

    def test_set_into_scalar(self, tmp_path, capsys):
        code = main(["exp1", "--outdir", str(tmp_path),
                     "--set", "seed.x=1"])
        assert code == 2
        assert "no sub-keys" in capsys.readouterr().err

    def test_set_without_equals(self, tmp_path, capsys):
        code = main(["exp1", "--outdir", str(tmp_path), "--set", "seed"])
        assert code == 2
        assert "key=value" in capsys.readouterr().err

    def test_flag_overrides_config_file(self, workdir, tmp_path, capsys):
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text(yaml.safe_dump({
            "seed": 0,
            "data": str(workdir / "data.csv"),
            "meta": str(workdir / "data.meta.yaml"),
        }))
        code = _run(workdir, "prestudy", tmp_path,
                    "--config", str(cfg), "--seed", "7",
                    "--set", "prestudy.max_s=3")
        assert code == 0
        echo = yaml.safe_load(
            (tmp_path / "prestudy/config_echo.yaml").read_text())
        assert echo["seed"] == 7
        capsys.readouterr()

    def test_outdir_created_when_missing(self, workdir, tmp_path, capsys):
        deep = tmp_path / "a/b/c"
        code = _run(workdir, "prestudy", deep, "--set", "prestudy.max_s=3")
        assert code == 0
        assert (deep / "prestudy/configs.csv").exists()
        capsys.readouterr()
