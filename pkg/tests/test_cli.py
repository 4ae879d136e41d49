import json

import numpy as np
import pytest

from uimc import load_dataset, load_incomplete, make_synthetic, save_dataset
from uimc.baselines import concat
from uimc.cli import load_solver_config, main
from uimc.dataset import as_incomplete, load_report
from uimc.experiment import ExperimentSpec, grid_sweep, resolve_rates, run_experiment
from uimc.metrics import evaluate
from uimc.solver import SolverConfig


def run_cli(*argv):
    return main([str(a) for a in argv])


SYNTH_ARGS = ("synth", "--m", 45, "--c", 3, "--dims", "10,9", "--noise", 0.4,
              "--seed", 5, "--separation", 6.0)


class TestSynth:
    def test_writes_dataset(self, tmp_path, capsys):
        assert run_cli(*SYNTH_ARGS, "--out", tmp_path) == 0
        manifest = capsys.readouterr().out.strip()
        data = load_dataset(manifest)
        assert data.m == 45 and data.n_views == 2 and data.c == 3
        raw = np.loadtxt(tmp_path / "dataset_view0.csv", delimiter=",")
        assert raw.shape == (45, 10)  # one row per instance

    def test_byte_identical_reruns(self, tmp_path):
        run_cli(*SYNTH_ARGS, "--out", tmp_path / "a")
        run_cli(*SYNTH_ARGS, "--out", tmp_path / "b")
        for name in ("dataset.json", "dataset_view0.csv", "dataset_view1.csv",
                     "dataset_labels.txt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_zero_noise_concat_perfect(self, tmp_path, capsys):
        run_cli("synth", "--m", 45, "--c", 3, "--dims", "10,9", "--noise", 0.0,
                "--seed", 5, "--out", tmp_path)
        manifest = capsys.readouterr().out.strip()
        data = load_dataset(manifest)
        res = concat(as_incomplete(data), 3, seed=0)
        assert evaluate(data.labels, res.labels)["acc"] == 1.0

    def test_m_too_small(self, tmp_path):
        assert run_cli("synth", "--m", 10, "--c", 3, "--dims", "9,9",
                       "--out", tmp_path) == 1


class TestMask:
    @pytest.fixture()
    def manifest(self, tmp_path):
        data = make_synthetic(m=40, c=3, dims=(9, 9, 9), noise=0.4, seed=2)
        return save_dataset(data, tmp_path / "data")

    def test_multiplier_form(self, manifest, tmp_path, capsys):
        assert run_cli("mask", "--manifest", manifest, "--multipliers", "0.2,1.0,1.8",
                       "--per", 0.1, "--out", tmp_path / "masked") == 0
        out = capsys.readouterr().out.strip()
        inc = load_incomplete(out)
        m = inc.m
        expected = tuple(m - int(np.floor(r * m + 0.5)) for r in (0.02, 0.10, 0.18))
        assert inc.presented_counts == expected

    def test_rate_clamped_with_warning(self, manifest, tmp_path):
        with pytest.warns(UserWarning, match="clamped"):
            rates = resolve_rates((0.2, 1.0, 1.8), 0.6)
        assert rates == (0.12, 0.6, 1.0)

    def test_full_rate_yields_dying_view(self, manifest, tmp_path, capsys):
        code = run_cli("mask", "--manifest", manifest, "--rates", "0.0,0.5,1.0",
                       "--out", tmp_path / "masked")
        assert code == 0
        inc = load_incomplete(capsys.readouterr().out.strip())
        assert inc.views[2].shape[1] == 0
        assert inc.classifications[2].value == "dying"

    def test_explicit_presented_round_trip(self, manifest, tmp_path, capsys):
        mask_file = tmp_path / "mask.json"
        mask_file.write_text(json.dumps({
            "presented": [list(range(40)), list(range(0, 40, 2)), list(range(1, 40, 3))]
        }))
        run_cli("mask", "--manifest", manifest, "--mask-file", mask_file,
                "--out", tmp_path / "masked")
        inc = load_incomplete(capsys.readouterr().out.strip())
        np.testing.assert_array_equal(inc.indicators[1].presented, np.arange(0, 40, 2))


class TestRun:
    def test_end_to_end_summary(self, tmp_path, capsys):
        out_dir = tmp_path / "res"
        code = run_cli(
            "run", "--synth", "m=45,c=3,dims=10x9,noise=0.3,seed=3",
            "--rates", "0.0,0.3", "--methods", "uimc,concat", "--repeat", "2",
            "--max-iters", "8", "--out", out_dir,
        )
        assert code == 0
        summary = json.loads((out_dir / "summary.json").read_text())
        assert summary["methods"] == ["uimc", "concat"]
        for method in ("uimc", "concat"):
            res = summary["results"][method]
            assert len(res["per_run"]) == 2
            assert 0.0 <= res["mean"]["acc"] <= 1.0
            assert res["std"]["acc"] >= 0.0
        assert (out_dir / "per_run_metrics.csv").exists()
        assert (out_dir / "objective_trace.csv").exists()
        assert (out_dir / "weight_trace.csv").exists()
        for fig in ("objective_trace.png", "weight_trace.png", "metrics.png"):
            assert (out_dir / fig).stat().st_size > 0
        report = load_report(out_dir / "reports" / "uimc_run0.json")
        assert report.extra["iters_run"] <= 8

    def test_summary_schema_and_determinism(self, tmp_path):
        from pathlib import Path

        import jsonschema

        import uimc

        schema = json.loads(
            (Path(uimc.__file__).parent / "schemas" / "summary.schema.json").read_text()
        )
        spec_args = dict(
            synth=dict(m=45, c=3, dims=(10, 9), noise=0.3, seed=3),
            config=SolverConfig(max_iters=6),
            methods=("uimc", "concat"),
            repeat=2,
            seed=0,
            figures=False,
        )
        run_experiment(ExperimentSpec(out_dir=str(tmp_path / "a"), **spec_args))
        run_experiment(ExperimentSpec(out_dir=str(tmp_path / "b"), **spec_args))
        doc_a = (tmp_path / "a" / "summary.json").read_bytes()
        doc_b = (tmp_path / "b" / "summary.json").read_bytes()
        assert doc_a == doc_b
        jsonschema.validate(json.loads(doc_a), schema)

    def test_bsv_without_labels_flagged(self, tmp_path):
        data = make_synthetic(m=45, c=3, dims=(10, 9), noise=0.3, seed=3)
        stripped = save_dataset(
            type(data)(views=data.views, c=data.c, labels=None), tmp_path / "ds"
        )
        spec = ExperimentSpec(
            manifest=str(stripped),
            config=SolverConfig(max_iters=4),
            methods=("bsv",),
            out_dir=str(tmp_path / "res"),
            figures=False,
        )
        summary = run_experiment(spec)
        assert summary["results"]["bsv"]["mean"]["acc"] is None
        report = load_report(tmp_path / "res" / "reports" / "bsv_run0.json")
        assert report.extra["selection"] == "objective"

    def test_bad_manifest_exits_nonzero(self, tmp_path, capsys):
        code = run_cli("run", "--manifest", tmp_path / "missing.json",
                       "--out", tmp_path / "res")
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_repeat_one_equals_mean(self, tmp_path):
        spec = ExperimentSpec(
            synth=dict(m=45, c=3, dims=(10, 9), noise=0.3, seed=3),
            config=SolverConfig(max_iters=5),
            methods=("concat",),
            repeat=1,
            out_dir=str(tmp_path / "res"),
            figures=False,
        )
        summary = run_experiment(spec)
        res = summary["results"]["concat"]
        assert res["mean"]["acc"] == res["per_run"][0]["metrics"]["acc"]
        assert res["std"]["acc"] == 0.0


class TestEval:
    def test_scores(self, tmp_path, capsys):
        truth = tmp_path / "truth.txt"
        pred = tmp_path / "pred.txt"
        np.savetxt(truth, [0, 0, 1, 1], fmt="%d")
        np.savetxt(pred, [1, 1, 1, 0], fmt="%d")
        assert run_cli("eval", "--pred", pred, "--truth", truth,
                       "--out", tmp_path / "scores.json") == 0
        scores = json.loads(capsys.readouterr().out)
        assert scores["acc"] == pytest.approx(0.75)
        assert json.loads((tmp_path / "scores.json").read_text()) == scores


class TestConfigFile:
    def test_json_form(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"alpha": 0.5, "max_iters": 7}))
        cfg = load_solver_config(path)
        assert cfg.alpha == 0.5 and cfg.max_iters == 7

    def test_key_value_form(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("alpha = 0.5  # trade-off\nmax_iters = 7\nq2_update = shrink\n")
        cfg = load_solver_config(path)
        assert cfg.alpha == 0.5 and cfg.max_iters == 7 and cfg.q2_update == "shrink"

    def test_flag_precedence(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"alpha": 0.5}))
        cfg = load_solver_config(path, {"alpha": 0.25, "beta": None})
        assert cfg.alpha == 0.25

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"not_a_key": 1}))
        with pytest.raises(ValueError, match="unknown solver config key"):
            load_solver_config(path)


class TestSweep:
    def test_grid_writes_rows(self, tmp_path):
        spec = ExperimentSpec(
            synth=dict(m=45, c=3, dims=(10, 9), noise=0.3, seed=3),
            config=SolverConfig(max_iters=4),
            methods=("concat",),
            out_dir=str(tmp_path / "sweep"),
            figures=False,
        )
        rows = grid_sweep(spec, {"alpha": [1e-2, 1e-1]})
        assert len(rows) == 2
        assert (tmp_path / "sweep" / "sweep_summary.csv").exists()
        assert (tmp_path / "sweep" / "alpha=0.01" / "summary.json").exists()


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(synth=dict(m=30, c=3, dims=(9,)), methods=())
    with pytest.raises(ValueError):
        ExperimentSpec(synth=dict(m=30, c=3, dims=(9,)), methods=("nope",))
    with pytest.raises(ValueError):
        ExperimentSpec(manifest="x", synth=dict(m=3))
    with pytest.raises(ValueError):
        ExperimentSpec(synth=dict(m=3), repeat=0)
    with pytest.raises(ValueError):
        resolve_rates((0.5, -0.1), 1.0)
