import json
from pathlib import Path

import numpy as np
import pytest

from banditboed.cli import main
from banditboed.critic.network import CriticNetwork, save_critic
from banditboed.designs import Design, save_design
from banditboed.runfiles import read_manifest
from banditboed.search.loop import run_boed
from banditboed.tasks import ModelDiscriminationTask


@pytest.fixture()
def md_design_file(tmp_path):
    path = tmp_path / "design.json"
    save_design(Design(np.array([[0.0, 0.0, 0.6], [1.0, 1.0, 0.0]])), path)
    return path


@pytest.fixture()
def md_ensemble_dir(tmp_path):
    d = tmp_path / "ensemble"
    d.mkdir()
    arch = ModelDiscriminationTask().architecture()
    for i in range(2):
        save_critic(CriticNetwork(arch, seed=i), d / f"md-member-{i:02d}.critic")
    return d


class TestSimulate:
    def test_writes_trajectories_and_manifest(self, tmp_path, md_design_file):
        out = tmp_path / "sim"
        code = main(
            ["simulate", "--task", "md", "--design", str(md_design_file),
             "--n", "20", "--seed", "3", "--out", str(out)]
        )
        assert code == 0
        lines = (out / "trajectories.jsonl").read_text().strip().splitlines()
        assert len(lines) == 20 * 2 * 30
        rec = json.loads(lines[0])
        assert set(rec) == {"sample_id", "model", "theta", "block", "trial", "action", "reward"}
        manifest = read_manifest(out)
        assert "trajectories.jsonl" in manifest["artifacts"]

    def test_manifest_is_immutable(self, tmp_path, md_design_file):
        out = tmp_path / "sim"
        args = ["simulate", "--task", "md", "--design", str(md_design_file),
                "--n", "5", "--seed", "1", "--out", str(out)]
        assert main(args) == 0
        assert main(args) == 1  # refuses to overwrite the finished run

    def test_deterministic_given_seed(self, tmp_path, md_design_file):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            main(["simulate", "--task", "md", "--design", str(md_design_file),
                  "--n", "10", "--seed", "7", "--out", str(out)])
        assert (out1 / "trajectories.jsonl").read_text() == (out2 / "trajectories.jsonl").read_text()


class TestOptimize:
    def test_tiny_run_produces_artifacts(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "version": 1, "samples": 300, "bo_budget": 4, "bo_initial": 3,
            "ensemble_size": 1, "epochs": 2,
        }))
        out = tmp_path / "opt"
        code = main(["optimize", "--task", "md", "--config", str(cfg),
                     "--seed", "5", "--out", str(out)])
        assert code == 0
        assert (out / "design.json").exists()
        design = Design(np.asarray(json.loads((out / "design.json").read_text())))
        assert design.n_blocks == 2 and design.n_arms == 3  # 6 design dims for MD
        trace = [json.loads(l) for l in (out / "trace.jsonl").read_text().splitlines()]
        assert len(trace) == 4
        assert len(list((out / "ensemble").glob("*.critic"))) == 1
        report = json.loads((out / "training_report.json").read_text())
        assert len(report["history"]) == 2
        manifest = read_manifest(out)
        assert manifest["task"] == "md"

    def test_pe_task_design_dims(self):
        from banditboed.tasks import get_task

        assert get_task("md").design_dim == 6
        assert get_task("pe-wslts").design_dim == 9
        assert get_task("pe-aeg").design_dim == 9

    def test_rerun_with_same_seed_reproduces_design(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "version": 1, "samples": 300, "bo_budget": 4, "bo_initial": 3,
            "ensemble_size": 1, "epochs": 2,
        }))
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["optimize", "--task", "md", "--config", str(cfg),
                         "--seed", "9", "--out", str(out)]) == 0
            outs.append((out / "design.json").read_text())
        assert outs[0] == outs[1]


class TestValidate:
    def test_recovery_report_without_baselines(self, tmp_path, md_design_file, md_ensemble_dir):
        out = tmp_path / "val"
        code = main(["validate", "--task", "md", "--design", str(md_design_file),
                     "--ensemble", str(md_ensemble_dir), "--baselines", "0",
                     "--n-sims", "40", "--out", str(out)])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["optimal"]["mean_entropy"] > 0
        assert (out / "confusion_optimal.svg").exists()
        assert (out / "confusion_optimal.csv").exists()
        assert (out / "entropy_hist.svg").exists()
        rows = (out / "entropies.csv").read_text().strip().splitlines()
        assert len(rows) == 41


class TestInfer:
    def make_dataset(self, tmp_path, n=3):
        rng = np.random.default_rng(0)
        records = []
        for i in range(n):
            blocks = [
                {
                    "actions": rng.integers(1, 4, size=30).tolist(),
                    "rewards": rng.integers(0, 2, size=30).tolist(),
                }
                for _ in range(5)
            ]
            records.append({"session_id": f"s{i}", "condition": "optimal", "blocks": blocks})
        path = tmp_path / "export.json"
        path.write_text(json.dumps({"records": records}))
        return path

    def test_md_posteriors(self, tmp_path, md_ensemble_dir):
        data = self.make_dataset(tmp_path)
        out = tmp_path / "inf"
        code = main(["infer", "--task", "md", "--dataset", str(data),
                     "--ensemble", str(md_ensemble_dir), "--out", str(out)])
        assert code == 0
        rows = (out / "posteriors.csv").read_text().strip().splitlines()
        assert len(rows) == 4  # header + 3 participants
        header = rows[0].split(",")
        for row in rows[1:]:
            vals = dict(zip(header, row.split(",")))
            total = float(vals["p_wslts"]) + float(vals["p_aeg"]) + float(vals["p_gls"])
            assert abs(total - 1.0) < 1e-6

    def test_empty_dataset(self, tmp_path, md_ensemble_dir):
        path = tmp_path / "empty.json"
        path.write_text(json.dumps({"records": []}))
        out = tmp_path / "inf"
        code = main(["infer", "--task", "md", "--dataset", str(path),
                     "--ensemble", str(md_ensemble_dir), "--out", str(out)])
        assert code == 0
        assert (out / "posteriors.csv").exists()


class TestExplore:
    def test_optima_and_slice(self, tmp_path):
        rng = np.random.default_rng(0)

        def evaluate(design, _i):
            return -float(np.sum((design - 0.4) ** 2)) + 1e-3 * rng.standard_normal()

        trace = tmp_path / "trace.jsonl"
        run_boed(evaluate, dim=3, budget=30, n_initial=10, seed=2, trace_path=trace)
        out = tmp_path / "exp"
        code = main(["explore", "--trace", str(trace), "--restarts", "10",
                     "--slice", "0.4,x,x", "--out", str(out)])
        assert code == 0
        lines = (out / "optima.csv").read_text().strip().splitlines()
        assert lines[0].startswith("rank,mi")
        mis = [float(l.split(",")[1]) for l in lines[1:]]
        assert mis == sorted(mis, reverse=True)
        assert (out / "slice.csv").exists()
        assert (out / "slice.svg").exists()

    def test_bad_slice_spec(self, tmp_path):
        trace = tmp_path / "trace.jsonl"
        rng = np.random.default_rng(1)
        run_boed(lambda d, i: -float(np.sum(d**2)) + 1e-3 * rng.standard_normal(),
                 dim=2, budget=8, n_initial=4, seed=0, trace_path=trace)
        code = main(["explore", "--trace", str(trace), "--slice", "x,x,x",
                     "--out", str(tmp_path / "exp2")])
        assert code == 1


class TestExitCodes:
    def test_unknown_task_is_user_error(self, tmp_path, md_design_file):
        code = main(["simulate", "--task", "bogus", "--design", str(md_design_file),
                     "--out", str(tmp_path / "x")])
        assert code == 1

    def test_missing_file_is_user_error(self, tmp_path):
        code = main(["simulate", "--task", "md", "--design", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "x")])
        assert code == 1

    def test_internal_error_code(self, monkeypatch, tmp_path, md_design_file):
        import banditboed.cli as climod

        def boom(*a, **k):
            raise RuntimeError("boom")

        monkeypatch.setattr(climod, "get_task", boom)
        code = main(["simulate", "--task", "md", "--design", str(md_design_file),
                     "--out", str(tmp_path / "x")])
        assert code == 2


class TestValidatePE:
    def test_parameter_recovery_report(self, tmp_path):
        import numpy as np

        from banditboed.critic.network import CriticNetwork, save_critic
        from banditboed.designs import Design, save_design
        from banditboed.tasks import ParameterEstimationTask
        from banditboed.models import ModelKind

        d = tmp_path / "ens"
        d.mkdir()
        arch = ParameterEstimationTask(ModelKind.AEG).architecture()
        save_critic(CriticNetwork(arch, seed=0), d / "pe-aeg-00.critic")
        design_path = tmp_path / "design.json"
        save_design(Design(np.array([[1.0, 1.0, 0.0]] * 3)), design_path)
        out = tmp_path / "valpe"
        code = main(["validate", "--task", "pe-aeg", "--design", str(design_path),
                     "--ensemble", str(d), "--n-sims", "3", "--out", str(out)])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert len(report["posterior_means"][0]) == 2
        assert (out / "marginals_0.svg").exists()
        assert (out / "entropies.csv").exists()

    def test_pe_posteriors(self, tmp_path):
        import numpy as np

        from banditboed.critic.network import CriticNetwork, save_critic
        from banditboed.tasks import ParameterEstimationTask
        from banditboed.models import ModelKind

        d = tmp_path / "ens"
        d.mkdir()
        arch = ParameterEstimationTask(ModelKind.AEG).architecture()
        save_critic(CriticNetwork(arch, seed=0), d / "pe-aeg-00.critic")
        data = TestInfer.make_dataset(TestInfer(), tmp_path, n=2)
        out = tmp_path / "infpe"
        code = main(["infer", "--task", "pe-aeg", "--dataset", str(data),
                     "--ensemble", str(d), "--out", str(out)])
        assert code == 0
        rows = (out / "posteriors.csv").read_text().strip().splitlines()
        assert len(rows) == 3
        header = rows[0].split(",")
        assert "entropy_nats" in header
        assert "mean_explore" in header and "corr_stickiness_explore" in header
