import json
import subprocess
import sys
from pathlib import Path

import pytest

from qwoa_cvrp import cli, cvrp

INSTANCES = Path(__file__).resolve().parent.parent / "instances"
EXAMPLE_N3 = str(INSTANCES / "example_n3.json")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestSingleValueCommands:
    def test_unindex(self, capsys):
        code, out, _ = run(capsys, "unindex", "--n", "3", "--index", "12")
        assert code == 0
        assert out.strip() == "[[1],[2],[3]]"

    def test_index_roundtrip(self, capsys):
        code, out, _ = run(capsys, "index", "--solution", "[[3],[1,2]]")
        assert code == 0
        i = int(out.strip())
        code, out, _ = run(capsys, "unindex", "--n", "3", "--index", str(i))
        assert out.strip() == "[[1,2],[3]]"

    def test_cost(self, capsys):
        code, out, _ = run(
            capsys, "cost", "--instance", EXAMPLE_N3, "--solution", "[[1,2],[3]]"
        )
        assert code == 0
        assert out.strip() == "109"

    def test_optimum(self, capsys):
        code, out, _ = run(capsys, "optimum", "--instance", EXAMPLE_N3)
        assert code == 0
        assert "optimum=109.0" in out

    def test_enumerate_stdout(self, capsys):
        code, out, _ = run(capsys, "enumerate", "--n", "2")
        assert code == 0
        assert out.splitlines() == ["[[2,1]]", "[[1,2]]", "[[1],[2]]"]

    def test_module_entrypoint_subprocess(self):
        proc = subprocess.run(
            [sys.executable, "-m", "qwoa_cvrp.cli", "unindex", "--n", "3", "--index", "12"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.strip() == "[[1],[2],[3]]"


class TestGenValidate:
    def test_gen_then_validate(self, capsys, tmp_path):
        code, out, _ = run(capsys, "gen", "--n", "4", "--seed", "5", "--out", str(tmp_path))
        assert code == 0
        path = out.strip()
        code, out, _ = run(capsys, "validate", "--instance", path)
        assert code == 0
        assert out.startswith("ok:")

    def test_validate_bad_instance(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "n": 1, "capacity": 0, "packages": [3], "costs": [[0, 1], [1, 0]],
        }))
        code, out, _ = run(capsys, "validate", "--instance", bad.as_posix())
        assert code == cli.EXIT_VALIDATION
        assert "invalid" in out


class TestArtifacts:
    def test_qualities_csv(self, capsys, tmp_path):
        code, out, _ = run(
            capsys, "qualities", "--instance", EXAMPLE_N3, "--out", str(tmp_path)
        )
        assert code == 0
        lines = (tmp_path / "qualities.csv").read_text().splitlines()
        assert lines[0].startswith("# config=")
        assert lines[1] == "index,quality"
        assert len(lines) == 2 + 13
        assert "distinct=10" in out

    def test_simulate_artifacts(self, capsys, tmp_path):
        code, out, _ = run(
            capsys,
            "simulate", "--instance", EXAMPLE_N3,
            "--gammas", "[0.05]", "--times", "[0.2]",
            "--out", str(tmp_path),
        )
        assert code == 0
        dist = (tmp_path / "distribution.csv").read_text().splitlines()
        assert dist[1] == "quality,probability"
        probs = [float(line.split(",")[1]) for line in dist[2:]]
        assert sum(probs) == pytest.approx(1.0, abs=1e-12)
        amp = (tmp_path / "amplification.csv").read_text().splitlines()
        assert amp[1] == "index,amplification"
        assert len(amp) == 2 + 13
        assert "expectation=" in out

    def test_optimize_artifacts(self, capsys, tmp_path):
        code, _, _ = run(
            capsys,
            "optimize", "--instance", EXAMPLE_N3,
            "--r", "1,2", "--restarts", "2", "--budget", "200", "--seed", "3",
            "--out", str(tmp_path),
        )
        assert code == 0
        conv = (tmp_path / "convergence.csv").read_text().splitlines()
        assert conv[1] == "r,best_objective,evaluations,restart_index"
        assert len(conv) == 4
        pars = (tmp_path / "parameters.csv").read_text().splitlines()
        assert pars[1] == "r,j,gamma_j,t_j"
        assert len(pars) == 2 + 1 + 2

    def test_baseline_artifacts(self, capsys, tmp_path):
        code, _, _ = run(
            capsys,
            "baseline", "--instance", EXAMPLE_N3,
            "--r", "1-3", "--trials", "500", "--seed", "1",
            "--out", str(tmp_path),
        )
        assert code == 0
        lines = (tmp_path / "baseline.csv").read_text().splitlines()
        assert lines[1] == "r,samples,expected_best,mc_estimate,mc_stderr"
        rows = [line.split(",") for line in lines[2:]]
        assert [int(row[0]) for row in rows] == [1, 2, 3]
        assert [int(row[1]) for row in rows] == [2, 4, 6]

    def test_compare_artifacts(self, capsys, tmp_path):
        code, _, _ = run(
            capsys,
            "compare", "--instance", EXAMPLE_N3,
            "--r", "1-4", "--restarts", "2", "--budget", "300", "--seed", "2",
            "--out", str(tmp_path),
        )
        assert code == 0
        comp = (tmp_path / "comparison.csv").read_text().splitlines()
        assert comp[1] == "r,qwoa_expectation,classical_expected_best,target"
        assert len(comp) == 2 + 4
        fits = (tmp_path / "fits.csv").read_text().splitlines()
        assert fits[1] == "curve,alpha,r_min,r_max,residual"

    def test_verify_circuit(self, capsys, tmp_path):
        code, out, _ = run(
            capsys,
            "verify-circuit", "--m-values", "3,4", "--t-values", "[0.1,0.7]",
            "--out", str(tmp_path),
        )
        assert code == 0
        lines = (tmp_path / "circuit_verification.csv").read_text().splitlines()
        assert lines[1] == "M,t,residual,leakage,ancilla_residual"
        assert len(lines) == 2 + 4
        for line in lines[2:]:
            assert float(line.split(",")[2]) < 1e-10

    def test_plot_emits_svg(self, capsys, tmp_path):
        run(capsys, "simulate", "--instance", EXAMPLE_N3,
            "--gammas", "[0.05]", "--times", "[0.2]", "--out", str(tmp_path))
        code, out, _ = run(
            capsys,
            "plot", "--kind", "distribution",
            "--csv", str(tmp_path / "distribution.csv"),
            "--out", str(tmp_path),
        )
        assert code == 0
        svg = (tmp_path / "distribution.svg").read_text()
        assert svg.lstrip().startswith("<?xml")


class TestDeterminism:
    def test_byte_identical_csv(self, capsys, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out_dir in (a, b):
            run(capsys, "qualities", "--instance", EXAMPLE_N3, "--out", str(out_dir))
            run(
                capsys,
                "optimize", "--instance", EXAMPLE_N3,
                "--r", "1,2", "--restarts", "2", "--budget", "150", "--seed", "9",
                "--out", str(out_dir),
            )
            run(
                capsys,
                "baseline", "--instance", EXAMPLE_N3,
                "--r", "1-2", "--trials", "300", "--seed", "4",
                "--out", str(out_dir),
            )
        for name in ("qualities.csv", "convergence.csv", "parameters.csv", "baseline.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_out_dir_env_var(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUT_DIR_ENV, str(tmp_path))
        code, _, _ = run(capsys, "qualities", "--instance", EXAMPLE_N3)
        assert code == 0
        assert (tmp_path / "qualities.csv").exists()


class TestExperimentConfig:
    def test_check_rejects_missing_path(self):
        config = cli.ExperimentConfig(command="qualities", instance_path="missing.json")
        with pytest.raises(Exception, match="not found"):
            config.check()

    def test_check_rejects_bad_caps(self):
        with pytest.raises(Exception, match="size cap"):
            cli.ExperimentConfig(command="qualities", size_cap=0).check()
        with pytest.raises(Exception, match="thread"):
            cli.ExperimentConfig(command="qualities", threads=0).check()

    def test_as_dict_drops_unset_fields(self):
        config = cli.ExperimentConfig(
            command="optimize", instance_path=EXAMPLE_N3, depths=(1, 2), seed=3,
            restarts=4, budget=500,
        )
        data = config.as_dict()
        assert data["command"] == "optimize"
        assert data["depths"] == [1, 2]
        assert "extras" not in data


class TestErrorPaths:
    def test_bad_flags_usage_error(self, capsys):
        code, _, _ = run(capsys, "unindex", "--n", "3")
        assert code == cli.EXIT_USAGE

    def test_unknown_subcommand(self, capsys):
        code, _, _ = run(capsys, "frobnicate")
        assert code == cli.EXIT_USAGE

    def test_out_of_range_index(self, capsys):
        code, _, err = run(capsys, "unindex", "--n", "3", "--index", "13")
        assert code == cli.EXIT_VALIDATION
        assert "error" in err

    def test_missing_instance_file(self, capsys):
        code, _, _ = run(capsys, "cost", "--instance", "nope.json", "--solution", "[[1]]")
        assert code == cli.EXIT_VALIDATION

    def test_size_cap_resource_error(self, capsys):
        code, _, err = run(
            capsys, "qualities", "--instance", EXAMPLE_N3, "--size-cap", "5"
        )
        assert code == cli.EXIT_RESOURCE
        assert "cap" in err

    def test_no_partial_artifacts_on_error(self, capsys, tmp_path):
        code, _, _ = run(
            capsys,
            "simulate", "--instance", EXAMPLE_N3,
            "--gammas", "[0.1]", "--times", "[0.1, 0.2]",
            "--out", str(tmp_path),
        )
        assert code == cli.EXIT_VALIDATION
        assert not list(tmp_path.iterdir())
