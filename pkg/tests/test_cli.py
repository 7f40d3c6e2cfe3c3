import json

import pytest

from h2sw import EstimatorConfig, Linear, mc_std
from h2sw.cli import main, parse_defining_function
from h2sw.cloudio import read_cloud, write_cloud
from h2sw.selftest import SuiteResult
import h2sw.cli as cli_mod
from conftest import R3S2, random_cloud


@pytest.fixture
def cloud_files(rng, tmp_path):
    a = random_cloud(rng, 6, R3S2)
    b = random_cloud(rng, 6, R3S2)
    pa, pb = tmp_path / "a.cloud", tmp_path / "b.cloud"
    write_cloud(pa, a)
    write_cloud(pb, b)
    return str(pa), str(pb), a, b


def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def report_values(stdout):
    vals = {}
    for line in stdout.splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            vals[k] = v
    return vals


def numeric_lines(stdout):
    return [l for l in stdout.splitlines() if not l.startswith(("time_", "command="))]


class TestParseDefiningFunction:
    def test_all_forms(self):
        assert parse_defining_function("linear") == Linear()
        assert parse_defining_function("circular:2.5").r == 2.5
        assert parse_defining_function("poly:3").m == 3
        parse_defining_function("busemann")
        with pytest.raises(Exception):
            parse_defining_function("fourier")
        with pytest.raises(Exception):
            parse_defining_function("poly:x")


class TestDistance:
    def test_same_file_twice_is_zero(self, capsys, cloud_files):
        pa, _, _, _ = cloud_files
        code, out, _ = run_cli(capsys, ["distance", pa, pa, "--family", "h2sw", "--seed", "1"])
        assert code == 0
        assert report_values(out)["h2sw"] == "0.0"

    def test_determinism(self, capsys, cloud_files):
        pa, pb, _, _ = cloud_files
        argv = ["distance", pa, pb, "--family", "sw", "--L", "1", "--seed", "7"]
        _, out1, _ = run_cli(capsys, argv)
        _, out2, _ = run_cli(capsys, argv)
        assert numeric_lines(out1) == numeric_lines(out2)

    def test_prop_bound_against_exact(self, capsys, cloud_files, rng):
        pa, pb, a, b = cloud_files
        code, out, _ = run_cli(capsys, [
            "distance", pa, pb, "--family", "h2sw", "--family", "exact",
            "--g1", "linear", "--g2", "linear", "--L", "4000", "--p", "1", "--seed", "3",
        ])
        assert code == 0
        vals = report_values(out)
        h2sw = float(vals["h2sw"])
        exact = float(vals["exact"])
        spread = mc_std(a, b, EstimatorConfig("h2sw", (Linear(), Linear()),
                                              L=4000, p=1.0, seed=3), repeats=5)
        assert h2sw <= exact + 3 * max(spread, float(vals["h2sw_se"]))

    def test_malformed_file_exits_1(self, capsys, tmp_path):
        bad = tmp_path / "bad.cloud"
        bad.write_text("H2SW-CLOUD v1; K=1; spec_1=sphere,3; n=1\n0.5 0 0\n")
        code, _, err = run_cli(capsys, ["distance", str(bad), str(bad), "--seed", "1"])
        assert code == 1
        assert "bad.cloud:2" in err

    def test_resource_guard_exits_2(self, capsys, cloud_files, monkeypatch):
        pa, pb, _, _ = cloud_files
        from h2sw.errors import ResourceGuardError

        def guarded(*a, **k):
            raise ResourceGuardError("instance too large")

        monkeypatch.setattr(cli_mod, "joint_wasserstein", guarded)
        code, _, err = run_cli(capsys, ["distance", pa, pb, "--family", "exact", "--seed", "1"])
        assert code == 2
        assert "too large" in err

    def test_json_sidecar(self, capsys, cloud_files, tmp_path):
        pa, pb, _, _ = cloud_files
        out_dir = tmp_path / "out"
        code, _, _ = run_cli(capsys, [
            "distance", pa, pb, "--family", "sw", "--seed", "2",
            "--out", str(out_dir), "--json",
        ])
        assert code == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert "sw" in report
        assert (out_dir / "report.txt").exists()

    def test_threads_flag_does_not_change_output(self, capsys, cloud_files):
        pa, pb, _, _ = cloud_files
        base = ["distance", pa, pb, "--family", "h2sw", "--L", "32", "--seed", "5"]
        _, out1, _ = run_cli(capsys, base + ["--threads", "1"])
        _, out2, _ = run_cli(capsys, base + ["--threads", "2"])
        assert numeric_lines(out1) == numeric_lines(out2)

    def test_seed_required(self, capsys, cloud_files):
        pa, pb, _, _ = cloud_files
        with pytest.raises(SystemExit):
            main(["distance", pa, pb, "--family", "sw"])
        capsys.readouterr()

    def test_chsw_with_explicit_mixing(self, capsys, cloud_files):
        pa, pb, _, _ = cloud_files
        code, out, _ = run_cli(capsys, [
            "distance", pa, pb, "--family", "chsw",
            "--fixed-psi", "0.6,0.8", "--L", "16", "--seed", "4",
        ])
        assert code == 0
        assert float(report_values(out)["chsw"]) > 0
        code, _, err = run_cli(capsys, [
            "distance", pa, pb, "--family", "chsw",
            "--fixed-psi", "1,1", "--L", "16", "--seed", "4",
        ])
        assert code == 1
        assert "fixed_psi" in err


class TestDeform:
    def test_zero_steps_rejected(self, capsys, cloud_files):
        pa, pb, _, _ = cloud_files
        code, _, err = run_cli(capsys, ["deform", pa, pb, "--steps", "0", "--seed", "1"])
        assert code == 1
        assert "steps" in err

    def test_identical_clouds_zero_trace(self, capsys, cloud_files, tmp_path):
        pa, _, _, _ = cloud_files
        out_dir = tmp_path / "run"
        code, out, _ = run_cli(capsys, [
            "deform", pa, pa, "--steps", "4", "--checkpoint-every", "2",
            "--L", "4", "--seed", "1", "--out", str(out_dir),
        ])
        assert code == 0
        rows = (out_dir / "trace.csv").read_text().splitlines()[1:]
        assert len(rows) == 3
        for row in rows:
            assert float(row.split(",")[1]) <= 1e-12
        final = read_cloud(out_dir / "final.cloud")
        assert final.n == 6

    def test_writes_final_cloud_and_report(self, capsys, cloud_files, tmp_path):
        pa, pb, _, _ = cloud_files
        out_dir = tmp_path / "run2"
        code, out, _ = run_cli(capsys, [
            "deform", pa, pb, "--steps", "6", "--checkpoint-every", "3",
            "--L", "4", "--seed", "2", "--out", str(out_dir),
        ])
        assert code == 0
        vals = report_values(out)
        assert float(vals["final_exact_w"]) < float(vals["initial_exact_w"])


class TestCompare:
    def _manifest(self, rng, tmp_path, duplicate=False):
        clouds = [random_cloud(rng, 8, R3S2) for _ in range(3)]
        if duplicate:
            clouds[1] = clouds[0]
        entries = []
        for i, c in enumerate(clouds):
            p = tmp_path / f"d{i}.cloud"
            write_cloud(p, c)
            entries.append({"name": f"d{i}", "path": p.name})
        man = tmp_path / "m.json"
        man.write_text(json.dumps({"datasets": entries}))
        return str(man)

    def test_duplicate_dataset_zero_entry(self, capsys, rng, tmp_path):
        man = self._manifest(rng, tmp_path, duplicate=True)
        out_dir = tmp_path / "cmp"
        code, out, _ = run_cli(capsys, [
            "compare", man, "--family", "h2sw", "--L", "16", "--seed", "3",
            "--out", str(out_dir),
        ])
        assert code == 0
        rows = (out_dir / "matrix_h2sw.csv").read_text().splitlines()
        assert float(rows[1].split(",")[2]) == 0.0  # d0 vs d1 duplicated
        vals = report_values(out)
        assert vals["relative_error_exact"] == "0.0"

    def test_matrices_written_per_family(self, capsys, rng, tmp_path):
        man = self._manifest(rng, tmp_path)
        out_dir = tmp_path / "cmp2"
        code, out, _ = run_cli(capsys, [
            "compare", man, "--family", "h2sw", "--family", "sw",
            "--L", "16", "--seed", "3", "--out", str(out_dir),
        ])
        assert code == 0
        for name in ("matrix_exact.csv", "matrix_h2sw.csv", "matrix_sw.csv"):
            assert (out_dir / name).exists()
        vals = report_values(out)
        assert float(vals["relative_error_h2sw_sum"]) >= 0


class TestSelftest:
    def test_quick_suites_pass(self, capsys):
        code, out, _ = run_cli(capsys, [
            "selftest", "--suite", "ot1d-bruteforce", "--suite", "metric-axioms",
            "--n", "5", "--trials", "20",
        ])
        assert code == 0
        assert "selftest=PASS" in out

    def test_bruteforce_trials_all_match(self, capsys):
        code, out, _ = run_cli(capsys, [
            "selftest", "--suite", "ot1d-bruteforce", "--n", "7", "--trials", "200",
        ])
        assert code == 0
        assert "passed=200 failed=0" in out

    def test_failing_suite_exits_3(self, capsys, monkeypatch):
        def fake(names=None, seed=0, n=None, trials=None):
            return [SuiteResult("metric-axioms", 10, 2, "forced")]

        monkeypatch.setattr(cli_mod, "run_suites", fake)
        code, out, _ = run_cli(capsys, ["selftest"])
        assert code == 3
        assert "selftest=FAIL" in out

    def test_unknown_suite_rejected(self, capsys):
        code, _, err = run_cli(capsys, ["selftest", "--suite", "nope"])
        assert code == 1
        assert "unknown suite" in err


class TestBench:
    def test_soft_fail_semantics(self, capsys, monkeypatch):
        def fake(seed=0, L=200, resamples=20):
            return {"n_list": [250, 500], "errors": [0.1, 0.2],
                    "decreasing_steps": 0, "total_steps": 1}

        monkeypatch.setattr(cli_mod, "sample_complexity_trend", fake)
        code, out, err = run_cli(capsys, ["bench", "--seed", "1"])
        assert code == 0
        assert "trend=WARN" in out
        assert "warning" in err
