import json
import math

import numpy as np
import pytest
import yaml

from autoevolute.cli import main
from autoevolute.closure import closure_residuals
from autoevolute.frenet import integrate
from autoevolute.geometry import tube_mesh
from autoevolute.io import (CSV_HEADER, JobConfig, curve_document, export_curve_csv,
                            export_curve_json, export_mesh_obj, read_curve_csv,
                            read_curve_json)
TWO_PI = 2 * math.pi


@pytest.fixture(scope="module")
def small_curve(wavy_params):
    return integrate(wavy_params, 0.0, TWO_PI, tol=1e-9, out_resolution=64)


class TestCsv:
    def test_header_and_rows(self, small_curve, tmp_path):
        path = tmp_path / "c.csv"
        export_curve_csv(small_curve, path)
        lines = path.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + len(small_curve)

    def test_bitwise_roundtrip(self, small_curve, tmp_path):
        path = tmp_path / "c.csv"
        export_curve_csv(small_curve, path)
        cols = read_curve_csv(path)
        assert np.array_equal(cols["t"], small_curve.t)
        assert np.array_equal(cols["x"], small_curve.position[:, 0])
        assert np.array_equal(cols["tau"], small_curve.tau)
        assert np.array_equal(cols["s_tilde"], small_curve.s_tilde)

    def test_deterministic_bytes(self, small_curve, tmp_path):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        export_curve_csv(small_curve, p1)
        export_curve_csv(small_curve, p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert b"\r" not in p1.read_bytes()


class TestJson:
    def test_roundtrip_bitwise(self, small_curve, tmp_path, target_third):
        res = closure_residuals(small_curve.params, target_third, tol=1e-8)
        doc = curve_document(small_curve, target=target_third, residuals=res)
        path = tmp_path / "c.json"
        export_curve_json(doc, path)
        back = read_curve_json(path)
        assert np.array_equal(back.curve.position, small_curve.position)
        assert np.array_equal(back.curve.t, small_curve.t)
        assert back.params.kappa == small_curve.params.kappa
        assert back.params.profile.coefficients == small_curve.params.profile.coefficients
        assert back.target.p == 1 and back.target.q == 3
        assert back.residuals["d"] == res.d

    def test_deterministic_bytes(self, small_curve, tmp_path):
        doc = curve_document(small_curve)
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        export_curve_json(doc, p1)
        export_curve_json(doc, p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestObj:
    def test_format(self, small_curve, tmp_path):
        mesh = tube_mesh(small_curve, 0.2, 6)
        path = tmp_path / "m.obj"
        export_mesh_obj(mesh, path)
        lines = path.read_text().splitlines()
        v_lines = [l for l in lines if l.startswith("v ")]
        vn_lines = [l for l in lines if l.startswith("vn ")]
        f_lines = [l for l in lines if l.startswith("f ")]
        assert len(v_lines) == len(mesh.vertices)
        assert len(vn_lines) == len(mesh.normals)
        assert len(f_lines) == len(mesh.faces)
        # v block comes before vn block before f block
        assert lines.index(v_lines[-1]) < lines.index(vn_lines[0])
        assert lines.index(vn_lines[-1]) < lines.index(f_lines[0])
        first_face = f_lines[0].split()
        assert all("//" in part for part in first_face[1:])
        # 1-indexed
        indices = [int(p.split("//")[0]) for l in f_lines for p in l.split()[1:]]
        assert min(indices) >= 1
        assert max(indices) <= len(mesh.vertices)


class TestJobConfig:
    def test_from_yaml_with_overrides(self, tmp_path):
        cfg = tmp_path / "job.yaml"
        cfg.write_text(yaml.safe_dump({
            "kappa": 2.0, "a": 0.4, "target": "2/5", "grid": 8,
        }))
        job = JobConfig.from_file(cfg, overrides={"a": 0.9})
        assert job.kappa == 2.0
        assert job.a == 0.9
        assert (job.target_p, job.target_q) == (2, 5)
        assert job.target.value == pytest.approx(2 * math.pi / 5)

    def test_unknown_keys_rejected(self, tmp_path):
        cfg = tmp_path / "job.yaml"
        cfg.write_text("frobnicate: 1\n")
        with pytest.raises(ValueError, match="unknown"):
            JobConfig.from_file(cfg)

    def test_validation(self):
        with pytest.raises(ValueError):
            JobConfig(target_p=2, target_q=4)
        with pytest.raises(ValueError):
            JobConfig(target_q=33, target_p=1)
        with pytest.raises(ValueError):
            JobConfig(tol=1.0)

    def test_params_with_extra_harmonics(self):
        job = JobConfig(a=0.5, b3=0.1, harmonics=[[5, 0.01]])
        params = job.params()
        assert params.profile.coefficients == ((1, 1.0), (3, 0.1), (5, 0.01))


class TestCliEval:
    def test_row_count_contract(self, tmp_path, capsys):
        out = tmp_path / "helix.csv"
        rc = main(["eval", "--kappa", "1", "--a", "0", "--periods", "1",
                   "--samples", "256", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) - 1 == 257  # endpoint inclusive

    def test_json_output(self, tmp_path):
        out = tmp_path / "c.json"
        rc = main(["eval", "--kappa", "1", "--a", "0.3", "--samples", "64",
                   "--out", str(out)])
        assert rc == 0
        doc = read_curve_json(out)
        assert len(doc.curve) == 65

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert main(["eval", "--kappa", "1.3", "--a", "0.5", "--b3", "0.1",
                         "--samples", "64", "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_usage_error_exit_2(self, capsys):
        with pytest.raises(SystemExit) as ei:
            main(["eval", "--kappa", "1"])  # missing --out
        assert ei.value.code == 2


class TestCliPipeline:
    def test_solve_verify_export(self, tmp_path, solved):
        sol_path = tmp_path / "solution.json"
        # near-converged seed: one to two Newton iterations
        rc = main(["solve", "--target", "1/3",
                   "--kappa", f"{solved.kappa:.12f}", "--a", f"{solved.a:.12f}",
                   "--samples", "512", "--out", str(sol_path)])
        assert rc == 0
        doc = json.loads(sol_path.read_text())
        assert doc["solve"]["converged"] is True
        assert doc["solve"]["residual_norm"] < 1e-10
        assert doc["params"]["kappa"] == pytest.approx(solved.kappa, abs=1e-6)
        assert all(v["passed"] for v in doc["verification"].values())
        assert doc["closure"]["gap"] < 1e-7
        assert doc["closure"]["rotation_order"] == 3

        rc = main(["verify", "--curve", str(sol_path), "--samples", "512",
                   "--out", str(tmp_path / "report.json")])
        assert rc == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert all(v["passed"] for v in report.values())

        rc = main(["export", "--curve", str(sol_path),
                   "--csv", str(tmp_path / "sol.csv"),
                   "--mesh", str(tmp_path / "sol.obj"), "--ring-size", "8"])
        assert rc == 0
        assert (tmp_path / "sol.csv").exists()
        assert (tmp_path / "sol.obj").exists()

    def test_solve_failure_exit_1(self, tmp_path):
        rc = main(["solve", "--target", "1/3", "--kappa", "1.0", "--a", "0",
                   "--out", str(tmp_path / "x.json")])
        assert rc == 1
        trace = json.loads((tmp_path / "x.json").read_text())
        assert trace["converged"] is False

    def test_verify_fails_on_tampered_doc(self, tmp_path, solved):
        sol_path = tmp_path / "solution.json"
        assert main(["solve", "--target", "1/3",
                     "--kappa", f"{solved.kappa:.12f}", "--a", f"{solved.a:.12f}",
                     "--samples", "512", "--no-verify",
                     "--out", str(sol_path)]) == 0
        doc = json.loads(sol_path.read_text())
        doc["params"]["kappa"] *= 1.05  # params no longer match samples
        sol_path.write_text(json.dumps(doc))
        rc = main(["verify", "--curve", str(sol_path), "--samples", "256"])
        assert rc == 1

    def test_family_zero_range(self, tmp_path, solved):
        sol_path = tmp_path / "solution.json"
        assert main(["solve", "--target", "1/3",
                     "--kappa", f"{solved.kappa:.12f}", "--a", f"{solved.a:.12f}",
                     "--samples", "256", "--no-verify", "--out", str(sol_path)]) == 0
        fam_path = tmp_path / "family.json"
        rc = main(["family", "--start", str(sol_path), "--b3-min", "0",
                   "--b3-max", "0", "--step", "0.01", "--out", str(fam_path)])
        assert rc == 0
        fam = json.loads(fam_path.read_text())
        assert len(fam["members"]) == 1
        assert fam["truncated"] is None


class TestCliScan:
    def test_scan_writes_ranked_candidates(self, tmp_path):
        out = tmp_path / "scan.json"
        rc = main(["scan", "--target", "1/3", "--kappa-range", "0.55:0.75",
                   "--a-range", "1.2:1.45", "--grid", "4",
                   "--b3-values", "-0.05", "0.0",
                   "--top", "6", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        norms = [c["norm"] for c in doc["candidates"]]
        assert norms == sorted(norms)
        assert len(norms) == 6

    def test_scan_feeds_solve(self, tmp_path):
        scan_path = tmp_path / "scan.json"
        assert main(["scan", "--target", "1/3", "--kappa-range", "0.6:0.72",
                     "--a-range", "1.25:1.4", "--grid", "4",
                     "--out", str(scan_path)]) == 0
        sol_path = tmp_path / "sol.json"
        rc = main(["solve", "--target", "1/3", "--from-scan", str(scan_path),
                   "--samples", "256", "--no-verify", "--out", str(sol_path)])
        assert rc == 0
        doc = json.loads(sol_path.read_text())
        assert doc["solve"]["residual_norm"] < 1e-10


class TestConfigFlag:
    def test_config_sets_defaults(self, tmp_path):
        cfg = tmp_path / "job.yaml"
        cfg.write_text(yaml.safe_dump({"kappa": 1.0, "a": 0.0}))
        out = tmp_path / "c.csv"
        rc = main(["--config", str(cfg), "eval", "--samples", "32",
                   "--out", str(out)])
        assert rc == 0
        cols = read_curve_csv(out)
        assert cols["v"][0] == 1.0  # a=0 from config

    def test_bad_config_exit_2(self, tmp_path):
        cfg = tmp_path / "job.yaml"
        cfg.write_text("nope: 1\n")
        assert main(["--config", str(cfg), "eval", "--out", "x.csv"]) == 2
