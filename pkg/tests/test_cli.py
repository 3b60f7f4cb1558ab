import csv
import io
import json
import os

import pytest

from rieszlab import cli, reports, suites


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestList:
    def test_lists_suites_and_anchors(self, capsys):
        code, out, _ = run(["list"], capsys)
        assert code == 0
        assert "identities" in out
        assert "two-route resolvent identity" in out
        assert out == cli.list_suites()

    def test_stable_order(self):
        assert cli.list_suites() == cli.list_suites()
        text = cli.list_suites()
        positions = [text.index(s) for s in suites.SUITES]
        assert positions == sorted(positions)


class TestVerify:
    def test_su2_identities_pass(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        code, text, _ = run(["verify", "--group", "su2", "--suite", "identities", "--out", str(out)], capsys)
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["passed"] and rep["summary"]["failed"] == 0
        assert {r["group"] for r in rep["records"]} == {"su2"}
        assert "checks passed" in text

    def test_norm_sharpness_case(self, tmp_path, capsys):
        out = tmp_path / "n.json"
        code, _, _ = run(["verify", "--suite", "norms", "--group", "su2", "--p", "2", "--abc", "1,0,0",
                          "--out", str(out)], capsys)
        assert code == 0
        recs = json.loads(out.read_text())["records"]
        main = next(r for r in recs if r["name"].startswith("S(a=1,b=0,c=0) alpha=0 p=2"))
        assert main["value"] == pytest.approx(1.0, abs=1e-9)
        assert main["notes"]["theorem_bound"] == 1.0
        assert any(r["anchor"] == "sharpness at p = 2" for r in recs)

    def test_unknown_group_is_usage_error(self, tmp_path, capsys):
        out = tmp_path / "x.json"
        code, _, err = run(["verify", "--group", "so3", "--out", str(out)], capsys)
        assert code == 2
        assert "unknown group" in err
        assert not out.exists()

    def test_unknown_suite(self, capsys):
        assert run(["verify", "--suite", "everything"], capsys)[0] == 2

    def test_failure_exit_still_writes_report(self, tmp_path, capsys):
        out = tmp_path / "f.csv"
        code, _, _ = run(["verify", "--group", "su2", "--suite", "spectrum", "--tol", "1e-300",
                          "--format", "csv", "--out", str(out)], capsys)
        assert code == 1
        rows = list(csv.DictReader(io.StringIO(out.read_text())))
        assert any(r["passed"] == "False" for r in rows)

    def test_bad_tolerance(self, capsys):
        code, _, err = run(["verify", "--tol", "-1"], capsys)
        assert code == 2 and "tolerance" in err


class TestConfig:
    def test_precedence(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"run": {"seed": 3, "suite": "norms", "paths": 10}, "blocks": {"jmax": 2}}))
        args = cli.build_parser().parse_args(["verify", "--config", str(path), "--paths", "99"])
        cfg = cli.resolve_config(args, environ={"RIESZLAB_SEED": "5", "RIESZLAB_PURE_PYTHON": "1"})
        assert (cfg.seed, cfg.suite, cfg.paths, cfg.jmax) == (5, "norms", 99, 2.0)

    def test_env_lambda_list(self):
        args = cli.build_parser().parse_args(["verify"])
        cfg = cli.resolve_config(args, environ={"RIESZLAB_LAMBDA": "1,-2", "RIESZLAB_GROUP": "h"})
        assert cfg.lambdas == (1.0, -2.0) and cfg.group == "heisenberg"

    def test_lambda_flag(self):
        args = cli.build_parser().parse_args(["verify", "--lambda=-1,0.5"])
        assert args.lambdas == (-1.0, 0.5)

    def test_unknown_key(self, tmp_path, capsys):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"colour": "red"}))
        code, _, err = run(["verify", "--config", str(path)], capsys)
        assert code == 2 and "colour" in err

    def test_env_parse_error(self, monkeypatch, capsys):
        monkeypatch.setenv("RIESZLAB_PATHS", "many")
        assert run(["verify"], capsys)[0] == 2


class TestReports:
    @pytest.fixture()
    def report(self):
        cfg = suites.SuiteConfig(group="su2", suite="spectrum")
        return cli.run_suite(cfg)

    def test_json_round_trip(self, report):
        again = reports.from_json(reports.to_json(report))
        assert again == report
        assert again.to_dict()["schema_version"] == reports.SCHEMA_VERSION

    def test_csv_one_row_per_check(self, report):
        rows = list(csv.reader(io.StringIO(reports.to_csv(report))))
        assert rows[0] == list(reports.CSV_FIELDS)
        assert len(rows) == 1 + len(report.records)

    def test_timing_isolated(self, report):
        d = json.loads(reports.to_json(report, timing=False))
        assert "timing" not in d
        assert "total" in report.timing

    def test_non_finite_values_serialize(self):
        rec = suites.CheckRecord("identities", "x", "sl2", "a", float("inf"), 1.0)
        rep = reports.RunReport.from_checks({}, [rec])
        d = json.loads(reports.to_json(rep))
        assert d["records"][0]["value"] == "inf"
        assert not d["passed"]

    def test_atomic_write_keeps_old_file_on_error(self, tmp_path, monkeypatch):
        path = tmp_path / "r.json"
        path.write_text("old")

        def boom(*a):
            raise OSError("disk full")

        monkeypatch.setattr(os, "replace", boom)
        with pytest.raises(OSError):
            reports.atomic_write(str(path), "new")
        assert path.read_text() == "old"
        assert [p.name for p in tmp_path.iterdir()] == ["r.json"]

    def test_deterministic_bytes(self):
        cfg = suites.SuiteConfig(suite="kernels")
        a = reports.to_json(cli.run_suite(cfg), timing=False)
        b = reports.to_json(cli.run_suite(cfg), timing=False)
        assert a == b

    def test_report_subcommand(self, report, tmp_path, capsys):
        path = tmp_path / "r.json"
        reports.emit_report(report, "json", str(path))
        code, out, _ = run(["report", str(path)], capsys)
        assert code == 0 and "passed" in out
        code, out, _ = run(["report", str(path), "--format", "csv"], capsys)
        assert out == reports.to_csv(report)
        assert run(["report", str(tmp_path / "missing.json")], capsys)[0] == 2

    def test_output_path_not_in_report(self, tmp_path, capsys):
        texts = []
        for name in ("a.json", "b.json"):
            path = tmp_path / name
            run(["verify", "--group", "su2", "--suite", "spectrum", "--seed", "0", "--out", str(path)], capsys)
            rep = json.loads(path.read_text())
            rep.pop("timing")
            texts.append(json.dumps(rep, sort_keys=True))
        assert texts[0] == texts[1]
