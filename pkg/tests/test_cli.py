import csv
import io
import json
import math
import subprocess
import sys

import pytest

from hillspec.cli import EXIT_CERTIFICATE, EXIT_MISMATCH, EXIT_USAGE, SPECTRUM_CSV_HEADER, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def record(out):
    rec = json.loads(out)
    assert set(rec) == {"schema_version", "command", "inputs", "results", "diagnostics"}
    return rec


class TestSpectrum:
    def test_free_dirichlet(self, capsys):
        code, out = run(capsys, "spectrum", "--a-re", "0", "--a-im", "0", "--bc", "dirichlet",
                        "--re-max", "20")
        assert code == 0
        lams = [p["lambda"][0] for p in record(out)["results"]["shooting"]]
        assert lams == pytest.approx([1, 4, 9, 16], abs=1e-8)

    def test_both_methods(self, capsys):
        code, out = run(capsys, "spectrum", "--a-re", "1", "--a-im", "0", "--bc", "periodic",
                        "--re-max", "40", "--method", "both")
        assert code == 0
        cv = record(out)["results"]["cross_validation"]
        assert cv["ok"] and cv["boundaries"][0]["matched"] == 7
        assert cv["boundaries"][0]["max_deviation"] <= 1e-6

    def test_csv(self, capsys):
        code, out = run(capsys, "spectrum", "--a-re", "0.5", "--a-im", "0.5", "--bc", "neumann",
                        "--re-max", "20", "--format", "csv", "--method", "recurrence")
        rows = list(csv.reader(io.StringIO(out)))
        assert code == 0 and rows[0] == SPECTRUM_CSV_HEADER
        assert {r[6] for r in rows[1:]} == {"PN", "AN"}

    def test_missing_a(self, capsys):
        assert main(["spectrum", "--bc", "dirichlet", "--re-max", "3"]) == EXIT_USAGE
        assert "usage" in capsys.readouterr().err

    def test_bad_flag_value(self):
        assert main(["spectrum", "--a-re", "x", "--a-im", "0", "--bc", "p", "--re-max", "1"]) == EXIT_USAGE

    def test_half_pair(self):
        assert main(["spectrum", "--a-re", "1", "--a-im", "0", "--b-re", "1", "--bc", "periodic",
                     "--re-max", "5"]) == EXIT_USAGE

    def test_deterministic(self, capsys):
        argv = ["spectrum", "--a-re", "1", "--a-im", "1", "--bc", "antiperiodic", "--re-max", "30"]
        assert run(capsys, *argv) == run(capsys, *argv)


class TestOtherCommands:
    def test_certify_all(self, capsys):
        code, out = run(capsys, "certify", "--all")
        res = record(out)["results"]
        assert code == 0 and len(res) == 15 and all(c["verdict"] for c in res)

    def test_certify_one_chain(self, capsys):
        code, out = run(capsys, "certify", "--id", "ChainT14")
        assert code == 0 and record(out)["results"][0]["id"] == "ChainT14"

    def test_certify_unknown(self):
        assert main(["certify", "--id", "Est99"]) == EXIT_USAGE

    def test_certify_needs_choice(self):
        assert main(["certify"]) == EXIT_USAGE

    def test_certificate_failure_exit(self, capsys, monkeypatch):
        from hillspec import certificates
        real = certificates.certify_estimation

        def broken(id_, **kw):
            from dataclasses import replace
            return replace(real(id_, **kw), verdict=False)
        monkeypatch.setattr(certificates, "certify_estimation", broken)
        code, _ = run(capsys, "certify", "--id", "Est1")
        assert code == EXIT_CERTIFICATE

    def test_localize(self, capsys):
        code, out = run(capsys, "localize", "--bc", "antiperiodic", "--a-re", "1", "--a-im", "1",
                        "--re-max", "100")
        res = record(out)["results"]
        assert code == 0 and res["ok"] and all(c["disk"] for c in res["coverage"])

    def test_localize_violation_exit(self, capsys, monkeypatch):
        from hillspec import cli
        from hillspec.localization import localize as real

        def shrunk(p, bc, re_max):
            from hillspec.localization import containment_check, Disk, LocalizationResult
            res = real(p, bc, re_max)
            disks = (Disk(0j, 0.1, "tiny"),)
            return LocalizationResult(res.points, disks,
                                      containment_check(res.points, disks, raise_on_violation=False))
        monkeypatch.setattr(cli, "localize", shrunk)
        code, _ = run(capsys, "localize", "--bc", "antiperiodic", "--a-re", "1", "--a-im", "0",
                      "--re-max", "10")
        assert code == EXIT_MISMATCH

    def test_classify(self, capsys):
        code, out = run(capsys, "classify", "--a-re", "1", "--a-im", "0", "--bc", "antiperiodic",
                        "--re-max", "12")
        classes = [p["class"] for p in record(out)["results"]]
        assert code == 0 and classes == ["AD", "AN", "AD", "AN"]

    def test_classify_rejects_pair(self):
        assert main(["classify", "--a-re", "1", "--a-im", "0", "--b-re", "2", "--b-im", "0",
                     "--bc", "periodic", "--re-max", "5"]) == EXIT_USAGE

    def test_discriminant_invariance(self, capsys):
        _, o1 = run(capsys, "discriminant", "--a-re", "2", "--a-im", "0", "--b-re", "2", "--b-im", "0",
                    "--lambda-re", "3", "--lambda-im", "2")
        _, o2 = run(capsys, "discriminant", "--a-re", "4", "--a-im", "0", "--b-re", "1", "--b-im", "0",
                    "--lambda-re", "3", "--lambda-im", "2")
        F1, F2 = (complex(*record(o)["results"]["F"]) for o in (o1, o2))
        assert abs(F1 - F2) <= 1e-8

    def test_sweep(self, capsys):
        code, out = run(capsys, "sweep", "--family", "PN", "--angle", str(math.pi / 2),
                        "--r-max", "2")
        ev = record(out)["results"]["minimal"]
        assert code == 0 and ev["abs_a"] == pytest.approx(1.4687686137851441, abs=1e-6)

    def test_sweep_csv(self, capsys):
        code, out = run(capsys, "sweep", "--family", "AN", "--angle", "0", "--r-max", "1",
                        "--steps", "5", "--format", "csv")
        rows = list(csv.reader(io.StringIO(out)))
        assert code == 0 and rows[0][0] == "t" and len(rows) > 6

    def test_threads_env(self, capsys, monkeypatch):
        monkeypatch.setenv("HILLSPEC_THREADS", "2")
        from hillspec.cli import build_parser
        assert build_parser().parse_args(["certify", "--all"]).threads == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hillspec", "certify", "--id", "Est5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"][0]["computed_lower"]["numerator"] == "145759"
