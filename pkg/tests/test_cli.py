# tests/test_cli.py
import io
import json
import logging
import os

import pytest

from main import (
    Command,
    RunConfig,
    RunResults,
    UsageError,
    main,
    parse_window,
    run,
)
from src.loaders.report_writer import validate_report

pytestmark = pytest.mark.integration

PHI_DIHEDRAL = "0 1 2\n0 2 1\n"
PSI_TRIVIAL = "0 0 0\n1 1 1\n"


@pytest.fixture(autouse=True)
def restore_loggers():
    """main() installs its own handlers; drop them after each test."""
    yield
    for name in ("loopforge", "src"):
        named = logging.getLogger(name)
        named.handlers.clear()
        named.propagate = True
        named.setLevel(logging.NOTSET)


def run_cmd(verb, action=None, inputs=(), m=None, **options):
    outcome = run(Command(verb, action, list(inputs), m, options))
    validate_report(outcome.report)
    return outcome


class TestParseWindow:
    def test_forms(self):
        assert parse_window("-3..3") == (-3, 3)
        assert parse_window("0,4") == (0, 4)

    def test_rejects_empty_and_garbage(self):
        with pytest.raises(UsageError):
            parse_window("3..-3")
        with pytest.raises(UsageError):
            parse_window("a..b")


class TestClassifyAndVerify:
    def test_classify_preset(self):
        outcome = run_cmd("classify", inputs=["preset:S3"])
        assert outcome.exit_code == 0
        assert outcome.report["result"]["h"] == 2
        assert outcome.report["conditions"] is None

    def test_classify_with_failing_m(self):
        outcome = run_cmd("classify", inputs=["preset:S3"], m=0)
        assert outcome.exit_code == 1
        assert outcome.report["status"] == "failed"
        assert outcome.report["conditions"]["laws"]["m-inv"]["ok"] is False

    def test_verify_needs_m(self):
        outcome = run_cmd("verify", "m-inverse", ["preset:Z3"])
        assert outcome.exit_code == 2
        assert "requires --m" in outcome.report["error"]

    def test_unknown_option(self):
        outcome = run_cmd("classify", inputs=["preset:Z3"], cap=3)
        assert outcome.exit_code == 2

    def test_wrong_input_count(self):
        assert run_cmd("classify").exit_code == 2

    def test_malformed_file(self, write_file):
        path = write_file("bad.tbl", "2\n0 1\n1 1\n")
        outcome = run_cmd("verify", "m-inverse", [path], m=1)
        assert outcome.exit_code == 2
        assert "Latin" in outcome.report["error"]

    def test_verify_rst(self):
        assert run_cmd("verify", "rst", ["preset:S3"], rst="-1,0,-1").exit_code == 0
        outcome = run_cmd("verify", "rst", ["preset:S3"], rst="0,1,0")
        assert outcome.exit_code == 1
        assert outcome.report["conditions"]["laws"]["rst-inv"]["witness"] == [1, 2]

    def test_verify_semidirect_even_m(self, write_file):
        phi = write_file("phi.tbl", PHI_DIHEDRAL)
        outcome = run_cmd("verify", "semidirect", ["preset:Z3", "preset:Z2", phi], m=2)
        assert outcome.exit_code == 1
        assert outcome.report["conditions"]["laws"]["m-inverse-cond"]["witness"] == [1, 1]

    def test_verify_matched_pair(self, write_file):
        phi = write_file("phi.tbl", PHI_DIHEDRAL)
        psi = write_file("psi.tbl", PSI_TRIVIAL)
        outcome = run_cmd("verify", "matched-pair", ["preset:Z3", "preset:Z2", phi, psi], m=1)
        assert outcome.exit_code == 0
        assert outcome.report["result"]["trivial_actions"] is False


class TestConstruct:
    def test_direct_product_text(self):
        outcome = run_cmd("construct", "direct-product", ["preset:S3", "preset:Z3"])
        assert outcome.exit_code == 0
        assert outcome.text.startswith("# direct product")
        assert "\n18\n" in outcome.text

    def test_semidirect_text_parses(self, write_file):
        phi = write_file("phi.tbl", PHI_DIHEDRAL)
        outcome = run_cmd("construct", "semidirect", ["preset:Z3", "preset:Z2", phi], m=1)
        assert outcome.exit_code == 0
        classified = run_cmd("classify", inputs=[write_file("q.tbl", outcome.text)])
        assert classified.report["result"]["h"] == 2

    def test_lambda_bundle(self, tmp_path):
        outcome = run_cmd("construct", "lambda-example", bundle_dir=str(tmp_path / "bundle"))
        assert outcome.exit_code == 0
        assert outcome.report["result"]["order"] == 24
        assert os.path.exists(tmp_path / "bundle" / "manifest.json")

    def test_lambda_even_m(self):
        outcome = run_cmd("construct", "lambda-example", m=2)
        assert outcome.exit_code == 1
        assert "odd" in outcome.report["error"]

    def test_sabinin_of_a_group(self):
        outcome = run_cmd("construct", "sabinin", ["preset:Z4"])
        assert outcome.exit_code == 0
        assert outcome.report["result"]["identity"] == 0


class TestFactorizeAndHopf:
    def test_factorize_s3(self):
        outcome = run_cmd(
            "factorize", inputs=["preset:S3"], m=1,
            r_embed="0 3 4", s_embed="0 1", decomposition="matched",
        )
        assert outcome.exit_code == 0
        assert outcome.report["conditions"]["laws"]["displayed-shape"]["ok"] is True

    def test_factorize_size_mismatch(self):
        outcome = run_cmd("factorize", inputs=["preset:S3"], m=1, r_embed="0 1", s_embed="0 2")
        assert outcome.exit_code == 1
        assert "differs" in outcome.report["error"]

    def test_hopf_lift(self):
        assert run_cmd("hopf", "lift", ["preset:S3"], m=1).exit_code == 0
        failing = run_cmd("hopf", "lift", ["preset:S3"], m=0)
        assert failing.exit_code == 1
        assert failing.report["conditions"]["laws"]["S-m-prop"]["ok"] is False

    def test_hopf_lift_reads_stdin(self, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO("2\n0 1\n1 0\n"))
        outcome = run_cmd("hopf", "lift", m=0, structure=True)
        assert outcome.exit_code == 0
        assert outcome.report["result"]["structure"]["dim"] == 2

    def test_hopf_tensor(self):
        outcome = run_cmd("hopf", "tensor", ["preset:Z3", "preset:S3"], m1=0, m2=1)
        assert outcome.exit_code == 0
        assert outcome.report["result"]["exponents"] == [1]
        assert outcome.report["result"]["dim"] == 18

    def test_hopf_tensor_needs_exponents(self):
        assert run_cmd("hopf", "tensor", ["preset:Z3", "preset:S3"]).exit_code == 2


class TestSearch:
    def test_cocycles(self):
        outcome = run_cmd("search", "cocycles", ["preset:Z3", "preset:Z2"])
        assert outcome.exit_code == 0
        assert outcome.report["result"]["count"] == 4
        assert len(outcome.report["result"]["cocycles"]) == 4

    def test_semidirect_actions(self):
        outcome = run_cmd("search", "actions", ["preset:Z3", "preset:Z2"], m=2, semidirect=True)
        assert outcome.report["result"]["count"] == 1
        assert outcome.report["result"]["only_trivial"] is True

    def test_loops_with_store(self, temp_sqlite_db):
        cmd = Command("search", "loops", [], 0, {"n": 4, "store": True})
        cmd.config.db_url = temp_sqlite_db
        outcome = run(cmd)
        assert outcome.report["result"]["count"] == 4
        assert outcome.report["result"]["m_inverse_count"] == 4
        assert outcome.report["result"]["stored_new"] == 4

    def test_loops_beyond_exhaustive_limit(self):
        assert run_cmd("search", "loops", n=7).exit_code == 2

    def test_sampled_loops_are_partial(self):
        results = RunResults()
        outcome = run(Command("search", "loops", [], None, {"n": 7, "sample": 2, "seed": 3}), results)
        assert outcome.report["result"]["complete"] is False
        assert results.warnings


class TestRunBookkeeping:
    def test_run_config_round_trip(self, tmp_path):
        path = str(tmp_path / "run_config.json")
        RunConfig(window=(-1, 5), strict=True).save_to_file(path)
        loaded = RunConfig.load_from_file(path)
        assert loaded.window == (-1, 5)
        assert loaded.strict is True

    def test_results_summary(self, tmp_path):
        results = RunResults()
        run(Command("classify", None, ["preset:S3"], 0), results)
        results.finalize()
        summary = results.get_summary()
        assert summary["exit_code"] == 1
        assert summary["checks_total"] == 1 and summary["checks_passed"] == 0
        path = results.save_to_file(str(tmp_path / "results.json"))
        assert json.loads(open(path).read())["summary"]["total_errors"] == 1

    def test_output_file(self, tmp_path):
        target = tmp_path / "reports" / "classify.json"
        outcome = run(Command("classify", None, ["preset:Z2"], output=str(target)))
        assert json.loads(target.read_text()) == outcome.report


class TestMain:
    def test_json_to_stdout(self, capsys):
        code = main(["classify", "--window", "-2..2", "preset:Z3"])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["result"]["valid_m"] == [-2, -1, 0, 1, 2]

    def test_text_format(self, capsys):
        code = main(["verify", "m-inverse", "--m", "0", "--format", "text", "preset:S3"])
        assert code == 1
        out = capsys.readouterr().out
        assert "verify m-inverse: failed" in out
        assert "m-inv" in out

    def test_pipeline_through_files(self, tmp_path, capsys):
        assert main(["construct", "lambda-example"]) == 0
        q_path = tmp_path / "q.tbl"
        q_path.write_text(capsys.readouterr().out)
        assert main(["hopf", "lift", "--m", "1", str(q_path)]) == 0
        assert json.loads(capsys.readouterr().out)["result"]["dim"] == 24

    @pytest.mark.parametrize("flag", ["--strict-paper-conditions", "--strict-conditions"])
    def test_strict_flag(self, capsys, write_file, flag):
        phi = write_file("phi.tbl", PHI_DIHEDRAL)
        psi = write_file("psi.tbl", PSI_TRIVIAL)
        code = main(["verify", "matched-pair", "--m", "1", flag,
                     "preset:Z3", "preset:Z2", phi, psi])
        assert code in (0, 1)
        laws = json.loads(capsys.readouterr().out)["conditions"]["laws"]
        assert laws["m-inverse-cond-matched/literal"]["gating"] is True
        assert laws["m-inverse-cond-matched/uniform"]["gating"] is False

    def test_bad_window_is_a_usage_error(self):
        with pytest.raises(SystemExit) as info:
            main(["classify", "--window", "x", "preset:Z3"])
        assert info.value.code == 2
