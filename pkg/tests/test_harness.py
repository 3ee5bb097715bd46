"""Command-line interface behavior, output formats, and exit codes."""

import json
import subprocess
import sys

import pytest

from varschouten import is_exact, parse_density
from varschouten.cli import main

GOLDEN_F = "p * q * q[2]"
GOLDEN_G = "p[1] * exp(q[1])"
GOLDEN_H = "p[2] * cos(q)"


def run(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


class TestEuler:
    def test_plain_output(self, capsys):
        code, out, err = run(["euler", "--density", GOLDEN_F, "--wrt", "q"], capsys)
        assert (code, out, err) == (0, "q*p[2] + 2*q[1]*p[1] + 2*q[2]*p\n", "")

    def test_json_output(self, capsys):
        code, out, err = run(
            ["euler", "--density", "q^2", "--wrt", "q", "--format", "json"], capsys
        )
        assert code == 0 and err == ""
        assert out == (
            '{"args":{},"monomials":'
            '[{"coeff":"2","even":[["q",1]],"funcs":[],"odd":[]}]}\n'
        )

    def test_side_flag_accepted(self, capsys):
        left = run(["euler", "--density", GOLDEN_F, "--wrt", "p"], capsys)
        right = run(
            ["euler", "--density", GOLDEN_F, "--wrt", "p", "--side", "right"], capsys
        )
        assert left[0] == right[0] == 0
        assert left[1] == right[1] == "q*q[2]\n"

    def test_custom_context_file(self, capsys, tmp_path):
        ctx_file = tmp_path / "ctx.txt"
        ctx_file.write_text("indep t\nfield u odd antifield w\n")
        code, out, err = run(
            ["euler", "--density", "w * u[1]", "--wrt", "u", "--ctx", str(ctx_file)],
            capsys,
        )
        assert (code, out, err) == (0, "-w[1]\n", "")

    def test_density_from_file(self, capsys, tmp_path):
        dens = tmp_path / "density.txt"
        dens.write_text("# stored density\np * q * q[2]\n")
        code, out, _ = run(
            ["euler", "--density", "@" + str(dens), "--wrt", "q"], capsys
        )
        assert code == 0
        assert out == "q*p[2] + 2*q[1]*p[1] + 2*q[2]*p\n"


class TestBracket:
    def test_golden_inner_bracket(self, capsys):
        code, out, err = run(
            ["bracket", "--F", GOLDEN_G, "--G", GOLDEN_H], capsys
        )
        assert (code, err) == (0, "")
        assert out == (
            "q[1]^2*cos(q)*exp(q[1])*p[2] + q[1]^2*q[2]*cos(q)*exp(q[1])*p[1]"
            " + q[2]^2*exp(q[1])*sin(q)*p[1]\n"
        )


class TestJacobi:
    def test_golden_triple_verifies(self, ctx, capsys):
        code, out, err = run(
            ["jacobi", "--F", GOLDEN_F, "--G", GOLDEN_G, "--H", GOLDEN_H], capsys
        )
        assert (code, err) == (0, "")
        lines = out.splitlines()
        assert len(lines) == 2 and lines[1] == "ZERO"
        defect = parse_density(lines[0], ctx)
        assert not defect.is_zero() and is_exact(defect)

    def test_json_output(self, capsys):
        code, out, _ = run(
            [
                "jacobi", "--F", GOLDEN_F, "--G", GOLDEN_G, "--H", GOLDEN_H,
                "--format", "json",
            ],
            capsys,
        )
        assert code == 0
        payload = json.loads(out)
        assert sorted(payload) == ["defect", "verdict"]
        assert payload["verdict"] == "ZERO"
        assert payload["defect"]["monomials"]

    def test_parity_mixed_input_rejected(self, capsys):
        code, out, err = run(
            ["jacobi", "--F", "p + q", "--G", "q", "--H", "q"], capsys
        )
        assert (code, out) == (2, "")
        assert err == (
            "error: functional 'F' has a parity-mixed density; "
            "split it into homogeneous components first\n"
        )


class TestTrace:
    def test_plain_report(self, capsys):
        code, out, err = run(
            ["trace", "--F", GOLDEN_F, "--G", GOLDEN_G, "--H", GOLDEN_H], capsys
        )
        assert (code, err) == (0, "")
        lines = out.splitlines()
        assert lines[0] == "shifted-graded Jacobi trace"
        assert lines[3] == "verdict: verified"
        assert len(lines) == 41

    def test_json_report(self, capsys):
        code, out, _ = run(
            [
                "trace", "--F", GOLDEN_F, "--G", GOLDEN_G, "--H", GOLDEN_H,
                "--format", "json",
            ],
            capsys,
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["verdict"] == "verified"
        assert payload["eq_sign"] == 1


class TestNormalize:
    def test_plain(self, capsys):
        code, out, err = run(["normalize", "--density", "q + q"], capsys)
        assert (code, out, err) == (0, "2*q\n", "")

    def test_latex(self, capsys):
        code, out, err = run(
            ["normalize", "--density", "q[1]*p + p*q[1]", "--format", "latex"],
            capsys,
        )
        assert (code, out, err) == (0, "2 q_{x} q^{\\dagger}\n", "")


class TestFuzz:
    def test_plain_summary(self, capsys):
        code, out, err = run(["fuzz", "--count", "3", "--seed", "5"], capsys)
        assert (code, out, err) == (0, "3/3 verified (0 degenerate)\n", "")

    def test_no_funcs_flag(self, capsys):
        code, out, _ = run(
            ["fuzz", "--count", "2", "--seed", "3", "--no-funcs"], capsys
        )
        assert (code, out) == (0, "2/2 verified (1 degenerate)\n")

    def test_json_summary_deterministic(self, capsys):
        argv = ["fuzz", "--count", "3", "--seed", "5", "--format", "json"]
        first = run(argv, capsys)
        second = run(argv, capsys)
        assert first == second
        assert first[0] == 0
        assert first[1] == (
            '{"degenerate":0,"failures":[],"trials":3,"verified":3}\n'
        )

    def test_seed_env_override(self, capsys, monkeypatch):
        explicit = run(
            ["fuzz", "--count", "3", "--seed", "5", "--format", "json"], capsys
        )
        monkeypatch.setenv("VARSCHOUTEN_SEED", "0x5")
        from_env = run(["fuzz", "--count", "3", "--format", "json"], capsys)
        assert from_env == explicit


class TestErrorHandling:
    def test_parse_error_exits_2(self, capsys):
        code, out, err = run(["euler", "--density", "q + q *", "--wrt", "q"], capsys)
        assert (code, out) == (2, "")
        assert err == "error: line 1, column 8: expected a term, found end of input\n"

    def test_missing_context_file(self, capsys, tmp_path):
        code, out, err = run(
            ["euler", "--density", "q", "--wrt", "q",
             "--ctx", str(tmp_path / "absent.txt")],
            capsys,
        )
        assert (code, out) == (2, "")
        assert err.startswith("error: ")

    def test_malformed_context_file(self, capsys, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("frobnicate\n")
        code, out, err = run(
            ["euler", "--density", "q", "--wrt", "q", "--ctx", str(bad)], capsys
        )
        assert (code, out) == (2, "")
        assert err == "error: line 1, column 1: unknown directive 'frobnicate'\n"

    def test_no_subcommand_is_usage_error(self, capsys):
        code, _, err = run([], capsys)
        assert code == 2
        assert "usage:" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "varschouten", "normalize", "--density", "q + q"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout == "2*q\n"
