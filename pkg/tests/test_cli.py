import io
import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings

from forestmat.cli import (
    EXIT_DATA,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    format_edge_list,
    output_schema,
    parse_edge_list,
    render_tsv,
    run,
)
from forestmat.errors import DuplicateHeader, LoopArc, MissingHeader, ParseError, VertexOutOfRange

from conftest import FIXTURES, digraphs

COMMANDS = ["info", "forests", "access", "rank", "markov", "audit", "oracle-check"]
FIXTURE_FILES = sorted(FIXTURES.glob("*.tsv"))


def invoke(argv, stdin_text=""):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, io.StringIO(stdin_text), out, err)
    return code, out.getvalue(), err.getvalue()


class TestParse:
    def test_path(self, path):
        doc = parse_edge_list("n 3\n1\t2\t1\n2\t3\t1\n")
        assert doc.n == 3 and doc.records == ((1, 2, 1.0), (2, 3, 1.0))
        assert doc.digraph() == path

    def test_arcless(self):
        doc = parse_edge_list("n 2\n")
        assert doc.records == () and doc.digraph().arcs == ()

    def test_comments_and_blanks(self):
        doc = parse_edge_list("# header\n\n  # indented\nn 2 # two\n\n1\t2\t0.5 # arc\n")
        assert doc.records == ((1, 2, 0.5),)

    def test_loop_reports_line(self):
        with pytest.raises(LoopArc) as info:
            parse_edge_list("n 2\n1\t1\t1\n")
        assert info.value.line == 2

    def test_out_of_range(self):
        with pytest.raises(VertexOutOfRange):
            parse_edge_list("n 2\n1\t3\t1\n")

    @pytest.mark.parametrize(
        "text, exc, line, column",
        [
            ("1\t2\t1\n", MissingHeader, 1, 1),
            ("", MissingHeader, 1, 1),
            ("n 2\nn 2\n", DuplicateHeader, 2, 1),
            ("n two\n", ParseError, 1, 1),
            ("n 2\n1 2 1\n", ParseError, 2, 1),
            ("n 2\n1\tx\t1\n", ParseError, 2, 3),
            ("n 2\n1\t2\tabc\n", ParseError, 2, 5),
            ("n 2\n1\t2\tnan\n", ParseError, 2, 5),
        ],
    )
    def test_errors_carry_position(self, text, exc, line, column):
        with pytest.raises(exc) as info:
            parse_edge_list(text)
        assert (info.value.line, info.value.column) == (line, column)
        assert str(info.value).startswith(f"line {line}, column {column}:")

    @settings(max_examples=100, deadline=None)
    @given(digraphs(max_n=8, integer=False))
    def test_round_trip(self, g):
        assert parse_edge_list(format_edge_list(g)).digraph() == g


class TestRun:
    def test_fork_rank_example(self):
        code, out, _ = invoke(["rank", "--method", "mean", "--input", str(FIXTURES / "fork.tsv")])
        assert code == EXIT_OK
        lines = out.splitlines()
        assert "scores\t0.5\t0.5\t0" in lines
        assert "ordering\t1\t2\t3" in lines
        assert lines[lines.index("tie_groups") + 1] == "1\t2"

    def test_path_forests_example(self):
        code, out, _ = invoke(["forests", "--tau", "1"], "n 3\n1\t2\t1\n2\t3\t1\n")
        assert code == EXIT_OK
        lines = out.splitlines()
        assert "sigma\t1\t2\t1" in lines
        i = lines.index("j_tau")
        assert lines[i + 1 : i + 4] == ["1\t0.5\t0.25", "0\t0.5\t0.25", "0\t0\t0.5"]

    def test_forests_k(self):
        code, out, _ = invoke(["forests", "--k", "1", "--format", "json"], "n 3\n1\t2\t1\n2\t3\t1\n")
        doc = json.loads(out)
        assert doc["q_k"] == [[2, 1, 0], [0, 1, 1], [0, 0, 1]]
        assert doc["j_k"][0] == [1.0, 0.5, 0.0]

    @pytest.mark.parametrize("fixture", FIXTURE_FILES, ids=lambda p: p.stem)
    @pytest.mark.parametrize("command", COMMANDS)
    def test_json_validates(self, command, fixture):
        code, out, err = invoke([command, "--format", "json", "--input", str(fixture)])
        if command == "rank" or code == EXIT_OK:
            assert code == EXIT_OK, err
        jsonschema.validate(json.loads(out), output_schema())

    @pytest.mark.parametrize("method", ["kernel", "mean", "borda"])
    def test_rank_methods(self, method):
        code, out, _ = invoke(["rank", "--method", method, "--format", "json", "--input", str(FIXTURES / "two_knots.tsv")])
        assert code == EXIT_OK
        jsonschema.validate(json.loads(out), output_schema())

    def test_access_variants(self):
        src = str(FIXTURES / "path.tsv")
        for extra in (["--direction", "in"], ["--measure", "limiting"], ["--measure", "dense", "--alpha", "0.4"]):
            code, out, err = invoke(["access", "--format", "json", "--input", src] + extra)
            assert code == EXIT_OK, err
            jsonschema.validate(json.loads(out), output_schema())
        code, _, _ = invoke(["access", "--measure", "dense", "--direction", "in", "--input", src])
        assert code == EXIT_USAGE

    def test_markov_dissemination(self):
        argv = ["markov", "--dissemination", "--trials", "2000", "--format", "json", "--input", str(FIXTURES / "path.tsv")]
        code, out, _ = invoke(argv)
        assert code == EXIT_OK
        doc = json.loads(out)
        jsonschema.validate(doc, output_schema())
        assert doc["trials"] == 2000 and doc["seed"] == 0
        assert invoke(argv)[1] == out

    def test_precision_and_negative_zero(self):
        payload = {"a": -0.0, "b": [1 / 3, -1e-300 * 1e-300], "c": 2}
        assert render_tsv(payload, 3) == "a\t0\nb\t0.333\t0\nc\t2\n"
        code, out, _ = invoke(["forests", "--precision", "3", "--input", str(FIXTURES / "two_cycle.tsv")])
        assert "0.667\t0.667" in out

    @pytest.mark.parametrize(
        "argv, stdin_text, expected",
        [
            ([], "", EXIT_USAGE),
            (["bogus"], "", EXIT_USAGE),
            (["info", "--tau", "-1"], "n 2\n", EXIT_USAGE),
            (["rank", "--method", "nope"], "n 2\n", EXIT_USAGE),
            (["info"], "n 2\n1\t1\t1\n", EXIT_DATA),
            (["info"], "garbage\n", EXIT_DATA),
            (["info", "--input", "/nonexistent/file.tsv"], "", EXIT_DATA),
            (["rank", "--method", "daniels"], "n 3\n1\t2\t1\n2\t3\t1\n", EXIT_DATA),
            (["markov", "--alpha", "5"], "n 2\n1\t2\t1\n", EXIT_DATA),
            (["markov", "--max-iters", "1"], "n 3\n1\t2\t1\n2\t3\t1\n", EXIT_NUMERIC),
            (["oracle-check", "--cap", "2"], "n 3\n1\t2\t1\n2\t3\t1\n", EXIT_DATA),
        ],
    )
    def test_exit_codes(self, argv, stdin_text, expected):
        code, _, err = invoke(argv, stdin_text)
        assert code == expected
        if code != EXIT_OK:
            assert err.strip() and len(err.strip().splitlines()) == 1

    def test_help_exits_zero(self, capsys):
        assert run(["--help"]) == 0

    @pytest.mark.parametrize("fixture", FIXTURE_FILES, ids=lambda p: p.stem)
    def test_oracle_check_fixtures(self, fixture):
        assert invoke(["oracle-check", "--input", str(fixture)])[0] == EXIT_OK


def test_console_script_is_deterministic():
    argv = [sys.executable, "-m", "forestmat.cli", "audit", "--input", str(FIXTURES / "two_knots.tsv")]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a.startswith(b"command\taudit\n")
