import io
import os
import subprocess
import sys

import pytest

from hexeval.cli import build_arg_parser, format_answer, run

CORPUS_DIR = os.path.join(os.path.dirname(__file__), "corpus")


def run_cli(argv, stdin_text=None):
    proc = subprocess.run(
        [sys.executable, "-m", "hexeval.cli"] + argv,
        input=stdin_text,
        capture_output=True,
        text=True,
        timeout=120,
    )
    return proc.returncode, proc.stdout, proc.stderr


def run_inline(argv, program_text, tmp_path):
    path = tmp_path / "program.hex"
    path.write_text(program_text)
    args = build_arg_parser().parse_args([str(path)] + argv)
    out = io.StringIO()
    err = io.StringIO()
    code = run(args, out=out, err=err)
    return code, out.getvalue(), err.getvalue()


class TestExitCodes:
    def test_sat_is_ten(self, tmp_path):
        code, out, err = run_inline([], "p(a).", tmp_path)
        assert code == 10
        assert out == "Answer 1: {p(a)}\n"

    def test_unsat_is_twenty(self, tmp_path):
        code, out, err = run_inline([], "a. :- a.", tmp_path)
        assert code == 20
        assert out == ""

    def test_parse_error_is_one(self, tmp_path):
        code, out, err = run_inline([], "p(a", tmp_path)
        assert code == 1
        assert "error" in err

    def test_budget_error_is_two(self, tmp_path):
        program = "w(ab). grow(Z) :- w(X), &concat[X,X](Z). w(Z) :- grow(Z)."
        code, out, err = run_inline(["--max-invention", "4"], program, tmp_path)
        assert code == 2
        assert "budget" in err

    def test_usage_error_is_one(self):
        code, out, err = run_cli(["--no-such-flag"], stdin_text="")
        assert code == 1

    def test_unknown_plugin_is_one(self, tmp_path):
        code, out, err = run_inline([], "p :- &nosuch[q].", tmp_path)
        assert code == 1


class TestOutput:
    def test_concat_answer_sorted(self, tmp_path):
        program = (
            "firstname(pat). lastname(doe).\n"
            "fullname(Full) :- &concat[F,L](Full), firstname(F), lastname(L)."
        )
        code, out, err = run_inline([], program, tmp_path)
        assert code == 10
        assert out == "Answer 1: {firstname(pat), fullname(patdoe), lastname(doe)}\n"

    def test_id_loop_empty_answer(self, tmp_path):
        code, out, err = run_inline([], "p :- &id[p].", tmp_path)
        assert code == 10
        assert out == "Answer 1: {}\n"

    def test_auxiliary_atoms_suppressed(self, tmp_path):
        code, out, err = run_inline([], "p :- &id[p]. q.", tmp_path)
        assert "e_" not in out
        assert "ne_" not in out

    def test_models_limit(self, tmp_path):
        program = "a :- not b. b :- not a."
        code, out, err = run_inline(["--models", "1"], program, tmp_path)
        assert out.count("Answer") == 1

    def test_opt_output(self, tmp_path):
        program = "a :- not b. b :- not a. :~ a. [1@1]"
        code, out, err = run_inline(["--opt"], program, tmp_path)
        assert code == 10
        assert out == "Answer 1: {b}\nCost: 0@1\nOPTIMUM FOUND\n"

    def test_opt_levels(self, tmp_path):
        program = "a :- not b. b :- not a. :~ a. [1@2] :~ b. [5@1]"
        code, out, err = run_inline(["--opt"], program, tmp_path)
        assert "Cost: 0@2 5@1" in out

    def test_stats_printed(self, tmp_path):
        code, out, err = run_inline(["--stats"], "p(a).", tmp_path)
        assert "Decisions" in out
        assert "Models" in out

    def test_dump_ground(self, tmp_path):
        program = "p :- &id[p]."
        code, out, err = run_inline(["--dump-ground"], program, tmp_path)
        assert "e_id[p]" in out

    def test_stdin(self):
        code, out, err = run_cli([], stdin_text="p(a).")
        assert code == 10
        assert out == "Answer 1: {p(a)}\n"


class TestDeterminism:
    @pytest.mark.parametrize(
        "name", ["02_setminus2.hex", "07_atleast_choice.hex", "16_diff_guess.hex"]
    )
    def test_byte_identical_reruns(self, name):
        path = os.path.join(CORPUS_DIR, name)
        first = run_cli([path, "--stats"])
        second = run_cli([path, "--stats"])
        assert first == second

    def test_multiple_input_files(self, tmp_path):
        one = tmp_path / "one.hex"
        two = tmp_path / "two.hex"
        one.write_text("p(a).")
        two.write_text("q(b).")
        args = build_arg_parser().parse_args([str(one), str(two)])
        out = io.StringIO()
        code = run(args, out=out, err=io.StringIO())
        assert code == 10
        assert out.getvalue() == "Answer 1: {p(a), q(b)}\n"


def test_format_answer_sorted():
    assert format_answer(2, ["b", "a(x)"]) == "Answer 2: {a(x), b}"
