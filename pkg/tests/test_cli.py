import csv
import math
import subprocess
import sys

import numpy as np
import pytest

from nablafrac.cli import format_runspec, main, parse_runspec, parse_runspec_text, read_pairs
from nablafrac.errors import ParseError, ValidationError

CLOSED_FORM = """\
command = solve
nu = 0.5
a = 0
M = 1
horizon = 64
tol = 1e-10
p.family = geometric_rising
p.c = 2
F.family = const
F.v = 0.886226925452758   # Gamma(1.5)
K = 0.5
output = solution.csv
"""

SATURATING = """\
command = {command}
nu = 0.5
M = 1
p.family = geometric_rising
p.c = 2
F.family = saturating
F.kappa = {K}
K = {K}
"""

LINEAR = """\
command = solve
nu = 0.5
M = 1
p.family = geometric_rising
p.c = 2
q.family = geometric
q.c = 20
q.ratio = 0.5
f.family = geometric
f.c = -1
f.ratio = 0.5
output = linear.csv
"""


def write(tmp_path, text, name="run.spec"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    rows = list(csv.reader(lines[1:]))
    return lines[0], rows[0], rows[1:]


class TestParse:
    def test_minimal_solve(self, tmp_path):
        spec = parse_runspec(write(tmp_path, CLOSED_FORM))
        assert spec.command == "solve"
        assert spec.nu == 0.5 and spec.M == 1.0 and spec.K == 0.5
        assert spec.config.horizon == 64
        assert spec.config.fp_tol == spec.config.tail_tol == 1e-10
        assert spec.families["p"].family == "geometric_rising"
        assert spec.families["F"].params == {"v": 0.886226925452758}

    def test_round_trip(self, tmp_path):
        spec = parse_runspec(write(tmp_path, CLOSED_FORM))
        again = parse_runspec_text(format_runspec(spec), tmp_path)
        assert again == spec
        assert format_runspec(again) == format_runspec(spec)

    def test_round_trip_linear(self, tmp_path):
        spec = parse_runspec(write(tmp_path, LINEAR))
        assert parse_runspec_text(format_runspec(spec), tmp_path) == spec

    def test_order_out_of_range(self):
        with pytest.raises(ValidationError, match="nu must lie in"):
            parse_runspec_text(CLOSED_FORM.replace("nu = 0.5", "nu = 1.5"))

    def test_op_allows_larger_order(self):
        spec = parse_runspec_text("command = op\nop = nabla_sum\nnu = 1.5\nf.family = const\nf.v = 1\n")
        assert spec.nu == 1.5

    def test_missing_p(self):
        text = "\n".join(line for line in CLOSED_FORM.splitlines() if not line.startswith("p."))
        with pytest.raises(ValidationError) as info:
            parse_runspec_text(text)
        assert info.value.key == "p.family"

    @pytest.mark.parametrize(
        "line,key",
        [
            ("M = -1", "M"),
            ("horizon = 1", "horizon"),
            ("horizon = 2.5", "horizon"),
            ("tail_tol = 0", "tail_tol"),
            ("max_iter = 0", "max_iter"),
            ("metric = energy", "metric"),
            ("K = 0", "K"),
            ("bogus = 3", "bogus"),
            ("p.gamma = 2", "p.gamma"),
            ("nu = half", "nu"),
        ],
    )
    def test_validation_names_key(self, line, key):
        key_name = line.split("=")[0].strip()
        lines = [ln for ln in CLOSED_FORM.splitlines() if ln.split("=")[0].strip() != key_name]
        with pytest.raises(ValidationError) as info:
            parse_runspec_text("\n".join(lines + [line]))
        assert info.value.key == key
        assert str(info.value).startswith(f"{key}: ")

    def test_parse_error_line_number(self):
        with pytest.raises(ParseError) as info:
            read_pairs("command = solve\n# fine\nnu 0.5\n")
        assert info.value.line == 3
        assert "line 3" in str(info.value)

    def test_duplicate_key(self):
        with pytest.raises(ParseError) as info:
            read_pairs("nu = 0.5\nnu = 0.6\n")
        assert info.value.line == 2

    def test_table_must_cover_horizon(self, tmp_path):
        (tmp_path / "p.csv").write_text("t,p\n" + "".join(f"{k},{2.0**k}\n" for k in range(0, 10)))
        text = CLOSED_FORM.replace("p.family = geometric_rising\np.c = 2", "p.family = table\np.file = p.csv\np.column = p")
        with pytest.raises(ValidationError) as info:
            parse_runspec_text(text, tmp_path)
        assert info.value.key == "p.file"
        parse_runspec_text(text.replace("horizon = 64", "horizon = 9"), tmp_path)


class TestRun:
    def test_closed_form_solve(self, tmp_path, capsys):
        assert main([write(tmp_path, CLOSED_FORM)]) == 0
        header_line, header, rows = read_csv(tmp_path / "solution.csv")
        assert header_line.startswith("# nablafrac version=")
        assert header == ["t", "y", "nabla_y", "residual"]
        t = np.array([float(r[0]) for r in rows])
        y = np.array([float(r[1]) for r in rows])
        assert t[0] == -1 and t[-1] == 64 and len(rows) == 66
        np.testing.assert_allclose(y[1:], 1 + 2.0 ** -t[1:], atol=1e-8)
        assert rows[0][2] == "" and rows[1][3] == ""
        out = capsys.readouterr().out
        assert "[solve]" in out and "converged = true" in out

    def test_no_contraction_exit(self, tmp_path, capsys):
        code = main([write(tmp_path, SATURATING.format(command="solve", K=1.0))])
        assert code == 2
        captured = capsys.readouterr()
        assert captured.err.startswith("NoContractionError:")
        assert "constant = 1.128379167095" in captured.out

    def test_check_blocks(self, tmp_path, capsys):
        assert main([write(tmp_path, SATURATING.format(command="check", K=0.4))]) == 0
        out = capsys.readouterr().out
        assert "[contraction sup]" in out and "[contraction weighted]" in out
        assert "passes = true" in out and "passes = false" in out
        assert main([write(tmp_path, SATURATING.format(command="check", K=1.0))]) == 2

    def test_check_weighted_selected(self, tmp_path):
        text = SATURATING.format(command="check", K=0.4) + "metric = weighted\n"
        assert main([write(tmp_path, text)]) == 2

    def test_check_linear(self, tmp_path, capsys):
        text = LINEAR.replace("command = solve", "command = check")
        assert main([write(tmp_path, text)]) == 0
        out = capsys.readouterr().out
        assert "[contraction linear]" in out and "b = 2.0" in out

    def test_solve_then_verify(self, tmp_path, capsys):
        assert main([write(tmp_path, SATURATING.format(command="solve", K=0.4) + "output = sat.csv\n")]) == 0
        verify = SATURATING.format(command="verify", K=0.4) + "input = sat.csv\n"
        assert main([write(tmp_path, verify, "verify.spec")]) == 0
        out = capsys.readouterr().out
        assert "residual_ok = true" in out and "nabla_at_a_zero = true" in out

    def test_linear_solve_then_verify(self, tmp_path, capsys):
        assert main([write(tmp_path, LINEAR)]) == 0
        _, _, rows = read_csv(tmp_path / "linear.csv")
        assert float(rows[0][0]) == 1.0
        verify = LINEAR.replace("command = solve", "command = verify").replace("output = linear.csv", "input = linear.csv")
        assert main([write(tmp_path, verify, "verify.spec")]) == 0
        assert "b = 2.0" in capsys.readouterr().out

    def test_verify_detects_tampering(self, tmp_path, capsys):
        assert main([write(tmp_path, CLOSED_FORM)]) == 0
        path = tmp_path / "solution.csv"
        head, header, rows = read_csv(path)
        rows[10][1] = repr(float(rows[10][1]) + 1e-3)
        with open(path, "w", newline="") as fh:
            fh.write(head + "\n")
            csv.writer(fh, lineterminator="\n").writerows([header] + rows)
        verify = CLOSED_FORM.replace("command = solve", "command = verify").replace(
            "output = solution.csv", "input = solution.csv"
        )
        assert main([write(tmp_path, verify, "verify.spec")]) == 2
        assert "nabla_y_consistent = false" in capsys.readouterr().out

        # without the increment column the residual itself exposes the change
        for r in rows:
            r[2] = ""
        with open(path, "w", newline="") as fh:
            fh.write(head + "\n")
            csv.writer(fh, lineterminator="\n").writerows([header] + rows)
        assert main([write(tmp_path, verify, "verify.spec")]) == 2
        assert "residual_ok = false" in capsys.readouterr().out

    def test_determinism(self, tmp_path):
        spec = write(tmp_path, SATURATING.format(command="solve", K=0.4))
        bodies = []
        for name in ("one.csv", "two.csv"):
            assert main([spec, "--output", str(tmp_path / name)]) == 0
            bodies.append((tmp_path / name).read_bytes().split(b"\n", 1)[1])
        assert bodies[0] == bodies[1]

    def test_input_errors(self, tmp_path, capsys):
        assert main([write(tmp_path, CLOSED_FORM.replace("nu = 0.5", "nu = 1.5"))]) == 1
        assert capsys.readouterr().err.startswith("ValidationError: nu: ")
        assert main([write(tmp_path, "command solve\n")]) == 1
        assert capsys.readouterr().err.startswith("ParseError: line 1: ")
        assert main([str(tmp_path / "missing.spec")]) == 1

    def test_tail_failure_exit(self, tmp_path, capsys):
        text = CLOSED_FORM.replace("p.family = geometric_rising\np.c = 2", "p.family = power\np.gamma = 2")
        assert main([write(tmp_path, text)]) == 2
        assert capsys.readouterr().err.startswith("TailError:")

    def test_op_nabla_sum(self, tmp_path, capsys):
        text = "command = op\nop = nabla_sum\nnu = 0.5\nhorizon = 3\nf.family = const\nf.v = 1\n"
        assert main([write(tmp_path, text)]) == 0
        rows = list(csv.reader(capsys.readouterr().out.splitlines()[1:]))
        assert rows[0] == ["t", "value"]
        np.testing.assert_allclose([float(r[1]) for r in rows[1:]], [0, 1, 1.5, 1.875], rtol=1e-15)

    def test_op_power_rule(self, tmp_path, capsys):
        text = "command = op\nop = power_rule\nnu = 0.7\nmu = 0.3\nhorizon = 5\n"
        assert main([write(tmp_path, text)]) == 0
        rows = list(csv.reader(capsys.readouterr().out.splitlines()[2:]))
        assert float(rows[5][1]) == pytest.approx(math.gamma(1.3) * 5, rel=1e-14)

    def test_op_nabla_diff(self, tmp_path, capsys):
        text = "command = op\nop = nabla_diff\nnu = 0.5\nhorizon = 2\nf.family = const\nf.v = 1\n"
        assert main([write(tmp_path, text)]) == 0
        rows = list(csv.reader(capsys.readouterr().out.splitlines()[2:]))
        assert float(rows[-1][1]) == pytest.approx(0.5, rel=1e-14)

    def test_table_forcing(self, tmp_path):
        (tmp_path / "g.csv").write_text("t,g\n" + "".join(f"{k},{0.5 / (1 + k)}\n" for k in range(0, 65)))
        text = SATURATING.format(command="solve", K=0.4).replace(
            "F.family = saturating\nF.kappa = 0.4\nK = 0.4",
            "F.family = table_in_t_times_affine_u\nF.file = g.csv\nF.column = g\nF.c0 = 1\nF.c1 = 0.5\nK = 0.25",
        ) + "output = table.csv\n"
        assert main([write(tmp_path, text)]) == 0
        assert (tmp_path / "table.csv").exists()

    def test_module_entry_point(self, tmp_path):
        spec = write(tmp_path, CLOSED_FORM)
        proc = subprocess.run([sys.executable, "-m", "nablafrac", spec], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
