"""Command-line driver: ``nablafrac RUNSPEC``.

A run spec is a flat ``key = value`` file with ``#`` comments::

    command = solve          # op | check | solve | verify
    nu = 0.5
    a = 0
    M = 1
    horizon = 64
    tol = 1e-10              # shorthand for fp_tol and tail_tol
    p.family = geometric_rising
    p.c = 2
    F.family = const
    F.v = 0.886226925452758
    K = 0.5
    output = solution.csv

Linear problems give ``q.*`` and ``f.*`` instead of ``F.*`` and ``K``; the
``op`` command reads ``op`` (nabla_sum | nabla_diff | power_rule), the operand
``f.*`` and, for the power rule, ``mu``. ``verify`` reads a trajectory CSV
from ``input``.

Exit status is 0 on success, 1 on malformed input and 2 when a contraction
or tail certificate fails or a verification does not pass.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from nablafrac import __version__
from nablafrac import families as fam
from nablafrac.errors import (
    DomainError,
    MaxIterError,
    ModelError,
    NoContractionError,
    ParseError,
    TailError,
    ValidationError,
)
from nablafrac.operators import GridFunction, nabla_diff_grid, nabla_sum_grid, power_rule
from nablafrac.solver import (
    LinearProblem,
    Metric,
    NonlinearProblem,
    SolverConfig,
    contraction_constant_linear,
    contraction_constant_sup,
    contraction_constant_weighted,
    residual_grid,
    solve_linear,
    solve_nonlinear,
    verify_membership,
)

COMMANDS = ("op", "check", "solve", "verify")
OPS = ("nabla_sum", "nabla_diff", "power_rule")
SEQUENCE_FAMILIES = {
    "const": ("v",),
    "geometric": ("c", "ratio"),
    "geometric_rising": ("c", "nu", "at_base"),
    "power": ("gamma", "at_base"),
    "rising_power": ("mu",),
    "table": ("file", "column"),
}
FORCING_FAMILIES = {
    "const": ("v",),
    "saturating": ("kappa",),
    "table_in_t_times_affine_u": ("file", "column", "c0", "c1"),
}
STRING_PARAMS = ("file", "column")
SCALAR_KEYS = ("nu", "a", "M", "K", "mu", "verify_tol")
CONFIG_KEYS = (
    "horizon",
    "tail_tol",
    "fp_tol",
    "max_iter",
    "metric",
    "residual_buffer",
    "lipschitz_samples",
)
TEXT_KEYS = ("command", "op", "output", "input")
FAMILY_PREFIXES = ("p", "q", "f", "F")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CERTIFICATE = 2


@dataclass
class FamilySpec:
    family: str
    params: dict[str, float | str] = field(default_factory=dict)


@dataclass
class RunSpec:
    command: str
    nu: float
    a: float = 0.0
    M: float | None = None
    K: float | None = None
    mu: float | None = None
    op: str | None = None
    verify_tol: float = 1e-8
    config: SolverConfig = field(default_factory=SolverConfig)
    families: dict[str, FamilySpec] = field(default_factory=dict)
    output: str | None = None
    input: str | None = None
    #: directory relative paths (tables, output, input) are resolved against
    base_dir: str = field(default=".", compare=False)


# {{{ parsing


def _number(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ValidationError(key, f"expected a number, got {raw!r}") from None


def _integer(key: str, raw: str) -> int:
    value = _number(key, raw)
    if value != int(value):
        raise ValidationError(key, f"expected an integer, got {raw!r}")
    return int(value)


def read_pairs(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ParseError(f"empty key or value in {line!r}", line=lineno)
        if key in pairs:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        pairs[key] = value
    return pairs


def parse_runspec_text(text: str, base_dir: str | Path = ".") -> RunSpec:
    pairs = read_pairs(text)

    command = pairs.pop("command", None)
    if command is None:
        raise ValidationError("command", "missing")
    if command not in COMMANDS:
        raise ValidationError("command", f"must be one of {', '.join(COMMANDS)}")
    if "nu" not in pairs:
        raise ValidationError("nu", "missing")

    scalars: dict[str, float] = {}
    config: dict[str, object] = {}
    texts: dict[str, str] = {}
    families: dict[str, FamilySpec] = {}
    family_params: dict[str, dict[str, str]] = {}

    if "tol" in pairs:
        tol = pairs.pop("tol")
        pairs.setdefault("fp_tol", tol)
        pairs.setdefault("tail_tol", tol)

    for key, raw in pairs.items():
        if key in SCALAR_KEYS:
            scalars[key] = _number(key, raw)
        elif key in ("horizon", "max_iter", "residual_buffer", "lipschitz_samples"):
            config[key] = _integer(key, raw)
        elif key in ("tail_tol", "fp_tol"):
            config[key] = _number(key, raw)
        elif key == "metric":
            if raw not in (m.value for m in Metric):
                raise ValidationError(key, "must be sup or weighted")
            config[key] = Metric(raw)
        elif key in TEXT_KEYS:
            texts[key] = raw
        elif "." in key and key.split(".", 1)[0] in FAMILY_PREFIXES:
            prefix, param = key.split(".", 1)
            family_params.setdefault(prefix, {})[param] = raw
        else:
            raise ValidationError(key, "unknown key")

    for prefix, params in family_params.items():
        if "family" not in params:
            raise ValidationError(f"{prefix}.family", "missing")
        name = params.pop("family")
        table = FORCING_FAMILIES if prefix == "F" else SEQUENCE_FAMILIES
        if name not in table:
            raise ValidationError(f"{prefix}.family", f"unknown family {name!r}")
        parsed: dict[str, float | str] = {}
        for param, raw in params.items():
            if param not in table[name]:
                raise ValidationError(f"{prefix}.{param}", f"not a parameter of {name}")
            parsed[param] = raw if param in STRING_PARAMS else _number(f"{prefix}.{param}", raw)
        families[prefix] = FamilySpec(name, parsed)

    nu = scalars.pop("nu")
    checks = {
        "horizon": (lambda v: v >= 2, "must be >= 2"),
        "tail_tol": (lambda v: v > 0, "must be positive"),
        "fp_tol": (lambda v: v > 0, "must be positive"),
        "max_iter": (lambda v: v >= 1, "must be >= 1"),
        "lipschitz_samples": (lambda v: v >= 0, "must be >= 0"),
    }
    for key, (ok, constraint) in checks.items():
        if key in config and not ok(config[key]):
            raise ValidationError(key, constraint)
    try:
        cfg = SolverConfig(**config)
    except DomainError as exc:
        raise ValidationError("residual_buffer", str(exc)) from None

    spec = RunSpec(
        command=command,
        nu=nu,
        config=cfg,
        families=families,
        base_dir=str(base_dir),
        **scalars,
        **texts,
    )
    validate(spec)
    return spec


def parse_runspec(path: str | Path) -> RunSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_runspec_text(text, base_dir=path.parent)


def _require_params(spec: RunSpec, prefix: str) -> None:
    fs = spec.families[prefix]
    table = FORCING_FAMILIES if prefix == "F" else SEQUENCE_FAMILIES
    optional = {"at_base", "nu"}
    for param in table[fs.family]:
        if param not in fs.params and param not in optional:
            raise ValidationError(f"{prefix}.{param}", f"required by family {fs.family}")


def validate(spec: RunSpec) -> None:
    H = spec.config.horizon
    if spec.command == "op":
        if not spec.nu > 0:
            raise ValidationError("nu", "must be positive")
        if spec.op not in OPS:
            raise ValidationError("op", f"must be one of {', '.join(OPS)}")
        if spec.op == "power_rule":
            if spec.mu is None or not spec.mu > -1:
                raise ValidationError("mu", "power_rule needs mu > -1")
        else:
            if "f" not in spec.families:
                raise ValidationError("f.family", "missing operand")
            _require_params(spec, "f")
            _check_cover(spec, "f", 0 if spec.nu == math.ceil(spec.nu) else 1, H)
        return

    if not 0 < spec.nu < 1:
        raise ValidationError("nu", "nu must lie in (0,1)")
    if spec.M is None:
        raise ValidationError("M", "missing")
    if not spec.M >= 0:
        raise ValidationError("M", "must be nonnegative")
    if "p" not in spec.families:
        raise ValidationError("p.family", "missing")
    _require_params(spec, "p")
    _check_cover(spec, "p", 0, H)
    if spec.command == "verify" and not spec.input:
        raise ValidationError("input", "verify needs a trajectory CSV")

    if "F" in spec.families:
        if "q" in spec.families or "f" in spec.families:
            raise ValidationError("F.family", "give either F (nonlinear) or q and f (linear)")
        _require_params(spec, "F")
        if spec.K is None or not spec.K > 0:
            raise ValidationError("K", "nonlinear problems need a Lipschitz constant K > 0")
        _check_cover(spec, "F", 1, H)
    else:
        for prefix in ("q", "f"):
            if prefix not in spec.families:
                raise ValidationError(f"{prefix}.family", "missing (linear problem needs q and f, or give F)")
            _require_params(spec, prefix)
            _check_cover(spec, prefix, 1, H)


def _check_cover(spec: RunSpec, prefix: str, first: int, last: int) -> None:
    fs = spec.families[prefix]
    if "file" not in fs.params:
        return
    try:
        table = _load_table(fs, spec.a, Path(spec.base_dir))
    except (OSError, ModelError, ValueError, IndexError) as exc:
        raise ValidationError(f"{prefix}.file", str(exc)) from None
    if not table.covers(first, last):
        raise ValidationError(f"{prefix}.file", f"table must cover offsets {first}..{last} from a")


def format_runspec(spec: RunSpec) -> str:
    """Serialize ``spec`` so that parsing the text gives an equal spec."""
    lines = [f"command = {spec.command}", f"nu = {spec.nu!r}", f"a = {spec.a!r}"]
    for key in ("M", "K", "mu"):
        value = getattr(spec, key)
        if value is not None:
            lines.append(f"{key} = {value!r}")
    if spec.op is not None:
        lines.append(f"op = {spec.op}")
    lines.append(f"verify_tol = {spec.verify_tol!r}")
    cfg = spec.config
    for key in CONFIG_KEYS:
        value = getattr(cfg, key)
        lines.append(f"{key} = {value.value if isinstance(value, Metric) else repr(value)}")
    for prefix, fs in spec.families.items():
        lines.append(f"{prefix}.family = {fs.family}")
        for param, value in fs.params.items():
            lines.append(f"{prefix}.{param} = {value if isinstance(value, str) else repr(value)}")
    for key in ("output", "input"):
        value = getattr(spec, key)
        if value is not None:
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


# }}}


# {{{ building problems


def _load_table(fs: FamilySpec, a: float, base_dir: Path) -> fam.Table:
    path = Path(str(fs.params["file"]))
    if not path.is_absolute():
        path = base_dir / path
    return fam.Table.from_csv(path, str(fs.params["column"]), a)


def build_sequence(fs: FamilySpec, spec: RunSpec, base_dir: Path):
    p = fs.params
    a = spec.a
    if fs.family == "const":
        return fam.Const(p["v"])
    if fs.family == "geometric":
        return fam.Geometric(p["c"], p["ratio"], a)
    if fs.family == "geometric_rising":
        return fam.GeometricRising(p["c"], p.get("nu", spec.nu), a, p.get("at_base", 1.0))
    if fs.family == "power":
        return fam.Power(p["gamma"], a, p.get("at_base", 1.0))
    if fs.family == "rising_power":
        return fam.RisingPower(p["mu"], a)
    if fs.family == "table":
        return _load_table(fs, a, base_dir)
    raise ValidationError("family", f"unknown sequence family {fs.family!r}")


def build_forcing(fs: FamilySpec, spec: RunSpec, base_dir: Path):
    p = fs.params
    if fs.family == "const":
        return fam.ConstForcing(p["v"])
    if fs.family == "saturating":
        return fam.Saturating(p["kappa"])
    if fs.family == "table_in_t_times_affine_u":
        return fam.TableTimesAffine(_load_table(fs, spec.a, base_dir), p["c0"], p["c1"])
    raise ValidationError("F.family", f"unknown forcing family {fs.family!r}")


def build_problem(spec: RunSpec) -> NonlinearProblem | LinearProblem:
    base_dir = Path(spec.base_dir)
    p = build_sequence(spec.families["p"], spec, base_dir)
    if "F" in spec.families:
        F = build_forcing(spec.families["F"], spec, base_dir)
        return NonlinearProblem(spec.a, spec.nu, spec.M, p, F, spec.K)
    q = build_sequence(spec.families["q"], spec, base_dir)
    f = build_sequence(spec.families["f"], spec, base_dir)
    return LinearProblem(spec.a, spec.nu, spec.M, p, q, f)


# }}}


# {{{ output


def _fmt(x: float | None) -> str:
    # shortest round-trip representation of a double
    return "" if x is None else repr(float(x))


def _version_line(spec: RunSpec) -> str:
    return f"# nablafrac version={__version__} command={spec.command}"


def _write_csv(spec: RunSpec, header: list[str], rows: list[list[float | None]], out) -> None:
    out.write(_version_line(spec) + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def _open_output(spec: RunSpec):
    if spec.output is None:
        return sys.stdout, False
    path = Path(spec.output)
    if not path.is_absolute():
        path = Path(spec.base_dir) / path
    return open(path, "w", newline=""), True


def _emit_csv(spec: RunSpec, header, rows) -> None:
    out, close = _open_output(spec)
    try:
        _write_csv(spec, header, rows, out)
    finally:
        if close:
            out.close()


def _print_block(title: str, lines: list[str]) -> None:
    print(f"[{title}]")
    for line in lines:
        print(line)


# }}}


# {{{ commands


def run_op(spec: RunSpec) -> int:
    H = spec.config.horizon
    a = spec.a
    if spec.op == "power_rule":
        rows = [[a + k, power_rule(spec.nu, spec.mu, a, a + k)] for k in range(0, H + 1)]
    else:
        g = build_sequence(spec.families["f"], spec, Path(spec.base_dir))
        first = 0 if spec.nu == math.ceil(spec.nu) else 1
        f = GridFunction.from_function(g, a, first, H)
        if spec.op == "nabla_sum":
            out = nabla_sum_grid(f, spec.nu, a)
        else:
            out = nabla_diff_grid(f, spec.nu, a)
        rows = [[t, v] for t, v in zip(out.points, out.values)]
    _emit_csv(spec, ["t", "value"], rows)
    return EXIT_OK


def run_check(spec: RunSpec) -> int:
    prob = build_problem(spec)
    H = spec.config.horizon
    if isinstance(prob, LinearProblem):
        report = None
        for shift in range(0, H // 2 + 1):
            report = contraction_constant_linear(prob, H, prob.a + shift)
            if report.passes:
                break
        _print_block("contraction linear", report.lines())
        return EXIT_OK if report.passes else EXIT_CERTIFICATE

    sup = contraction_constant_sup(prob, H)
    _print_block("contraction sup", sup.lines())
    try:
        weighted = contraction_constant_weighted(prob, H)
        _print_block("contraction weighted", weighted.lines())
    except TailError as exc:
        weighted = None
        _print_block("contraction weighted", [f"error = TailError: {exc}"])
    selected = weighted if spec.config.metric is Metric.WEIGHTED else sup
    return EXIT_OK if selected is not None and selected.passes else EXIT_CERTIFICATE


def run_solve(spec: RunSpec) -> int:
    prob = build_problem(spec)
    if isinstance(prob, LinearProblem):
        b, y, report = solve_linear(prob, spec.config)
    else:
        y, report = solve_nonlinear(prob, spec.config)
        b = prob.a
    res = residual_grid(y, prob, b, report.nabla_y)
    rows = []
    for t, v in zip(y.points, y.values):
        k = y.offset(t)
        nabla_y = report.nabla_y(t) if k >= 0 else None
        r = res(t) if k >= 1 else None
        rows.append([t, v, nabla_y, r])
    _emit_csv(spec, ["t", "y", "nabla_y", "residual"], rows)
    lines = [f"b = {b!r}"] if isinstance(prob, LinearProblem) else []
    _print_block("solve", lines + report.lines())
    return EXIT_OK


def read_trajectory(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    header, body = rows[0], rows[1:]
    try:
        it, iy = header.index("t"), header.index("y")
    except ValueError:
        raise ParseError(f"{path}: trajectory needs columns t and y") from None
    t = np.array([float(r[it]) for r in body])
    y = np.array([float(r[iy]) for r in body])
    nabla = None
    if "nabla_y" in header:
        col = header.index("nabla_y")
        cells = [r[col] for r in body[1:]]
        if all(c != "" for c in cells):
            nabla = np.array([float(c) for c in cells])
    return t, y, nabla


def run_verify(spec: RunSpec) -> int:
    prob = build_problem(spec)
    path = Path(spec.input)
    if not path.is_absolute():
        path = Path(spec.base_dir) / path
    t, values, nabla = read_trajectory(path)
    # the trajectory starts at b - 1
    b = float(t[0]) + 1.0
    y = GridFunction(b, -1, values)
    if y.horizon != len(values) - 2 or not np.allclose(y.points, t, rtol=0, atol=1e-9):
        raise ParseError(f"{path}: t column must run over consecutive grid points")
    # the stored increments are more accurate than differences of y, but only
    # usable if they agree with y to rounding
    consistent = True
    nabla_y = None
    if nabla is not None:
        slack = 8 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(values))))
        consistent = bool(np.all(np.abs(nabla - np.diff(values)) <= slack))
        nabla_y = GridFunction(b, 0, nabla)
    res = residual_grid(y, prob, b, nabla_y)
    max_res = float(np.max(np.abs(res.values)))
    flags = verify_membership(y, prob.M, b)
    lines = [
        f"b = {b!r}",
        f"max_residual = {max_res!r}",
        f"residual_ok = {str(max_res <= spec.verify_tol).lower()}",
        f"nabla_y_consistent = {str(consistent).lower()}",
        f"y_ge_M = {str(flags.y_ge_M).lower()}",
        f"nabla_nonpositive = {str(flags.nabla_nonpositive).lower()}",
        f"nabla_at_a_zero = {str(flags.nabla_at_a_zero).lower()}",
    ]
    _print_block("verify", lines)
    if isinstance(prob, LinearProblem):
        ok = flags.nabla_at_a_zero
    else:
        ok = bool(flags)
    return EXIT_OK if ok and consistent and max_res <= spec.verify_tol else EXIT_CERTIFICATE


RUNNERS = {"op": run_op, "check": run_check, "solve": run_solve, "verify": run_verify}


def run(spec: RunSpec) -> int:
    """Execute ``spec``; errors go to stderr as ``ClassName: message``."""
    try:
        return RUNNERS[spec.command](spec)
    except (NoContractionError, MaxIterError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        if exc.report is not None:
            _print_block("report", exc.report.lines())
        return EXIT_CERTIFICATE
    except TailError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except (ParseError, ValidationError, ModelError, DomainError, IndexError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


# }}}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="nablafrac",
        description="Nabla fractional operators and contraction-mapping solves from a run-spec file.",
    )
    parser.add_argument("runspec", help="key = value run-spec file")
    parser.add_argument("--output", help="override the output path of the run spec")
    args = parser.parse_args(argv)

    try:
        spec = parse_runspec(args.runspec)
    except (ParseError, ValidationError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.output is not None:
        spec = replace(spec, output=str(Path(args.output).resolve()))
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
