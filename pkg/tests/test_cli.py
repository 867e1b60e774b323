import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from certeuler.cli import (
    EXIT_CERTIFICATE,
    EXIT_CONFIG,
    EXIT_RANGE,
    RunConfig,
    bench,
    build_problem,
    main,
    run,
)
from certeuler.euler import ConfigurationError
from certeuler.rational import parse_rational
from certeuler.ucf import DomainError

from oracles import E_HALF

F = Fraction


def _run_main(argv):
    buf = io.StringIO()
    stdout = sys.stdout
    sys.stdout = buf
    try:
        code = main(argv)
    finally:
        sys.stdout = stdout
    return code, buf.getvalue()


def test_run_exp_prints_certified_value():
    code, out = _run_main(["run", "--system", "exp", "--p", "10", "--t-end", "1/2"])
    assert code == 0
    value_line = next(line for line in out.splitlines() if line.startswith("x(1/2)"))
    value = parse_rational(value_line.split("=")[1].strip().strip("()"))
    bound_line = next(line for line in out.splitlines() if "global error bound" in line)
    bound = parse_rational(bound_line.split(":")[1].split("(")[0].strip())
    assert abs(value - E_HALF) <= bound
    assert "defect certificate: PASS" in out


def test_run_constant_rhs():
    code, out = _run_main([
        "run", "--rhs", "0", "--x0", "5", "--p", "4", "--t-end", "1",
        "--t-a", "1", "--x-b", "1",
    ])
    assert code == 0
    assert "x(1) = (5)" in out


def test_run_decimal_format():
    code, out = _run_main([
        "run", "--system", "exp", "--p", "10", "--t-end", "1/2", "--format", "decimal",
    ])
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("x(1/2)"))
    assert "±" in line
    shown, shown_bound = line.split("=")[1].strip().strip("()").split("±")
    # printed value plus printed bound must enclose the oracle
    assert abs(Fraction(shown.strip()) - E_HALF) <= Fraction(shown_bound.strip())


def test_run_t_end_scale():
    code, out = _run_main([
        "run", "--system", "circle", "--p", "4", "--t-end", "1/8", "--t-end-scale", "2",
    ])
    assert code == 0
    assert "x(1/4)" in out


def test_run_writes_json(tmp_path):
    target = tmp_path / "sol.json"
    code, out = _run_main([
        "run", "--system", "exp", "--p", "4", "--t-end", "1/2", "--out", str(target),
    ])
    assert code == 0
    blob = json.loads(target.read_text())
    assert blob["defect_bound"] == "2^-4"
    assert blob["partition"][0] == "0"
    assert len(blob["nodes"]) == len(blob["partition"])


def test_run_writes_csv(tmp_path):
    target = tmp_path / "sol.csv"
    code, _ = _run_main([
        "run", "--system", "exp", "--p", "4", "--t-end", "1/2",
        "--format", "csv", "--out", str(target),
    ])
    assert code == 0
    lines = target.read_text().splitlines()
    assert lines[0] == "t,x1"
    assert lines[1] == "0,1"


def test_run_no_compress_flag():
    code, out = _run_main([
        "run", "--system", "exp", "--p", "6", "--t-end", "1/2", "--no-compress",
    ])
    assert code == 0
    assert "compress: off" in out


def test_config_error_exit_code():
    # C = 1/8 contradicts |f(0, x0)| = 1, caught by the sampled check
    code, _ = _run_main([
        "run", "--system", "exp", "--p", "4", "--t-end", "1/2", "--C", "1/8",
    ])
    assert code == EXIT_CONFIG


def test_unknown_system_exit_code():
    code, _ = _run_main(["run", "--system", "nosuch", "--p", "4", "--t-end", "1"])
    assert code == EXIT_CONFIG


def test_rhs_requires_box():
    code, _ = _run_main(["run", "--rhs", "x1", "--x0", "1", "--p", "4", "--t-end", "1/4"])
    assert code == EXIT_CONFIG


def test_syntax_error_exit_code():
    code, _ = _run_main([
        "run", "--rhs", "x1 +", "--x0", "1", "--p", "4", "--t-end", "1/4",
        "--t-a", "1", "--x-b", "1",
    ])
    assert code == EXIT_CONFIG


def test_exit_code_mapping_for_errors(monkeypatch):
    import certeuler.cli as cli_mod

    def boom_range(*args, **kwargs):
        raise DomainError("stepped outside the ball")

    monkeypatch.setattr(cli_mod, "solve_chained", boom_range)
    config = RunConfig(system="exp", p=4, t_end=F(1, 2))
    assert run(config, stdout=io.StringIO()) == EXIT_RANGE


def test_exit_code_for_certificate_violation(monkeypatch):
    import certeuler.cli as cli_mod
    from certeuler.ucf import Violation

    monkeypatch.setattr(
        cli_mod, "defect_certificate",
        lambda *a, **k: [Violation("defect", "synthetic")],
    )
    config = RunConfig(system="exp", p=4, t_end=F(1, 2))
    out = io.StringIO()
    assert run(config, stdout=out) == EXIT_CERTIFICATE
    assert "FAIL" in out.getvalue()


def test_run_config_validation():
    with pytest.raises(ConfigurationError):
        RunConfig(system="exp", rhs_text="x1", p=4, t_end=F(1))
    with pytest.raises(ConfigurationError):
        RunConfig(system="exp", p=4, t_end=F(0))
    with pytest.raises(ConfigurationError):
        RunConfig(system="exp", p=4, t_end=F(1), samples=0)
    with pytest.raises(ValueError):
        RunConfig(system="exp", p=0, t_end=F(1))


def test_build_problem_overrides():
    config = RunConfig(system="exp", p=4, t_end=F(1, 2), bound_c=F(3))
    problem = build_problem(config)
    assert problem.bound_c == 3
    assert problem.x0 == (F(1),)


def test_bench_rows_and_csv():
    config = RunConfig(system="circle", p=8, t_end=F(1, 4))
    out = io.StringIO()
    rows = bench(config, repeat=1, stdout=out)
    assert [r["compress"] for r in rows] == [False, True]
    assert all(r["steps"] >= 256 for r in rows)
    off, on = rows
    assert on["max_slope_den_bits"] < off["max_slope_den_bits"]
    header = out.getvalue().splitlines()[0]
    assert header == "compress,steps,wall_time_s,max_slope_den_bits"


def test_bench_requires_positive_repeat():
    config = RunConfig(system="exp", p=4, t_end=F(1, 2))
    with pytest.raises(ConfigurationError):
        bench(config, repeat=0, stdout=io.StringIO())


def test_systems_listing():
    code, out = _run_main(["systems"])
    assert code == 0
    meta = json.loads(out)
    names = {entry["name"] for entry in meta}
    assert {"exp", "circle"} <= names
    circle = next(e for e in meta if e["name"] == "circle")
    assert circle["defaults"]["C"] == "2"
    assert circle["omega"] == "p + 1"


def test_console_script_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "certeuler.cli", "run", "--system", "exp",
         "--p", "6", "--t-end", "1/2"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0
    assert "defect certificate: PASS" in proc.stdout
