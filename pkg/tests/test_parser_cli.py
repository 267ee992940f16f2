import json

import pytest
from hypothesis import given, strategies as st

from dworkalg.cli import main
from dworkalg.errors import DomainError, ParseError
from dworkalg.operator_algebra import LaurentPoly
from dworkalg.padic_core import PadicScalar, TruncationParams
from dworkalg.parser import infer_names, parse, parse_operator, show, tokenize
from dworkalg.suites import run_suite

P3 = TruncationParams(p=3, N=10)


def test_scalars():
    assert show(parse("pi^2 + p", P3)) == "0"
    assert parse("pi^2", P3) == P3.ring()(-3)
    assert parse("1/2", P3) * 2 == P3.ring().one()
    z = parse("zeta", TruncationParams(p=3, N=10))
    assert z ** 3 == P3.ring().one() and z != P3.ring().one()
    assert isinstance(parse("7", P3), PadicScalar)


def test_kinds():
    assert isinstance(parse("x^2 + y", P3), LaurentPoly)
    op = parse("x*dx - dx*x", P3)
    assert show(op) == show(parse("-1", P3))
    assert show(parse("dx*x", P3)) == "1 + x*dx^[1]"


def test_names():
    assert infer_names("x + dy") == ("x", "y")
    assert infer_names("y^2") == ("y",)
    assert infer_names("x3 + dx1") == ("x1", "x2", "x3")
    assert infer_names("x' + t") == ("x'", "t")
    with pytest.raises(ParseError):
        infer_names("x1 + y")


def test_divided_and_level_powers():
    d2 = parse_operator("dx^[2]", P3)
    assert parse_operator("dx*dx", P3) == d2.scale(2)
    # level 0 is the ordinary power, level 1 at p = 3 keeps q_1(3)! = 1
    assert parse_operator("dx^<3;0>", P3) == parse_operator("dx*dx*dx", P3)
    assert parse_operator("dx^<3;1>", P3) == parse_operator("dx^[3]", P3)


def test_dwork_atoms():
    h = parse_operator("H", TruncationParams(p=2, N=8, K=4, hi=8))
    assert not h.is_zero()
    parse_operator("Hx^-{1}", TruncationParams(p=2, N=8, K=4, hi=8))
    with pytest.raises(ParseError):
        parse_operator("Hx^-{1,2}", TruncationParams(p=2, N=8, K=4, hi=8))


@pytest.mark.parametrize("text,col,expected", [
    ("x +", 4, None),
    ("(x", 3, ")"),
    ("x ) ", 3, "<end>"),
    ("dx^2", 4, "^["),
    ("x / x", 3, None),
    ("foo", 1, None),
])
def test_parse_errors(text, col, expected):
    with pytest.raises(ParseError) as err:
        parse(text, P3)
    assert err.value.line == 1 and err.value.column == col
    if expected:
        assert expected in err.value.expected


def test_parse_error_line_numbers():
    with pytest.raises(ParseError) as err:
        parse("x +\n  y +\n )", P3)
    assert (err.value.line, err.value.column) == (3, 2)
    with pytest.raises(ParseError):
        tokenize("x $ y")


monomial = st.tuples(st.integers(-3, 3), st.integers(0, 3), st.integers(0, 2), st.integers(0, 2),
                     st.integers(-20, 20))


@given(st.lists(monomial, max_size=4))
def test_round_trip(monos):
    text = " + ".join(f"({c})*x^{a}*y^{b}*dx^[{i}]*dy^[{j}]" for a, b, i, j, c in monos) or "0"
    op = parse_operator(text, P3, ("x", "y"))
    again = parse_operator(show(op), P3, ("x", "y"))
    assert again == op.with_caps(again.caps)


@given(st.integers(-50, 50), st.integers(0, 6))
def test_scalar_round_trip(n, k):
    v = parse(f"{n}*pi^{k}", P3)
    assert parse(show(v), P3) == v


# -- CLI ----------------------------------------------------------------------

def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_eval(capsys):
    code, out, _ = run(capsys, "eval", "pi^2 + p", "--p", "3")
    assert code == 0 and out.strip() == "0"
    code, out, _ = run(capsys, "eval", "x*dx", "--format", "json")
    data = json.loads(out)
    assert data["schema"] == 1 and data["kind"] == "operator" and data["verb"] == "eval"


def test_cli_stdin(capsys, monkeypatch):
    import io
    monkeypatch.setattr("sys.stdin", io.StringIO("pi*x\n"))
    code, out, _ = run(capsys, "reduce", "--p", "3")
    assert code == 0 and out.strip() == "dy^[1]"


def test_cli_divide(capsys):
    code, out, _ = run(capsys, "divide", "x^2", "--p", "3")
    assert code == 0
    assert "Q = pi^-2*dy^[1] + pi^-1*x" in out and "R = 2*pi^-2*dy^[2]" in out
    assert "exact: True" in out


def test_cli_koszul(capsys):
    code, out, _ = run(capsys, "koszul", "x, y", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["regular"] is True and data["d_squared_zero"]
    code, out, _ = run(capsys, "koszul", "x, x", "--format", "json")
    assert json.loads(out)["homology"] == {"H1[1]": 1}
    assert run(capsys, "koszul", "dx")[0] == 2
    assert run(capsys, "koszul", "x^-1")[0] == 2


def test_cli_exit_codes(capsys):
    assert run(capsys, "eval", "x +")[0] == 2
    assert run(capsys, "--bogus")[0] == 2
    assert run(capsys, "eval", "x", "--pp", "3")[0] == 2
    assert run(capsys, "check", "nope")[0] == 2
    assert run(capsys, "eval", "x", "--p", "4")[0] == 2
    code, _, err = run(capsys, "eval", "(x")
    assert "line 1, column 3" in err


def test_cli_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# trial\np = 7\nformat = json\n")
    code, out, _ = run(capsys, "eval", "pi^6", "--config", str(cfg))
    assert code == 0 and json.loads(out)["text"] == show(parse("-7", TruncationParams(p=7)))
    # flags override the file
    code, out, _ = run(capsys, "eval", "pi^2 + 3", "--config", str(cfg), "--p", "3", "--format", "text")
    assert out.strip() == "0"
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert run(capsys, "eval", "1", "--config", str(bad))[0] == 2
    assert run(capsys, "eval", "1", "--config", str(tmp_path / "missing"))[0] == 2


def test_cli_check_json_deterministic(capsys):
    outs = []
    for _ in range(2):
        code, out, _ = run(capsys, "check", "estimates", "--p", "3", "--format", "json")
        assert code == 0
        data = json.loads(out)
        data.pop("wall_time")
        outs.append(data)
    assert outs[0] == outs[1] and outs[0]["schema"] == 1
    assert all(c["status"] == "pass" for c in outs[0]["checks"])


def test_cli_check_skips_unsupported(capsys):
    code, out, _ = run(capsys, "check", "dwork", "--s", "2")
    assert code == 0 and "SKIP" in out


def test_run_suite():
    rep = run_suite("dwork", TruncationParams(p=2, N=12))
    assert not rep.failed and rep.checks
    with pytest.raises(DomainError):
        run_suite("nope", P3)
