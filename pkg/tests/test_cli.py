import json

import pytest
from click.testing import CliRunner
from hypothesis import given
from hypothesis import strategies as st

from fdiff.cli import DEFAULTS, finish, main
from fdiff.report import Report
from fdiff.dsl import (
    Analytic,
    BinOp,
    Chain,
    Const,
    Delta,
    DeltaN,
    DividedPower,
    Gens,
    Id,
    LatExp,
    LatProd,
    Monad,
    Newton,
    ParseError,
    Power,
    QuotPower,
    StarLat,
    Sym,
    Zeta,
    parse,
    to_functor,
    to_str,
)

# parsing -------------------------------------------------------------------


@pytest.mark.parametrize(
    "src,ast",
    [
        ("X", Id()),
        ("X^3", Power(3)),
        ("X^[2]", DividedPower(2)),
        ("X^4/S4", QuotPower(4, Sym(4))),
        ("X^3/<[1,2,0]>", QuotPower(3, Gens(((1, 2, 0),)))),
        ("C{3}", Const(3)),
        ("3", Const(3)),
        ("chain3^[X]", LatExp(Chain(3), True)),
        ("6_*^X", LatExp(StarLat(6), False)),
        ("chain2 x 3_*^[X]", LatExp(LatProd((Chain(2), StarLat(3))), True)),
        ("F'", Monad("F'")),
        ("beta", Monad("beta")),
        ("zeta(4)", Zeta(4)),
        ("delta^2(X^3)", DeltaN(Power(3), 2)),
        ('analytic("a.json")', Analytic("a.json")),
        ("X + X^2 * X^3", BinOp("+", Id(), BinOp("*", Power(2), Power(3)))),
        ("X^2 o X + 1", BinOp("+", BinOp("o", Power(2), Id()), Const(1))),
        ("(X + 1) * X", BinOp("*", BinOp("+", Id(), Const(1)), Id())),
        ("X - X", None),
    ],
)
def test_parse_examples(src, ast):
    if ast is None:
        with pytest.raises(ParseError):
            parse(src)
    else:
        assert parse(src) == ast


@pytest.mark.parametrize(
    "src,offset",
    [("X^", 2), ("X + ", 4), ("delta(X", 7), ("X^3/S2", 4), ("X^2/<[0,0]>", 5), ("foo", 0), ("X^[2", 4), ("é + Y", 0)],
)
def test_parse_error_offsets(src, offset):
    with pytest.raises(ParseError) as info:
        parse(src)
    assert info.value.offset == offset


def test_parse_error_offsets_are_bytes():
    with pytest.raises(ParseError) as info:
        parse('analytic("é") + Q')
    assert info.value.offset == len('analytic("é") + '.encode())


leaf = st.one_of(
    st.just(Id()),
    st.builds(Power, st.integers(0, 5)),
    st.builds(DividedPower, st.integers(1, 4)),
    st.integers(1, 4).map(lambda n: QuotPower(n, Sym(n))),
    st.just(QuotPower(3, Gens(((1, 2, 0), (0, 2, 1))))),
    st.builds(Const, st.integers(0, 9)),
    st.builds(LatExp, st.one_of(st.builds(Chain, st.integers(1, 5)), st.builds(StarLat, st.integers(1, 12))), st.booleans()),
    st.just(LatExp(LatProd((Chain(2), StarLat(6))), False)),
    st.sampled_from([Monad("F"), Monad("F'"), Monad("P"), Monad("beta")]),
    st.builds(Zeta, st.integers(1, 5)),
    st.builds(Analytic, st.from_regex(r"[a-z]{1,6}\.json", fullmatch=True)),
    st.builds(Newton, st.from_regex(r"[a-z]{1,6}\.json", fullmatch=True)),
)

ast = st.recursive(
    leaf,
    lambda sub: st.one_of(
        st.builds(BinOp, st.sampled_from("+*o"), sub, sub),
        st.builds(Delta, sub),
        st.builds(DeltaN, sub, st.integers(1, 3)),
    ),
    max_leaves=8,
)


@given(ast)
def test_print_parse_round_trip(e):
    assert parse(to_str(e)) == e


@given(ast)
def test_printing_is_a_fixed_point(e):
    s = to_str(e)
    assert to_str(parse(s)) == s


def test_evaluation_sizes():
    F = to_functor(parse("X^2 o (X + 1) + C{2}"))
    assert [F.size(k) for k in range(4)] == [(k + 1) ** 2 + 2 for k in range(4)]
    D = to_functor(parse("delta^2(X^3)"))
    assert [D.size(k) for k in range(3)] == [6 * k + 6 for k in range(3)]


# commands ------------------------------------------------------------------


@pytest.fixture
def run(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for name in DEFAULTS:
        monkeypatch.delenv(f"FDIFF_{name.upper()}", raising=False)
    runner = CliRunner()

    def go(*args, env=None):
        return runner.invoke(main, list(args), env=env, catch_exceptions=False)

    return go


def test_table(run):
    r = run("table", "delta(X^3)", "--maxk", "4")
    assert r.exit_code == 0
    assert [int(line.split()[1]) for line in r.output.splitlines()[1:6]] == [1, 7, 19, 37, 61]


def test_table_json_is_byte_stable(run):
    a = run("table", "X^[2] + P", "--format", "json").output
    b = run("table", "X^[2] + P", "--format", "json").output
    assert a == b
    out = json.loads(a)
    assert out["command"] == "table"
    assert out["rows"] == [[k, k * (k + 1) // 2 + 2**k] for k in range(6)]


def test_delta_json(run):
    r = run("delta", "X^4/S4 + C{3}*X", "--format", "json", "-K", "3")
    assert r.exit_code == 0
    out = json.loads(r.output)
    assert out["report"]["status"] == "pass"
    assert "time" not in json.dumps(out["report"])
    assert all(row[1] == row[2] for row in out["rows"])


def test_timing_only_on_request(run):
    r = run("delta", "X^2", "--format", "json", "--timing")
    assert "timing" in json.loads(r.output)["report"]


def test_delta_csv(run):
    r = run("delta", "X^2", "--format", "csv")
    lines = r.output.splitlines()
    assert lines[0] == "k,operational,closed form"
    assert lines[-1] == "#status,pass"


def test_parse_error_exits_2(run):
    r = CliRunner().invoke(main, ["table", "X^ + 1"])
    assert r.exit_code == 2
    assert "at byte 3" in r.output
    assert "     ^" in r.output


def test_failed_report_exits_1():
    # every DSL term is taut, so a failing report is built by hand
    rep = Report("demo")
    rep.fail({"why": "demo"})
    with pytest.raises(SystemExit) as info:
        finish(rep)
    assert info.value.code == 1


def test_chain_command(run):
    r = run("chain", "--F", "X^2", "--G", "X^2", "-K", "2", "--format", "json")
    assert r.exit_code == 0
    rep = json.loads(r.output)["report"]
    assert rep["details"]["source_poly"] == [4, 2, 2, 1]
    assert rep["details"]["target_poly"] == [4, 6, 4, 1]


@pytest.mark.parametrize("suite", ["taut", "product-rule", "confluence", "newton-roundtrip"])
def test_verify_suites(run, suite):
    r = run("verify", suite, "-K", "2")
    assert r.exit_code == 0, r.output


def test_newton_commands(run, tmp_path):
    r = run("newton", "--delta-star", "X^2", "-N", "3", "--format", "json")
    assert [row[1] for row in json.loads(r.output)["rows"]] == [0, 1, 2, 0]
    (tmp_path / "sq.json").write_text(json.dumps(
        {"N": 2, "G": [0, 1, 2], "actions": {"2->2:1,0": [1, 0], "2->1:0,0": [0, 0]}}))
    r = run("newton", "--sum", "sq.json", "--maxk", "4", "--format", "json")
    assert r.exit_code == 0
    assert [row[1] for row in json.loads(r.output)["rows"]] == [0, 1, 4, 9, 16]
    r = run("newton", "--roundtrip", "X^[2]", "-N", "2")
    assert r.exit_code == 0


def test_newton_rejects_bad_species(run, tmp_path):
    (tmp_path / "bad.json").write_text(json.dumps({"N": 2, "G": [0, 1, 2], "actions": {}}))
    r = CliRunner().invoke(main, ["newton", "--sum", "bad.json"])
    assert r.exit_code == 2


def test_newton_needs_exactly_one_mode(run):
    r = CliRunner().invoke(main, ["newton"])
    assert r.exit_code == 2


def test_analytic_file(run, tmp_path):
    (tmp_path / "c3.json").write_text(json.dumps({"coeffs": {"3": {"kind": "coset", "generators": [[1, 2, 0]]}}}))
    r = run("table", 'analytic("c3.json")', "--maxk", "3", "--format", "json")
    assert [row[1] for row in json.loads(r.output)["rows"]] == [(k**3 + 2 * k) // 3 for k in range(4)]


# configuration precedence ---------------------------------------------------


def maxk_used(run, *flags, env=None):
    r = run("table", "X", "--format", "json", *flags, env=env)
    return json.loads(r.output)["params"]["maxk"]


def test_config_default(run):
    assert maxk_used(run) == DEFAULTS["maxk"]


def test_config_file(run, tmp_path):
    (tmp_path / "fdiff.toml").write_text("[fdiff]\nmaxk = 2\n")
    assert maxk_used(run) == 2


def test_config_top_level_table(run, tmp_path):
    (tmp_path / "fdiff.toml").write_text("maxk = 1\n")
    assert maxk_used(run) == 1


def test_env_beats_file(run, tmp_path):
    (tmp_path / "fdiff.toml").write_text("[fdiff]\nmaxk = 2\n")
    assert maxk_used(run, env={"FDIFF_MAXK": "4"}) == 4


def test_flag_beats_env(run, tmp_path):
    (tmp_path / "fdiff.toml").write_text("[fdiff]\nmaxk = 2\n")
    assert maxk_used(run, "--maxk", "3", env={"FDIFF_MAXK": "4"}) == 3


def test_format_from_env(run):
    r = run("table", "X", env={"FDIFF_FORMAT": "csv"})
    assert r.output.splitlines()[0] == "k,size"
