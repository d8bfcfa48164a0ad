import pytest
from conftest import CORPUS, SYSTEMS
from hypothesis import HealthCheck, given, settings
from strategies import bundles

from privlens.dsl import (
    ModelInvalid, ParseError, ResolutionError, format_bundle, format_formula, parse_formula,
    parse_scenario, parse_term,
)
from privlens.requirements import And, Assoc, Detect, Exists, Not, Or
from privlens.terms import cat, item, senc, sign

BASE = """privlens-scenario v1
[entities]
al cl sv
[actors]
cl sv
[domains]
pub d
[info]
ipc identifier cl
ips identifier sv
x data al
k nonpersonal -
[ctx]
ipc: ip@pub.c ip@d.c
ips: ip@pub.s ip@d.s
x: x@d.u
k: k@d. k@pub.
[initial *]
k@pub.
[initial cl]
x@d.u
[trace]
send ip@d.c -> ip@d.s : (senc k@d. x@d.u)
[requirements]
R: !detect {sv} x@d.u
"""


def test_base_scenario():
    b = parse_scenario(text=BASE)
    assert [t.payload for t in b.trace] == [senc(item("k", "d"), item("x", "d", "u"))]
    assert b.knowledge["sv"] == {item("k", "pub")}
    assert b.knowledge["cl"] == {item("k", "pub"), item("x", "d", "u")}
    assert b.suite.names == ("R",)


ERRORS = [
    ("(senc k@d. x@d.u)", "(senk k@d. x@d.u)", ParseError, 23, 26, "unknown constructor 'senk'"),
    ("(senc k@d. x@d.u)", "(senc k@d.)", ParseError, 23, 26, "senc takes 2 arguments, got 1"),
    ("(senc k@d. x@d.u)", "(senc k@d. x@d.u", ParseError, 23, 25, "unclosed parenthesis"),
    ("[initial cl]\nx@d.u", "[initial cl]\nx@@d", ParseError, 21, 1, "malformed item 'x@@d'"),
    ("[trace]", "[tarce]", ParseError, 22, 2, "unknown section [tarce]"),
    ("[initial cl]", "[initial bob]", ResolutionError, 20, 1, "bob is not an actor"),
    ("x@d.u\n[trace]", "x@zz.u\n[trace]", ResolutionError, 21, 1, "unknown domain 'zz'"),
    ("x@d.u\n[trace]", "y@d.u\n[trace]", ResolutionError, 21, 1, "no atom named y"),
    ("!detect {sv}", "!detect sv", ParseError, 25, 12, "expected a coalition"),
    ("R: !detect {sv} x@d.u", "R: assoc {sv} d.u qq.u", ResolutionError, 25, 19, "unknown domain 'qq'"),
    ("ip@d.c -> ip@d.s", "ip@d.c <- ip@d.s", ParseError, 23, 13, "expected 'send a -> b : term'"),
    ("privlens-scenario v1", "privlens v2", ParseError, 1, 1, "missing header line"),
    ("[entities]\n", "[entities]\n  al\n", ParseError, 3, 1, "continuation line"),
    ("x data al", "x datum al", ParseError, 11, 3, "unknown kind 'datum'"),
    ("send ip@d.c", "send x@d.u", ResolutionError, 23, 1, "is not an identifier"),
    ("[requirements]\n", "[requirements]\nR: detect {sv} x@d.u\n", ParseError, 26, 1, "duplicate requirement R"),
]


@pytest.mark.parametrize("old,new,cls,line,col,msg", ERRORS, ids=[e[-1][:30] for e in ERRORS])
def test_error_positions(old, new, cls, line, col, msg):
    assert old in BASE
    with pytest.raises(cls) as exc:
        parse_scenario(text=BASE.replace(old, new, 1))
    e = exc.value
    assert (e.line, e.col) == (line, col)
    assert msg in str(e)
    assert str(e).startswith(f"<text>:{line}:{col}: ")


def test_model_errors_are_collected():
    text = BASE.replace("ips: ip@pub.s ip@d.s", "ips: ip@pub.s ip@d.s ip@d.u")
    with pytest.raises(ModelInvalid) as exc:
        parse_scenario(text=text)
    assert any("items about different subjects" in v for v in exc.value.violations)
    # validation can be switched off
    assert parse_scenario(text=text, validate=False).model.sigma[item("ip", "d", "u")] == "ips"


def test_empty_trace_and_suite():
    text = BASE.split("[trace]")[0] + "[trace]\n[requirements]\n"
    b = parse_scenario(text=text)
    assert b.trace == () and len(b.suite) == 0
    assert parse_scenario(text=format_bundle(b)) == b


def test_include_cycle(tmp_path):
    (tmp_path / "a.pls").write_text("privlens-scenario v1\ninclude b.pls\n")
    (tmp_path / "b.pls").write_text("privlens-scenario v1\ninclude a.pls\n")
    with pytest.raises(ParseError, match="include cycle"):
        parse_scenario(tmp_path / "a.pls")


def test_include_missing_file(tmp_path):
    (tmp_path / "a.pls").write_text("privlens-scenario v1\n\ninclude nope.pls\n")
    with pytest.raises(ParseError) as exc:
        parse_scenario(tmp_path / "a.pls")
    assert (exc.value.line, exc.value.col) == (3, 9)


def test_sugar():
    k, m = item("k", "d"), item("x", "d", "u")
    assert parse_term("(ms k@d. x@d.u)") is cat(m, sign(k, m))
    assert parse_term("(at d (senc k@. x@.u))") is senc(k, m)
    with pytest.raises(ParseError, match="trailing text"):
        parse_term("x@d.u y@d.u")


def test_phases_and_patterns():
    text = BASE.replace("ipc: ip@pub.c ip@d.c", "ipc: ip@pub.c ip@*.c").replace(
        "[trace]\nsend ip@d.c -> ip@d.s : (senc k@d. x@d.u)",
        "[phase P]\nsend ip@.c -> ip@.s : (senc k@. x@.u)\n[trace]\nrun P d\n",
    )
    b = parse_scenario(text=text)
    assert b.trace[0].payload is senc(item("k", "d"), item("x", "d", "u"))
    assert b.trace[0].label == "P@d:1"
    assert b.model.sigma[item("ip", "d", "c")] == "ipc"


def test_formulas():
    f = parse_formula("exists v: !assoc {b,a} v.u d.u | detect {a} x@d.u")
    # a negated body binds tighter than |
    assert isinstance(f, Or) and isinstance(f.left, Exists) and f.left.var == "v"
    h = parse_formula("exists v: assoc {a} v.u d.u & detect {a} x@d.u")
    assert isinstance(h, Exists) and isinstance(h.body, And)
    g = parse_formula("!detect {a} x@d.u")
    assert g == Not(Detect(("a",), item("x", "d", "u")))
    assert parse_formula(format_formula(f)) == f
    assert parse_formula("assoc {a,b} d.u e.u") == Assoc(("a", "b"), ("d", "u"), ("e", "u"))
    with pytest.raises(ParseError, match="already bound"):
        parse_formula("exists v: exists v: assoc {a} v.u d.u")


@pytest.mark.parametrize("name", SYSTEMS + ("example",))
def test_corpus_round_trip(name):
    b = parse_scenario(CORPUS / name)
    text = format_bundle(b)
    again = parse_scenario(text=text)
    assert again == b
    assert format_bundle(again) == text


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.large_base_example])
@given(bundles)
def test_generated_round_trip(b):
    text = format_bundle(b)
    again = parse_scenario(text=text)
    assert again == b
    assert format_bundle(again) == text
