import pytest
from hypothesis import HealthCheck, given, settings
from strategies import bundles, random_formula

from privlens.dsl import parse_formula
from privlens.pipeline import analyze_bundle
from privlens.requirements import (
    Assoc, Detect, Evaluator, Exists, Not, Requirement, RequirementSuite, UnknownName, atoms_of,
    check_suite, coalitions_of,
)
from privlens.traces import evolve

LAWS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.large_base_example])


@pytest.fixture(scope="module")
def final(example):
    return analyze_bundle(example).final


def ev(state, text):
    return Evaluator(state).eval(parse_formula(text))


def test_example_suite(example, final):
    verdicts = check_suite(example.suite, final)
    assert [(v.name, v.passed) for v in verdicts] == [("NoPhone", True), ("Linked", True)]
    assert verdicts[0].witness == "srv cannot detect teln@ab.12"
    assert verdicts[1].witness == "cli links pi.su and ab.4"


def test_detect_and_negation(final):
    assert ev(final, "detect {cli} id@pi.su") == (True, "cli detects id@pi.su")
    assert ev(final, "!detect {cli} id@pi.su")[0] is False
    assert ev(final, "detect {srv} id@pi.su")[0] is True  # srv holds the shared key
    assert ev(final, "detect {cli} col1@db.2")[0] is False
    assert ev(final, "detect {cli} id@*") == (True, "cli detects id@ab.4, id@pi.su")


def test_exists_reports_the_domain(final):
    ok, why = ev(final, "exists p: assoc {cli} p.su ab.4")
    assert ok and why.startswith("p=")
    assert ev(final, "exists p: assoc {srv} p.su ab.4") == (False, "no domain p works")


def test_unknown_names(final):
    e = Evaluator(final)
    for text in ("detect {bob} id@pi.su", "detect {cli} nope@pi.su", "assoc {cli} zz.su ab.4",
                 "detect {cli} nope@*"):
        with pytest.raises(UnknownName):
            e.check_names(parse_formula(text))
    with pytest.raises(UnknownName):
        check_suite(RequirementSuite((Requirement("X", parse_formula("detect {eve} id@pi.su")),)), final)


def test_suite_rejects_duplicates():
    f = parse_formula("detect {a} x@d.u")
    with pytest.raises(ValueError, match="duplicate"):
        RequirementSuite((Requirement("A", f), Requirement("A", f)))


def test_formula_helpers():
    f = parse_formula("!(detect {a} x@d.u & assoc {a,b} d.u e.u)")
    assert [type(a) for a in atoms_of(f)] == [Detect, Assoc]
    assert coalitions_of(f) == [("a",), ("a", "b")]


def _state(b):
    return evolve(b.initial, b.trace, check_validity=False)[0]


@LAWS
@given(bundles)
def test_not_and_exists_laws(b):
    import random

    state = _state(b)
    e = Evaluator(state)
    rng = random.Random(len(b.trace))
    actors, items, ctxs = list(b.model.actors), b.model.personal_items(), b.model.contexts()
    for _ in range(5):
        f = random_formula(rng, actors, items, ctxs, bound=("v",))
        ex = Exists("v", f)
        assert e.eval(Not(f), {"v": ctxs[0][0]})[0] != e.eval(f, {"v": ctxs[0][0]})[0]
        # exists is the disjunction over the declared domains
        assert e.eval(ex)[0] == any(e.eval(f, {"v": d})[0] for d in b.model.domains)


@LAWS
@given(bundles)
def test_atoms_are_monotone_in_the_coalition(b):
    e = Evaluator(_state(b))
    a1, a2 = b.model.actors
    for t in b.model.personal_items():
        if e.eval(Detect((a1,), t))[0]:
            assert e.eval(Detect((a1, a2), t))[0]
    ctxs = b.model.contexts()
    for c1 in ctxs:
        for c2 in ctxs:
            if e.eval(Assoc((a2,), c1, c2))[0]:
                assert e.eval(Assoc(tuple(sorted((a1, a2))), c1, c2))[0]
