"""Algebraic properties of derivability and views on random instances."""
import random

from hypothesis import given, settings
from hypothesis import strategies as st
from strategies import extend, random_instance, random_term

from privlens.deduction import KnowledgeBase, deducer
from privlens.terms import Term, subterms
from privlens.traces import State
from privlens.views import coalition_kb, view_of

SETTINGS = settings(max_examples=150, deadline=None)
rngs = st.randoms(use_true_random=False)


def queries(inst, kb):
    out = set(inst.leaves)
    for t in kb.items:
        out.update(s for _, s in subterms(t))
    return sorted(out)


@SETTINGS
@given(rngs)
def test_associability_is_an_equivalence(rng):
    inst = random_instance(rng)
    v = view_of(inst.kb)
    personal = inst.model.personal_items()
    # the classes partition the personal items
    flat = [x for c in v.classes for x in c]
    assert sorted(flat) == sorted(personal)
    assert len(flat) == len(set(flat))
    sample = rng.sample(personal, min(6, len(personal)))
    for x in sample:
        assert v.associated(x, x)
        for y in sample:
            assert v.associated(x, y) == v.associated(y, x)
            assert v.associated(x, y) == (y in v.class_of(x))
            for z in sample:
                if v.associated(x, y) and v.associated(y, z):
                    assert v.associated(x, z)


@SETTINGS
@given(rngs)
def test_derivability_is_monotone(rng):
    inst = random_instance(rng)
    big = extend(rng, inst)
    small_d, big_d = deducer(inst.kb), deducer(big)
    for q in queries(inst, inst.kb):
        if small_d.derivable(q):
            assert big_d.derivable(q), q


@SETTINGS
@given(rngs)
def test_views_are_monotone(rng):
    inst = random_instance(rng)
    big = extend(rng, inst)
    v1, v2 = view_of(inst.kb), view_of(big)
    assert v1.detectable <= v2.detectable
    for c in v1.classes:
        # every class of the smaller view sits inside one class of the larger
        assert set(c) <= set(v2.class_of(c[0]))


@SETTINGS
@given(rngs)
def test_coalition_view_contains_member_views(rng):
    inst = random_instance(rng)
    other = extend(rng, inst)
    kb_b = KnowledgeBase(inst.model, "b", frozenset(other.items - inst.kb.items))
    state = State(inst.model, {"a": KnowledgeBase(inst.model, "a", inst.kb.items), "b": kb_b})
    joint = view_of(coalition_kb(state, ["a", "b"]))
    for actor in ("a", "b"):
        v = view_of(coalition_kb(state, [actor]))
        assert v.detectable <= joint.detectable
        for c in v.classes:
            assert set(c) <= set(joint.class_of(c[0]))


def _same_atom_variant(rng, model, t):
    """``t`` with some leaves replaced by other items of the same atom."""
    if t.is_leaf:
        alts = model.items_of_atom(model.sigma[t])
        return rng.choice(alts)
    return Term(t.op, tuple(_same_atom_variant(rng, model, a) for a in t.args))


@SETTINGS
@given(rngs)
def test_equivalent_implies_content_equivalent(rng):
    inst = random_instance(rng)
    m = inst.model
    for _ in range(10):
        t = random_term(rng, inst.leaves, 3)
        u = _same_atom_variant(rng, m, t)
        assert m.equivalent(t, u)
        assert m.content_equivalent(t, u)
        w = random_term(rng, inst.leaves, 3)
        if m.equivalent(t, w):
            assert m.content_equivalent(t, w)


def test_shared_class_is_content_equivalent_but_not_equivalent():
    for seed in range(300):
        inst = random_instance(random.Random(seed))
        m = inst.model
        pairs = [(x, y) for x in inst.leaves for y in inst.leaves
                 if m.sigma[x] != m.sigma[y] and m.content_equivalent(x, y)]
        if pairs:
            x, y = pairs[0]
            assert not m.equivalent(x, y)
            return
    raise AssertionError("no shared content class generated")
