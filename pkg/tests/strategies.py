"""Random models and knowledge bases.

Generators take a ``random.Random`` so the same code drives both the seeded
sweeps and hypothesis (through ``st.randoms``).
"""
from dataclasses import dataclass

from hypothesis import strategies as st

from privlens.deduction import KnowledgeBase
from privlens.dsl import ScenarioBundle
from privlens.model import Atom, InfoModel, Property
from privlens.requirements import And, Assoc, Detect, DetectAny, Exists, Not, Or, Requirement, RequirementSuite
from privlens.terms import NP, aenc, aka, cat, cred, depth, hash_, icred, item, laenc, pk, senc, sign, zk
from privlens.traces import Transmission

DOMAINS = ("d1", "d2", "d3")
PROFILES = ("p", "q")
SUBJECTS = ("e1", "e2")


@dataclass
class Instance:
    model: InfoModel
    kb: KnowledgeBase
    leaves: list  # items usable in messages


def random_model(rng, max_atoms=8, max_shared=2):
    contexts = [(d, p) for d in DOMAINS for p in PROFILES]
    owner = {c: rng.choice(SUBJECTS) for c in contexts}
    atoms = {e: Atom(e, "entity", None, e) for e in SUBJECTS}
    sigma = {}
    for c, e in owner.items():
        if rng.random() < 0.4:
            sigma[item("ds", *c)] = e
    n = rng.randint(2, max_atoms - len(SUBJECTS))
    kinds = {}
    for i in range(n):
        kind = rng.choice(("identifier", "data", "data", "nonpersonal", "nonpersonal"))
        name = f"a{i}"
        subj = None if kind == "nonpersonal" else rng.choice(SUBJECTS)
        atoms[name] = Atom(name, kind, subj, name)
        kinds[name] = kind
        if kind == "nonpersonal":
            for d in rng.sample(DOMAINS, rng.randint(1, 2)):
                sigma[item(name, d, NP)] = name
        else:
            mine = [c for c in contexts if owner[c] == subj] or [rng.choice(contexts)]
            if owner.get(mine[0]) != subj:  # no context for this subject: skip the atom
                del atoms[name]
                continue
            for c in rng.sample(mine, rng.randint(1, min(2, len(mine)))):
                sigma[item(name, *c)] = name
    # share a few content classes between atoms of the same kind
    for _ in range(rng.randint(0, max_shared)):
        pool = [a for a in atoms.values() if a.kind in ("data", "nonpersonal") and a.cls == a.name]
        pairs = [(x, y) for x in pool for y in pool if x.name < y.name and x.kind == y.kind]
        if not pairs:
            break
        x, y = rng.choice(pairs)
        cls = f"c_{x.name}"
        atoms[x.name] = Atom(x.name, x.kind, x.subject, cls)
        atoms[y.name] = Atom(y.name, y.kind, y.subject, cls)
    props = []
    data = [a for a in atoms.values() if a.kind == "data"]
    srcs = [a for a in atoms.values() if a.kind in ("identifier", "data")]
    if rng.random() < 0.4:
        pairs = [(s, d) for s in srcs for d in data if s.name != d.name and s.subject == d.subject]
        if pairs:
            s, d = rng.choice(pairs)
            props.append(Property("f", s.name, d.name))
            # the image exists wherever the source does
            for t in [t for t, a in sigma.items() if a == s.name]:
                sigma[item(d.name, t.domain, t.profile)] = d.name
    return InfoModel(atoms, sigma, props, (), DOMAINS, "random")


def random_term(rng, leaves, depth_left):
    t = _random_term(rng, leaves, depth_left)
    # pk and randomness tuples add a level; fall back to a leaf near the bottom
    return t if depth(t) <= depth_left else rng.choice(leaves)


def _random_term(rng, leaves, depth_left):
    leaf = lambda: rng.choice(leaves)  # noqa: E731
    if depth_left == 0 or rng.random() < 0.3:
        return leaf()
    sub = lambda: random_term(rng, leaves, depth_left - 1)  # noqa: E731
    op = rng.choice(("cat", "cat", "hash", "hash", "senc", "senc", "senc", "aenc", "aenc", "sign",
                     "sign", "pk", "laenc", "aka", "cred", "zk", "icred"))
    if op == "cat":
        return cat(*(sub() for _ in range(rng.randint(2, 3))))
    if op == "hash":
        return hash_(sub())
    if op == "pk":
        return pk(leaf())
    if op == "senc":
        return senc(leaf(), sub())
    if op == "aenc":
        return aenc(pk(leaf()) if rng.random() < 0.8 else leaf(), sub())
    if op == "sign":
        return sign(leaf(), sub())
    if op == "laenc":
        return laenc(pk(leaf()), sub(), leaf())
    if op == "aka":
        return aka(leaf(), leaf(), leaf(), leaf())
    if op == "cred":
        return cred(leaf(), leaf(), sub(), leaf())
    if op == "zk":
        rand = cat(leaf(), leaf()) if rng.random() < 0.8 else leaf()
        return zk(leaf(), pk(leaf()), sub(), rand)
    r = cat(*(leaf() for _ in range(7))) if rng.random() < 0.8 else leaf()
    return icred(leaf(), leaf(), leaf(), r)


def random_instance(rng, max_terms=12, max_depth=3, **kw):
    model = random_model(rng, **kw)
    leaves = [t for t in model.items() if not model.is_entity(t)]
    terms = set()
    for _ in range(rng.randint(1, max_terms)):
        t = random_term(rng, leaves, max_depth)
        assert depth(t) <= max_depth
        terms.add(t)
    ents = [t for t in model.items() if model.is_entity(t)]
    terms.update(rng.sample(ents, rng.randint(0, len(ents))))
    return Instance(model, KnowledgeBase(model, "x", frozenset(terms)), leaves)


def extend(rng, inst, extra=3):
    """A larger knowledge base over the same model."""
    more = {random_term(rng, inst.leaves, 2) for _ in range(rng.randint(1, extra))}
    return KnowledgeBase(inst.model, "x", inst.kb.items | more)


instances = st.randoms(use_true_random=False).map(random_instance)


def random_formula(rng, actors, items, contexts, depth_left=2, bound=()):
    coal = tuple(sorted(rng.sample(actors, rng.randint(1, len(actors)))))
    choice = rng.random() if depth_left else rng.random() * 0.5
    if choice < 0.2:
        return Detect(coal, rng.choice(items))
    if choice < 0.3:
        return DetectAny(coal, rng.choice(items).name)
    if choice < 0.5:
        pick = lambda: rng.choice(contexts)  # noqa: E731
        c1, c2 = pick(), pick()
        if bound and rng.random() < 0.5:
            c1 = (bound[-1], c1[1])
        return Assoc(coal, c1, c2)
    sub = lambda: random_formula(rng, actors, items, contexts, depth_left - 1, bound)  # noqa: E731
    if choice < 0.65:
        return Not(sub())
    if choice < 0.8:
        return And(sub(), sub())
    if choice < 0.9:
        return Or(sub(), sub())
    var = f"v{len(bound)}"
    return Exists(var, random_formula(rng, actors, items, contexts, depth_left - 1, bound + (var,)))


def random_bundle(rng, max_steps=4):
    """A complete scenario over a random model; traces need not be valid."""
    while True:
        model = random_model(rng)
        personal = [t for t in model.items() if model.kind(t) == "identifier"]
        addrs = {e: [t for t in personal if model.subject(t) == e] for e in SUBJECTS}
        if all(addrs.values()):
            break
    model = InfoModel(model.atoms, model.sigma, model.properties, SUBJECTS, DOMAINS, "random")
    leaves = [t for t in model.items() if not model.is_entity(t)]
    knowledge = {}
    for e in SUBJECTS:
        ts = {random_term(rng, leaves, 2) for _ in range(rng.randint(0, 4))}
        ts.update(t for t in model.items() if model.is_entity(t) and rng.random() < 0.3)
        knowledge[e] = frozenset(ts)
    trace = []
    for _ in range(rng.randint(0, max_steps)):
        a, b = rng.sample(SUBJECTS, 2)
        trace.append(Transmission("send", rng.choice(addrs[a]), rng.choice(addrs[b]),
                                  random_term(rng, leaves, 2)))
    personal_items = model.personal_items()
    ctxs = model.contexts()
    reqs = tuple(Requirement(f"R{i}", random_formula(rng, list(SUBJECTS), personal_items, ctxs))
                 for i in range(rng.randint(0, 3)))
    name = rng.choice(["", "gen"])
    return ScenarioBundle(name, "", model, knowledge, tuple(trace), RequirementSuite(reqs))


bundles = st.randoms(use_true_random=False).map(random_bundle)
