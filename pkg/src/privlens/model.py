"""Three-layer information model.

Context items (``var@domain.profile``) map to information atoms via ``sigma``;
atoms carry an opaque content class.  Two context messages are *equivalent*
when their sigma images agree and *content equivalent* when their content
labels agree.  Content labels of composite messages are built structurally.
"""
from dataclasses import dataclass, field

from .terms import NP, Term, sym, map_leaves

KINDS = ("entity", "identifier", "data", "nonpersonal")
ENTITY_VAR = "ds"


class UnknownItem(KeyError):
    pass


@dataclass(frozen=True)
class Atom:
    name: str
    kind: str
    subject: str | None  # entity this atom is related to; None for non-personal
    cls: str


@dataclass(frozen=True)
class Property:
    """A partial map on context items keeping the context: ``src`` var -> ``dst`` var."""

    name: str
    src: str
    dst: str


@dataclass
class InfoModel:
    atoms: dict  # name -> Atom
    sigma: dict  # context item -> atom name
    properties: list = field(default_factory=list)
    actors: tuple = ()
    domains: tuple = ()
    name: str = ""

    def __post_init__(self):
        self._label_cache = {}
        self._psi = {}
        by_ctx_var = {(t.domain, t.profile, t.name): t for t in self.sigma}
        for p in self.properties:
            for t in self.sigma:
                if t.name == p.src:
                    img = by_ctx_var.get((t.domain, t.profile, p.dst))
                    if img is not None:
                        self._psi.setdefault(t, []).append((p.name, img))
        self._by_atom = {}
        for t in sorted(self.sigma):
            self._by_atom.setdefault(self.sigma[t], []).append(t)
        self._by_class = {}
        for t in sorted(self.sigma):
            a = self.atoms.get(self.sigma[t])
            if a is not None and a.kind != "entity":
                self._by_class.setdefault(a.cls, []).append(t)

    # lookups -------------------------------------------------------------

    @property
    def entities(self):
        return sorted(a.name for a in self.atoms.values() if a.kind == "entity")

    def atom(self, t):
        try:
            return self.atoms[self.sigma[t]]
        except KeyError:
            raise UnknownItem(str(t)) from None

    def kind(self, t):
        return self.atom(t).kind

    def subject(self, t):
        a = self.atom(t)
        return a.name if a.kind == "entity" else a.subject

    def is_entity(self, t):
        return t.is_item and t in self.sigma and self.atom(t).kind == "entity"

    def is_personal(self, t):
        return t.is_item and t in self.sigma and self.atom(t).kind != "nonpersonal"

    def is_identifier(self, t):
        return t.is_item and t in self.sigma and self.atom(t).kind == "identifier"

    def items(self):
        """All context items in deterministic order."""
        return sorted(self.sigma)

    def personal_items(self):
        return [t for t in self.items() if self.atom(t).kind != "nonpersonal"]

    def contexts(self):
        return sorted({t.context for t in self.sigma if t.profile != NP})

    def items_of_atom(self, name):
        return self._by_atom.get(name, [])

    def items_of_class(self, cls):
        return self._by_class.get(cls, [])

    def items_of_var(self, var):
        return [t for t in self.items() if t.name == var]

    def psi(self, t):
        """[(property name, image item)] for every property defined on ``t``."""
        return self._psi.get(t, [])

    def psi_closure(self, t):
        out, todo = [], [t]
        seen = {t}
        while todo:
            for _, img in self.psi(todo.pop()):
                if img not in seen:
                    seen.add(img)
                    out.append(img)
                    todo.append(img)
        return out

    # layers --------------------------------------------------------------

    def sigma_lift(self, m):
        """The information-layer term of ``m`` (leaves become atom symbols)."""

        def f(t):
            if t.op != "item":
                return t
            try:
                return sym(self.sigma[t])
            except KeyError:
                raise UnknownItem(str(t)) from None

        return map_leaves(m, f)

    def content_class(self, m):
        """The contents label of ``m``: class symbols at the leaves."""
        lab = self._label_cache.get(m)
        if lab is not None:
            return lab
        if m.op == "item":
            lab = sym(self.atom(m).cls)
        elif m.op == "sym":
            lab = m
        else:
            lab = Term(m.op, tuple(self.content_class(a) for a in m.args))
        self._label_cache[m] = lab
        return lab

    def equivalent(self, m, n):
        return self.sigma_lift(m) is self.sigma_lift(n)

    def content_equivalent(self, m, n):
        return self.content_class(m) is self.content_class(n)


def validate_model(model, terms=()):
    """List of violated well-formedness conditions (empty when the model is fine)."""
    out = []
    atoms = model.atoms
    for a in atoms.values():
        if a.kind not in KINDS:
            out.append(f"atom {a.name}: unknown kind {a.kind}")
        if a.kind in ("identifier", "data"):
            if a.subject is None:
                out.append(f"atom {a.name}: personal atom without subject")
            elif a.subject not in atoms or atoms[a.subject].kind != "entity":
                out.append(f"atom {a.name}: subject {a.subject} is not an entity")
        if a.kind == "nonpersonal" and a.subject is not None:
            out.append(f"atom {a.name}: non-personal atom with a subject")
    # identifier contents must be unique
    seen = {}
    for a in sorted(atoms.values(), key=lambda a: a.name):
        if a.kind == "identifier":
            if a.cls in seen:
                out.append(f"identifier contents not unique: {seen[a.cls]} and {a.name} share {a.cls}")
            else:
                seen[a.cls] = a.name
    defaults = {n for n, a in atoms.items() if a.cls == n and a.kind != "entity"}
    for a in sorted(atoms.values(), key=lambda a: a.name):
        if a.kind != "entity" and a.cls != a.name and a.cls in defaults:
            out.append(f"content class {a.cls} of {a.name} collides with atom {a.cls}")
    for actor in model.actors:
        if actor not in atoms or atoms[actor].kind != "entity":
            out.append(f"actor {actor} is not an entity")
    # sigma: kinds, contexts, subjects
    by_ctx = {}
    for t, name in model.sigma.items():
        if name not in atoms:
            out.append(f"item {t}: unknown atom {name}")
            continue
        a = atoms[name]
        if model.domains and t.domain not in model.domains:
            out.append(f"item {t}: undeclared domain {t.domain}")
        if t.profile == NP:
            if a.kind != "nonpersonal":
                out.append(f"item {t}: personal atom {name} in a non-personal context")
        else:
            if a.kind == "nonpersonal":
                out.append(f"item {t}: non-personal atom {name} needs profile '.'")
            if a.kind == "entity" and t.name != "ds":
                out.append(f"item {t}: entity items must use variable ds")
            if a.kind != "entity" and t.name == "ds":
                out.append(f"item {t}: variable ds is reserved for entities")
            subj = a.name if a.kind == "entity" else a.subject
            if subj is not None:  # already reported above
                by_ctx.setdefault(t.context, set()).add(subj)
    for ctx, subjects in sorted(by_ctx.items()):
        if len(subjects) > 1:
            out.append(f"context {ctx[0]}.{ctx[1]}: items about different subjects {sorted(subjects)}")
    # properties
    rules = set()
    info_psi = {}
    for p in model.properties:
        if (p.name, p.src) in rules:
            out.append(f"property {p.name}: two rules for variable {p.src}")
        rules.add((p.name, p.src))
    image_classes = {}
    for t in model.items():
        for pname, img in model.psi(t):
            a, b = model.atom(t), model.atom(img)
            if img.context != t.context:
                out.append(f"property {pname}: image {img} of {t} changes context")
            if a.kind not in ("identifier", "data") or b.kind != "data":
                out.append(f"property {pname}: {t} -> {img} must map identifiers/data to data")
                continue
            if a.subject != b.subject:
                out.append(f"property {pname}: image {img} of {t} has another subject")
            image_classes.setdefault(pname, set()).add(b.cls)
            prev = info_psi.setdefault((pname, a.name), b.name)
            if prev != b.name:
                out.append(f"property {pname}: inconsistent with sigma on atom {a.name} ({prev} vs {b.name})")
    for pname, classes in sorted(image_classes.items()):
        if len(classes) > 1:
            out.append(f"property {pname}: images have different contents {sorted(classes)}")
    for m in terms:
        for t in _leaves(m):
            if t.op != "item":
                out.append(f"term {m}: non-item leaf {t}")
            elif t not in model.sigma:
                out.append(f"term {m}: unknown item {t}")
            elif m is not t and atoms[model.sigma[t]].kind == "entity":
                out.append(f"term {m}: entity {t} inside a message")
    return out


def _leaves(m):
    if m.is_leaf:
        return [m]
    return [x for a in m.args for x in _leaves(a)]
