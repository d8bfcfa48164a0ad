"""Views: detectable personal items plus the associability partition."""
from dataclasses import dataclass

from .deduction import KnowledgeBase, deducer
from .terms import NP


class UnknownActor(KeyError):
    pass


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        if p == x:
            return x
        r = self.find(p)
        self.parent[x] = r
        return r

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx


@dataclass(frozen=True)
class View:
    detectable: frozenset
    classes: tuple  # partition of all personal context items, each class sorted
    ctx_root: dict  # (domain, profile) -> representative context

    def associated(self, x, y):
        return self.ctx_root.get(x.context, x.context) == self.ctx_root.get(y.context, y.context)

    def ctx_associable(self, c1, c2):
        return c1 == c2 or self.ctx_root.get(c1, c1) == self.ctx_root.get(c2, c2)

    def class_of(self, x):
        for c in self.classes:
            if x in c:
                return c
        return (x,)


def context_partition(kb):
    """Union-find over contexts realising associability rules 1-3."""
    model = kb.model
    uf = _UnionFind()
    for ctx in model.contexts():
        uf.find(ctx)
    # rule 1: known entities with equal sigma
    seen = {}
    for e in kb.entities():
        a = model.sigma[e]
        if a in seen:
            uf.union(seen[a].context, e.context)
        else:
            seen[a] = e
    # rule 2 is implicit: items are grouped by context
    # rule 3: identifiers linked by evidence
    d = deducer(kb)
    groups = {}
    for x in d.edges:
        if model.is_identifier(x):
            groups.setdefault(d.find(x), []).append(x)
    for xs in groups.values():
        for y in xs[1:]:
            uf.union(xs[0].context, y.context)
    return uf


def associability(kb):
    """The associability partition over all personal context items of the model."""
    model = kb.model
    uf = context_partition(kb)
    by_root = {}
    for t in model.personal_items():
        by_root.setdefault(uf.find(t.context), []).append(t)
    return tuple(sorted(tuple(sorted(c)) for c in by_root.values()))


def view_of(kb):
    model = kb.model
    d = deducer(kb)
    detectable = {
        t for t in model.personal_items() if model.kind(t) != "entity" and d.derivable(t)
    }
    detectable.update(kb.entities())
    uf = context_partition(kb)
    roots = {ctx: uf.find(ctx) for ctx in model.contexts()}
    by_root = {}
    for t in model.personal_items():
        by_root.setdefault(roots[t.context], []).append(t)
    classes = tuple(sorted(tuple(sorted(c)) for c in by_root.values()))
    return View(frozenset(detectable), classes, roots)


def coalition_kb(state, actors):
    """Union of the knowledge bases of ``actors`` in ``state``."""
    actors = sorted(set(actors))
    if not actors:
        raise UnknownActor("empty coalition")
    items = set()
    for a in actors:
        if a not in state.kbs:
            raise UnknownActor(a)
        items |= state.kbs[a].items
    return KnowledgeBase(state.model, "+".join(actors), frozenset(items))


def ctx_associable(view, c1, c2):
    return view.ctx_associable(c1, c2)


def is_personal_context(ctx):
    return ctx[1] != NP
