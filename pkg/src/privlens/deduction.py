"""Detectability: which context messages an actor can derive from a knowledge base.

The engine works in three layers:

* :class:`ContentsOracle` -- a plain Dolev-Yao closure over content labels, used
  to decide the extra prerequisites (keys, randomness, verification inputs) of
  elimination and testing rules.
* the *analysis set* -- every term obtainable from the knowledge base by
  elimination, testing and property rules, each with the step that produced it.
  Anything else derivable without content analysis is built by construction.
* the *evidence graph* -- context items linked by evidence of equal contents.
  A message is derivable with content analysis iff some content-equivalent
  message derivable without it differs only at positions whose items are
  connected in this graph.
"""
from collections import deque
from dataclasses import dataclass, field

from .terms import Term, cat, cred, hash_, leaves, pk, replace_at, subterms

RULES = (
    "0", "Epsi", "C",
    "CP", "CC", "EC", "EC'", "CH",
    "CE", "EE", "TE",
    "CA", "EA", "TA",
    "CS", "TS",
    "CL", "EL", "EL'", "TL",
    "CG", "CG'",
    "CR", "TR",
    "CZ", "EZ1", "EZ2", "EZ3", "TZ1",
    "CI", "EI1", "EI2", "EI3", "EI4", "TI1", "TI2", "TI3", "TI4", "TI5",
)

CONSTRUCT = {
    "pk": "CP", "cat": "CC", "hash": "CH", "senc": "CE", "aenc": "CA", "sign": "CS",
    "laenc": "CL", "cred": "CR", "zk": "CZ", "icred": "CI",
}

# rules whose extra premises are the same-context terms themselves; for the
# other rules the extra premises are content-equivalent stand-ins
_SAME_CONTEXT = {"EE", "EA", "EL'", "EZ2", "EI1", "EI2", "EI3"}


@dataclass(frozen=True)
class KnowledgeBase:
    model: object = field(repr=False, compare=False)
    owner: str
    items: frozenset

    def __post_init__(self):
        for t in self.items:
            if not isinstance(t, Term):
                raise TypeError(f"knowledge base element is not a term: {t!r}")

    def terms(self):
        """Message elements (entities excluded), sorted."""
        return sorted(t for t in self.items if not self.model.is_entity(t))

    def entities(self):
        return sorted(t for t in self.items if self.model.is_entity(t))

    def union(self, other, owner=None):
        return KnowledgeBase(self.model, owner or self.owner, self.items | other.items)

    def __contains__(self, t):
        return t in self.items

    def __len__(self):
        return len(self.items)


@dataclass(frozen=True)
class Derivation:
    rule: str
    term: Term
    premises: tuple = ()

    def rules(self):
        out = {self.rule}
        for p in self.premises:
            out |= p.rules()
        return out

    def size(self):
        return 1 + sum(p.size() for p in self.premises)

    def render(self, indent=0):
        lines = [f"{'  ' * indent}[{self.rule}] {self.term}"]
        for p in self.premises:
            lines.append(p.render(indent + 1))
        return "\n".join(lines)


# rule shapes ------------------------------------------------------------


def analysis_steps(t, model):
    """Elimination/testing/property steps applicable to ``t``.

    Each step is (rule, conclusion, needs): ``needs`` are the terms whose
    contents must be derivable for the rule to fire.
    """
    op, a = t.op, t.args
    if op == "item":
        if model.kind(t) in ("identifier", "data"):
            return [("Epsi", img, ()) for _, img in model.psi(t)]
        return []
    if op == "cat":
        return [("EC" if i == 0 else "EC'", x, ()) for i, x in enumerate(a)]
    if op == "senc":
        k, m = a
        return [("TE", k, (k,)), ("EE", m, (k,))]
    if op == "aenc":
        if a[0].op != "pk":
            return []
        k = a[0].args[0]
        return [("TA", k, (k,)), ("EA", a[1], (k,))]
    if op == "sign":
        k, m = a
        return [("TS", cat(pk(k), m), (pk(k), m))]
    if op == "laenc":
        if a[0].op != "pk":
            return []
        k = a[0].args[0]
        return [("EL", a[2], ()), ("TL", k, (k,)), ("EL'", a[1], (k,))]
    if op == "zk":
        m1, m2, m3, r = a
        steps = [("EZ1", m3, ()), ("EZ3", m2, ())]
        if r.op == "cat" and len(r.args) == 2:
            np_ = r.args[0]
            steps += [("TZ1", np_, (np_,)), ("EZ2", m1, (np_,))]
        return steps
    if op == "cred":
        m1, k, m2, _ = a
        return [("TR", cat(pk(k), m1, m2), (pk(k), m1, m2))]
    if op == "icred":
        m1, k, m2, r = a
        if r.op != "cat" or len(r.args) != 7:
            return []
        n1, n2, n3, _, n5, n6, _ = r.args
        c = cred(m1, k, m2, cat(n2, n5))
        return [
            ("EI4", cat(pk(k), m2, hash_(cat(m1, n1))), ()),
            ("TI3", n2, (n2,)),
            ("EI1", c, (n2,)),
            ("TI4", n3, (n3,)),
            ("EI2", cat(m1, n1, n2), (n3,)),
            ("TI5", n6, (n6,)),
            ("EI3", k, (n6,)),
            ("TI1", cat(m1, n2), (cat(m1, n2),)),
            ("TI2", c, (c,)),
        ]
    return []


def _content_steps(lab, model):
    """Elimination steps at the contents layer (labels, no contexts)."""
    op, a = lab.op, lab.args
    if op == "sym":
        out = []
        for t in model.items_of_class(lab.name):
            if model.kind(t) in ("identifier", "data"):
                out += [(model.content_class(img), ()) for _, img in model.psi(t)]
        return out
    if op == "cat":
        return [(x, ()) for x in a]
    if op == "senc":
        return [(a[1], (a[0],))]
    if op == "aenc":
        return [(a[1], (a[0].args[0],))] if a[0].op == "pk" else []
    if op == "laenc":
        if a[0].op != "pk":
            return []
        return [(a[2], ()), (a[1], (a[0].args[0],))]
    if op == "zk":
        out = [(a[2], ()), (a[1], ())]
        if a[3].op == "cat" and len(a[3].args) == 2:
            out.append((a[0], (a[3].args[0],)))
        return out
    if op == "icred":
        m1, k, m2, r = a
        if r.op != "cat" or len(r.args) != 7:
            return []
        n1, n2, n3, _, n5, n6, _ = r.args
        return [
            (cat(pk(k), m2, hash_(cat(m1, n1))), ()),
            (cred(m1, k, m2, cat(n2, n5)), (n2,)),
            (cat(m1, n1, n2), (n3,)),
            (k, (n6,)),
        ]
    return []


class ContentsOracle:
    """Standard deductive closure over content labels of a knowledge base."""

    def __init__(self, model, terms):
        self.model = model
        self.known = set()
        self._order = []
        self._memo = {}
        for t in sorted(terms):
            self._add(model.content_class(t))
        fired = set()
        changed = True
        while changed:
            changed = False
            i = 0
            while i < len(self._order):
                lab = self._order[i]
                for j, (concl, needs) in enumerate(_content_steps(lab, model)):
                    if (lab, j) in fired:
                        continue
                    if all(self.derivable(n) for n in needs):
                        fired.add((lab, j))
                        changed |= self._add(concl)
                i += 1

    def _add(self, lab):
        if lab in self.known:
            return False
        self.known.add(lab)
        self._order.append(lab)
        self._memo = {}
        return True

    def derivable(self, lab):
        hit = self._memo.get(lab)
        if hit is not None:
            return hit
        if lab in self.known:
            res = True
        elif lab.is_leaf:
            res = False
        elif lab.op == "aka":
            c0, c1, c2, c3 = lab.args
            res = self.derivable(c1) and self.derivable(c3) and (
                (self.derivable(c0) and self.derivable(pk(c2)))
                or (self.derivable(pk(c0)) and self.derivable(c2))
            )
        else:
            res = all(self.derivable(c) for c in lab.args)
        self._memo[lab] = res
        return res


@dataclass
class _Step:
    rank: int
    rule: str
    premises: tuple


class Deducer:
    """Derivability, evidence and content-analysis queries for one knowledge base."""

    def __init__(self, model, items):
        self.model = model
        self.kb = frozenset(items)
        self.terms = sorted(t for t in self.kb if not model.is_entity(t))
        self.contents = ContentsOracle(model, self.terms)
        self.known = {}
        self.order = []
        self.by_label = {}
        self._wit = {}
        self._close()
        self._var = {}
        self._dnc_memo = {}
        self._build_evidence()

    # analysis closure ----------------------------------------------------

    def label(self, t):
        return self.model.content_class(t)

    def _add(self, t, rule, premises):
        if t in self.known:
            return False
        self.known[t] = _Step(len(self.order), rule, premises)
        self.order.append(t)
        self.by_label.setdefault(self.label(t), []).append(t)
        return True

    def _have(self, n):
        lab = self.label(n)
        return self.contents.derivable(lab) and self.witness(lab) is not None

    def _close(self):
        for t in self.terms:
            self._add(t, "0", ())
        steps = {}
        fired = set()
        changed = True
        while changed:
            changed = False
            i = 0
            while i < len(self.order):
                t = self.order[i]
                if t not in steps:
                    steps[t] = analysis_steps(t, self.model)
                for j, (rule, concl, needs) in enumerate(steps[t]):
                    if (t, j) in fired or not all(self._have(n) for n in needs):
                        continue
                    fired.add((t, j))
                    if rule in _SAME_CONTEXT:
                        prem = (t, *needs)
                    else:
                        prem = (t, *(self.witness(self.label(n)) for n in needs))
                    changed |= self._add(concl, rule, prem)
                i += 1

    def witness(self, lab):
        """Some term with contents ``lab`` derivable without content analysis, or None."""
        version = len(self.order)
        hit = self._wit.get(lab)
        if hit is not None and (hit[0] is not None or hit[1] == version):
            return hit[0]
        ts = self.by_label.get(lab)
        w = None
        if ts:
            w = ts[0]
        elif lab.is_leaf:
            w = None
        elif lab.op == "aka":
            c0, c1, c2, c3 = lab.args
            w1, w3 = self.witness(c1), self.witness(c3)
            if w1 is not None and w3 is not None:
                w0, wp2 = self.witness(c0), self.witness(pk(c2))
                if w0 is not None and wp2 is not None:
                    w = Term("aka", (w0, w1, wp2.args[0], w3))
                else:
                    wp0, w2 = self.witness(pk(c0)), self.witness(c2)
                    if wp0 is not None and w2 is not None:
                        w = Term("aka", (wp0.args[0], w1, w2, w3))
        else:
            ws = [self.witness(c) for c in lab.args]
            if all(x is not None for x in ws):
                w = Term(lab.op, tuple(ws))
        self._wit[lab] = (w, version)
        return w

    # derivability without content analysis -------------------------------

    def derivable_no_ca(self, m):
        hit = self._dnc_memo.get(m)
        if hit is not None:
            return hit
        if m in self.known:
            res = True
        elif m.is_leaf:
            res = False
        elif m.op == "aka":
            k1, n1, k2, n2 = m.args
            res = self.derivable_no_ca(n1) and self.derivable_no_ca(n2) and (
                (self.derivable_no_ca(k1) and self.derivable_no_ca(pk(k2)))
                or (self.derivable_no_ca(pk(k1)) and self.derivable_no_ca(k2))
            )
        else:
            res = all(self.derivable_no_ca(a) for a in m.args)
        self._dnc_memo[m] = res
        return res

    def explain_no_ca(self, m, limit=None):
        """Derivation tree of ``m`` without content analysis, or None."""
        if limit is None:
            limit = len(self.order) + 1
        st = self.known.get(m)
        if st is not None and st.rank < limit:
            prem = []
            for p in st.premises:
                d = self.explain_no_ca(p, st.rank)
                if d is None:  # pragma: no cover - closure invariant
                    raise AssertionError(f"premise {p} of {m} not derivable")
                prem.append(d)
            return Derivation(st.rule, m, tuple(prem))
        if m.is_leaf:
            return None
        if m.op == "aka":
            k1, n1, k2, n2 = m.args
            for rule, parts in (("CG", (k1, n1, pk(k2), n2)), ("CG'", (pk(k1), n1, k2, n2))):
                ds = [self.explain_no_ca(p, limit) for p in parts]
                if all(d is not None for d in ds):
                    return Derivation(rule, m, tuple(ds))
            return None
        ds = [self.explain_no_ca(a, limit) for a in m.args]
        if all(d is not None for d in ds):
            return Derivation(CONSTRUCT[m.op], m, tuple(ds))
        return None

    # evidence ------------------------------------------------------------

    def variants(self, lab):
        """For each leaf path, the leaves found there across derivable terms with contents ``lab``.

        Returns {path: {leaf: witness term}} or None when no such term is derivable.
        """
        if lab in self._var:
            return self._var[lab]
        self._var[lab] = None  # labels only shrink in recursion; guard anyway
        res = None
        for s in self.by_label.get(lab, ()):
            res = res if res is not None else {}
            for z, x in leaves(s):
                res.setdefault(z, {}).setdefault(x, s)
        if not lab.is_leaf:
            for slots in self._construction_slots(lab):
                maps = [self.variants(c) for c in slots]
                if any(mp is None for mp in maps):
                    continue
                base = [self.witness(c) for c in slots]
                res = res if res is not None else {}
                for i, mp in enumerate(maps):
                    wrapped = slots[i] is not lab.args[i]
                    for z, alts in mp.items():
                        if wrapped:
                            z = z[1:]
                        for x, w in alts.items():
                            args = [b.args[0] if slots[j] is not lab.args[j] else b for j, b in enumerate(base)]
                            args[i] = w.args[0] if wrapped else w
                            res.setdefault((i,) + z, {}).setdefault(x, Term(lab.op, tuple(args)))
        self._var[lab] = res
        return res

    @staticmethod
    def _construction_slots(lab):
        """Premise labels of each construction rule for ``lab`` (pk-wrapped where needed)."""
        if lab.op == "aka":
            c0, c1, c2, c3 = lab.args
            return [(c0, c1, pk(c2), c3), (pk(c0), c1, c2, c3)]
        return [lab.args]

    def _build_evidence(self):
        self.parent = {}
        self.edges = {}
        todo = []
        for s in self.order:
            vm = self.variants(self.label(s))
            for z, x in leaves(s):
                for y, w in vm.get(z, {}).items():
                    if y is not x:
                        todo.append((x, y, (s, w, z, ())))
        while todo:
            x, y, wit = todo.pop()
            if not self._add_edge(x, y, wit):
                continue
            for p, ix in self.model.psi(x):
                for q, iy in self.model.psi(y):
                    if p == q and ix is not iy:
                        s, w, z, lifts = wit
                        todo.append((ix, iy, (s, w, z, lifts + (p,))))

    def _add_edge(self, x, y, wit):
        adj = self.edges.setdefault(x, {})
        if y in adj:
            return False
        adj[y] = wit
        s, w, z, lifts = wit
        self.edges.setdefault(y, {}).setdefault(x, (w, s, z, lifts))
        self._union(x, y)
        return True

    def find(self, x):
        p = self.parent.get(x, x)
        if p is x:
            return x
        root = self.find(p)
        self.parent[x] = root
        return root

    def _union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx is not ry:
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx

    def linked(self, x, y):
        """True if a chain of evidence connects items ``x`` and ``y``."""
        return x is y or self.find(x) is self.find(y)

    def evidence_for(self, n1, n2):
        """A pair of derivable terms that is direct evidence for n1 = n2 in contents."""
        if n1 is n2:
            for s in self.order:
                if any(t is n1 for _, t in subterms(s)):
                    return (s, s)
            return None
        wit = self.edges.get(n1, {}).get(n2)
        if wit is None:
            return None
        return (wit[0], wit[1])

    # full derivability ---------------------------------------------------

    def _match(self, m):
        lab = self.label(m)
        for s in self.by_label.get(lab, ()):
            if all(self.linked(a, b) for (_, a), (_, b) in zip(leaves(s), leaves(m))):
                return s
        if m.is_leaf:
            return None
        if m.op == "aka":
            k1, n1, k2, n2 = m.args
            r1, r2 = self._match(n1), self._match(n2)
            if r1 is None or r2 is None:
                return None
            a, b = self._match(k1), self._match(pk(k2))
            if a is not None and b is not None:
                return Term("aka", (a, r1, b.args[0], r2))
            a, b = self._match(pk(k1)), self._match(k2)
            if a is not None and b is not None:
                return Term("aka", (a.args[0], r1, b, r2))
            return None
        rs = [self._match(a) for a in m.args]
        if any(r is None for r in rs):
            return None
        return Term(m.op, tuple(rs))

    def derivable(self, m):
        if self.derivable_no_ca(m):
            return True
        try:
            self.label(m)
        except KeyError:
            return False
        return self._match(m) is not None

    def explain(self, m):
        """Derivation tree of ``m`` in the full system, or None."""
        d = self.explain_no_ca(m)
        if d is not None:
            return d
        try:
            self.label(m)
        except KeyError:
            return None
        base = self._match(m)
        if base is None:
            return None
        d = self.explain_no_ca(base)
        cur = base
        for (z, a), (_, b) in zip(leaves(base), leaves(m)):
            if a is b:
                continue
            for u, v, wit in self._path(a, b):
                s, w, zz, _ = wit
                nxt = replace_at(cur, z, v)
                d = Derivation("C", nxt, (d, self.explain_no_ca(s), self.explain_no_ca(w)))
                cur = nxt
        return d

    def _path(self, a, b):
        prev = {a: None}
        q = deque([a])
        while q:
            u = q.popleft()
            if u is b:
                break
            for v in sorted(self.edges.get(u, {})):
                if v not in prev:
                    prev[v] = u
                    q.append(v)
        out = []
        v = b
        while prev[v] is not None:
            u = prev[v]
            out.append((u, v, self.edges[u][v]))
            v = u
        return out[::-1]

    def property_images(self):
        """Derivable property images of derivable identifiers and data items."""
        out = set()
        for t in self.model.items():
            if self.model.kind(t) in ("identifier", "data") and self.model.psi(t) and self.derivable(t):
                out.update(img for _, img in self.model.psi(t))
        return sorted(out)


def deducer(kb):
    """Cached :class:`Deducer` for a knowledge base."""
    cache = kb.model.__dict__.setdefault("_deducers", {})
    d = cache.get(kb.items)
    if d is None:
        d = cache[kb.items] = Deducer(kb.model, kb.items)
    return d


def derive_no_ca(kb, m):
    return deducer(kb).explain_no_ca(m)


def derivable(kb, m):
    # entities are known outright; they never take part in derivations
    if m in kb.items and kb.model.is_entity(m):
        return Derivation("0", m)
    return deducer(kb).explain(m)


def contents_oracle(kb, lab):
    return deducer(kb).contents.derivable(lab)


def evidence_for(kb, n1, n2):
    return deducer(kb).evidence_for(n1, n2)


def property_images(kb):
    return deducer(kb).property_images()
