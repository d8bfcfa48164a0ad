"""Reference implementation of detectability by naive saturation.

Every inference rule is applied literally (same-context premises, testing
rules, content analysis over arbitrary derived evidence) until nothing new is
derivable.  Construction is restricted to a finite universe: all content
variants of the subterms of the knowledge base, of the query terms, and of the
terms the rules can synthesise.  Slow, but independent of the engine in
:mod:`privlens.deduction`; tests use it as ground truth on small inputs.
"""
from itertools import product

from .terms import Term, cat, cred, hash_, leaves, pk, replace_at, subterms


def _aux(t):
    """Terms the rules may synthesise from ``t``."""
    op, a = t.op, t.args
    if op == "sign":
        return [pk(a[0]), cat(pk(a[0]), a[1])]
    if op == "cred":
        return [pk(a[1]), cat(pk(a[1]), a[0], a[2])]
    if op == "aka":
        return [pk(a[0]), pk(a[2])]
    if op == "icred" and a[3].op == "cat" and len(a[3].args) == 7:
        m1, k, m2, r = a
        n1, n2, _, _, n5, _, _ = r.args
        h = hash_(cat(m1, n1))
        return [pk(k), h, cat(pk(k), m2, h), cat(m1, n1, n2), cred(m1, k, m2, cat(n2, n5)), cat(m1, n2)]
    return []


class Saturation:
    def __init__(self, model, items, extra=(), max_universe=200_000):
        self.model = model
        self.kb = [t for t in items if not model.is_entity(t)]
        base = set()
        todo = list(self.kb) + list(extra)
        while todo:
            t = todo.pop()
            if t in base:
                continue
            base.add(t)
            todo.extend(s for _, s in subterms(t) if s is not t)
            todo.extend(_aux(t))
        relevant = set()
        for t in base:
            for _, x in leaves(t):
                relevant.add(x)
                relevant.update(model.psi_closure(x))
        self.members = {}
        for x in sorted(relevant):
            self.members.setdefault(model.content_class(x), []).append(x)
        self._vmemo = {}
        self._lmemo = {}
        self.universe = set()
        for t in base:
            if self._count(t) > max_universe:
                raise OverflowError("saturation universe too large")
            self.universe.update(self._variants(t))
            if len(self.universe) > max_universe:
                raise OverflowError("saturation universe too large")
        self.universe.update(relevant)
        self.S = set(self.kb)
        self._saturate()

    def _count(self, t):
        if t.is_leaf:
            return len(self.members.get(self.model.content_class(t), [t]))
        n = 1
        for a in t.args:
            n *= self._count(a)
        return n

    def _variants(self, t):
        hit = self._vmemo.get(t)
        if hit is not None:
            return hit
        if t.is_leaf:
            res = set(self.members.get(self.model.content_class(t), [t])) | {t}
        else:
            res = {Term(t.op, combo) for combo in product(*(sorted(self._variants(a)) for a in t.args))}
        self._vmemo[t] = res
        return res

    def label(self, t):
        return self.model.content_class(t)

    def _leaves(self, t):
        hit = self._lmemo.get(t)
        if hit is None:
            hit = self._lmemo[t] = leaves(t)
        return hit

    # rules ---------------------------------------------------------------

    def _constructible(self, u, S):
        op, a = u.op, u.args
        if u.is_leaf:
            return False
        if op == "aka":
            return a[1] in S and a[3] in S and (
                (a[0] in S and pk(a[2]) in S) or (pk(a[0]) in S and a[2] in S)
            )
        return all(x in S for x in a)

    def _eliminate(self, t, S, labels):
        """Conclusions of elimination/testing/property rules on t."""
        m = self.model
        op, a = t.op, t.args

        def have(n):  # some content-equivalent term is derivable
            return self.label(n) in labels

        out = []
        if op == "item":
            if m.kind(t) in ("identifier", "data"):
                out += [img for _, img in m.psi(t)]
        elif op == "cat":
            out += list(a)
        elif op == "senc":
            if have(a[0]):
                out.append(a[0])
            if a[0] in S:
                out.append(a[1])
        elif op in ("aenc", "laenc") and a[0].op == "pk":
            k = a[0].args[0]
            if op == "laenc":
                out.append(a[2])
            if have(k):
                out.append(k)
            if k in S:
                out.append(a[1])
        elif op == "sign":
            if have(pk(a[0])) and have(a[1]):
                out.append(cat(pk(a[0]), a[1]))
        elif op == "cred":
            if have(pk(a[1])) and have(a[0]) and have(a[2]):
                out.append(cat(pk(a[1]), a[0], a[2]))
        elif op == "zk":
            out += [a[2], a[1]]
            r = a[3]
            if r.op == "cat" and len(r.args) == 2:
                if have(r.args[0]):
                    out.append(r.args[0])
                if r.args[0] in S:
                    out.append(a[0])
        elif op == "icred":
            m1, k, m2, r = a
            if r.op == "cat" and len(r.args) == 7:
                n1, n2, n3, _, n5, n6, _ = r.args
                c = cred(m1, k, m2, cat(n2, n5))
                out.append(cat(pk(k), m2, hash_(cat(m1, n1))))
                if n2 in S:
                    out.append(c)
                if n3 in S:
                    out.append(cat(m1, n1, n2))
                if n6 in S:
                    out.append(k)
                if have(m1) and have(n2):
                    out.append(cat(m1, n2))
                if have(c):
                    out.append(c)
                for n in (n2, n3, n6):
                    if have(n):
                        out.append(n)
        return out

    def evidence_pairs(self, S):
        """Leaf pairs (q1, q2) with evidence from derivable terms, psi-lifts included."""
        groups = {}
        for s in S:
            groups.setdefault(self.label(s), []).append(s)
        pairs = set()
        for group in groups.values():
            if len(group) < 2:
                continue
            at = {}
            for s in group:
                for z, x in self._leaves(s):
                    at.setdefault(z, set()).add(x)
            for xs in at.values():
                for x in xs:
                    for y in xs:
                        if x is not y:
                            pairs.add((x, y))
        todo = list(pairs)
        while todo:
            x, y = todo.pop()
            for p, ix in self.model.psi(x):
                for q, iy in self.model.psi(y):
                    if p == q and ix is not iy and (ix, iy) not in pairs:
                        pairs.add((ix, iy))
                        todo.append((ix, iy))
        return pairs

    def _saturate(self):
        S = self.S
        while True:
            labels = {self.label(s) for s in S}
            new = set()
            for t in S:
                new.update(self._eliminate(t, S, labels))
            for u in self.universe:
                if u not in S and self._constructible(u, S):
                    new.add(u)
            adj = {}
            for x, y in self.evidence_pairs(S):
                adj.setdefault(x, set()).add(y)
            for n1 in S:
                for z, q in self._leaves(n1):
                    for q2 in adj.get(q, ()):
                        n2 = replace_at(n1, z, q2)
                        if n2 in self.universe:
                            new.add(n2)
            new -= S
            if not new:
                return
            S |= new

    def derivable(self, m):
        return m in self.S

    def associated_contexts(self):
        """Pairs of contexts linked by identifier evidence (associability rule 3)."""
        m = self.model
        out = set()
        for x, y in self.evidence_pairs(self.S):
            if m.is_identifier(x) and m.is_identifier(y):
                out.add((x.context, y.context))
        return out
