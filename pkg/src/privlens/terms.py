"""Interned message terms.

A term is either a leaf or a constructor application.  Leaves are context
items ``var@domain.profile`` or bare symbols (used for the information and
contents layers).  Terms are hash-consed: structurally equal terms are the
same object, so ``==`` is identity and hashing is cheap.
"""
import threading

NP = "."  # profile of non-personal items

# constructor name -> arity, None for variadic concatenation
ARITY = {
    "pk": 1,
    "cat": None,
    "hash": 1,
    "senc": 2,
    "aenc": 2,
    "sign": 2,
    "laenc": 3,
    "aka": 4,
    "cred": 4,
    "zk": 4,
    "icred": 4,
}
_RANK = {op: i for i, op in enumerate(["item", "sym", *ARITY])}


class TermError(ValueError):
    pass


class Term:
    """A hash-consed term.  Build with :func:`item`, :func:`sym` or :func:`app`."""

    __slots__ = ("op", "args", "name", "domain", "profile", "key", "_hash", "_size", "__weakref__")

    _table: dict = {}
    _lock = threading.Lock()

    def __new__(cls, op, args=(), name=None, domain=None, profile=None):
        ident = (op, args, name, domain, profile)
        t = cls._table.get(ident)
        if t is not None:
            return t
        with cls._lock:
            t = cls._table.get(ident)
            if t is not None:
                return t
            t = object.__new__(cls)
            t.op = op
            t.args = args
            t.name = name
            t.domain = domain
            t.profile = profile
            if op == "item":
                t.key = (0, name, domain, profile)
                t._size = 1
            elif op == "sym":
                t.key = (1, name)
                t._size = 1
            else:
                t.key = (_RANK[op], len(args), tuple(a.key for a in args))
                t._size = 1 + sum(a._size for a in args)
            t._hash = hash(t.key)
            cls._table[ident] = t
            return t

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __lt__(self, other):
        return self.key < other.key

    def __reduce__(self):
        return (Term, (self.op, self.args, self.name, self.domain, self.profile))

    @property
    def is_leaf(self):
        return self.op in ("item", "sym")

    @property
    def is_item(self):
        return self.op == "item"

    @property
    def nonpersonal(self):
        return self.op == "item" and self.profile == NP

    @property
    def context(self):
        """(domain, profile) of an item."""
        return (self.domain, self.profile)

    @property
    def size(self):
        return self._size

    def __repr__(self):
        return f"Term({format_term(self)!r})"

    def __str__(self):
        return format_term(self)


def item(var, domain, profile=NP):
    if not var or not domain:
        raise TermError(f"item needs a variable and a domain: {var!r}@{domain!r}")
    return Term("item", (), var, domain, profile or NP)


def sym(name):
    return Term("sym", (), name)


def app(op, *args):
    if op not in ARITY:
        raise TermError(f"unknown constructor {op!r}")
    n = ARITY[op]
    if n is not None and len(args) != n:
        raise TermError(f"{op} takes {n} arguments, got {len(args)}")
    for a in args:
        if not isinstance(a, Term):
            raise TermError(f"argument of {op} is not a term: {a!r}")
    return Term(op, tuple(args))


def pk(k):
    return app("pk", k)


def cat(*xs):
    return app("cat", *xs)


def hash_(m):
    return app("hash", m)


def senc(k, m):
    return app("senc", k, m)


def aenc(k, m):
    return app("aenc", k, m)


def sign(k, m):
    return app("sign", k, m)


def laenc(k, m, label):
    return app("laenc", k, m, label)


def aka(k1, n1, k2, n2):
    return app("aka", k1, n1, k2, n2)


def cred(user, key, attrs, rand):
    return app("cred", user, key, attrs, rand)


def zk(secret, public, props, rand):
    return app("zk", secret, public, props, rand)


def icred(user, key, attrs, rand):
    return app("icred", user, key, attrs, rand)


EMPTY = cat()


# paths ------------------------------------------------------------------


def subterm_at(m, path):
    """The subterm of ``m`` at ``path`` (tuple of child indices), or None."""
    for i in path:
        if i < 0 or i >= len(m.args):
            return None
        m = m.args[i]
    return m


def subterms(m):
    """All (path, subterm) pairs in preorder."""
    out = []
    stack = [((), m)]
    while stack:
        p, t = stack.pop()
        out.append((p, t))
        for i in range(len(t.args) - 1, -1, -1):
            stack.append((p + (i,), t.args[i]))
    return out


def leaves(m):
    """(path, leaf) pairs in left-to-right order."""
    return [(p, t) for p, t in subterms(m) if t.is_leaf]


def items_of(m):
    return {t for _, t in subterms(m) if t.is_item}


def replace_at(m, path, new):
    if not path:
        return new
    i = path[0]
    args = list(m.args)
    args[i] = replace_at(args[i], path[1:], new)
    return Term(m.op, tuple(args))


def substitute(m, mapping):
    """Replace leaves according to ``mapping`` everywhere."""
    if m.is_leaf:
        return mapping.get(m, m)
    return Term(m.op, tuple(substitute(a, mapping) for a in m.args))


def map_leaves(m, fn):
    if m.is_leaf:
        return fn(m)
    return Term(m.op, tuple(map_leaves(a, fn) for a in m.args))


def depth(m):
    if m.is_leaf:
        return 0
    return 1 + max((depth(a) for a in m.args), default=0)


# printing ---------------------------------------------------------------


def format_item(t):
    if t.profile == NP:
        return f"{t.name}@{t.domain}."
    return f"{t.name}@{t.domain}.{t.profile}"


def format_term(t):
    if t.op == "item":
        return format_item(t)
    if t.op == "sym":
        return t.name
    if not t.args:
        return f"({t.op})"
    return "(" + t.op + " " + " ".join(format_term(a) for a in t.args) + ")"
