"""Requirement formulas over coalition views, and their evaluation."""
from dataclasses import dataclass

from .terms import format_item
from .views import coalition_kb, view_of


class UnknownName(KeyError):
    pass


# formula AST ---------------------------------------------------------------


@dataclass(frozen=True)
class Detect:
    coalition: tuple  # sorted actor names
    item: object  # context item


@dataclass(frozen=True)
class DetectAny:
    """Some context representation ``var@*`` is detectable."""

    coalition: tuple
    var: str


@dataclass(frozen=True)
class Assoc:
    """Two contexts are associable; a domain may be a bound variable name."""

    coalition: tuple
    ctx1: tuple  # (domain or variable, profile)
    ctx2: tuple


@dataclass(frozen=True)
class Exists:
    var: str
    body: object


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class Requirement:
    name: str
    formula: object
    note: str = ""


@dataclass(frozen=True)
class RequirementSuite:
    requirements: tuple = ()

    def __post_init__(self):
        names = [r.name for r in self.requirements]
        dup = sorted({n for n in names if names.count(n) > 1})
        if dup:
            raise ValueError(f"duplicate requirement names: {', '.join(dup)}")

    @property
    def names(self):
        return tuple(r.name for r in self.requirements)

    def __iter__(self):
        return iter(self.requirements)

    def __len__(self):
        return len(self.requirements)


def atoms_of(f):
    """All atomic subformulas, left to right."""
    if isinstance(f, (Detect, DetectAny, Assoc)):
        return [f]
    if isinstance(f, (Not, Exists)):
        return atoms_of(f.body)
    return atoms_of(f.left) + atoms_of(f.right)


def coalitions_of(f):
    return sorted({a.coalition for a in atoms_of(f)})


# evaluation ----------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    witness: str = ""


class Evaluator:
    """Evaluates formulas in one state, caching one view per coalition."""

    def __init__(self, state):
        self.state = state
        self.model = state.model
        self._views = {}

    def view(self, coalition):
        v = self._views.get(coalition)
        if v is None:
            v = view_of(coalition_kb(self.state, coalition))
            self._views[coalition] = v
        return v

    def _ctx(self, ctx, env):
        dom, prof = ctx
        dom = env.get(dom, dom)
        if dom not in self.model.domains:
            raise UnknownName(f"unknown domain {dom}")
        return dom, prof

    def check_names(self, f, bound=()):
        """Raise UnknownName for actors, items or domains the model lacks."""
        if isinstance(f, (Detect, DetectAny, Assoc)):
            for a in f.coalition:
                if a not in self.state.kbs:
                    raise UnknownName(f"unknown actor {a}")
        if isinstance(f, Detect) and f.item not in self.model.sigma:
            raise UnknownName(f"unknown item {format_item(f.item)}")
        if isinstance(f, DetectAny) and not self.model.items_of_var(f.var):
            raise UnknownName(f"no items with variable {f.var}")
        if isinstance(f, Assoc):
            for dom, _ in (f.ctx1, f.ctx2):
                if dom not in bound and dom not in self.model.domains:
                    raise UnknownName(f"unknown domain {dom}")
        if isinstance(f, Exists):
            self.check_names(f.body, bound + (f.var,))
        elif isinstance(f, Not):
            self.check_names(f.body, bound)
        elif isinstance(f, (And, Or)):
            self.check_names(f.left, bound)
            self.check_names(f.right, bound)

    def eval(self, f, env=None):
        """(truth value, short explanation of why)."""
        env = env or {}
        if isinstance(f, Detect):
            ok = f.item in self.view(f.coalition).detectable
            return ok, f"{_who(f.coalition)} {'detects' if ok else 'cannot detect'} {format_item(f.item)}"
        if isinstance(f, DetectAny):
            v = self.view(f.coalition)
            hits = [t for t in self.model.items_of_var(f.var) if t in v.detectable]
            if hits:
                return True, f"{_who(f.coalition)} detects {', '.join(format_item(t) for t in hits)}"
            return False, f"{_who(f.coalition)} detects no {f.var}@*"
        if isinstance(f, Assoc):
            c1, c2 = self._ctx(f.ctx1, env), self._ctx(f.ctx2, env)
            ok = self.view(f.coalition).ctx_associable(c1, c2)
            rel = "links" if ok else "cannot link"
            return ok, f"{_who(f.coalition)} {rel} {c1[0]}.{c1[1]} and {c2[0]}.{c2[1]}"
        if isinstance(f, Not):
            ok, why = self.eval(f.body, env)
            return not ok, why
        if isinstance(f, And):
            ok1, w1 = self.eval(f.left, env)
            if not ok1:
                return False, w1
            ok2, w2 = self.eval(f.right, env)
            return ok2, w2 if not ok2 else _join(w1, w2)
        if isinstance(f, Or):
            ok1, w1 = self.eval(f.left, env)
            if ok1:
                return True, w1
            ok2, w2 = self.eval(f.right, env)
            return ok2, w2 if ok2 else _join(w1, w2)
        if isinstance(f, Exists):
            whys = []
            for dom in sorted(self.model.domains):
                ok, why = self.eval(f.body, {**env, f.var: dom})
                if ok:
                    return True, f"{f.var}={dom}: {why}"
                whys.append(why)
            return False, f"no domain {f.var} works"
        raise TypeError(f"not a formula: {f!r}")


def _who(coalition):
    return "+".join(coalition)


def _join(a, b):
    return a if a == b else f"{a}; {b}"


def eval_formula(f, state, env=None):
    return Evaluator(state).eval(f, env)


def check_suite(suite, state, evaluator=None):
    """One verdict per requirement, in suite order."""
    ev = evaluator or Evaluator(state)
    out = []
    for r in suite:
        ev.check_names(r.formula)
        ok, why = ev.eval(r.formula)
        out.append(Verdict(r.name, ok, why))
    return out
