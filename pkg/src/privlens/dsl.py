"""Scenario files: parser, resolver and pretty-printer.

A scenario is one or more ``.pls`` files, each starting with the header line
``privlens-scenario v1``.  The files are read as one document made of
sections::

    [meta]          name: ... / description: ...
    [entities]      al ii bs
    [actors]        al bs
    [domains]       pub pi zeta
    [info]          name kind subject [per-domain]
    [contents]      class: atom atom ...
    [ctx]           atom: item item ...          (domain may be *)
    [props]         name: src -> dst
    [initial A]     terms, several per line      (A may be *)
    [phase NAME]    transmissions with domain-less items (v@.p, n@..)
    [trace]         send a -> b : T | zk a <-> b : T | icred a <-> b : T
                    run NAME DOMAIN
    [requirements]  NAME: formula

Indented lines continue the previous line; ``#`` starts a comment; a line
``include FILE`` splices in another file.  Terms are prefix expressions such
as ``(senc shkey@pi. id@pi.su)``.  ``(ms k m1 .. mn)`` abbreviates a message
with its signature and ``(at D t)`` puts every domain-less item of t in D.
"""
import re
from dataclasses import dataclass, field
from pathlib import Path

from .model import Atom, InfoModel, Property, validate_model
from .requirements import (
    And, Assoc, Detect, DetectAny, Exists, Not, Or, Requirement, RequirementSuite,
)
from .terms import ARITY, NP, Term, TermError, app, cat, format_item, format_term, item, leaves, map_leaves, sign
from .traces import KINDS, State, Transmission

HEADER = "privlens-scenario v1"
HOLE = "?"  # domain of items waiting for (at D ...) or a phase run
IDENT = r"[A-Za-z0-9_'>]+"
_IDENT_RE = re.compile(rf"^{IDENT}$")
_LEAF_RE = re.compile(
    rf"^(?P<var>{IDENT})@(?P<dom>[A-Za-z0-9_'*]*)(?:\.(?P<prof>{IDENT}|\.)?)?$"
)
SECTIONS = ("meta", "entities", "actors", "domains", "info", "contents", "ctx", "props",
            "initial", "phase", "trace", "requirements")


class ParseError(ValueError):
    def __init__(self, msg, line=0, col=0, file=""):
        self.msg, self.line, self.col, self.file = msg, line, col, file
        where = f"{file}:" if file else ""
        super().__init__(f"{where}{line}:{col}: {msg}")


class ResolutionError(ParseError):
    pass


class ModelInvalid(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("model is not well formed:\n  " + "\n  ".join(self.violations))


@dataclass
class ScenarioBundle:
    name: str
    description: str
    model: InfoModel
    knowledge: dict  # actor -> frozenset of terms (and entity items)
    trace: tuple
    suite: RequirementSuite
    initial: State = field(init=False, repr=False)

    def __post_init__(self):
        self.initial = State.initial(self.model, self.knowledge)

    def key(self):
        m = self.model
        return (
            self.name, self.description,
            tuple(sorted(m.atoms.values(), key=lambda a: a.name)),
            tuple(sorted((t.key, a) for t, a in m.sigma.items())),
            tuple(sorted(m.properties, key=lambda p: (p.name, p.src))),
            tuple(m.actors), tuple(m.domains),
            tuple(sorted((a, tuple(sorted(ts))) for a, ts in self.knowledge.items())),
            tuple(self.trace), self.suite,
        )

    def __eq__(self, other):
        return isinstance(other, ScenarioBundle) and self.key() == other.key()

    __hash__ = None


# lexing ---------------------------------------------------------------------


@dataclass(frozen=True)
class Tok:
    text: str
    line: int
    col: int
    file: str = ""


@dataclass
class Logical:
    """A logical line (a line plus its indented continuations) as tokens."""

    toks: list
    line: int
    col: int
    file: str
    raw: str


_TOKEN_RE = re.compile(r"\{[^}]*\}?|<->|->|[()!&|:]|[^\s(){}!&|:]+")


def _tokens(text, line, col0, file):
    out = []
    for mt in _TOKEN_RE.finditer(text):
        out.append(Tok(mt.group(), line, col0 + mt.start() + 1, file))
    return out


def _read_lines(path=None, text=None, name="<text>", seen=()):
    """[(file, lineno, text)] with includes spliced in and headers checked."""
    if text is None:
        path = Path(path)
        name = str(path)
        if path.resolve() in seen:
            raise ParseError(f"include cycle through {name}", 1, 1, name)
        seen = seen + (path.resolve(),)
        text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    first = next((i for i, s in enumerate(lines) if s.strip() and not s.lstrip().startswith("#")), None)
    if first is None or lines[first].strip() != HEADER:
        ln = 1 if first is None else first + 1
        raise ParseError(f"missing header line '{HEADER}'", ln, 1, name)
    out = []
    for i, s in enumerate(lines):
        if i == first:
            continue
        stripped = s.split("#", 1)[0].rstrip()
        if stripped.startswith("include "):
            target = stripped[len("include "):].strip()
            if path is None:
                raise ParseError("include is only allowed in files", i + 1, 1, name)
            inc = Path(path).parent / target
            if not inc.exists():
                raise ParseError(f"included file not found: {target}", i + 1, 9, name)
            out.extend(_read_lines(inc, seen=seen))
            continue
        out.append((name, i + 1, s))
    return out


def _logical_lines(src):
    """Group physical lines into sections of logical lines."""
    sections = []  # (name, arg, header Tok, [Logical])
    cur = None
    for file, ln, s in src:
        body = s.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        if not body[0].isspace():
            if body.startswith("["):
                if not body.endswith("]"):
                    raise ParseError("unterminated section header", ln, len(body) + 1, file)
                parts = body[1:-1].split()
                if not parts or parts[0] not in SECTIONS:
                    raise ParseError(f"unknown section [{body[1:-1]}]", ln, 2, file)
                name, args = parts[0], parts[1:]
                if name in ("initial", "phase"):
                    if len(args) != 1:
                        raise ParseError(f"[{name}] needs exactly one argument", ln, 2, file)
                elif args:
                    raise ParseError(f"[{name}] takes no argument", ln, 2, file)
                cur = (name, args[0] if args else None, Tok(body, ln, 1, file), [])
                sections.append(cur)
                continue
            if cur is None:
                raise ParseError("text outside of any section", ln, 1, file)
            cur[3].append(Logical(_tokens(body, ln, 0, file), ln, 1, file, body))
        else:
            if cur is None or not cur[3]:
                raise ParseError("continuation line without a line to continue", ln, 1, file)
            lead = len(body) - len(body.lstrip())
            cur[3][-1].toks.extend(_tokens(body.lstrip(), ln, lead, file))
            cur[3][-1].raw += " " + body.strip()
    return sections


def _err(tok, msg, cls=ParseError):
    return cls(msg, tok.line, tok.col, tok.file)


# terms ------------------------------------------------------------------------


class _TermParser:
    def __init__(self, toks, positions):
        self.toks = toks
        self.i = 0
        self.positions = positions  # leaf -> first Tok

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self, what="a term"):
        t = self.peek()
        if t is None:
            last = self.toks[-1] if self.toks else Tok("", 0, 0)
            raise ParseError(f"expected {what}, found end of line", last.line, last.col + len(last.text), last.file)
        self.i += 1
        return t

    def term(self):
        t = self.next()
        if t.text == "(":
            op = self.next("a constructor")
            if op.text in ("(", ")"):
                raise _err(op, "expected a constructor name")
            if op.text == "at":
                return self._at(t, op)
            args = []
            while True:
                p = self.peek()
                if p is None:
                    raise _err(t, "unclosed parenthesis")
                if p.text == ")":
                    self.i += 1
                    break
                args.append(self.term())
            return self._build(op, args)
        if t.text == ")":
            raise _err(t, "unexpected ')'")
        return self.leaf(t)

    def leaf(self, t):
        mt = _LEAF_RE.match(t.text)
        if not mt:
            raise _err(t, f"malformed item '{t.text}' (expected var@domain.profile)")
        dom = mt.group("dom") or HOLE
        if "*" in dom:
            raise _err(t, "'*' domains are only allowed in [ctx] patterns")
        prof = mt.group("prof") or NP
        x = item(mt.group("var"), dom, prof)
        self.positions.setdefault(x, t)
        return x

    def _at(self, open_, op):
        d = self.next("a domain name")
        if not _IDENT_RE.match(d.text):
            raise _err(d, f"malformed domain name '{d.text}'")
        body = self.term()
        c = self.next("')'")
        if c.text != ")":
            raise _err(c, "at takes a domain and one term")
        return fill_domain(body, d.text)

    def _build(self, op, args):
        name = op.text
        if name == "ms":
            if len(args) < 2:
                raise _err(op, "ms needs a key and at least one message")
            body = args[1] if len(args) == 2 else cat(*args[1:])
            return cat(body, sign(args[0], body))
        if name not in ARITY:
            raise _err(op, f"unknown constructor '{name}'")
        try:
            return app(name, *args)
        except TermError as e:
            raise _err(op, str(e)) from None


def parse_term(text, line=1, file=""):
    toks = _tokens(text, line, 0, file)
    tp = _TermParser(toks, {})
    t = tp.term()
    if tp.peek() is not None:
        raise _err(tp.peek(), "trailing text after term")
    return t


def _parse_terms(toks, positions):
    tp = _TermParser(toks, positions)
    out = []
    while tp.peek() is not None:
        out.append(tp.term())
    return out


def fill_domain(t, dom):
    def f(x):
        if x.op == "item" and x.domain == HOLE:
            return item(x.name, dom, x.profile)
        return x

    return map_leaves(t, f)


def _holes(t):
    return [x for _, x in leaves(t) if x.op == "item" and x.domain == HOLE]


# formulas -------------------------------------------------------------------------


class _FormulaParser:
    def __init__(self, toks, positions):
        self.toks = toks
        self.i = 0
        self.positions = positions
        self.bound = []
        self.ctx_refs = []  # (domain, Tok) for later resolution

    def peek(self):
        return self.toks[self.i].text if self.i < len(self.toks) else None

    def next(self, what):
        if self.i >= len(self.toks):
            last = self.toks[-1]
            raise ParseError(f"expected {what}, found end of formula", last.line, last.col + len(last.text), last.file)
        t = self.toks[self.i]
        self.i += 1
        return t

    def parse(self):
        f = self.disj()
        if self.i < len(self.toks):
            raise _err(self.toks[self.i], f"unexpected '{self.toks[self.i].text}'")
        return f

    def disj(self):
        f = self.conj()
        while self.peek() == "|":
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.peek() == "&":
            self.i += 1
            f = And(f, self.unary())
        return f

    def unary(self):
        t = self.next("a formula")
        if t.text == "!":
            return Not(self.unary())
        if t.text == "(":
            f = self.disj()
            c = self.next("')'")
            if c.text != ")":
                raise _err(c, "expected ')'")
            return f
        if t.text == "exists":
            v = self.next("a domain variable")
            if not _IDENT_RE.match(v.text):
                raise _err(v, "expected a domain variable")
            if v.text in self.bound:
                raise _err(v, f"variable {v.text} is already bound")
            c = self.next("':'")
            if c.text != ":":
                raise _err(c, "expected ':' after the bound variable")
            self.bound.append(v.text)
            body = self.unary() if self.peek() in ("(", "!", "exists") else self.conj()
            self.bound.pop()
            return Exists(v.text, body)
        if t.text == "detect":
            coal = self.coalition()
            x = self.next("an item")
            if x.text.endswith("@*"):
                var = x.text[:-2]
                if not _IDENT_RE.match(var):
                    raise _err(x, f"malformed variable '{var}'")
                return DetectAny(coal, var)
            leaf = _TermParser([x], self.positions).leaf(x)
            if leaf.domain == HOLE:
                raise _err(x, "item needs a domain")
            return Detect(coal, leaf)
        if t.text == "assoc":
            coal = self.coalition()
            return Assoc(coal, self.context(), self.context())
        raise _err(t, f"unexpected '{t.text}'")

    def coalition(self):
        t = self.next("a coalition {a,b}")
        if not (t.text.startswith("{") and t.text.endswith("}")):
            raise _err(t, "expected a coalition like {a,b}")
        names = [s.strip() for s in t.text[1:-1].split(",")]
        if not names or not all(_IDENT_RE.match(n) for n in names):
            raise _err(t, "malformed coalition")
        return tuple(sorted(set(names)))

    def context(self):
        t = self.next("a context dom.profile")
        parts = t.text.split(".")
        if len(parts) != 2 or not all(_IDENT_RE.match(p) for p in parts):
            raise _err(t, f"malformed context '{t.text}' (expected dom.profile)")
        if parts[0] not in self.bound:
            self.ctx_refs.append((parts[0], t))
        return parts[0], parts[1]


def parse_formula(text, line=1, file=""):
    fp = _FormulaParser(_tokens(text, line, 0, file), {})
    return fp.parse()


# scenario -----------------------------------------------------------------------


def parse_scenario(source=None, text=None, validate=True):
    """Parse a scenario directory, a single file, a list of files, or text."""
    src = []
    if text is not None:
        src = _read_lines(text=text)
    else:
        paths = source
        if isinstance(source, (str, Path)):
            p = Path(source)
            if p.is_dir():
                order = ["model", "initial", "trace", "requirements"]
                files = sorted(p.glob("*.pls"), key=lambda f: (order.index(f.stem) if f.stem in order else 9, f.name))
                if not files:
                    raise ParseError(f"no .pls files in {p}", 0, 0, str(p))
                paths = files
            else:
                paths = [p]
        for f in paths:
            src.extend(_read_lines(f))
    return _Builder(_logical_lines(src)).build(validate)


class _Builder:
    def __init__(self, sections):
        self.sections = sections
        self.meta = {}
        self.entities = {}  # name -> Tok
        self.actors = []
        self.domains = []
        self.info = {}  # name -> (kind, subject, per_domain, Tok)
        self.classes = {}  # atom -> class
        self.explicit = {}  # item -> atom
        self.patterns = {}  # (var, profile) -> atom
        self.props = []
        self.knowledge = {}  # actor -> list of terms
        self.phases = {}  # name -> [(kind, a, b, payload, Tok)]
        self.trace = []  # (Transmission, Tok)
        self.reqs = []
        self.positions = {}  # leaf -> Tok of first use
        self.ctx_refs = []

    def build(self, validate):
        order = {"meta": 0, "entities": 1, "actors": 2, "domains": 3, "info": 4, "contents": 5,
                 "ctx": 6, "props": 7, "initial": 8, "phase": 9, "trace": 10, "requirements": 11}
        once = set()
        for name, arg, head, lines in sorted(self.sections, key=lambda s: order[s[0]]):
            key = (name, arg)
            # list sections may be split over files; meta, trace and a phase may not
            if key in once and name in ("meta", "trace", "phase"):
                raise _err(head, f"duplicate section [{name}{' ' + arg if arg else ''}]")
            once.add(key)
            getattr(self, "_sec_" + name)(arg, lines, head)
        return self._finish(validate)

    # sections

    def _sec_meta(self, arg, lines, head):
        for ln in lines:
            k, sep, v = ln.raw.partition(":")
            k = k.strip()
            if not sep or k not in ("name", "description"):
                raise ParseError("expected 'name: ...' or 'description: ...'", ln.line, 1, ln.file)
            if k in self.meta:
                raise ParseError(f"duplicate {k}", ln.line, 1, ln.file)
            self.meta[k] = v.strip()

    def _names(self, lines):
        for ln in lines:
            for t in ln.toks:
                if not _IDENT_RE.match(t.text):
                    raise _err(t, f"malformed name '{t.text}'")
                yield t

    def _sec_entities(self, arg, lines, head):
        for t in self._names(lines):
            if t.text in self.entities:
                raise _err(t, f"duplicate entity {t.text}")
            self.entities[t.text] = t

    def _sec_actors(self, arg, lines, head):
        for t in self._names(lines):
            if t.text not in self.entities:
                raise _err(t, f"actor {t.text} is not a declared entity", ResolutionError)
            if t.text in self.actors:
                raise _err(t, f"duplicate actor {t.text}")
            self.actors.append(t.text)

    def _sec_domains(self, arg, lines, head):
        for t in self._names(lines):
            if t.text in self.domains:
                raise _err(t, f"duplicate domain {t.text}")
            self.domains.append(t.text)

    def _sec_info(self, arg, lines, head):
        for ln in lines:
            ts = ln.toks
            if len(ts) not in (3, 4) or (len(ts) == 4 and ts[3].text != "per-domain"):
                raise ParseError("expected 'name kind subject [per-domain]'", ln.line, 1, ln.file)
            name, kind, subj = ts[0], ts[1], ts[2]
            if not _IDENT_RE.match(name.text):
                raise _err(name, f"malformed name '{name.text}'")
            if name.text in self.info or name.text in self.entities:
                raise _err(name, f"duplicate atom {name.text}")
            if kind.text not in ("identifier", "data", "nonpersonal"):
                raise _err(kind, f"unknown kind '{kind.text}'")
            s = None if subj.text == "-" else subj.text
            if kind.text == "nonpersonal" and s is not None:
                raise _err(subj, "non-personal atoms take '-' as subject")
            if kind.text != "nonpersonal" and s not in self.entities:
                raise _err(subj, f"unknown subject entity '{subj.text}'", ResolutionError)
            self.info[name.text] = (kind.text, s, len(ts) == 4, name)

    def _atom_tok(self, t):
        if t.text not in self.info and t.text not in self.entities:
            raise _err(t, f"unknown atom '{t.text}'", ResolutionError)
        return t.text

    def _label(self, ln):
        ts = ln.toks
        if len(ts) < 2 or ts[1].text != ":":
            raise ParseError("expected 'name: ...'", ln.line, 1, ln.file)
        return ts[0], ts[2:]

    def _sec_contents(self, arg, lines, head):
        for ln in lines:
            cls, rest = self._label(ln)
            if not _IDENT_RE.match(cls.text):
                raise _err(cls, f"malformed class name '{cls.text}'")
            for t in rest:
                a = self._atom_tok(t)
                if a in self.entities:
                    raise _err(t, "entities have no contents class")
                if a in self.classes:
                    raise _err(t, f"atom {a} already has a contents class")
                self.classes[a] = cls.text

    def _sec_ctx(self, arg, lines, head):
        for ln in lines:
            at, rest = self._label(ln)
            a = self._atom_tok(at)
            if a in self.info and self.info[a][2]:
                raise _err(at, "per-domain atoms are mapped automatically")
            for t in rest:
                mt = _LEAF_RE.match(t.text)
                if not mt or not mt.group("dom"):
                    raise _err(t, f"malformed item '{t.text}'")
                prof = mt.group("prof") or NP
                if mt.group("dom") == "*":
                    key = (mt.group("var"), prof)
                    if key in self.patterns:
                        raise _err(t, f"duplicate pattern {t.text}")
                    self.patterns[key] = a
                    continue
                x = item(mt.group("var"), mt.group("dom"), prof)
                if x in self.explicit:
                    raise _err(t, f"item {format_item(x)} declared twice")
                self.explicit[x] = a
                self.positions.setdefault(x, t)

    def _sec_props(self, arg, lines, head):
        for ln in lines:
            ts = ln.toks
            if len(ts) != 5 or ts[1].text != ":" or ts[3].text != "->":
                raise ParseError("expected 'name: src -> dst'", ln.line, 1, ln.file)
            for t in (ts[0], ts[2], ts[4]):
                if not _IDENT_RE.match(t.text):
                    raise _err(t, f"malformed name '{t.text}'")
            self.props.append(Property(ts[0].text, ts[2].text, ts[4].text))

    def _sec_initial(self, arg, lines, head):
        if arg != "*" and arg not in self.actors:
            raise _err(head, f"[initial {arg}]: {arg} is not an actor", ResolutionError)
        who = self.actors if arg == "*" else [arg]
        for ln in lines:
            for t in _parse_terms(ln.toks, self.positions):
                if _holes(t):
                    raise _err(self.positions[_holes(t)[0]], "item without a domain outside a phase", ResolutionError)
                for a in who:
                    self.knowledge.setdefault(a, []).append(t)

    def _transmission(self, ln):
        ts = ln.toks
        if not ts or ts[0].text not in KINDS:
            raise _err(ts[0], f"expected send, zk or icred, found '{ts[0].text}'")
        arrow = "->" if ts[0].text == "send" else "<->"
        if len(ts) < 6 or ts[2].text != arrow or ts[4].text != ":":
            bad = ts[2] if len(ts) > 2 and ts[2].text != arrow else ts[min(4, len(ts) - 1)]
            raise _err(bad, f"expected '{ts[0].text} a {arrow} b : term'")
        a = _TermParser([ts[1]], self.positions).leaf(ts[1])
        b = _TermParser([ts[3]], self.positions).leaf(ts[3])
        body = _parse_terms(ts[5:], self.positions)
        if len(body) != 1:
            # several messages are sent as one concatenation
            payload = cat(*body)
        else:
            payload = body[0]
        return ts[0].text, a, b, payload, ts[0]

    def _sec_phase(self, arg, lines, head):
        if arg in self.phases:
            raise _err(head, f"duplicate phase {arg}")
        self.phases[arg] = [self._transmission(ln) for ln in lines]

    def _make(self, kind, a, b, payload, tok, label):
        try:
            return Transmission(kind, a, b, payload, label)
        except ValueError as e:
            raise _err(tok, str(e)) from None

    def _sec_trace(self, arg, lines, head):
        for ln in lines:
            ts = ln.toks
            if ts[0].text == "run":
                if len(ts) != 3:
                    raise _err(ts[0], "expected 'run PHASE DOMAIN'")
                ph, dom = ts[1], ts[2]
                if ph.text not in self.phases:
                    raise _err(ph, f"unknown phase '{ph.text}'", ResolutionError)
                if dom.text not in self.domains:
                    raise _err(dom, f"unknown domain '{dom.text}'", ResolutionError)
                for j, (k, a, b, m, tok) in enumerate(self.phases[ph.text], 1):
                    a, b, m = (fill_domain(x, dom.text) for x in (a, b, m))
                    for x in (a, b, m):
                        for _, leaf in leaves(x):
                            if leaf.op == "item":
                                self.positions.setdefault(leaf, tok)
                    label = f"{ph.text}@{dom.text}:{j}"
                    self.trace.append((self._make(k, a, b, m, tok, label), tok))
                continue
            k, a, b, m, tok = self._transmission(ln)
            for x in (a, b, m):
                if _holes(x):
                    raise _err(self.positions[_holes(x)[0]], "item without a domain outside a phase", ResolutionError)
            self.trace.append((self._make(k, a, b, m, tok, f"{len(self.trace) + 1}"), tok))

    def _sec_requirements(self, arg, lines, head):
        names = set()
        for ln in lines:
            lab, rest = self._label(ln)
            if lab.text in names:
                raise _err(lab, f"duplicate requirement {lab.text}")
            names.add(lab.text)
            if not rest:
                raise ParseError("empty formula", ln.line, lab.col, ln.file)
            fp = _FormulaParser(rest, self.positions)
            f = fp.parse()
            self.ctx_refs.extend(fp.ctx_refs)
            self.reqs.append(Requirement(lab.text, f))

    # resolution

    def _resolve(self, x, tok):
        if x in self.explicit:
            return self.explicit[x]
        a = self.patterns.get((x.name, x.profile))
        if a is not None:
            return a
        if x.domain not in self.domains:
            raise _err(tok, f"unknown domain '{x.domain}' in {format_item(x)}", ResolutionError)
        inf = self.info.get(x.name)
        if inf is None:
            raise _err(tok, f"cannot resolve item {format_item(x)}: no atom named {x.name}", ResolutionError)
        if inf[2]:
            return f"{x.name}_{x.domain}"
        return x.name

    def _finish(self, validate):
        atoms = {e: Atom(e, "entity", None, e) for e in self.entities}
        for name, (kind, subj, per, tok) in self.info.items():
            if not per:
                atoms[name] = Atom(name, kind, subj, self.classes.get(name, name))
        sigma = {}
        leaves_ = set(self.explicit) | set(self.positions)
        todo = sorted(leaves_)
        while todo:
            x = todo.pop()
            if x in sigma or x.domain == HOLE:
                continue
            tok = self.positions.get(x, Tok(format_item(x), 0, 0))
            a = self._resolve(x, tok)
            if a not in atoms:
                base = self.info.get(x.name)
                if base and base[2] and a == f"{x.name}_{x.domain}":
                    if a in self.info or a in self.entities:
                        raise _err(tok, f"per-domain atom {a} clashes with a declared atom", ResolutionError)
                    atoms[a] = Atom(a, base[0], base[1], a)
                else:
                    raise _err(tok, f"unknown atom '{a}'", ResolutionError)
            sigma[x] = a
            # property images exist in every context of their source
            for p in self.props:
                if p.src == x.name:
                    img = item(p.dst, x.domain, x.profile)
                    if img not in sigma:
                        self.positions.setdefault(img, tok)
                        todo.append(img)
        for dom, tok in self.ctx_refs:
            if dom not in self.domains:
                raise _err(tok, f"unknown domain '{dom}'", ResolutionError)
        model = InfoModel(atoms, sigma, list(self.props), tuple(self.actors), tuple(self.domains),
                          self.meta.get("name", ""))
        trace = tuple(t for t, _ in self.trace)
        for t, tok in self.trace:
            for addr in (t.sender, t.receiver):
                if model.kind(addr) != "identifier":
                    raise _err(tok, f"address {format_item(addr)} is not an identifier", ResolutionError)
        knowledge = {a: frozenset(self.knowledge.get(a, ())) for a in self.actors}
        if validate:
            terms = [m for ts in knowledge.values() for m in ts if not model.is_entity(m)]
            for t in trace:
                terms += [t.sender, t.receiver, t.payload]
            bad = validate_model(model, terms)
            if bad:
                raise ModelInvalid(bad)
        return ScenarioBundle(
            self.meta.get("name", ""), self.meta.get("description", ""), model, knowledge, trace,
            RequirementSuite(tuple(self.reqs)),
        )


# printing -------------------------------------------------------------------------


def format_formula(f):
    if isinstance(f, Detect):
        return f"detect {{{','.join(f.coalition)}}} {format_item(f.item)}"
    if isinstance(f, DetectAny):
        return f"detect {{{','.join(f.coalition)}}} {f.var}@*"
    if isinstance(f, Assoc):
        c1, c2 = (f"{d}.{p}" for d, p in (f.ctx1, f.ctx2))
        return f"assoc {{{','.join(f.coalition)}}} {c1} {c2}"
    if isinstance(f, Not):
        return "!" + _wrap(f.body)
    if isinstance(f, And):
        return f"({format_formula(f.left)} & {format_formula(f.right)})"
    if isinstance(f, Or):
        return f"({format_formula(f.left)} | {format_formula(f.right)})"
    if isinstance(f, Exists):
        body = format_formula(f.body)
        if not isinstance(f.body, (And, Or)):
            body = f"({body})"
        return f"exists {f.var}: {body}"
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f):
    s = format_formula(f)
    if isinstance(f, Exists):
        return f"({s})"
    return s


def format_transmission(t):
    arrow = "->" if t.kind == "send" else "<->"
    return f"{t.kind} {format_item(t.sender)} {arrow} {format_item(t.receiver)} : {format_term(t.payload)}"


def format_bundle(b):
    """A single-file rendering of ``b`` that parses back to an equal bundle."""
    m = b.model
    out = [HEADER, "", "[meta]"]
    if b.name:
        out.append(f"name: {b.name}")
    if b.description:
        out.append(f"description: {b.description}")
    ents = sorted(a.name for a in m.atoms.values() if a.kind == "entity")
    out += ["", "[entities]", " ".join(ents), "", "[actors]", " ".join(m.actors),
            "", "[domains]", " ".join(m.domains), "", "[info]"]
    others = sorted((a for a in m.atoms.values() if a.kind != "entity"), key=lambda a: a.name)
    for a in others:
        out.append(f"{a.name} {a.kind} {a.subject or '-'}")
    groups = {}
    for a in others:
        if a.cls != a.name:
            groups.setdefault(a.cls, []).append(a.name)
    if groups:
        out += ["", "[contents]"]
        out += [f"{c}: {' '.join(names)}" for c, names in sorted(groups.items())]
    out += ["", "[ctx]"]
    by_atom = {}
    for x in sorted(m.sigma):
        by_atom.setdefault(m.sigma[x], []).append(format_item(x))
    out += [f"{a}: {' '.join(xs)}" for a, xs in sorted(by_atom.items())]
    if m.properties:
        out += ["", "[props]"] + [f"{p.name}: {p.src} -> {p.dst}" for p in m.properties]
    for a in m.actors:
        ts = sorted(b.knowledge.get(a, ()))
        out += ["", f"[initial {a}]"] + [format_term(t) for t in ts]
    out += ["", "[trace]"] + [format_transmission(t) for t in b.trace]
    out += ["", "[requirements]"] + [f"{r.name}: {format_formula(r.formula)}" for r in b.suite]
    return "\n".join(out) + "\n"
