"""System states, message transmissions, evolution and trace validity."""
from dataclasses import dataclass, field

from .deduction import KnowledgeBase, deducer
from .terms import NP, cat, leaves, pk, subterms, substitute
from .views import context_partition

KINDS = ("send", "zk", "icred")


class AddressNotOwned(ValueError):
    pass


@dataclass(frozen=True)
class Transmission:
    kind: str  # send | zk | icred
    sender: object  # address item of the initiator
    receiver: object
    payload: object
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown transmission type {self.kind}")
        if self.kind == "zk" and self.payload.op != "zk":
            raise ValueError("zk transmission needs a zk payload")
        if self.kind == "icred" and self.payload.op != "icred":
            raise ValueError("icred transmission needs an icred payload")


@dataclass(frozen=True)
class State:
    model: object = field(repr=False, compare=False)
    kbs: dict  # actor -> KnowledgeBase
    version: int = 0

    def __hash__(self):
        return hash((self.version, tuple(sorted((a, kb.items) for a, kb in self.kbs.items()))))

    def kb(self, actor):
        return self.kbs[actor]

    @classmethod
    def initial(cls, model, knowledge):
        kbs = {a: KnowledgeBase(model, a, frozenset(knowledge.get(a, ()))) for a in model.actors}
        return cls(model, kbs, 0)


def parties(state, t):
    """The actors owning the sender and receiver addresses."""
    model = state.model
    out = []
    for addr in (t.sender, t.receiver):
        try:
            subj = model.subject(addr)
        except KeyError:
            raise AddressNotOwned(f"address {addr} is not in the model") from None
        if subj not in state.kbs:
            raise AddressNotOwned(f"address {addr} belongs to {subj}, which is not an actor")
        out.append(subj)
    return tuple(out)


def evolve_step(state, t):
    a, b = parties(state, t)
    new = frozenset((t.sender, t.receiver, t.payload))
    kbs = dict(state.kbs)
    for z in {a, b}:
        kb = kbs[z]
        kbs[z] = KnowledgeBase(state.model, z, kb.items | new)
    return State(state.model, kbs, state.version + 1)


@dataclass(frozen=True)
class PartyCheck:
    party: str
    actor: str
    message: object
    witness: object  # witness term or None
    missing: tuple = ()  # components that are not determinable on their own

    @property
    def ok(self):
        return self.witness is not None


@dataclass(frozen=True)
class StepReport:
    index: int
    transmission: Transmission
    checks: tuple

    @property
    def ok(self):
        return all(c.ok for c in self.checks)


def evolve(state, trace, check_validity=True, profile_scope="domain"):
    """Fold the trace over ``state``; optionally validate each step in its pre-state."""
    reports = []
    for i, t in enumerate(trace):
        if check_validity:
            reports.append(transmission_valid(state, t, i, profile_scope))
        state = evolve_step(state, t)
    return state, reports


def determined_items(state):
    model = state.model
    out = set()
    for kb in state.kbs.values():
        for m in kb.items:
            if model.is_entity(m):
                continue
            for _, x in subterms(m):
                if x.is_item:
                    out.add(x)
                    out.update(model.psi_closure(x))
    return out


def shared_profiles(model):
    """{profile label: domains} for labels used in more than one domain.

    Such labels are harmless under the default per-domain reading of "same
    profile" but change the meaning of ``profile_scope="global"``.
    """
    doms = {}
    for d, p in model.contexts():
        doms.setdefault(p, []).append(d)
    return {p: ds for p, ds in sorted(doms.items()) if len(ds) > 1}


def required_messages(t):
    """(initiator message, responder message or None) that must be determinable."""
    a, b, m = t.sender, t.receiver, t.payload
    if t.kind == "send":
        return cat(a, b, m), None
    if t.kind == "zk":
        m1, _, _, r = m.args
        if r.op != "cat" or len(r.args) != 2:
            raise ValueError("zk randomness must be a pair (prover, verifier)")
        return cat(a, b, m1, r.args[0]), r.args[1]
    user, key, attrs, r = m.args
    if r.op != "cat" or len(r.args) != 7:
        raise ValueError("icred randomness must have seven parts")
    n = r.args
    return (
        cat(a, b, pk(key), user, n[0], n[1], n[2], n[6]),
        cat(pk(key), key, attrs, n[3], n[4], n[5]),
    )


def transmission_valid(state, t, index=0, profile_scope="domain"):
    a, b = parties(state, t)
    mine, theirs = required_messages(t)
    checks = [_party_check(state, "initiator", a, mine, profile_scope)]
    if theirs is not None:
        checks.append(_party_check(state, "responder", b, theirs, profile_scope))
    return StepReport(index, t, tuple(checks))


def _party_check(state, party, actor, msg, profile_scope):
    w = determinable(state, actor, msg, profile_scope)
    missing = ()
    if w is None:
        parts = msg.args if msg.op == "cat" else (msg,)
        missing = tuple(p for p in parts if determinable(state, actor, p, profile_scope) is None)
    return PartyCheck(party, actor, msg, w, missing)


def determinable(state, actor, m, profile_scope="domain", determined=None):
    """A witness n equivalent to m that ``actor`` can derive and may send in place of m.

    ``profile_scope`` selects how "same profile" is read when relating fresh
    items to items already used: ``"domain"`` looks only in the item's own
    domain, ``"global"`` looks at that profile label in every domain.
    """
    model = state.model
    kb = state.kbs[actor]
    d = deducer(kb)
    uf = context_partition(kb)
    det = determined if determined is not None else determined_items(state)
    det_personal = {}
    for e in det:
        if e.profile != NP and model.kind(e) in ("identifier", "data"):
            key = e.context if profile_scope == "domain" else e.profile
            det_personal.setdefault(key, []).append(e)

    def anchors(p):
        if p.profile == NP:
            return []
        key = p.context if profile_scope == "domain" else p.profile
        return sorted(det_personal.get(key, []))

    def assoc(x, y):
        return uf.find(x.context) == uf.find(y.context)

    pool = set()
    for s in kb.items:
        if model.is_entity(s):
            continue
        for _, x in subterms(s):
            if x.is_item:
                pool.add(x)
                pool.update(model.psi_closure(x))

    order = []
    for _, p in leaves(m):
        if p not in order:
            order.append(p)
    cands = []
    for p in order:
        if p in det:
            opts = [p]
        else:
            info = model.sigma.get(p)
            opts = sorted(x for x in pool | {p} if model.sigma.get(x) == info)
            # a fresh item may only be replaced by one already associated with
            # the determined items of its context
            anc = anchors(p)
            if anc:
                opts = [x for x in opts if all(assoc(x, e) for e in anc)]
        if not opts:
            return None
        cands.append(opts)

    # condition 4 pairs: fresh contexts with several items
    fresh_pairs = []
    for i, p in enumerate(order):
        if p.profile == NP or anchors(p):
            continue
        for j in range(i):
            q = order[j]
            if q.profile != NP and q.context == p.context:
                fresh_pairs.append((j, i))
    pairs_at = {}
    for j, i in fresh_pairs:
        pairs_at.setdefault(i, []).append(j)

    # every part of a derivable concatenation is derivable, so each part can
    # be checked as soon as its last leaf has been chosen
    pos = {p: i for i, p in enumerate(order)}
    parts_at = {}
    for c in _cat_parts(m):
        if c is not m:
            last = max(pos[x] for _, x in leaves(c))
            parts_at.setdefault(last, []).append(c)

    chosen = [None] * len(order)

    def search(i):
        if i == len(order):
            n = substitute(m, dict(zip(order, chosen)))
            return n if d.derivable(n) else None
        for x in cands[i]:
            if all(assoc(x, chosen[j]) for j in pairs_at.get(i, ())):
                chosen[i] = x
                if i in parts_at:
                    sub = dict(zip(order[:i + 1], chosen))
                    if not all(d.derivable(substitute(c, sub)) for c in parts_at[i]):
                        continue
                n = search(i + 1)
                if n is not None:
                    return n
        return None

    return search(0)


def _cat_parts(m):
    """The non-concatenation parts of a (nested) concatenation."""
    if m.op != "cat":
        return [m]
    return [c for a in m.args for c in _cat_parts(a)]
