"""Datalog terms, atoms, relational patterns and sequences, plus OI subsumption.

Two matching problems share one backtracking engine:

* pattern over sequence: the pattern's atoms must map into the sequence's
  ground atoms and its dimensional atoms must hold on the event orders;
* pattern over pattern (theta_OI-subsumption): the pattern's atoms and
  dimensional atoms must map into the other pattern's atom set.

Under Object Identity every substitution is injective and never binds a
variable to a constant that already occurs in the pattern being matched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .errors import EvaluationError, MalformedSequenceError

VARIABLE = "variable"
CONSTANT = "constant"

NEXT = "next"
AFTER = "after"
NSTEP = "nstep"
DIM_OPS = (NEXT, AFTER, NSTEP)

_DIM_KEY = "\0dim"


@dataclass(frozen=True, slots=True)
class Term:
    kind: str
    name: str

    def __post_init__(self):
        if self.kind not in (VARIABLE, CONSTANT):
            raise ValueError(f"bad term kind {self.kind!r}")

    @property
    def is_var(self) -> bool:
        return self.kind == VARIABLE

    def __str__(self):
        return self.name

    def __repr__(self):
        return f"{'Var' if self.is_var else 'Const'}({self.name})"


def var(name: str) -> Term:
    return Term(VARIABLE, name)


def const(name: str) -> Term:
    return Term(CONSTANT, name)


def is_variable_name(name: str) -> bool:
    return name[:1].isupper() or name[:1] == "_"


def term(name: str) -> Term:
    """Build a term from a token: uppercase or ``_`` initial means variable."""
    return var(name) if is_variable_name(name) else const(name)


@dataclass(frozen=True, slots=True)
class Atom:
    predicate: str
    args: tuple = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self):
        return (self.predicate, len(self.args))

    def __str__(self):
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(a.name for a in self.args)})"


def atom(predicate: str, *args: str) -> Atom:
    """Shorthand: ``atom("f", "E1", "a")`` is ``f(E1,a)``."""
    return Atom(predicate, tuple(term(a) for a in args))


@dataclass(frozen=True, slots=True)
class DimAtom:
    """``next`` is the direct successor, ``after`` its transitive closure,
    ``nstep`` the ``steps``-th successor, all on dimension ``dim``."""

    op: str
    dim: int
    src: Term
    dst: Term
    steps: int = 1

    def __post_init__(self):
        if self.op not in DIM_OPS:
            raise ValueError(f"unknown dimensional operator {self.op!r}")
        if self.dim < 1:
            raise ValueError("dimension must be a positive integer")
        if self.steps < 1:
            raise ValueError("nstep needs a positive step count")
        if self.op != NSTEP and self.steps != 1:
            raise ValueError(f"{self.op} takes no step count")

    @property
    def key(self):
        return (_DIM_KEY, self.op, self.dim, self.steps)

    @property
    def args(self):
        return (self.src, self.dst)

    def __str__(self):
        if self.op == NSTEP:
            return f"nstep({self.dim},{self.steps},{self.src},{self.dst})"
        return f"{self.op}({self.dim},{self.src},{self.dst})"


def dim_atom(op: str, dim: int, src: str, dst: str, steps: int = 1) -> DimAtom:
    return DimAtom(op, dim, term(src), term(dst), steps)


@dataclass(frozen=True, slots=True)
class Pattern:
    """A conjunction of non-dimensional atoms and dimensional atoms.

    Atom order is kept (the first atom is the starting literal the ``key``
    constraint looks at) but matching treats both parts as sets.
    """

    atoms: tuple = ()
    dims: tuple = ()

    @property
    def length(self) -> int:
        return len(self.atoms)

    @property
    def size(self) -> int:
        return len(self.atoms) + len(self.dims)

    def goals(self):
        return self.atoms + self.dims

    def terms(self) -> list:
        seen = {}
        for g in self.goals():
            for t in g.args:
                seen.setdefault(t, None)
        return list(seen)

    def variables(self) -> list:
        return [t for t in self.terms() if t.is_var]

    def constants(self) -> list:
        return [t for t in self.terms() if not t.is_var]

    def with_atom(self, a: Atom) -> "Pattern":
        return Pattern(self.atoms + (a,), self.dims)

    def with_dim(self, d: DimAtom) -> "Pattern":
        return Pattern(self.atoms, self.dims + (d,))

    def is_well_formed(self) -> bool:
        """Every dimensional atom starts at the event of some atom."""
        starts = {a.args[0] for a in self.atoms if a.args}
        return all(d.src in starts for d in self.dims)

    def same_set(self, other: "Pattern") -> bool:
        return set(self.atoms) == set(other.atoms) and set(self.dims) == set(other.dims)

    def __str__(self):
        parts = [str(g) for g in self.goals()]
        return ", ".join(parts) if parts else "true"


@dataclass(frozen=True)
class RelationalSequence:
    id: str
    fluents: frozenset = frozenset()
    statics: frozenset = frozenset()
    orders: Mapping = field(default_factory=dict, hash=False)

    def events(self) -> set:
        return {e for order in self.orders.values() for e in order}

    def validate(self) -> None:
        for d, order in self.orders.items():
            if len(set(order)) != len(order):
                dup = next(e for e in order if order.count(e) > 1)
                raise MalformedSequenceError(
                    f"sequence {self.id}: event {dup} repeated in order {d}")
        events = self.events()
        for f in self.fluents:
            if not f.args or f.args[0].name not in events:
                ev = f.args[0].name if f.args else "?"
                raise MalformedSequenceError(f"sequence {self.id}: unknown event {ev} in {f}")


Substitution = Mapping[str, Term]


def _subst_term(t: Term, theta) -> Term:
    if t.is_var:
        return theta.get(t.name, t)
    return t


def apply_substitution(e: Union[Atom, DimAtom, Pattern], theta: Substitution):
    """Replace every variable bound in ``theta`` (keyed by variable name)."""
    if isinstance(e, Atom):
        return Atom(e.predicate, tuple(_subst_term(t, theta) for t in e.args))
    if isinstance(e, DimAtom):
        return DimAtom(e.op, e.dim, _subst_term(e.src, theta), _subst_term(e.dst, theta), e.steps)
    if isinstance(e, Pattern):
        return Pattern(tuple(apply_substitution(a, theta) for a in e.atoms),
                       tuple(apply_substitution(d, theta) for d in e.dims))
    raise TypeError(f"cannot substitute into {type(e).__name__}")


class _FactStore:
    """Ground tuples per goal key, with per-argument postings."""

    def __init__(self):
        self.facts = {}
        self.postings = {}

    def add(self, key, args: tuple) -> None:
        self.facts.setdefault(key, []).append(args)
        for i, t in enumerate(args):
            self.postings.setdefault((key, i, t), []).append(args)

    def lookup(self, key, bound: tuple) -> list:
        best = None
        for i, b in enumerate(bound):
            if b is not None:
                lst = self.postings.get((key, i, b))
                if lst is None:
                    return []
                if best is None or len(lst) < len(best):
                    best = lst
        if best is None:
            return self.facts.get(key, [])
        return [tup for tup in best
                if all(b is None or b == v for b, v in zip(bound, tup))]


class EventIndex(_FactStore):
    """Successor and position tables per dimension, plus the ground atoms of
    the sequence indexed by predicate and argument."""

    def __init__(self, orders: Mapping, n_dims: Optional[int] = None):
        super().__init__()
        self.n_dims = n_dims if n_dims is not None else max(orders, default=0)
        self.order = {}
        self.position = {}
        self.successor = {}
        for d, events in orders.items():
            seq = tuple(const(e) for e in events)
            pos = {}
            for i, e in enumerate(seq):
                if e in pos:
                    raise MalformedSequenceError(f"event {e} repeated in order {d}")
                pos[e] = i
            self.order[d] = seq
            self.position[d] = pos
            self.successor[d] = {seq[i]: seq[i + 1] for i in range(len(seq) - 1)}

    def successor_of(self, dim: int, event: str) -> Optional[str]:
        nxt = self.successor.get(dim, {}).get(const(event))
        return None if nxt is None else nxt.name

    def position_of(self, dim: int, event: str) -> Optional[int]:
        return self.position.get(dim, {}).get(const(event))

    def lookup(self, key, bound):
        if key[0] != _DIM_KEY:
            return super().lookup(key, bound)
        _, op, dim, steps = key
        seq = self.order.get(dim, ())
        pos = self.position.get(dim, {})
        src, dst = bound
        n = len(seq)
        if op == AFTER:
            if src is not None:
                i = pos.get(src)
                if i is None:
                    return []
                if dst is not None:
                    j = pos.get(dst)
                    return [(src, dst)] if j is not None and j > i else []
                return [(src, e) for e in seq[i + 1:]]
            if dst is not None:
                j = pos.get(dst)
                return [] if j is None else [(e, dst) for e in seq[:j]]
            return [(seq[i], seq[j]) for i in range(n) for j in range(i + 1, n)]
        k = steps
        if src is not None:
            i = pos.get(src)
            if i is None or i + k >= n:
                return []
            if dst is not None and seq[i + k] != dst:
                return []
            return [(src, seq[i + k])]
        if dst is not None:
            j = pos.get(dst)
            if j is None or j - k < 0:
                return []
            return [(seq[j - k], dst)]
        return [(seq[i], seq[i + k]) for i in range(n - k)]


def build_event_index(s: RelationalSequence, n_dims: Optional[int] = None) -> EventIndex:
    idx = EventIndex(s.orders, n_dims)
    events = s.events()
    for f in s.fluents:
        if not f.args or f.args[0].name not in events:
            raise MalformedSequenceError(f"sequence {s.id}: unknown event in {f}")
        idx.add(f.key, f.args)
    for a in s.statics:
        idx.add(a.key, a.args)
    return idx


def _search(goals: list, store, bindings: dict, used: set) -> bool:
    if not goals:
        return True
    best = None
    for gi, g in enumerate(goals):
        bound = tuple(bindings.get(a) if a.is_var else a for a in g.args)
        cands = store.lookup(g.key, bound)
        if not cands:
            return False
        if best is None or len(cands) < len(best[2]):
            best = (gi, bound, cands)
            if len(cands) == 1:
                break
    gi, bound, cands = best
    args = goals[gi].args
    rest = goals[:gi] + goals[gi + 1:]
    for tup in cands:
        fresh = []
        ok = True
        for a, b, v in zip(args, bound, tup):
            if b is not None:
                continue
            cur = bindings.get(a)
            if cur is not None:
                if cur != v:
                    ok = False
                    break
                continue
            if v in used:
                ok = False
                break
            bindings[a] = v
            used.add(v)
            fresh.append(a)
        if ok and _search(rest, store, bindings, used):
            return True
        for a in fresh:
            used.discard(bindings.pop(a))
    return False


def _solve(p: Pattern, store) -> Optional[dict]:
    bindings = {}
    if _search(list(p.goals()), store, bindings, set(p.constants())):
        return {v.name: t for v, t in bindings.items()}
    return None


def find_sequence_substitution(p: Pattern, s: RelationalSequence,
                               idx: Optional[EventIndex] = None) -> Optional[dict]:
    """Return an OI-admissible grounding substitution of ``p`` into ``s``, or None."""
    if idx is None:
        idx = build_event_index(s)
    for d in p.dims:
        if d.dim > idx.n_dims:
            raise EvaluationError(
                f"{d} refers to dimension {d.dim}; only {idx.n_dims} declared")
    return _solve(p, idx)


def subsumes_sequence(p: Pattern, s: RelationalSequence,
                      idx: Optional[EventIndex] = None) -> bool:
    return find_sequence_substitution(p, s, idx) is not None


def pattern_store(q: Pattern) -> _FactStore:
    store = _FactStore()
    for g in q.goals():
        store.add(g.key, g.args)
    return store


def find_pattern_substitution(p: Pattern, q: Pattern) -> Optional[dict]:
    if len(p.atoms) > len(q.atoms) or len(p.dims) > len(q.dims):
        return None
    return _solve(p, pattern_store(q))


def oi_subsumes_pattern(p: Pattern, q: Pattern) -> bool:
    """True iff some injective theta maps every atom of ``p`` into ``q``."""
    return find_pattern_substitution(p, q) is not None


def oi_equivalent(p: Pattern, q: Pattern) -> bool:
    if len(p.atoms) != len(q.atoms) or len(p.dims) != len(q.dims):
        return False
    return oi_subsumes_pattern(p, q) and oi_subsumes_pattern(q, p)


def signature(p: Pattern) -> tuple:
    """A renaming-invariant fingerprint; OI-equivalent patterns share it."""
    def shape(g):
        return tuple("" if t.is_var else "=" + t.name for t in g.args)
    return (tuple(sorted((a.predicate, shape(a)) for a in p.atoms)),
            tuple(sorted((d.op, d.dim, d.steps, shape(d)) for d in p.dims)),
            len(p.variables()))


def dedupe_equivalent(patterns: Iterable) -> list:
    """Drop later patterns OI-equivalent to an earlier one (first wins).

    Items may be patterns or objects with a ``pattern`` attribute.
    """
    buckets = {}
    kept = []
    for item in patterns:
        p = getattr(item, "pattern", item)
        bucket = buckets.setdefault(signature(p), [])
        if any(oi_equivalent(p, q) for q in bucket):
            continue
        bucket.append(p)
        kept.append(item)
    return kept
