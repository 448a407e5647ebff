"""Brute-force reference implementations used by the test suite.

Nothing here calls the matcher, the refinement operator or the kernels of
the package; the oracles only share the plain data classes.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from relseq.logic import AFTER, NEXT, NSTEP, Atom, DimAtom, Pattern, Term, const, var

# --- subsumption -------------------------------------------------------------


def _dim_holds(d: DimAtom, src: str, dst: str, orders) -> bool:
    order = list(orders.get(d.dim, ()))
    if src not in order or dst not in order:
        return False
    gap = order.index(dst) - order.index(src)
    if d.op == NEXT:
        return gap == 1
    if d.op == AFTER:
        return gap > 0
    return gap == d.steps


def _ground(t: Term, theta) -> str:
    return theta[t.name] if t.is_var else t.name


def sequence_terms(s) -> list:
    names = set(s.events())
    for a in list(s.fluents) + list(s.statics):
        names.update(t.name for t in a.args)
    return sorted(names)


def _pattern_vars(p: Pattern) -> list:
    seen = []
    for g in list(p.atoms) + list(p.dims):
        for t in g.args:
            if t.is_var and t.name not in seen:
                seen.append(t.name)
    return seen


def _pattern_consts(p: Pattern) -> set:
    return {t.name for g in list(p.atoms) + list(p.dims) for t in g.args if not t.is_var}


def _satisfied(p, theta, facts, orders) -> bool:
    for a in p.atoms:
        if (a.predicate, tuple(_ground(t, theta) for t in a.args)) not in facts:
            return False
    return all(_dim_holds(d, _ground(d.src, theta), _ground(d.dst, theta), orders)
               for d in p.dims)


def brute_subsumes(p: Pattern, s, domains=None) -> bool:
    """Try every injective map of the pattern's variables onto the terms of
    ``s`` that are not constants of the pattern.

    ``domains`` optionally narrows each variable to a superset of the values
    it could possibly take (used only to keep the miner oracle fast).
    """
    facts = {(a.predicate, tuple(t.name for t in a.args))
             for a in list(s.fluents) + list(s.statics)}
    names = _pattern_vars(p)
    consts = _pattern_consts(p)
    universe = [t for t in sequence_terms(s) if t not in consts]
    if domains is None:
        choices = itertools.permutations(universe, len(names))
    else:
        pools = [[t for t in domains[v] if t not in consts] for v in names]
        choices = (c for c in itertools.product(*pools) if len(set(c)) == len(c))
    for combo in choices:
        if _satisfied(p, dict(zip(names, combo)), facts, s.orders):
            return True
    return False


def brute_witnesses(p: Pattern, s):
    """Every OI-admissible grounding substitution, as dicts of names."""
    facts = {(a.predicate, tuple(t.name for t in a.args))
             for a in list(s.fluents) + list(s.statics)}
    names = _pattern_vars(p)
    consts = _pattern_consts(p)
    universe = [t for t in sequence_terms(s) if t not in consts]
    out = []
    for combo in itertools.permutations(universe, len(names)):
        theta = dict(zip(names, combo))
        if _satisfied(p, theta, facts, s.orders):
            out.append(theta)
    return out


def brute_pattern_subsumes(p: Pattern, q: Pattern) -> bool:
    """Injective theta with p.theta a subset of q (variables of q act as
    constants)."""
    target = {str(g) for g in list(q.atoms) + list(q.dims)}
    names = _pattern_vars(p)
    consts = _pattern_consts(p)
    universe = sorted({t for g in list(q.atoms) + list(q.dims) for t in g.args},
                      key=lambda t: (t.is_var, t.name))
    universe = [t for t in universe if t.is_var or t.name not in consts]
    for combo in itertools.permutations(universe, len(names)):
        theta = dict(zip(names, combo))
        ok = True
        for g in list(p.atoms) + list(p.dims):
            args = tuple(theta[t.name] if t.is_var else t for t in g.args)
            if isinstance(g, Atom):
                h = Atom(g.predicate, args)
            else:
                h = DimAtom(g.op, g.dim, args[0], args[1], g.steps)
            if str(h) not in target:
                ok = False
                break
        if ok:
            return True
    return False


# --- canonical form under renaming ---------------------------------------------


def canonical(p: Pattern) -> tuple:
    """Minimum sorted goal rendering over all variable renamings.

    Two patterns get the same key iff they differ only by a renaming, which
    (for equal sizes) is exactly OI-equivalence."""
    names = _pattern_vars(p)
    best = None
    for perm in itertools.permutations(range(len(names))):
        ren = {n: f"_{k}" for n, k in zip(names, perm)}
        goals = []
        for a in p.atoms:
            goals.append((a.predicate,) + tuple(ren.get(t.name, t.name) if t.is_var
                                                else "=" + t.name for t in a.args))
        for d in p.dims:
            goals.append((f"\0{d.op}", str(d.dim), str(d.steps))
                         + tuple(ren.get(t.name, t.name) if t.is_var else "=" + t.name
                                 for t in d.args))
        key = tuple(sorted(goals))
        if best is None or key < best:
            best = key
    return best


# --- exhaustive pattern language ---------------------------------------------------


def _set_partitions(n):
    """Restricted growth strings of length n."""
    def rec(i, acc, top):
        if i == n:
            yield list(acc)
            return
        for b in range(top + 2):
            acc.append(b)
            yield from rec(i + 1, acc, max(top, b))
            acc.pop()
    yield from rec(0, [], -1)


def enumerate_patterns(data, bias, max_dims=1, max_nstep=3):
    """Every pattern of the language (modes limited to '-' and '#'):
    1..maxsize distinct non-dimensional atoms with consistently typed
    variables, plus up to ``max_dims`` (0 or 1) dimensional atoms leaving the
    event of a fluent. Duplicates up to renaming are possible."""
    assert max_dims in (0, 1)
    fluent_preds, present, consts = set(), {}, {}
    for s in data.sequences:
        for a in s.fluents:
            fluent_preds.add(a.predicate)
        for a in list(s.fluents) + list(s.statics):
            present[a.predicate] = len(a.args)
            for i, t in enumerate(a.args):
                consts.setdefault((a.predicate, i), set()).add(t.name)
    templates = []
    for pred in sorted(present):
        types = bias.types[pred]
        modes = bias.modes.get(pred, ("-",) * len(types))
        assert "+" not in modes
        opts = []
        for i, (ty, m) in enumerate(zip(types, modes)):
            if m == "#":
                opts.append([("c", c) for c in sorted(consts.get((pred, i), ()))])
            else:
                opts.append([("v", ty)])
        for combo in itertools.product(*opts):
            templates.append((pred, combo))
    kinds = [(NEXT, 1), (AFTER, 1)] + [(NSTEP, n) for n in range(2, max_nstep + 1)]
    for k in range(1, bias.maxsize + 1):
        for chosen in itertools.combinations_with_replacement(templates, k):
            slots = [(ai, pos, spec[1]) for ai, (_, combo) in enumerate(chosen)
                     for pos, spec in enumerate(combo) if spec[0] == "v"]
            for blocks in _set_partitions(len(slots)):
                vtype = {}
                ok = True
                for (ai, pos, ty), b in zip(slots, blocks):
                    if vtype.setdefault(b, ty) != ty:
                        ok = False
                        break
                if not ok:
                    continue
                assign = {(ai, pos): f"X{b}" for (ai, pos, _), b in zip(slots, blocks)}
                atoms = []
                for ai, (pred, combo) in enumerate(chosen):
                    args = tuple(var(assign[(ai, pos)]) if spec[0] == "v" else const(spec[1])
                                 for pos, spec in enumerate(combo))
                    atoms.append(Atom(pred, args))
                if len(set(atoms)) < k:
                    continue
                base = Pattern(tuple(atoms))
                yield base
                if max_dims == 0 or not data.dimensions:
                    continue
                var_type = {f"X{b}": ty for b, ty in vtype.items()}
                srcs = sorted({a.args[0].name for a in atoms
                               if a.predicate in fluent_preds and a.args[0].is_var})
                for src in srcs:
                    dsts = [v for v, ty in var_type.items()
                            if v != src and ty == var_type[src]] + ["Z"]
                    for dim in range(1, data.dimensions + 1):
                        for op, steps in kinds:
                            for dst in dsts:
                                yield Pattern(base.atoms,
                                              (DimAtom(op, dim, var(src), var(dst), steps),))


def var_domains(p: Pattern, data) -> dict:
    """For each variable, the constants that can occupy one of its argument
    positions in some sequence of ``data`` (a sound superset)."""
    seen = {}
    for s in data.sequences:
        for a in list(s.fluents) + list(s.statics):
            for i, t in enumerate(a.args):
                seen.setdefault((a.predicate, i), set()).add(t.name)
    events = set()
    for s in data.sequences:
        events |= s.events()
    dom = {}
    for a in p.atoms:
        for i, t in enumerate(a.args):
            if t.is_var:
                cand = seen.get((a.predicate, i), set())
                dom[t.name] = dom[t.name] & cand if t.name in dom else set(cand)
    for d in p.dims:
        for t in d.args:
            if t.is_var:
                dom[t.name] = dom[t.name] & events if t.name in dom else set(events)
    return {v: sorted(c) for v, c in dom.items()}


def oracle_mine(data, bias, threshold, max_dims=1, max_nstep=3):
    """Canonical key -> (freq, supports, confidences) for every frequent,
    constraint-satisfying pattern whose best confidence reaches
    ``threshold``."""
    out = {}
    n = len(data)
    for p in enumerate_patterns(data, bias, max_dims, max_nstep):
        key = canonical(p)
        if key in out:
            continue
        if any(brute_pattern_subsumes(c, p) for c in bias.negconstraints):
            out[key] = None
            continue
        if not all(brute_pattern_subsumes(c, p) for c in bias.posconstraints):
            out[key] = None
            continue
        preds = {a.predicate for a in p.atoms}
        if any(len(preds & set(g)) > 1 for g in bias.atmostone_groups):
            out[key] = None
            continue
        dom = var_domains(p, data)
        hits = [brute_subsumes(p, s, dom) for s in data.sequences]
        freq = sum(hits)
        if not freq / n > bias.minfreq:
            out[key] = None
            continue
        supports = {c: sum(1 for h, l in zip(hits, data.labels) if h and l == c)
                    for c in data.classes}
        confs = {c: supports[c] / freq for c in data.classes}
        if max(confs.values()) < threshold - 1e-12:
            out[key] = None
            continue
        out[key] = (freq, supports, confs)
    return {k: v for k, v in out.items() if v is not None}


# --- naive Bayes -------------------------------------------------------------------


def log_product_scores(p, priors, x) -> np.ndarray:
    """ln prod_i p^x (1-p)^(1-x) + ln prior, evaluated factor by factor."""
    q = p.shape[1]
    out = np.empty(q)
    for j in range(q):
        total = math.log(priors[j])
        for i, bit in enumerate(x):
            total += math.log(p[i, j] if bit else 1.0 - p[i, j])
        out[j] = total
    return out


def posterior(p, priors, x) -> np.ndarray:
    """Normalised class posterior computed with plain products."""
    q = p.shape[1]
    joint = np.array([priors[j] * math.prod(p[i, j] if b else 1.0 - p[i, j]
                                            for i, b in enumerate(x)) for j in range(q)])
    return joint / joint.sum()


def reference_errors(X, y, q, cols, smoothing=1.0) -> int:
    """Training errors of naive Bayes on columns ``cols`` using direct
    probability products; ties go to the larger prior, then the lower index."""
    X = np.asarray(X)
    y = np.asarray(y)
    n = np.array([np.sum(y == j) for j in range(q)], dtype=float)
    priors = n / n.sum()
    cols = list(cols)
    p = np.empty((len(cols), q))
    for r, c in enumerate(cols):
        for j in range(q):
            p[r, j] = (np.sum(X[y == j, c]) + smoothing) / (n[j] + 2 * smoothing)
    errors = 0
    for i in range(len(y)):
        g = log_product_scores(p, priors, X[i, cols])
        top = g.max()
        tied = [j for j in range(q) if g[j] >= top - 1e-9 * max(1.0, abs(top))]
        pick = max(tied, key=lambda j: (priors[j], -j))
        errors += pick != y[i]
    return errors
