"""Text formats: labelled sequence files, background files, pattern files.

Dataset files are line oriented, ``%`` starts a comment::

    sequence s1 class pos
    order 1: e1 e2 e3
    f(e1,a). f(e2,b).
    static origin(lab).

Atoms inside a block are fluents (first argument an ordered event) unless
written after ``static``.
"""

from __future__ import annotations

import re

from .dataset import LabeledDataset, LanguageBias, MinedFeature
from .errors import MalformedSequenceError, ParseError
from .logic import (DIM_OPS, NSTEP, Atom, DimAtom, Pattern, RelationalSequence,
                    is_variable_name, term)

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<number>\d+\.\d*(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)
  | (?P<name>[A-Za-z0-9_]+)
  | (?P<punct>[()\[\],.:+\-\#|=])
""", re.VERBOSE)

MODE_SYMBOLS = ("+", "-", "#")


class _Line:
    """Tokens of one source line with a cursor."""

    def __init__(self, text: str, lineno: int):
        self.lineno = lineno
        self.tokens = []
        code = text.split("%", 1)[0]
        pos = 0
        while pos < len(code):
            m = _TOKEN.match(code, pos)
            if m is None:
                raise ParseError(f"unexpected character {code[pos]!r}", lineno, pos + 1)
            if m.lastgroup != "ws":
                self.tokens.append((m.lastgroup, m.group(), pos + 1))
            pos = m.end()
        self.i = 0

    def at_end(self) -> bool:
        return self.i >= len(self.tokens)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eol", "", self._endcol())

    def _endcol(self):
        if not self.tokens:
            return 1
        _, text, col = self.tokens[-1]
        return col + len(text)

    def error(self, msg):
        _, _, col = self.peek()
        return ParseError(msg, self.lineno, col)

    def next(self):
        tok = self.peek()
        if tok[0] == "eol":
            raise self.error("unexpected end of line")
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, col = self.peek()
        if value != text or kind == "eol":
            raise self.error(f"expected {text!r}, found {value or 'end of line'!r}")
        self.i += 1

    def accept(self, text) -> bool:
        kind, value, _ = self.peek()
        if kind != "eol" and value == text:
            self.i += 1
            return True
        return False

    def name(self, what="identifier"):
        kind, value, _ = self.peek()
        if kind != "name":
            raise self.error(f"expected {what}, found {value or 'end of line'!r}")
        self.i += 1
        return value

    def integer(self, what="integer"):
        value = self.name(what)
        if not value.isdigit():
            self.i -= 1
            raise self.error(f"expected {what}, found {value!r}")
        return int(value)

    def number(self, what="number"):
        kind, value, _ = self.peek()
        if kind not in ("number", "name"):
            raise self.error(f"expected {what}")
        try:
            v = float(value)
        except ValueError:
            raise self.error(f"expected {what}, found {value!r}") from None
        self.i += 1
        return v

    def done(self):
        if not self.at_end():
            raise self.error(f"unexpected {self.peek()[1]!r}")


def _lines(text: str):
    for n, raw in enumerate(text.splitlines(), start=1):
        line = _Line(raw, n)
        if not line.at_end():
            yield line


def _parse_goal(line: _Line):
    """One atom or dimensional atom (``next(d,X,Y)``, ``after(d,X,Y)``,
    ``nstep(d,n,X,Y)``)."""
    pred = line.name("predicate")
    if is_variable_name(pred):
        line.i -= 1
        raise line.error(f"predicate {pred!r} must start lowercase")
    if pred in DIM_OPS:
        line.expect("(")
        dim = line.integer("dimension")
        line.expect(",")
        steps = 1
        if pred == NSTEP:
            steps = line.integer("step count")
            line.expect(",")
        src = term(line.name("term"))
        line.expect(",")
        dst = term(line.name("term"))
        line.expect(")")
        if dim < 1 or steps < 1:
            raise ParseError(f"bad {pred} atom", line.lineno, None)
        return DimAtom(pred, dim, src, dst, steps)
    args = []
    if line.accept("("):
        args.append(term(line.name("term")))
        while line.accept(","):
            args.append(term(line.name("term")))
        line.expect(")")
    return Atom(pred, tuple(args))


def _parse_goal_list(line: _Line) -> Pattern:
    atoms, dims = [], []
    if line.peek()[1] == "true":
        line.next()
        return Pattern()
    while True:
        g = _parse_goal(line)
        (dims if isinstance(g, DimAtom) else atoms).append(g)
        if not line.accept(","):
            break
    return Pattern(tuple(atoms), tuple(dims))


def parse_pattern(text: str) -> Pattern:
    line = _Line(text, 1)
    p = _parse_goal_list(line)
    line.done()
    return p


class _Arities:
    def __init__(self):
        self.arity = {}

    def check(self, a: Atom, lineno):
        known = self.arity.setdefault(a.predicate, a.arity)
        if known != a.arity:
            raise ParseError(f"predicate {a.predicate} used with arity {a.arity}, "
                             f"earlier {known}", lineno, None)


def parse_dataset(text: str) -> LabeledDataset:
    sequences, labels = [], []
    seen_ids = set()
    arities = _Arities()
    block = None

    def close():
        if block is None:
            return
        seq = RelationalSequence(block["id"], frozenset(block["fluents"]),
                                 frozenset(block["statics"]), dict(block["orders"]))
        events = seq.events()
        for f, lineno, col in block["fluent_pos"]:
            if f.args[0].name not in events:
                raise ParseError(f"unknown event {f.args[0].name}", lineno, col)
        try:
            seq.validate()
        except MalformedSequenceError as exc:
            raise ParseError(str(exc), block["line"], 1) from None
        sequences.append(seq)
        labels.append(block["label"])

    for line in _lines(text):
        kind, value, col = line.peek()
        if kind == "name" and value == "sequence":
            close()
            line.next()
            sid = line.name("sequence id")
            if sid in seen_ids:
                raise ParseError(f"duplicate sequence id {sid}", line.lineno, col)
            seen_ids.add(sid)
            if line.name("'class'") != "class":
                line.i -= 1
                raise line.error("expected 'class'")
            label = line.name("class label")
            line.done()
            block = {"id": sid, "label": label, "fluents": [], "statics": [], "orders": {},
                     "fluent_pos": [], "line": line.lineno}
            continue
        if block is None:
            raise line.error("content before the first 'sequence' header")
        if kind == "name" and value == "order":
            line.next()
            dim = line.integer("dimension")
            if dim < 1:
                raise ParseError("dimensions start at 1", line.lineno, col)
            line.expect(":")
            events = []
            while not line.at_end():
                e = line.name("event")
                if is_variable_name(e):
                    line.i -= 1
                    raise line.error(f"event {e!r} must be a constant")
                events.append(e)
            if dim in block["orders"]:
                raise ParseError(f"order {dim} given twice", line.lineno, col)
            if len(set(events)) != len(events):
                raise ParseError(f"event repeated in order {dim}", line.lineno, col)
            block["orders"][dim] = tuple(events)
            continue
        while not line.at_end():
            _, _, acol = line.peek()
            static = line.accept("static")
            g = _parse_goal(line)
            line.expect(".")
            if isinstance(g, DimAtom):
                raise ParseError("dimensional atoms are not allowed in sequences",
                                 line.lineno, acol)
            if any(t.is_var for t in g.args):
                raise ParseError(f"atom {g} is not ground", line.lineno, acol)
            arities.check(g, line.lineno)
            if static:
                block["statics"].append(g)
            else:
                if not g.args:
                    raise ParseError(f"fluent {g} needs an event argument", line.lineno, acol)
                block["fluents"].append(g)
                block["fluent_pos"].append((g, line.lineno, acol))
    close()
    return LabeledDataset(sequences, labels)


def _pred_list(line: _Line) -> list:
    line.expect("[")
    names = [line.name("predicate")]
    while line.accept(","):
        names.append(line.name("predicate"))
    line.expect("]")
    return names


def parse_background(text: str) -> LanguageBias:
    bias = LanguageBias()
    mode_lines = {}
    for line in _lines(text):
        kind, directive, col = line.peek()
        if kind != "name":
            raise line.error("expected a directive")
        line.next()
        line.expect("(")
        if directive == "maxsize":
            bias.maxsize = line.integer("maxsize")
            if bias.maxsize < 1:
                raise ParseError("maxsize must be positive", line.lineno, col)
        elif directive == "minfreq":
            bias.minfreq = line.number("minfreq")
            if bias.minfreq <= 0:
                raise ParseError("minfreq must be positive", line.lineno, col)
        elif directive in ("type", "mode"):
            pred = line.name("predicate")
            args = []
            if line.accept("("):
                while True:
                    if directive == "type":
                        args.append(line.name("type name"))
                    else:
                        kind, sym, _ = line.next()
                        if sym not in MODE_SYMBOLS:
                            line.i -= 1
                            raise line.error(f"mode symbol must be one of + - #, found {sym!r}")
                        args.append(sym)
                    if not line.accept(","):
                        break
                line.expect(")")
            table = bias.types if directive == "type" else bias.modes
            if pred in table and len(table[pred]) != len(args):
                raise ParseError(f"conflicting {directive} arity for {pred}", line.lineno, col)
            table[pred] = tuple(args)
            if directive == "mode":
                mode_lines[pred] = line.lineno
        elif directive in ("negconstraint", "posconstraint"):
            line.expect("[")
            p = _parse_goal_list(line)
            line.expect("]")
            (bias.negconstraints if directive == "negconstraint"
             else bias.posconstraints).append(p)
        elif directive == "atmostone":
            bias.atmostone_groups.append(_pred_list(line))
        elif directive == "key":
            bias.key_predicates = _pred_list(line)
        else:
            raise ParseError(f"unknown directive {directive!r}", line.lineno, col)
        line.expect(")")
        line.expect(".")
        line.done()
    for pred, modes in bias.modes.items():
        if pred not in bias.types:
            raise ParseError(f"mode for {pred} has no type declaration", mode_lines[pred], 1)
        if len(bias.types[pred]) != len(modes):
            raise ParseError(f"type and mode arity differ for {pred}", mode_lines[pred], 1)
    return bias


def serialize_background(bias: LanguageBias) -> str:
    out = [f"maxsize({bias.maxsize}).", f"minfreq({bias.minfreq!r})."]
    for pred, types in bias.types.items():
        out.append(f"type({pred}({','.join(types)}))." if types else f"type({pred}).")
    for pred, modes in bias.modes.items():
        out.append(f"mode({pred}({','.join(modes)}))." if modes else f"mode({pred}).")
    for p in bias.negconstraints:
        out.append(f"negconstraint([{p}]).")
    for p in bias.posconstraints:
        out.append(f"posconstraint([{p}]).")
    for group in bias.atmostone_groups:
        out.append(f"atmostone([{','.join(group)}]).")
    if bias.key_predicates:
        out.append(f"key([{','.join(bias.key_predicates)}]).")
    return "\n".join(out) + "\n"


def serialize_dataset(data: LabeledDataset) -> str:
    out = []
    for seq, label in data:
        out.append(f"sequence {seq.id} class {label}")
        for d in sorted(seq.orders):
            out.append(f"order {d}: {' '.join(seq.orders[d])}".rstrip())
        out.extend(f"{a}." for a in sorted(seq.fluents, key=_fluent_sort_key(seq)))
        out.extend(f"static {a}." for a in sorted(seq.statics, key=str))
    return "\n".join(out) + ("\n" if out else "")


def _fluent_sort_key(seq):
    pos = {}
    for d in sorted(seq.orders, reverse=True):
        for i, e in enumerate(seq.orders[d]):
            pos[e] = i
    return lambda a: (pos.get(a.args[0].name, -1), str(a))


def serialize_patterns(features) -> str:
    lines = []
    for f in features:
        fields = [f"freq={f.freq}"]
        fields += [f"supp_{c}={n}" for c, n in f.supports.items()]
        fields += [f"conf_{c}={v!r}" for c, v in f.confidences.items()]
        lines.append(f"{f.pattern} | {' '.join(fields)}")
    return "".join(line + "\n" for line in lines)


def parse_patterns(text: str) -> list:
    features = []
    for n, raw in enumerate(text.splitlines(), start=1):
        code = raw.split("%", 1)[0]
        if not code.strip():
            continue
        if "|" not in code:
            raise ParseError("missing '|' before statistics", n, len(code) + 1)
        head, stats = code.rsplit("|", 1)
        line = _Line(head, n)
        pattern = _parse_goal_list(line)
        line.done()
        freq, supports, confidences = None, {}, {}
        col = len(head) + 2
        for item in stats.split():
            key, sep, value = item.partition("=")
            try:
                if not sep:
                    raise ValueError
                if key == "freq":
                    freq = int(value)
                elif key.startswith("supp_"):
                    supports[key[5:]] = int(value)
                elif key.startswith("conf_"):
                    confidences[key[5:]] = float(value)
                else:
                    raise ValueError
            except ValueError:
                raise ParseError(f"bad statistics field {item!r}", n, col) from None
        if freq is None:
            raise ParseError("missing freq= field", n, col)
        features.append(MinedFeature(pattern, freq, supports, confidences))
    return features
