"""Negation-normal-form propositional formulas and their equational theory.

Formulas are built from the units T/F, literals, and binary conjunction /
disjunction; negation exists only on literals.  Equality "modulo the unit,
commutativity and associativity laws" is decided by reduction to a canonical
form.
"""

from __future__ import annotations

TOP = "top"
BOT = "bot"
LIT = "lit"
AND = "and"
OR = "or"

_KIND_ORDER = {TOP: 0, BOT: 1, LIT: 2, AND: 3, OR: 4}


class Formula:
    """Immutable NNF formula node.

    kind is one of 'top', 'bot', 'lit', 'and', 'or'.  For literals, ``a`` is
    the variable name and ``b`` the negation flag; for connectives ``a`` and
    ``b`` are the children.  Canonical form and print string are cached on
    the instance.
    """

    __slots__ = ("kind", "a", "b", "_hash", "_s", "_canon", "_cmap", "_nocc")

    def __init__(self, kind, a=None, b=None):
        self.kind = kind
        self.a = a
        self.b = b
        self._hash = None
        self._s = None
        self._canon = None
        self._cmap = None
        self._nocc = None

    def __repr__(self):
        return f"Formula({fprint(self)!r})"

    def __hash__(self):
        h = self._hash
        if h is None:
            if self.kind == LIT:
                h = hash((LIT, self.a, self.b))
            elif self.kind in (TOP, BOT):
                h = hash(self.kind)
            else:
                h = hash((self.kind, self.a, self.b))
            self._hash = h
        return h

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Formula):
            return NotImplemented
        if self.kind != other.kind or hash(self) != hash(other):
            return False
        if self.kind in (TOP, BOT):
            return True
        if self.kind == LIT:
            return self.a == other.a and self.b == other.b
        return self.a == other.a and self.b == other.b

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r


top = Formula(TOP)
bot = Formula(BOT)


def lit(name: str, negative: bool = False) -> Formula:
    if not name:
        raise ValueError("literal variable name must be nonempty")
    return Formula(LIT, name, bool(negative))


def conj(a: Formula, b: Formula) -> Formula:
    return Formula(AND, a, b)


def disj(a: Formula, b: Formula) -> Formula:
    return Formula(OR, a, b)


def conj_all(items, empty=top):
    """Balanced conjunction of a list; the empty conjunction is T."""
    return _balanced(AND, list(items), empty)


def disj_all(items, empty=bot):
    """Balanced disjunction of a list; the empty disjunction is F."""
    return _balanced(OR, list(items), empty)


def _balanced(kind, items, empty):
    if not items:
        return empty
    if len(items) == 1:
        return items[0]
    mid = len(items) // 2
    return Formula(kind, _balanced(kind, items[:mid], empty), _balanced(kind, items[mid:], empty))


def is_literal(f: Formula) -> bool:
    return f.kind == LIT


def neg(f: Formula) -> Formula:
    """Dual of a literal."""
    if f.kind != LIT:
        raise ValueError("neg expects a literal")
    return Formula(LIT, f.a, not f.b)


def dual(f: Formula) -> Formula:
    """De Morgan dual, applied recursively; an involution."""
    k = f.kind
    if k == TOP:
        return bot
    if k == BOT:
        return top
    if k == LIT:
        return Formula(LIT, f.a, not f.b)
    if k == AND:
        return Formula(OR, dual(f.a), dual(f.b))
    return Formula(AND, dual(f.a), dual(f.b))


def mirror_dual(f: Formula) -> Formula:
    """De Morgan dual with children swapped; used when flipping derivations."""
    k = f.kind
    if k == TOP:
        return bot
    if k == BOT:
        return top
    if k == LIT:
        return Formula(LIT, f.a, not f.b)
    if k == AND:
        return Formula(OR, mirror_dual(f.b), mirror_dual(f.a))
    return Formula(AND, mirror_dual(f.b), mirror_dual(f.a))


def variables(f: Formula):
    """Set of variable names occurring in f."""
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g.kind == LIT:
            out.add(g.a)
        elif g.kind in (AND, OR):
            stack.append(g.a)
            stack.append(g.b)
    return out


def n_occurrences(f: Formula) -> int:
    """Number of literal occurrences (the atom count used for sizes)."""
    n = f._nocc
    if n is None:
        if f.kind == LIT:
            n = 1
        elif f.kind in (TOP, BOT):
            n = 0
        else:
            n = n_occurrences(f.a) + n_occurrences(f.b)
        f._nocc = n
    return n


def occurrence_literals(f: Formula):
    """Literals of f's occurrences, in left-to-right order."""
    out = []
    stack = [f]
    while stack:
        g = stack.pop()
        if g.kind == LIT:
            out.append(g)
        elif g.kind in (AND, OR):
            stack.append(g.b)
            stack.append(g.a)
    return out


def replace_occurrences(f: Formula, repl: dict) -> Formula:
    """Rebuild f with the occurrence at in-order index i replaced by repl[i]."""
    counter = [0]

    def rec(g):
        if g.kind == LIT:
            i = counter[0]
            counter[0] += 1
            return repl.get(i, g)
        if g.kind in (TOP, BOT):
            return g
        a = rec(g.a)
        b = rec(g.b)
        if a is g.a and b is g.b:
            return g
        return Formula(g.kind, a, b)

    return rec(f)


def evaluate(f: Formula, assignment) -> bool:
    """Truth value under a total assignment of f's variables."""
    k = f.kind
    if k == TOP:
        return True
    if k == BOT:
        return False
    if k == LIT:
        try:
            v = assignment[f.a]
        except KeyError:
            raise UndefinedVariableError(f.a) from None
        return (not v) if f.b else bool(v)
    if k == AND:
        return evaluate(f.a, assignment) and evaluate(f.b, assignment)
    return evaluate(f.a, assignment) or evaluate(f.b, assignment)


class UndefinedVariableError(KeyError):
    def __init__(self, var):
        super().__init__(var)
        self.var = var

    def __str__(self):
        return f"assignment does not cover variable {self.var!r}"


def is_tautology(f: Formula, max_vars: int | None = None) -> bool:
    """Exhaustive truth-table check; refuses formulas over too many variables."""
    vs = sorted(variables(f))
    if max_vars is not None and len(vs) > max_vars:
        raise ValueError(f"refusing exhaustive check over {len(vs)} > {max_vars} variables")
    for bits in range(1 << len(vs)):
        alpha = {v: bool((bits >> i) & 1) for i, v in enumerate(vs)}
        if not evaluate(f, alpha):
            return False
    return True


# -- canonical form ----------------------------------------------------------
#
# Associativity is flattened, the unit laws [A|F]=A, (A&T)=A, [T|T]=T,
# (F&F)=F are applied to fixpoint, and children are sorted by their canonical
# print.  The result is re-bracketed right-nested, so structural equality of
# canonical forms decides the equational theory.


def canonicalize(f: Formula) -> Formula:
    c = f._canon
    if c is None:
        c = _canon_with_map(f)[0]
        f._canon = c
    return c


def eq_mod(f: Formula, g: Formula) -> bool:
    """Equality modulo commutativity, associativity and the unit laws."""
    return canonicalize(f) == canonicalize(g)


def canonical_occurrence_map(f: Formula):
    """Map from f's in-order occurrence index to canonicalize(f)'s index.

    Two eq_mod-equal formulas pair occurrences through their shared canonical
    form; the pairing respects canonical structure, so replacing paired
    occurrences by the same subformula preserves eq_mod.
    """
    m = f._cmap
    if m is None:
        c, m = _canon_with_map(f)
        f._canon = c
        f._cmap = m
    return m


def _canon_with_map(f: Formula):
    """Return (canonical form, tuple mapping original occ index -> canon occ index)."""
    k = f.kind
    if k in (TOP, BOT):
        return f, ()
    if k == LIT:
        return f, (0,)
    # children of the same connective, flattened, each with its own map
    parts = []  # (canonical child, original occurrence indexes in order)
    counter = [0]

    def collect(g):
        if g.kind == k:
            collect(g.a)
            collect(g.b)
            return
        base = counter[0]
        counter[0] += n_occurrences(g)
        c, m = _canon_with_map(g)
        if c.kind == k:
            # child canonicalized into the same connective: flatten its spine
            spine = []
            _spine(c, k, spine)
            sizes = [n_occurrences(s) for s in spine]
            bounds = []
            acc = 0
            for s in sizes:
                bounds.append((acc, acc + s))
                acc += s
            for (lo, hi), s in zip(bounds, spine):
                idxs = [base + i for i, t in enumerate(m) if lo <= t < hi]
                idxs.sort(key=lambda i: m[i - base])
                parts.append((s, [(i, m[i - base] - lo) for i in idxs]))
        else:
            parts.append((c, [(base + i, t) for i, t in enumerate(m)]))

    collect(f)

    # unit laws on the flattened children
    unit_drop = bot if k == OR else top
    unit_keep = top if k == OR else bot
    kept = [p for p in parts if p[0].kind != unit_drop.kind]
    keepers = [p for p in kept if p[0].kind == unit_keep.kind]
    if keepers:
        kept = [p for p in kept if p[0].kind != unit_keep.kind] + keepers[:1]
    if not kept:
        return unit_drop, ()
    kept.sort(key=lambda p: fprint(p[0]))
    canon = _rnest(k, [p[0] for p in kept])
    mapping = [0] * sum(len(p[1]) for p in kept)
    off = 0
    for c, pairs in kept:
        for orig, within in pairs:
            mapping[orig] = off + within
        off += n_occurrences(c)
    return canon, tuple(mapping)


def _spine(f, kind, out):
    if f.kind == kind:
        _spine(f.a, kind, out)
        _spine(f.b, kind, out)
    else:
        out.append(f)


def _rnest(kind, items):
    if len(items) == 1:
        return items[0]
    out = items[-1]
    for x in reversed(items[:-1]):
        out = Formula(kind, x, out)
    return out


# -- text format --------------------------------------------------------------
#
# f ::= "T" | "F" | ident | "~" ident | "(" f "&" f ")" | "(" f "|" f ")"


def fprint(f: Formula) -> str:
    s = f._s
    if s is None:
        k = f.kind
        if k == TOP:
            s = "T"
        elif k == BOT:
            s = "F"
        elif k == LIT:
            s = ("~" + f.a) if f.b else f.a
        else:
            op = "&" if k == AND else "|"
            s = "(" + fprint(f.a) + op + fprint(f.b) + ")"
        f._s = s
    return s


class FormulaSyntaxError(ValueError):
    def __init__(self, msg, pos):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


def fparse(text: str) -> Formula:
    pos = 0
    n = len(text)

    def skip():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def ident():
        nonlocal pos
        start = pos
        if pos >= n or not (text[pos].isalpha()):
            raise FormulaSyntaxError("expected identifier", pos)
        pos += 1
        while pos < n and (text[pos].isalnum() or text[pos] == "_"):
            pos += 1
        return text[start:pos]

    def term():
        nonlocal pos
        skip()
        if pos >= n:
            raise FormulaSyntaxError("unexpected end of input", pos)
        ch = text[pos]
        if ch == "(":
            pos += 1
            a = term()
            skip()
            if pos >= n or text[pos] not in "&|":
                raise FormulaSyntaxError("expected '&' or '|'", pos)
            op = text[pos]
            pos += 1
            b = term()
            skip()
            if pos >= n or text[pos] != ")":
                raise FormulaSyntaxError("expected ')'", pos)
            pos += 1
            return Formula(AND if op == "&" else OR, a, b)
        if ch == "~":
            pos += 1
            skip()
            return lit(ident(), True)
        name = ident()
        if name == "T":
            return top
        if name == "F":
            return bot
        return lit(name)

    f = term()
    skip()
    if pos != n:
        raise FormulaSyntaxError("trailing input", pos)
    return f
