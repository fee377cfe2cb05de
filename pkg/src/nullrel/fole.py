"""Domain relational calculus with a null term.

Predicates are interpreted as sets of partial tuples.  An atom
``P(t1, ..., tn)`` holds when the partial tuple defined exactly at the
positions whose term denotes a value is in ``P``; the null term ``N`` denotes
nothing.  The same node set (with :class:`DAtom` leaves and no null term)
serves as classical first-order logic over the decomposed signature.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence, Union

from .instance import InstancePartial, PartialTuple
from .lexer import ParseError, TokenStream, unquote
from .values import NULL, Value, check_value, quote


class FormulaError(ValueError):
    pass


class NotSafeRange(FormulaError):
    pass


# terms


@dataclass(frozen=True)
class Const:
    value: Value

    def __post_init__(self):
        check_value(self.value, allow_null=False)

    def __str__(self):
        return quote(self.value)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class _NullTerm:
    def __str__(self):
        return "NULL"

    def __repr__(self):
        return "N"


N = _NullTerm()
Term = Union[Const, Var, _NullTerm]


def term(x) -> Term:
    """Coerce: strings naming variables stay ``Var``; use :class:`Const` for text."""
    if isinstance(x, (Const, Var, _NullTerm)):
        return x
    if x is NULL or x is None:
        return N
    if isinstance(x, int) and not isinstance(x, bool):
        return Const(x)
    raise TypeError(f"cannot make a term from {x!r}")


# formulas


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)


@dataclass(frozen=True)
class Atom(Formula):
    pred: str
    terms: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(term(t) for t in self.terms))


@dataclass(frozen=True)
class DAtom(Formula):
    """Decomposed atom ``R~A(t...)`` with one term per position in ``A``."""

    pred: str
    positions: tuple[int, ...]
    terms: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(self.positions))
        object.__setattr__(self, "terms", tuple(term(t) for t in self.terms))
        if list(self.positions) != sorted(set(self.positions)):
            raise FormulaError(f"positions of {self.pred}~ must be strictly ascending: {self.positions}")
        if len(self.terms) != len(self.positions):
            raise FormulaError(f"{self.pred}~{set(self.positions)} expects {len(self.positions)} terms")
        if any(t is N for t in self.terms):
            raise FormulaError("decomposed atoms never contain the null term")


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term

    def __post_init__(self):
        object.__setattr__(self, "left", term(self.left))
        object.__setattr__(self, "right", term(self.right))
        if self.left is N or self.right is N:
            raise FormulaError("the null term cannot occur in an equality")


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Bool(Formula):
    value: bool


TRUE = Bool(True)
FALSE = Bool(False)

Assignment = Mapping[str, Value]


def conj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return TRUE
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return FALSE
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def exists(names: Sequence[str], body: Formula) -> Formula:
    for x in reversed(list(names)):
        body = Exists(x, body)
    return body


def forall(names: Sequence[str], body: Formula) -> Formula:
    for x in reversed(list(names)):
        body = Forall(x, body)
    return body


def implies(a: Formula, b: Formula) -> Formula:
    return Or(Not(a), b)


def conjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    return [f]


def disjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, Or):
        return disjuncts(f.left) + disjuncts(f.right)
    return [f]


# syntax queries


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.arg)
    elif isinstance(f, (And, Or)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (Exists, Forall)):
        yield from subformulas(f.body)


def _atom_terms(f: Formula) -> tuple:
    if isinstance(f, (Atom, DAtom)):
        return f.terms
    if isinstance(f, Eq):
        return (f.left, f.right)
    return ()


def free_vars(f: Formula) -> list[str]:
    """Free variables in order of first appearance."""
    out: list[str] = []
    seen: set[str] = set()

    def go(f: Formula, bound: frozenset) -> None:
        for t in _atom_terms(f):
            if isinstance(t, Var) and t.name not in bound and t.name not in seen:
                seen.add(t.name)
                out.append(t.name)
        if isinstance(f, Not):
            go(f.arg, bound)
        elif isinstance(f, (And, Or)):
            go(f.left, bound)
            go(f.right, bound)
        elif isinstance(f, (Exists, Forall)):
            go(f.body, bound | {f.var})

    go(f, frozenset())
    return out


def all_vars(f: Formula) -> set[str]:
    names = set()
    for g in subformulas(f):
        if isinstance(g, (Exists, Forall)):
            names.add(g.var)
        names.update(t.name for t in _atom_terms(g) if isinstance(t, Var))
    return names


def constants(f: Formula) -> set[Value]:
    return {t.value for g in subformulas(f) for t in _atom_terms(g) if isinstance(t, Const)}


def predicates(f: Formula) -> set:
    return {(g.pred, len(g.terms)) for g in subformulas(f) if isinstance(g, Atom)}


def quantifier_depth(f: Formula) -> int:
    if isinstance(f, Not):
        return quantifier_depth(f.arg)
    if isinstance(f, (And, Or)):
        return max(quantifier_depth(f.left), quantifier_depth(f.right))
    if isinstance(f, (Exists, Forall)):
        return 1 + quantifier_depth(f.body)
    return 0


def size(f: Formula) -> int:
    return sum(1 for _ in subformulas(f))


def check_schema(f: Formula, arities: Mapping[str, int]) -> None:
    for g in subformulas(f):
        if isinstance(g, Atom):
            if g.pred not in arities:
                raise FormulaError(f"unknown predicate {g.pred!r}")
            if arities[g.pred] != len(g.terms):
                raise FormulaError(f"predicate {g.pred!r} has arity {arities[g.pred]}, used with {len(g.terms)}")
        elif isinstance(g, DAtom):
            if g.pred not in arities:
                raise FormulaError(f"unknown predicate {g.pred!r}")
            if any(not 1 <= p <= arities[g.pred] for p in g.positions):
                raise FormulaError(f"positions {g.positions} outside 1..{arities[g.pred]} for {g.pred!r}")


# semantics


AtomTest = Callable[[Formula, tuple], bool]


class _Evaluator:
    """Recursive model checker; ``holds(atom, values)`` decides atoms.

    ``values`` carries one entry per term: a constant or ``None`` when the term
    denotes nothing (the null term).
    """

    def __init__(self, holds: AtomTest, domain: frozenset, tuples_of: Optional[Callable] = None):
        self.holds = holds
        self.domain = domain
        self.tuples_of = tuples_of

    def value(self, t: Term, env: Assignment):
        if isinstance(t, Const):
            return t.value
        if isinstance(t, Var):
            return env.get(t.name)
        return None

    def sat(self, f: Formula, env: dict) -> bool:
        if isinstance(f, (Atom, DAtom)):
            return self.holds(f, tuple(self.value(t, env) for t in f.terms))
        if isinstance(f, Eq):
            a, b = self.value(f.left, env), self.value(f.right, env)
            return a is not None and b is not None and a == b
        if isinstance(f, Not):
            return not self.sat(f.arg, env)
        if isinstance(f, And):
            return self.sat(f.left, env) and self.sat(f.right, env)
        if isinstance(f, Or):
            return self.sat(f.left, env) or self.sat(f.right, env)
        if isinstance(f, Bool):
            return f.value
        if isinstance(f, (Exists, Forall)):
            want = isinstance(f, Exists)
            old = env.get(f.var, _UNSET)
            try:
                for v in self.candidates(f, env):
                    env[f.var] = v
                    if self.sat(f.body, env) == want:
                        return want
                return not want
            finally:
                if old is _UNSET:
                    env.pop(f.var, None)
                else:
                    env[f.var] = old
        raise TypeError(f"not a formula: {f!r}")

    def candidates(self, f, env) -> Iterable[Value]:
        if self.tuples_of is None or isinstance(f, Forall):
            return self.domain
        narrowed = _range_values(f.var, f.body, env, self.tuples_of)
        if narrowed is None:
            return self.domain
        return [v for v in narrowed if v in self.domain]


_UNSET = object()


def _range_values(x: str, f: Formula, env, tuples_of) -> Optional[set]:
    """A superset of the values of ``x`` that can make ``f`` true, or None."""
    if isinstance(f, (Atom, DAtom)):
        idx = [k for k, t in enumerate(f.terms) if isinstance(t, Var) and t.name == x]
        if not idx:
            return None
        out = set()
        for vals in tuples_of(f):
            v = vals[idx[0]]
            if v is not None and all(vals[k] == v for k in idx[1:]):
                out.add(v)
        return out
    if isinstance(f, Eq):
        for a, b in ((f.left, f.right), (f.right, f.left)):
            if isinstance(a, Var) and a.name == x:
                if isinstance(b, Const):
                    return {b.value}
                if isinstance(b, Var) and b.name != x and b.name in env:
                    return {env[b.name]}
        return None
    if isinstance(f, And):
        sets = [s for s in (_range_values(x, f.left, env, tuples_of), _range_values(x, f.right, env, tuples_of))
                if s is not None]
        if not sets:
            return None
        return set.intersection(*sets)
    if isinstance(f, Or):
        a = _range_values(x, f.left, env, tuples_of)
        if a is None:
            return None
        b = _range_values(x, f.right, env, tuples_of)
        return None if b is None else a | b
    if isinstance(f, Exists) and f.var != x:
        return _range_values(x, f.body, env, tuples_of)
    if isinstance(f, Bool) and not f.value:
        return set()
    return None


def _check_assignment(f: Formula, assignment: Assignment) -> dict:
    env = dict(assignment or {})
    for name in free_vars(f):
        if name not in env:
            raise FormulaError(f"free variable {name!r} is not bound by the assignment")
    for name, v in env.items():
        check_value(v, allow_null=False)
    return env


def _partial_holds(inst: InstancePartial):
    def holds(atom: Formula, vals: tuple) -> bool:
        if not isinstance(atom, Atom):
            raise TypeError("decomposed atoms need a decomposed instance")
        cells = tuple((k + 1, v) for k, v in enumerate(vals) if v is not None)
        return PartialTuple(len(vals), cells) in inst[atom.pred]
    return holds


def _partial_tuples(inst: InstancePartial):
    def tuples_of(atom: Atom):
        n = len(atom.terms)
        for t in inst[atom.pred]:
            d = t.as_dict()
            vals = tuple(d.get(k) for k in range(1, n + 1))
            # only tuples whose undefined positions line up with null terms can match
            if all((vals[k] is None) == (atom.terms[k] is N) for k in range(n)):
                yield vals
    return tuples_of


# stands in for the unbounded constant set when nothing else is active
FILLER = "_"


def evaluation_domain(inst, f: Formula, assignment: Optional[Assignment] = None) -> frozenset:
    """Active domain plus formula and assignment constants, never empty."""
    extra = set(assignment.values()) if assignment else set()
    return frozenset(inst.active_domain() | constants(f) | extra) or frozenset({FILLER})


def satisfies(inst: InstancePartial, assignment: Assignment, f: Formula,
              domain: Optional[Iterable[Value]] = None) -> bool:
    """Decide ``inst, assignment ⊨ f`` with quantifiers ranging over ``domain``.

    The default domain is the active domain plus the constants of ``f``.
    """
    env = _check_assignment(f, assignment)
    check_schema(f, inst.schema.arities())
    dom = evaluation_domain(inst, f, env) if domain is None else frozenset(domain)
    if NULL in dom:
        raise FormulaError("the evaluation domain cannot contain null")
    return _Evaluator(_partial_holds(inst), dom, _partial_tuples(inst)).sat(f, env)


def answer_set(q: Formula, inst: InstancePartial) -> frozenset:
    """Answers of a safe-range query as partial tuples over its free variables."""
    if not is_safe_range(q):
        raise NotSafeRange(f"query is not safe-range: {to_text(q)}")
    check_schema(q, inst.schema.arities())
    names = free_vars(q)
    dom = evaluation_domain(inst, q)
    ev = _Evaluator(_partial_holds(inst), dom, _partial_tuples(inst))
    out = set()
    for vals in itertools.product(sorted(dom, key=repr), repeat=len(names)):
        if ev.sat(q, dict(zip(names, vals))):
            out.add(PartialTuple(len(names), tuple((k + 1, v) for k, v in enumerate(vals))))
    return frozenset(out)


# safe-range normal form


class _Fresh:
    def __init__(self, taken: Iterable[str], prefix: str = "v"):
        self.taken = set(taken)
        self.prefix = prefix
        self.n = 0

    def __call__(self) -> str:
        while True:
            self.n += 1
            name = f"{self.prefix}{self.n}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def rename_apart(f: Formula, fresh: Optional[_Fresh] = None) -> Formula:
    """Give every quantifier its own variable, distinct from the free ones."""
    fresh = fresh or _Fresh(all_vars(f))
    used = set(free_vars(f))

    def sub(t: Term, ren: dict) -> Term:
        return Var(ren[t.name]) if isinstance(t, Var) and t.name in ren else t

    def go(f: Formula, ren: dict) -> Formula:
        if isinstance(f, Atom):
            return Atom(f.pred, tuple(sub(t, ren) for t in f.terms))
        if isinstance(f, DAtom):
            return DAtom(f.pred, f.positions, tuple(sub(t, ren) for t in f.terms))
        if isinstance(f, Eq):
            return Eq(sub(f.left, ren), sub(f.right, ren))
        if isinstance(f, Not):
            return Not(go(f.arg, ren))
        if isinstance(f, (And, Or)):
            return type(f)(go(f.left, ren), go(f.right, ren))
        if isinstance(f, (Exists, Forall)):
            name = f.var
            if name in used:
                name = fresh()
            used.add(name)
            return type(f)(name, go(f.body, {**ren, f.var: name}))
        return f

    return go(f, {})


def _push_not(f: Formula, neg: bool = False) -> Formula:
    """Remove ∀, double negations, and push ¬ through ∧/∨ (not through ∃)."""
    if isinstance(f, Not):
        return _push_not(f.arg, not neg)
    if isinstance(f, (And, Or)):
        left, right = _push_not(f.left, neg), _push_not(f.right, neg)
        return (And if isinstance(f, And) != neg else Or)(left, right)
    if isinstance(f, Forall):
        inner = Exists(f.var, _push_not(f.body, True))
        return inner if neg else Not(inner)
    if isinstance(f, Exists):
        inner = Exists(f.var, _push_not(f.body, False))
        return Not(inner) if neg else inner
    if isinstance(f, Bool):
        return Bool(f.value != neg)
    return Not(f) if neg else f


def simplify_truth(f: Formula) -> Formula:
    """Truth-constant propagation: ``True ∧ f ⇒ f``, ``False ∨ f ⇒ f`` and friends."""
    if isinstance(f, Not):
        a = simplify_truth(f.arg)
        return Bool(not a.value) if isinstance(a, Bool) else Not(a)
    if isinstance(f, And):
        a, b = simplify_truth(f.left), simplify_truth(f.right)
        if a == FALSE or b == FALSE:
            return FALSE
        if a == TRUE:
            return b
        return a if b == TRUE else And(a, b)
    if isinstance(f, Or):
        a, b = simplify_truth(f.left), simplify_truth(f.right)
        if a == TRUE or b == TRUE:
            return TRUE
        if a == FALSE:
            return b
        return a if b == FALSE else Or(a, b)
    if isinstance(f, (Exists, Forall)):
        body = simplify_truth(f.body)
        # ∃x.False is false and ∀x.True is true on every domain, empty or not
        if isinstance(f, Exists) and body == FALSE:
            return FALSE
        if isinstance(f, Forall) and body == TRUE:
            return TRUE
        return type(f)(f.var, body)
    return f


def _fv_set(f: Formula) -> set:
    return set(free_vars(f))


def miniscope(f: Formula) -> Formula:
    """Move existential quantifiers inward as far as they can go."""
    if isinstance(f, Not):
        return Not(miniscope(f.arg))
    if isinstance(f, (And, Or)):
        return type(f)(miniscope(f.left), miniscope(f.right))
    if isinstance(f, Exists):
        block = []
        body = f
        while isinstance(body, Exists):
            block.append(body.var)
            body = body.body
        return _place(block, miniscope(body))
    return f


def _place(block: list[str], body: Formula) -> Formula:
    # domains are never empty, so a quantifier over an absent variable is a no-op
    fv = _fv_set(body)
    block = [x for x in block if x in fv]
    if not block:
        return body
    if isinstance(body, Or):
        parts = disjuncts(body)
        return disj(_place([x for x in block if x in _fv_set(p)], p) for p in parts)
    if isinstance(body, And):
        parts = conjuncts(body)
        remaining = list(block)
        while True:
            best = None
            for x in remaining:
                where = [k for k, p in enumerate(parts) if x in _fv_set(p)]
                if 0 < len(where) < len(parts) and (best is None or len(where) < len(best[1])):
                    best = (x, where)
            if best is None:
                break
            x, where = best
            remaining.remove(x)
            inner = _place([x], conj(parts[k] for k in where))
            first = where[0]
            parts = [inner if k == first else p for k, p in enumerate(parts) if k == first or k not in where]
        if len(parts) == 1:
            return _place(remaining, parts[0])
        return exists(remaining, conj(parts))
    if isinstance(body, Exists):
        # only reached after an And/Or regrouping produced a nested block
        inner = []
        b = body
        while isinstance(b, Exists):
            inner.append(b.var)
            b = b.body
        return _place(block + inner, b)
    return exists(block, body)


def to_srnf(f: Formula) -> Formula:
    """Safe-range normal form.

    Bound variables are renamed apart (fresh names ``v1, v2, ...``), ``∀`` is
    rewritten as ``¬∃¬``, negations are pushed through ``∧``/``∨`` and doubled
    negations dropped, truth constants are propagated, and existential
    quantifiers are moved inward.
    """
    g = simplify_truth(_push_not(rename_apart(f)))
    # pushing negations can expose new conjunctions to quantifiers, so repeat
    while True:
        h = simplify_truth(_push_not(miniscope(g)))
        if h == g:
            return h
        g = h


class _NotSafe:
    def __repr__(self):
        return "NOT-SAFE"


NOT_SAFE = _NotSafe()


def range_restriction(f: Formula):
    """The range-restricted variables of an SRNF formula, or :data:`NOT_SAFE`."""
    if isinstance(f, (Atom, DAtom)):
        return frozenset(t.name for t in f.terms if isinstance(t, Var))
    if isinstance(f, Eq):
        a, b = f.left, f.right
        if isinstance(a, Var) and isinstance(b, Const):
            return frozenset({a.name})
        if isinstance(b, Var) and isinstance(a, Const):
            return frozenset({b.name})
        return frozenset()
    if isinstance(f, Bool):
        return frozenset()
    if isinstance(f, Not):
        return NOT_SAFE if range_restriction(f.arg) is NOT_SAFE else frozenset()
    if isinstance(f, And):
        parts = conjuncts(f)
        rrs = [range_restriction(p) for p in parts]
        if any(r is NOT_SAFE for r in rrs):
            return NOT_SAFE
        out = set().union(*rrs)
        links = [(p.left.name, p.right.name) for p in parts
                 if isinstance(p, Eq) and isinstance(p.left, Var) and isinstance(p.right, Var)]
        changed = True
        while changed:
            changed = False
            for x, y in links:
                if (x in out) != (y in out):
                    out |= {x, y}
                    changed = True
        return frozenset(out)
    if isinstance(f, Or):
        rrs = [range_restriction(p) for p in disjuncts(f)]
        if any(r is NOT_SAFE for r in rrs):
            return NOT_SAFE
        return frozenset.intersection(*rrs)
    if isinstance(f, Exists):
        r = range_restriction(f.body)
        if r is NOT_SAFE or f.var not in r:
            return NOT_SAFE
        return r - {f.var}
    if isinstance(f, Forall):
        return range_restriction(Not(Exists(f.var, Not(f.body))))
    raise TypeError(f"not a formula: {f!r}")


def is_safe_range(f: Formula) -> bool:
    r = range_restriction(to_srnf(f))
    return r is not NOT_SAFE and r == frozenset(free_vars(f))


# no-information rewrite


_NAMES = ("x", "y", "z", "u", "w")


def _name_supply(avoid: set) -> Iterator[str]:
    for n in _NAMES:
        if n not in avoid:
            yield n
    k = 0
    while True:
        k += 1
        for n in _NAMES:
            if f"{n}{k}" not in avoid:
                yield f"{n}{k}"


def no_info_rewrite(f: Formula) -> Formula:
    """Replace each atom with null terms by the disjunction over all ways of
    filling a subset of its null positions with existential variables."""
    avoid = all_vars(f)

    def go(f: Formula) -> Formula:
        if isinstance(f, Atom):
            nulls = [k for k, t in enumerate(f.terms) if t is N]
            if not nulls:
                return f
            out = []
            for size_ in range(len(nulls) + 1):
                for chosen in itertools.combinations(nulls, size_):
                    names = list(itertools.islice(_name_supply(avoid), size_))
                    ts = list(f.terms)
                    for k, name in zip(chosen, names):
                        ts[k] = Var(name)
                    out.append(exists(names, Atom(f.pred, tuple(ts))))
            return disj(out)
        if isinstance(f, Not):
            return Not(go(f.arg))
        if isinstance(f, (And, Or)):
            return type(f)(go(f.left), go(f.right))
        if isinstance(f, (Exists, Forall)):
            return type(f)(f.var, go(f.body))
        return f

    return go(f)


# text syntax


def term_to_text(t: Term) -> str:
    return str(t)


def _atom_text(f: Formula) -> str:
    if isinstance(f, Atom):
        return f"{f.pred}({', '.join(map(str, f.terms))})"
    label = f"{f.pred}~{{{','.join(map(str, f.positions))}}}"
    return f"{label}({', '.join(map(str, f.terms))})" if f.terms else label


def to_text(f: Formula) -> str:
    """Render in the parseable text syntax."""
    return _show(f, 0)


# precedence: quantifier 0, or 1, and 2, not 3, atoms 4
def _prec(f: Formula) -> int:
    if isinstance(f, (Exists, Forall)):
        return 0
    if isinstance(f, Or):
        return 1
    if isinstance(f, And):
        return 2
    if isinstance(f, Not):
        return 3
    return 4


def _show(f: Formula, ctx: int) -> str:
    if isinstance(f, (Atom, DAtom)):
        text = _atom_text(f)
    elif isinstance(f, Eq):
        text = f"{f.left} = {f.right}"
    elif isinstance(f, Bool):
        text = "true" if f.value else "false"
    elif isinstance(f, Not):
        text = "not " + _show(f.arg, 3)
    elif isinstance(f, And):
        text = f"{_show(f.left, 2)} and {_show(f.right, 3)}"
    elif isinstance(f, Or):
        text = f"{_show(f.left, 1)} or {_show(f.right, 2)}"
    else:
        kind = type(f)
        names = []
        body = f
        while isinstance(body, kind):
            names.append(body.var)
            body = body.body
        word = "exists" if kind is Exists else "forall"
        text = f"{word} {', '.join(names)}. {_show(body, 0)}"
    if _prec(f) < ctx or (ctx > 0 and _prec(f) == 0):
        return f"({text})"
    return text


def parse_fole(text: str) -> Formula:
    """Parse a formula; ``R~{1,2}(x, y)`` denotes a decomposed atom."""
    ts = TokenStream(text)
    f = _parse_implication(ts)
    ts.expect_eof()
    return f


def _parse_implication(ts: TokenStream) -> Formula:
    f = _parse_or(ts)
    if ts.accept_op("->"):
        return implies(f, _parse_implication(ts))
    return f


def _parse_or(ts: TokenStream) -> Formula:
    f = _parse_and(ts)
    while ts.accept_kw("or") or ts.accept_op("∨"):
        f = Or(f, _parse_and(ts))
    return f


def _parse_and(ts: TokenStream) -> Formula:
    f = _parse_unary(ts)
    while ts.accept_kw("and") or ts.accept_op("∧"):
        f = And(f, _parse_unary(ts))
    return f


def _parse_unary(ts: TokenStream) -> Formula:
    if ts.accept_kw("not") or ts.accept_op("¬"):
        return Not(_parse_unary(ts))
    tok = ts.peek()
    if tok.is_kw("exists", "forall") or tok.is_op("∃", "∀"):
        ts.next()
        kind = Exists if tok.text.lower() in ("exists", "∃") else Forall
        names = [ts.expect_ident("variable").text]
        while ts.accept_op(","):
            names.append(ts.expect_ident("variable").text)
        ts.expect_op(".")
        body = _parse_implication(ts)
        for name in reversed(names):
            body = kind(name, body)
        return body
    return _parse_primary(ts)


def _parse_term(ts: TokenStream) -> Term:
    tok = ts.next()
    if tok.kind == "STRING":
        return Const(unquote(tok.text))
    if tok.kind == "INT":
        return Const(int(tok.text))
    if tok.is_kw("null"):
        return N
    if tok.kind == "IDENT":
        return Var(tok.text)
    raise ts.error("expected a term", tok)


def _parse_primary(ts: TokenStream) -> Formula:
    tok = ts.peek()
    if tok.is_op("("):
        ts.next()
        f = _parse_implication(ts)
        ts.expect_op(")")
        return f
    if tok.is_kw("true", "false"):
        ts.next()
        return Bool(tok.text.lower() == "true")
    if tok.kind == "IDENT" and not tok.is_kw("null") and ts.peek(1).is_op("(", "~"):
        ts.next()
        positions = None
        if ts.accept_op("~"):
            ts.expect_op("{")
            positions = []
            if not ts.peek().is_op("}"):
                positions.append(ts.expect_int("position"))
                while ts.accept_op(","):
                    positions.append(ts.expect_int("position"))
            ts.expect_op("}")
        terms: list[Term] = []
        if ts.accept_op("("):
            if not ts.peek().is_op(")"):
                terms.append(_parse_term(ts))
                while ts.accept_op(","):
                    terms.append(_parse_term(ts))
            ts.expect_op(")")
        try:
            if positions is None:
                return Atom(tok.text, tuple(terms))
            return DAtom(tok.text, tuple(positions), tuple(terms))
        except FormulaError as exc:
            raise ParseError(str(exc), tok.pos, ts.source) from None
    start = ts.peek()
    left = _parse_term(ts)
    op = ts.accept_op("=", "!=", "<>")
    if op is None:
        if isinstance(left, Var):
            # bare identifier: a zero-ary predicate
            return Atom(left.name, ())
        raise ts.error("expected '='")
    right = _parse_term(ts)
    try:
        eq = Eq(left, right)
    except FormulaError as exc:
        raise ParseError(str(exc), start.pos, ts.source) from None
    return eq if op.text == "=" else Not(eq)
