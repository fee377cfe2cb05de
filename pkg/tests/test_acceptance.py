"""Acceptance criteria 1-9; each test prints one PASS/FAIL line.

Run directly (``python tests/test_acceptance.py``) for just the summary.
"""
from __future__ import annotations

import json
import re

from gen import (SCHEMA, SQL_SCHEMA, fole, instance, nra, rng_of, row, safe_formula, sql_query,
                 where_condition)
from oracles import KLEENE_AND, KLEENE_NOT, KLEENE_OR, fole_domain, naive_fole, naive_nra

from nullrel import (NULL, InstanceN, Schema, compile_to_nra, decompose, eval_fol_decomposed, eval_nra,
                     exec_sql, from_partial, fole_to_nra, load_instance, no_info_rewrite, omega, omega_f,
                     omega_f_inv, parse_fole, parse_nra, parse_sql, recompose, rewrite_2vl, satisfies,
                     to_annf, to_partial)
from nullrel import constraints as C
from nullrel import fole as F
from nullrel.instance import decomposed_to_json, instance_to_json, partial_to_json
from nullrel.sqlfo import ast as S
from nullrel.sqlfo.rewrite import is_annf, rewrite_condition_2vl
from nullrel.sqlfo.semantics import Truth3, eval_2vl, eval_3vl

RESULTS: dict[int, bool] = {}


def report(n: int, title: str, failures: list) -> None:
    ok = not failures
    RESULTS[n] = ok
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {title}"
    if failures:
        line += f" ({len(failures)} failing; first: {failures[0]})"
    print(line)
    assert ok, line


R_INST = load_instance('{"r": [["a", "a"], ["b", null]]}')
PQ = load_instance('{"p": [["a", "a"], ["b", null], [null, "b"], [null, null]], "q": [["a", "a"], ["b", null]]}')


def test_criterion_1_intro_queries():
    cases = [
        ("SELECT DISTINCT c1, c2 FROM r WHERE c1 = c1 AND c2 = c2", {("a", "a")}),
        ("SELECT DISTINCT c1, c2 FROM r WHERE c1 = NULL", set()),
        ("SELECT DISTINCT c2 FROM r", {("a",), (NULL,)}),
        ("SELECT DISTINCT c2 FROM r WHERE c2 = c2", {("a",)}),
    ]
    catalog = {"r": ["c1", "c2"]}
    failures = []
    for k, (text, want) in enumerate(cases, 1):
        q = parse_sql(text, catalog)
        direct = exec_sql(q, R_INST, catalog)
        compiled = eval_nra(compile_to_nra(q, catalog), R_INST)
        if direct != want or compiled != want:
            failures.append((k, sorted(direct, key=repr), sorted(compiled, key=repr)))
    report(1, "intro queries via exec_sql and the compiled algebra", failures)


def test_criterion_2_denials_on_example():
    decls = [C.Unique("p", (1,)), C.Unique("q", (1,)), C.NotNull("q", 1), C.ForeignKey("p", (2,), "q", (1,))]
    listed = {
        decls[0]: "sel[1=3](sel[2!=4]((rel p x rel p)))",
        decls[1]: "sel[1=3](sel[2!=4]((rel q x rel q)))",
        decls[2]: "sel[isNull(1)](rel q)",
        decls[3]: "(proj[2](sel[isNotNull(2)](rel p)) minus proj[1](sel[isNotNull(1)](rel q)))",
    }
    failures = []
    for d in decls:
        if not C.check(d, PQ):
            failures.append(("direct", str(d)))
        if eval_nra(parse_nra(listed[d]), PQ):
            failures.append(("listed denial", str(d)))
        for variant in C.VARIANTS:
            if not C.check_by_denials(d, PQ, variant):
                failures.append((f"generated denial {variant}", str(d)))
        if isinstance(d, (C.NotNull, C.ForeignKey)):
            sentence = C.constraint_to_fole(d, PQ.schema)
            if not satisfies(to_partial(PQ), {}, sentence):
                failures.append(("calculus", str(d)))
            if not eval_nra(fole_to_nra(sentence, PQ.schema), PQ):
                failures.append(("calculus to algebra", str(d)))
    report(2, "example constraints hold directly, as denials and in the calculus", failures)


def _small_instance(rng) -> InstanceN:
    consts = ["a", "b", 1, 2][: rng.randint(1, 4)]
    arities = {f"r{k}": rng.randint(0, 3) for k in range(rng.randint(1, 3))}
    rels = {}
    for name, n in arities.items():
        rels[name] = [tuple(NULL if rng.random() < 0.3 else rng.choice(consts) for _ in range(n))
                      for _ in range(rng.randint(0, 6))]
    return InstanceN(Schema.of(**arities), rels)


def test_criterion_3_representations():
    failures = []
    if instance_to_json(R_INST)["relations"]["r"]["tuples"] != [["a", "a"], ["b", None]]:
        failures.append("total form")
    if partial_to_json(to_partial(R_INST))["relations"] != {"r": [{"1": "a", "2": "a"}, {"1": "b"}]}:
        failures.append("partial form")
    d = decompose(R_INST)
    slots = {ps: d.slot("r", ps) for ps in [(), (1,), (2,), (1, 2)]}
    if slots != {(): frozenset(), (1,): {("b",)}, (2,): frozenset(), (1, 2): {("a", "a")}}:
        failures.append("decomposed form")
    if decomposed_to_json(d)["slots"] != {"r~{1}": [["b"]], "r~{1,2}": [["a", "a"]]}:
        failures.append("decomposed json")
    if recompose(d) != R_INST or from_partial(to_partial(R_INST)) != R_INST:
        failures.append("example round trip")
    for seed in range(1000):
        i = _small_instance(rng_of(seed))
        if recompose(decompose(i)) != i or from_partial(to_partial(i)) != i:
            failures.append(seed)
        elif decompose(recompose(decompose(i))) != decompose(i):
            failures.append(seed)
        elif load_instance(json.dumps(decomposed_to_json(decompose(i)))) != i:
            failures.append((seed, "decomposed json"))
    report(3, "instance representations and 1000 random round trips", failures)


def test_criterion_4_omega_soundness():
    failures = []
    for seed in range(500):
        rng = rng_of(("omega", seed))
        e, n = nra(rng, depth=4)
        i = instance(rng)
        rows = naive_nra(e, i)
        t = rng.choice(sorted(rows, key=repr)) if rows and rng.random() < 0.5 else row(rng, n)
        f = omega(e, t, SCHEMA)
        member = t in eval_nra(e, i)
        if F.free_vars(f) or not F.is_safe_range(f):
            failures.append((seed, "not a closed safe-range formula"))
        elif member != (t in rows) or member != naive_fole(f, i, {}, fole_domain(i, f)):
            failures.append((seed, str(e), t))
    report(4, "membership formula agrees with evaluation on 500 triples", failures)


def test_criterion_5_calculus_to_algebra():
    failures = []
    sentences = 0
    seed = 0
    while sentences < 300:
        rng = rng_of(("sentences", seed))
        seed += 1
        f = safe_formula(rng, depth=3)
        if F.quantifier_depth(f) > 2:
            continue
        sentences += 1
        e = fole_to_nra(f, SCHEMA)
        for _ in range(20):
            i = instance(rng)
            sat = satisfies(to_partial(i), {}, f)
            if sat != naive_fole(f, i, {}, fole_domain(i, f)) or sat != bool(eval_nra(e, i)):
                failures.append((seed - 1, str(f)))
                break
    # the two worked translations, compared with the algebra forms given for them
    r_only = Schema.of(r=2)
    ex1 = fole_to_nra(parse_fole("exists x. r(x, NULL)"), r_only)
    want1 = parse_nra("sel[isNotNull(1)](sel[isNull(2)](rel r))")
    pq = Schema.of(p=2, q=2)
    ex2 = fole_to_nra(parse_fole("not exists y. (exists x. p(x, y)) and not (exists z. q(y, z))"), pq)
    want2 = parse_nra("(proj[2](sel[isNotNull(2)](rel p)) minus proj[1](sel[isNotNull(1)](rel q)))")
    for k in range(100):
        rng = rng_of(("worked", k))
        i1 = instance(rng, r_only)
        if bool(eval_nra(ex1, i1)) != bool(eval_nra(want1, i1)):
            failures.append(("exists r(x, NULL)", instance_to_json(i1)["relations"]))
        i2 = instance(rng, pq)
        if bool(eval_nra(ex2, i2)) != (not eval_nra(want2, i2)):
            failures.append(("foreign key sentence", instance_to_json(i2)["relations"]))
    report(5, "300 sentences x 20 instances and the two worked translations", failures)


def test_criterion_6_decomposition_bijection():
    failures = []
    arities = SCHEMA.arities()
    for seed in range(500):
        rng = rng_of(("omega_f", seed))
        f = fole(rng)
        i = instance(rng)
        free = F.free_vars(f)
        pool = sorted(fole_domain(i, f) + ["c"], key=repr)
        alpha = {v: rng.choice(pool) for v in free}
        lhs = satisfies(to_partial(i), alpha, f)
        g = omega_f(f)
        rhs = eval_fol_decomposed(g, decompose(i), alpha)
        if lhs != rhs or lhs != naive_fole(f, i, alpha, fole_domain(i, f, alpha)):
            failures.append((seed, str(f), alpha))
        if omega_f_inv(g, arities) != f or omega_f(omega_f_inv(g, arities)) != g:
            failures.append((seed, "round trip"))
    report(6, "calculus and decomposed satisfaction agree on 500 triples", failures)


def _lit_cond(t: str) -> S.Cond:
    rhs = {"T": "a", "F": "b", "U": NULL}[t]
    return S.Cmp((S.Lit("a"),), S.EQ, (S.Lit(rhs),))


def test_criterion_7_three_valued_logic():
    failures = []
    names = {"T": Truth3.T, "F": Truth3.F, "U": Truth3.U}
    empty = InstanceN(SQL_SCHEMA, {})
    entries = 0
    for (a, b), want in KLEENE_AND.items():
        entries += 1
        got = eval_3vl(S.And(_lit_cond(a), _lit_cond(b)), {}, empty)
        if (names[a] & names[b]) is not names[want] or got is not names[want]:
            failures.append(("and", a, b))
    for (a, b), want in KLEENE_OR.items():
        entries += 1
        got = eval_3vl(S.Or(_lit_cond(a), _lit_cond(b)), {}, empty)
        if (names[a] | names[b]) is not names[want] or got is not names[want]:
            failures.append(("or", a, b))
    for a, want in KLEENE_NOT.items():
        entries += 1
        if ~names[a] is not names[want] or eval_3vl(S.Not(_lit_cond(a)), {}, empty) is not names[want]:
            failures.append(("not", a))
    if entries != 21:
        failures.append(("entries", entries))

    for seed in range(1000):
        rng = rng_of(("annf", seed))
        c = where_condition(rng)
        i = instance(rng, SQL_SCHEMA)
        t = row(rng, 2)
        n = to_annf(c)
        if not is_annf(n) or S.cond_size(n) > 2 * S.cond_size(c) + 1:
            failures.append(("annf shape", seed))
        elif eval_3vl(n, {"t": t}, i, columns={"t": ("c1", "c2")}) is not \
                eval_3vl(c, {"t": t}, i, columns={"t": ("c1", "c2")}):
            failures.append(("annf value", seed, str(c)))

    for seed in range(1000):
        rng = rng_of(("where", seed))
        c = where_condition(rng)
        i = instance(rng, SQL_SCHEMA)
        t = row(rng, 2)
        cols = {"t": ("c1", "c2")}
        three = eval_3vl(c, {"t": t}, i, columns=cols)
        two = eval_2vl(rewrite_condition_2vl(c, taken={"t"}), {"t": t}, i, columns=cols)
        if (three is Truth3.T) != two:
            failures.append(("where", seed, str(c), t))
    report(7, "truth tables, normal form on 1000 conditions, 2VL rewriting on 1000 triples", failures)


PASSPORT = """
SELECT DISTINCT person.name
FROM person
WHERE NOT (person.passport != 'Italian' AND
           person.cityofbirth NOT IN
             (SELECT DISTINCT city.name
              FROM city
              WHERE city.country = 'Italy'))
"""

PASSPORT_2VL = """
SELECT DISTINCT person.name
FROM person
WHERE person.passport =2vl 'Italian' OR
      EXISTS (SELECT DISTINCT italiancity.name
              FROM (SELECT DISTINCT city.name
                    FROM city
                    WHERE city.country =2vl 'Italy') AS italiancity
              WHERE person.cityofbirth =2vl italiancity.name)
"""


def test_criterion_8_sql_differential():
    failures = []
    for seed in range(300):
        rng = rng_of(("sql", seed))
        q = sql_query(rng, max_depth=2)
        assert S.nesting_depth(q) <= 2
        i = instance(rng, SQL_SCHEMA)
        direct = exec_sql(q, i)
        compiled = eval_nra(compile_to_nra(rewrite_2vl(q, SQL_SCHEMA), SQL_SCHEMA), i)
        if direct != compiled:
            failures.append((seed, str(q)))
    catalog = {"person": ["name", "passport", "cityofbirth"], "city": ["name", "country"]}
    got = rewrite_2vl(parse_sql(PASSPORT, catalog), catalog)
    want = parse_sql(PASSPORT_2VL, catalog)
    aliases = {f.alias for sub in S.subqueries(got.where) for f in sub.from_ if isinstance(f, S.SubqueryRef)}
    renamed = str(got)
    for a in aliases:
        renamed = re.sub(rf"\b{a}\b", "italiancity", renamed)
    if renamed != str(want):
        failures.append(("passport", str(got)))
    report(8, "300 random queries: direct execution equals the compiled algebra; worked rewrite", failures)


def test_criterion_9_no_information():
    failures = []
    got = no_info_rewrite(parse_fole("P(t, NULL, NULL)"))
    want = parse_fole("P(t, NULL, NULL) or (exists x. P(t, x, NULL)) or (exists x. P(t, NULL, x))"
                      " or (exists x, y. P(t, x, y))")
    if got != want:
        failures.append(("golden", str(got)))
    for seed in range(200):
        rng = rng_of(("noinfo", seed))
        f = fole(rng)
        i = instance(rng)
        dom = fole_domain(i, f)
        alpha = {v: rng.choice(dom) for v in F.free_vars(f)}
        p = to_partial(i)
        before, after = satisfies(p, alpha, f), satisfies(p, alpha, no_info_rewrite(f))
        if before and not after:
            failures.append(("implication", seed, str(f), alpha))
        if not _mentions_null(f) and before != after:
            failures.append(("null-free equivalence", seed, str(f)))
    report(9, "worked expansion and 200 random formulas", failures)


def _mentions_null(f) -> bool:
    return any(isinstance(g, F.Atom) and F.N in g.terms for g in F.subformulas(f))


if __name__ == "__main__":
    import sys
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for t in tests:
        try:
            t()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
