import pytest
from gen import instance, rng_of
from hypothesis import given
from hypothesis import strategies as st

from nullrel import (NULL, ConstraintError, ForeignKey, NotNull, PrimaryKey, Schema, Unique, check,
                     check_foreign_key_simple, check_not_null, check_primary_key, check_unique,
                     constraint_to_fole, cross_check, denials, load_instance, nullify, parse_constraint)
from nullrel import fole as F
from nullrel.constraints import (check_by_denials, check_by_fole, check_not_null_by_membership, validate_all,
                                 violations)

PQ = load_instance('{"p": [["a", "a"], ["b", null], [null, "b"], [null, null]], "q": [["a", "a"], ["b", null]]}')
WORKED = [Unique("p", (1,)), Unique("q", (1,)), NotNull("q", 1), ForeignKey("p", (2,), "q", (1,))]
S3 = Schema.of(r=3, s=2)


def test_worked_constraints_hold():
    for d in WORKED:
        assert check(d, PQ)
        assert check_by_denials(d, PQ, "original") and check_by_denials(d, PQ, "corrected")
        assert check_by_fole(d, PQ, "corrected")
    assert cross_check(WORKED, PQ) == []


def test_original_denials():
    assert [str(e) for e in denials(Unique("q", (1,)), PQ.schema, "original")] == ["sel[1=3](sel[2!=4]((rel q x rel q)))"]
    assert [str(e) for e in denials(NotNull("q", 1), PQ.schema)] == ["sel[isNull(1)](rel q)"]
    assert [str(e) for e in denials(ForeignKey("p", (2,), "q", (1,)), PQ.schema)] == \
        ["(proj[2](sel[isNotNull(2)](rel p)) minus proj[1](sel[isNotNull(1)](rel q)))"]


def test_violated_examples():
    assert not check_unique(load_instance('{"q": [["a", "a"], ["a", "b"]]}'), "q", (1,))
    assert check_unique(load_instance('{"q": [[null, "a"], [null, "b"]]}'), "q", (1,))
    bad_fk = load_instance('{"p": [["a", "a"], ["a", "c"]], "q": [["a", "a"], ["b", null]]}')
    assert not check_foreign_key_simple(bad_fk, "p", (2,), "q", (1,))
    assert violations(ForeignKey("p", (2,), "q", (1,)), bad_fk) == [("a", "c")]
    assert not check_not_null(PQ, "q", 2)
    assert violations(NotNull("q", 2), PQ) == [("b", NULL)]


def test_empty_relations_satisfy_everything():
    i = load_instance('{"p": [], "q": []}', PQ.schema)
    for d in WORKED + [PrimaryKey("q", (1,))]:
        assert check(d, i) and check_by_fole(d, i, "corrected") and check_by_denials(d, i)


def test_nullify_shorthand():
    assert nullify("q", 2, [1], [F.Const("b")]) == F.Atom("q", (F.Const("b"), F.N))
    assert nullify("r", 3, [], []) == F.Atom("r", (F.N, F.N, F.N))


def test_original_unique_sentence_is_too_weak_with_two_other_columns():
    # the key repeats, but never under every null pattern of the other columns at once
    i = load_instance('{"r": [["a", "b", null], ["a", null, "c"]]}')
    d = Unique("r", (1,))
    assert not check(d, i)
    assert check_by_fole(d, i, "original")
    assert not check_by_fole(d, i, "corrected") and not check_by_denials(d, i)
    assert [str(x) for x in cross_check([d], i)] == ["unique r 1: direct=False fole:original=True"]


def test_original_unique_sentence_needs_a_non_key_column():
    with pytest.raises(ConstraintError):
        constraint_to_fole(Unique("q", (1, 2)), PQ.schema, "original")
    assert check_by_fole(Unique("q", (1, 2)), PQ, "corrected")


def test_original_unique_denial_is_binary_only():
    with pytest.raises(ConstraintError):
        denials(Unique("r", (1,)), S3, "original")


def test_original_foreign_key_sentence_points_the_wrong_way():
    i = load_instance('{"p": [["a", "b"]], "q": []}', PQ.schema)
    d = ForeignKey("p", (2,), "q", (1,))
    assert not check(d, i)
    assert check_by_fole(d, i, "original") and not check_by_fole(d, i, "corrected")


def test_not_null_by_membership_example():
    assert check_not_null_by_membership(PQ, "q", 1)
    assert not check_not_null_by_membership(PQ, "q", 2)


@pytest.mark.parametrize("text,want", [
    ("unique q 1", Unique("q", (1,))),
    ("pk q 1", PrimaryKey("q", (1,))),
    ("notnull q 2", NotNull("q", 2)),
    ("fk p 2 -> q 1", ForeignKey("p", (2,), "q", (1,))),
])
def test_parse_constraint(text, want):
    d = parse_constraint(text, PQ.schema)
    assert d == want and str(d) == text


@pytest.mark.parametrize("text", ["bogus q 1", "unique q 3", "fk p 2 -> q 1,2", "notnull q 1,2", "unique q 1 -> p 1",
                                  "unique zz 1"])
def test_parse_constraint_errors(text):
    with pytest.raises(ConstraintError):
        parse_constraint(text, PQ.schema)


def test_one_primary_key_per_table():
    with pytest.raises(ConstraintError):
        validate_all([PrimaryKey("q", (1,)), PrimaryKey("q", (2,))], PQ.schema)


def _random_constraint(rng, schema):
    rel = rng.choice(sorted(schema.relations))
    m = schema.arity(rel)
    cols = tuple(sorted(rng.sample(range(1, m + 1), rng.randint(1, min(2, m)))))
    kind = rng.choice(["unique", "pk", "notnull", "fk"])
    if kind == "unique":
        return Unique(rel, cols)
    if kind == "pk":
        return PrimaryKey(rel, cols)
    if kind == "notnull":
        return NotNull(rel, cols[0])
    ref = rng.choice(sorted(schema.relations))
    return ForeignKey(rel, cols, ref, tuple(range(1, len(cols) + 1)))


@given(st.integers(0, 10 ** 6))
def test_corrected_renderings_agree_with_direct_checks(seed):
    rng = rng_of(seed)
    i = instance(rng, S3, max_rows=4, null_p=0.35)
    d = _random_constraint(rng, S3)
    assert check_by_fole(d, i, "corrected") == check(d, i)
    assert check_by_denials(d, i, "corrected") == check(d, i)


@given(st.integers(0, 10 ** 6))
def test_primary_key_is_unique_plus_not_null(seed):
    rng = rng_of(seed)
    i = instance(rng, S3)
    rel = rng.choice(["r", "s"])
    m = S3.arity(rel)
    cols = tuple(sorted(rng.sample(range(1, m + 1), rng.randint(1, m))))
    assert check_primary_key(i, rel, cols) == (check_unique(i, rel, cols)
                                                and all(check_not_null(i, rel, c) for c in cols))


def _classical_unique(i, rel, cols):
    rows = list(i[rel])
    return all(not (all(a[c - 1] == b[c - 1] for c in cols)) or a == b for a in rows for b in rows)


@given(st.integers(0, 10 ** 6))
def test_null_free_instances_reduce_to_classical_definitions(seed):
    rng = rng_of(seed)
    i = instance(rng, S3, null_p=0.0)
    assert check_unique(i, "r", (1,)) == _classical_unique(i, "r", (1,))
    assert check_by_fole(Unique("r", (1,)), i, "original") == _classical_unique(i, "r", (1,))
    assert check_not_null(i, "r", 2)
    s_firsts = {t[0] for t in i["s"]}
    assert check_foreign_key_simple(i, "r", (3,), "s", (1,)) == all(t[2] in s_firsts for t in i["r"])


@given(st.integers(0, 10 ** 6))
def test_not_null_membership_matches_direct_check(seed):
    rng = rng_of(seed)
    i = instance(rng, Schema.of(s=2), max_rows=3)
    col = rng.randint(1, 2)
    assert check_not_null_by_membership(i, "s", col) == check_not_null(i, "s", col)
