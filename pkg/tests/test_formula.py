import itertools

import pytest
from hypothesis import given, settings, strategies as st

from deepflow.formula import (
    FormulaSyntaxError,
    UndefinedVariableError,
    bot,
    canonicalize,
    canonical_occurrence_map,
    conj,
    disj,
    dual,
    eq_mod,
    evaluate,
    fparse,
    fprint,
    is_tautology,
    lit,
    mirror_dual,
    neg,
    top,
    variables,
)

formulas = st.recursive(
    st.sampled_from([top, bot])
    | st.builds(lit, st.sampled_from(["a", "b", "c", "d"]), st.booleans()),
    lambda kids: st.builds(conj, kids, kids) | st.builds(disj, kids, kids),
    max_leaves=12,
)


def all_assignments(f, extra=()):
    vs = sorted(variables(f) | set(extra))
    for bits in itertools.product([False, True], repeat=len(vs)):
        yield dict(zip(vs, bits))


def test_dual_examples():
    assert dual(top) == bot
    assert dual(lit("a")) == lit("a", True)
    assert dual(conj(disj(lit("a"), neg(lit("b"))), bot)) == disj(
        conj(neg(lit("a")), lit("b")), top
    )


def test_canonicalize_examples():
    assert canonicalize(fparse("(a|F)")) == lit("a")
    assert canonicalize(fparse("((a|b)|c)")) == canonicalize(fparse("(a|(b|c))"))
    assert canonicalize(fparse("(T&T)")) == top


def test_canonicalize_idempotent_units():
    assert canonicalize(fparse("(F|F)")) == bot
    assert canonicalize(fparse("(F&a)")) == canonicalize(fparse("(a&F)"))
    # no absorption: a|T is not T
    assert canonicalize(fparse("(a|T)")) != top


def test_eq_mod_examples():
    assert eq_mod(fparse("(a|b)"), fparse("(b|a)"))
    assert not eq_mod(lit("a"), neg(lit("a")))
    assert eq_mod(fparse("(T|T)"), top)


def test_eval_examples():
    assert evaluate(fparse("(a|~a)"), {"a": True}) is True
    assert evaluate(bot, {}) is False
    with pytest.raises(UndefinedVariableError):
        evaluate(lit("a"), {})


def test_php1_truth_table():
    php1 = fparse("(~a01|(~a11|(a01&a11)))")
    for alpha in all_assignments(php1):
        assert evaluate(php1, alpha)
    assert is_tautology(php1)


def test_parse_print_round_trip():
    assert fprint(fparse("(a & ~a)")) == "(a&~a)"
    assert fparse("T") == top
    text = "((a|b)|c)"
    assert fprint(fparse(text)) == text
    with pytest.raises(FormulaSyntaxError):
        fparse("(a|b")
    with pytest.raises(FormulaSyntaxError):
        fparse("a b")


@given(formulas)
@settings(max_examples=80, deadline=None)
def test_dual_involution(f):
    assert dual(dual(f)) == f
    assert mirror_dual(mirror_dual(f)) == f


@given(formulas)
@settings(max_examples=80, deadline=None)
def test_canonicalize_idempotent_and_sound(f):
    c = canonicalize(f)
    assert canonicalize(c) == c
    assert eq_mod(f, c)
    for alpha in all_assignments(f):
        assert evaluate(f, alpha) == evaluate(c, alpha)


@given(formulas, formulas, formulas)
@settings(max_examples=40, deadline=None)
def test_eq_mod_equivalence(f, g, h):
    assert eq_mod(f, f)
    if eq_mod(f, g):
        assert eq_mod(g, f)
        if eq_mod(g, h):
            assert eq_mod(f, h)


@given(formulas, formulas)
@settings(max_examples=40, deadline=None)
def test_eq_mod_implies_same_semantics(f, g):
    if eq_mod(f, g):
        for alpha in all_assignments(f, variables(g)):
            assert evaluate(f, alpha) == evaluate(g, alpha)


@given(formulas)
@settings(max_examples=60, deadline=None)
def test_dual_flips_semantics(f):
    d = dual(f)
    for alpha in all_assignments(f):
        assert evaluate(d, alpha) == (not evaluate(f, alpha))


@given(formulas)
@settings(max_examples=60, deadline=None)
def test_occurrence_map_is_bijective(f):
    m = canonical_occurrence_map(f)
    assert sorted(m) == list(range(len(m)))
