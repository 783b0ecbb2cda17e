import itertools
import random

import pytest

from deepflow.derivation import (
    ACD,
    ACU,
    AID,
    AIU,
    GCD,
    GCU,
    GID,
    GIU,
    GWD,
    GWU,
    KS,
    KS_PLUS,
    M,
    S,
    SKS,
    SubstitutionError,
    check,
    compose,
    conclusion,
    dedupe_disjunction,
    dparse,
    dprint,
    dual_system,
    dualize,
    endpoints,
    expand_generic,
    fan_literal,
    glue,
    in_context,
    leaf,
    premiss,
    rule_census,
    size,
    step,
    step_count,
    substitute_atom,
)
from deepflow.families import demo_proof, random_derivation, random_ks_plus_proof
from deepflow.formula import (
    bot,
    conj,
    disj,
    dual,
    eq_mod,
    evaluate,
    lit,
    mirror_dual,
    neg,
    top,
    variables,
)

a, b, c = lit("a"), lit("b"), lit("c")
ab = neg(a)


def test_endpoints_examples():
    assert endpoints(leaf(conj(a, b))) == (conj(a, b), conj(a, b))
    d = compose("or", leaf(a), step(ACD, leaf(disj(b, b)), leaf(b)))
    assert endpoints(d) == (disj(a, disj(b, b)), disj(a, b))
    assert endpoints(demo_proof()) == (top, disj(conj(a, a), ab))


def test_check_examples():
    assert check(step(AID, leaf(top), leaf(disj(a, ab))), KS).ok
    f = conj(a, b)
    bad = step(ACD, leaf(disj(f, f)), leaf(f))
    report = check(bad, SKS)
    assert not report.ok and report.errors[0].code == "schema-mismatch"
    sw = step(S, leaf(conj(a, disj(b, c))), leaf(disj(conj(a, b), c)))
    assert check(sw, KS).ok


def test_check_rule_not_in_system():
    d = step(ACU, leaf(a), leaf(conj(a, a)))
    assert check(d, SKS).ok
    report = check(d, KS)
    assert not report.ok and report.errors[0].code == "rule-not-in-system"


def test_eq_steps_validated():
    good = step("eq", leaf(disj(a, bot)), leaf(a))
    assert check(good, KS).ok
    bad = step("eq", leaf(a), leaf(b))
    report = check(bad, KS)
    assert not report.ok and report.errors[0].code == "eq-mismatch"


def test_expand_generic_contraction():
    d = expand_generic(GCD, disj(a, b))
    assert endpoints(d) == (disj(disj(a, b), disj(a, b)), disj(a, b))
    assert rule_census(d).get(ACD) == 2
    d2 = expand_generic(GCD, conj(a, b))
    assert rule_census(d2).get(M) == 1 and rule_census(d2).get(ACD) == 2
    assert check(d2, KS).ok
    d3 = expand_generic(GCD, a)
    assert rule_census(d3) == {ACD: 1}


@pytest.mark.parametrize("rule", [GID, GWD, GCD, GIU, GWU, GCU])
def test_expand_generic_endpoints_match_schema(rule):
    rng = random.Random(3)
    from deepflow.families import random_formula

    for _ in range(12):
        f = random_formula(rng, ["a", "b", "c"], max_depth=3)
        d = expand_generic(rule, f)
        want = {
            GID: (top, disj(f, dual(f))),
            GWD: (bot, f),
            GCD: (disj(f, f), f),
            GIU: (conj(f, dual(f)), bot),
            GWU: (f, top),
            GCU: (f, conj(f, f)),
        }[rule]
        assert endpoints(d) == want
        system = KS if rule in (GID, GWD, GCD) else SKS
        assert check(d, system).ok


def test_expand_generic_size_growth_quadratic():
    sizes = []
    for n in range(1, 21):
        f = None
        for i in range(n):
            v = lit(f"x{i}")
            f = v if f is None else disj(f, v)
        sizes.append(size(expand_generic(GCD, f)))
    assert all(s2 > s1 for s1, s2 in zip(sizes, sizes[1:]))
    # measured growth stays under a fixed quadratic
    assert all(s <= 4 * n * n + 8 * n + 4 for n, s in enumerate(sizes, 1))


def test_dualize_examples():
    d = step(AID, leaf(top), leaf(disj(a, ab)))
    dd = dualize(d)
    assert dd.rule == AIU
    assert eq_mod(premiss(dd), conj(ab, a)) and conclusion(dd) == bot
    assert check(dd, dual_system(KS)).ok


def test_dualize_involution_and_mirror():
    rng = random.Random(9)
    for _ in range(10):
        d = random_derivation(rng, steps=8)
        assert dprint(dualize(dualize(d))) == dprint(d)
    comp = compose("and", leaf(a), leaf(b))
    dd = dualize(comp)
    assert dd.rule == "or" and dd.a.a == neg(b) and dd.b.a == neg(a)


def test_dualize_checks_in_dual_system():
    rng = random.Random(31)
    for _ in range(15):
        d = random_derivation(rng, steps=8)
        assert check(dualize(d), dual_system(SKS)).ok
        p, q = endpoints(d)
        assert endpoints(dualize(d)) == (mirror_dual(q), mirror_dual(p))


def test_size_examples():
    assert size(leaf(conj(a, neg(b)))) == 2
    assert size(step(AID, leaf(top), leaf(disj(a, ab)))) == 2
    assert size(demo_proof()) == 36


def test_step_count_separate_from_size():
    d = demo_proof()
    assert step_count(d) > 0
    assert step_count(glue(leaf(a), leaf(disj(a, bot)))) == 1  # the eq joint


def test_substitute_atom():
    d = leaf(disj(a, b))
    out = substitute_atom(d, a, conj(a, a))
    assert conclusion(out) == disj(conj(a, a), b)
    sw = step(S, leaf(conj(a, disj(b, ab))), leaf(disj(conj(a, b), ab)))
    out2 = substitute_atom(sw, b, disj(b, c))
    assert check(out2, SKS).ok
    with_step = step(ACD, leaf(disj(a, a)), leaf(a))
    with pytest.raises(SubstitutionError):
        substitute_atom(with_step, a, conj(a, a))
    # the dual occurrence is replaced by the dual formula
    out3 = substitute_atom(leaf(conj(a, ab)), a, conj(a, a))
    assert conclusion(out3) == conj(conj(a, a), disj(ab, ab))


def test_substitution_keeps_logical_steps_valid():
    rng = random.Random(17)
    for _ in range(10):
        d = random_ks_plus_proof(rng, steps=6)
        # pick an atom no structural step touches, if any
        for name in ("z",):
            out = substitute_atom(d, lit(name), conj(lit(name), lit(name)))
            assert check(out, KS_PLUS).ok


def test_soundness_spot_check():
    rng = random.Random(101)
    for _ in range(40):
        d = random_derivation(rng, steps=7)
        assert check(d, SKS).ok
        p, q = endpoints(d)
        vs = sorted(variables(p) | variables(q))
        for bits in itertools.product([False, True], repeat=len(vs)):
            alpha = dict(zip(vs, bits))
            if evaluate(p, alpha):
                assert evaluate(q, alpha)


def test_glue_and_in_context():
    d = glue(leaf(disj(a, bot)), leaf(a))
    assert check(d, KS).ok and conclusion(d) == a
    ctx = conj(a, disj(b, b))
    d2 = in_context(ctx, (1,), step(ACD, leaf(disj(b, b)), leaf(b)))
    assert endpoints(d2) == (ctx, conj(a, b))


def test_builders():
    d = dedupe_disjunction([a, b, a])
    assert check(d, KS).ok
    assert eq_mod(conclusion(d), disj(a, b))
    f = fan_literal(a, 3)
    assert check(f, SKS).ok
    assert conclusion(f) == conj(a, conj(a, a))


def test_sksd_round_trip():
    d = demo_proof()
    text = dprint(d)
    assert dprint(dparse(text)) == text
    assert "; comment\n" not in dprint(dparse(text + "; comment\n"))
    assert endpoints(dparse(text)) == endpoints(d)


def test_sksd_errors():
    from deepflow.derivation import SksdSyntaxError

    with pytest.raises(SksdSyntaxError):
        dparse("(and (form a)")
    with pytest.raises(SksdSyntaxError):
        dparse("(step nosuch (form a) (form a))")
