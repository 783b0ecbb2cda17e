"""Lifting flow rewrites to sound derivation transformations.

Each rewrite rule acts on a derivation through the same recipe: replace the
literal occurrences threaded along the redex edge by a unit (or by a
duplicated literal for the cocontraction rules), which turns the two anchor
steps into steps on degenerate shapes; those are then repaired locally with
eq steps and small blocks of atomic rules.  Occurrence positions come from
the extraction's occurrence map, so only the touched paths of the derivation
tree are rebuilt.

normalize_proof drives this step by step along the weakenings-then-
cocontractions strategy until the flow is normal, turning any KS+ proof into
a KS proof of the same conclusion.
"""

from __future__ import annotations

from dataclasses import dataclass

from .derivation import (
    ACD,
    ACU,
    AID,
    AWD,
    AWU,
    COMP,
    KS,
    KS_PLUS,
    LEAF,
    M,
    S,
    SKS,
    CheckFailure,
    Derivation,
    check,
    compose,
    conclusion,
    ensure_checked,
    glue,
    in_context,
    is_proof,
    leaf,
    premiss,
    size,
    step,
)
from .flow import Extraction, extract, iso
from .formula import bot, conj, disj, occurrence_literals, replace_occurrences, top
from .rewrite import (
    CD_CU,
    CD_WU,
    CONT,
    CU_WU,
    ID_CU,
    ID_WU,
    NORM,
    WD_CD,
    WD_CU,
    WD_WU,
    WK,
    Redex,
    _MutFlow,
    _scan,
    apply_redex,
    normalize,
)


class LiftError(ValueError):
    pass


# -- tree surgery -----------------------------------------------------------------


def _trie_at(trie, path):
    node = trie
    for b in path:
        node = node.setdefault(b, {})
    return node


def _add_substitutions(trie, segment, repl_formula):
    for leafpath, occidx in segment:
        node = _trie_at(trie, leafpath)
        subs = node.setdefault("subs", {})
        if occidx in subs:
            raise LiftError("overlapping substitutions on one occurrence")
        subs[occidx] = repl_formula


def _add_replacer(trie, path, fn):
    node = _trie_at(trie, path)
    if "repl" in node:
        raise LiftError("two step replacements at one path")
    node["repl"] = fn


def _rebuild(root: Derivation, trie) -> Derivation:
    """Apply a surgery trie to the derivation; untouched subtrees are shared."""
    order = []
    stack = [(root, trie)]
    while stack:
        node, tr = stack.pop()
        order.append((node, tr))
        if node.kind != LEAF:
            ta = tr.get(0)
            tb = tr.get(1)
            if tb is not None:
                stack.append((node.b, tb))
            if ta is not None:
                stack.append((node.a, ta))
    done = {}
    for node, tr in reversed(order):
        if node.kind == LEAF:
            subs = tr.get("subs")
            new = leaf(replace_occurrences(node.a, subs)) if subs else node
        else:
            ta = tr.get(0)
            tb = tr.get(1)
            a2 = done[(id(node.a), id(ta))] if ta is not None else node.a
            b2 = done[(id(node.b), id(tb))] if tb is not None else node.b
            if a2 is node.a and b2 is node.b:
                new = node
            elif node.kind == COMP:
                new = compose(node.rule, a2, b2)
            else:
                new = step(node.rule, a2, b2)
        fn = tr.get("repl")
        if fn is not None:
            new = fn(new)
        done[(id(node), id(tr))] = new
    return done[(id(root), id(trie))]


# -- per-rule transformers -----------------------------------------------------------


def _join(node: Derivation) -> Derivation:
    """Replace a step whose sides became =-equal by an eq joint."""
    return glue(node.a, node.b)


def _repair_id_wu(node: Derivation) -> Derivation:
    # T over [a|T] (or [T|a]): re-create the survivor with a weakening
    target = premiss(node.b)
    if target.a == top:
        block = compose("or", leaf(top), step(AWD, leaf(bot), leaf(target.b)))
    else:
        block = compose("or", step(AWD, leaf(bot), leaf(target.a)), leaf(top))
    return glue(node.a, block, node.b)


def _repair_wd_cu(node: Derivation) -> Derivation:
    # F over (a&a): two weakenings through (F&F)
    a = premiss(node.b).a
    block = compose("and", step(AWD, leaf(bot), leaf(a)), step(AWD, leaf(bot), leaf(a)))
    return glue(node.a, block, node.b)


def _repair_wd_wu(node: Derivation) -> Derivation:
    # F over T: the unit switch
    gadget = step(S, leaf(conj(bot, disj(bot, top))), leaf(disj(conj(bot, bot), top)))
    return glue(node.a, gadget, node.b)


def _repair_cd_wu(node: Derivation) -> Derivation:
    # [a|a] over T: coweaken both copies, then [T|T] = T
    a = conclusion(node.a).a
    block = compose("or", step(AWU, leaf(a), leaf(top)), step(AWU, leaf(a), leaf(top)))
    return glue(node.a, block, node.b)


def _repair_cd_cu(node: Derivation) -> Derivation:
    # [a|a] over (a&a): cocontract both copies, medial, contract both sides
    a = conclusion(node.a).a
    aa = conj(a, a)
    b1 = compose("or", step(ACU, leaf(a), leaf(aa)), step(ACU, leaf(a), leaf(aa)))
    b2 = step(M, leaf(disj(aa, aa)), leaf(conj(disj(a, a), disj(a, a))))
    b3 = compose("and", step(ACD, leaf(disj(a, a)), leaf(a)), step(ACD, leaf(disj(a, a)), leaf(a)))
    return glue(node.a, b1, b2, b3, node.b)


def _repair_id_cu(node: Derivation) -> Derivation:
    # T over [(c&c)|b] (or mirrored): two identities, contract the duals
    target = premiss(node.b)
    if target.a.kind == "and":
        cc, b = target.a, target.b
    else:
        b, cc = target.a, target.b
    c = cc.a
    pair = disj(c, b)
    ids = compose(
        "and",
        step(AID, leaf(top), leaf(pair)),
        step(AID, leaf(top), leaf(pair)),
    )
    s1 = step(S, leaf(conj(pair, pair)), leaf(disj(conj(pair, c), b)))
    inner = glue(
        leaf(conj(pair, c)),
        step(S, leaf(conj(c, pair)), leaf(disj(conj(c, c), b))),
    )
    w1 = in_context(disj(conj(pair, c), b), (0,), inner)
    w2 = in_context(disj(conj(c, c), disj(b, b)), (1,), step(ACD, leaf(disj(b, b)), leaf(b)))
    block = glue(
        leaf(top),
        leaf(conj(top, top)),
        ids,
        s1,
        w1,
        leaf(disj(conj(c, c), disj(b, b))),
        w2,
    )
    return glue(node.a, block, node.b)


# substitution formula and repairs per rewrite rule; None means plain eq joint
_TRANSFORMS = {
    WD_CD: (lambda lit: bot, _join, _join),
    ID_WU: (lambda lit: top, _repair_id_wu, _join),
    CU_WU: (lambda lit: top, _join, _join),
    WD_CU: (lambda lit: bot, _join, _repair_wd_cu),
    WD_WU: (lambda lit: bot, _join, _repair_wd_wu),
    CD_WU: (lambda lit: top, _repair_cd_wu, _join),
    CD_CU: (lambda lit: conj(lit, lit), _repair_cd_cu, _join),
    ID_CU: (lambda lit: conj(lit, lit), _repair_id_cu, _join),
}


def _segment_literal(d: Derivation, ext: Extraction, edge: int):
    """The literal carried by an edge, read off the first occurrence."""
    leafpath, occidx = ext.segment(edge)[0]
    node = d
    for b in leafpath:
        node = node.a if b == 0 else node.b
    return occurrence_literals(node.a)[occidx]


def _surgery_for(trie, d: Derivation, ext: Extraction, redex: Redex):
    subst, repair_src, repair_tgt = _TRANSFORMS[redex.rule]
    literal = _segment_literal(d, ext, redex.edge)
    _add_substitutions(trie, ext.segment(redex.edge), subst(literal))
    _add_replacer(trie, ext.node_path(redex.src), repair_src)
    _add_replacer(trie, ext.node_path(redex.tgt), repair_tgt)


def lift_step(d: Derivation, redex: Redex, ext: Extraction | None = None, verify: bool = True) -> Derivation:
    """Transform d so that its flow becomes the one-step reduct of redex.

    Premiss and conclusion are preserved exactly; the result is re-checked,
    and (for desk-scale flows) its flow is verified isomorphic to the reduct.
    """
    if ext is None:
        ext = extract(d)
    mut = _MutFlow(ext.flow)
    mut.check_redex(redex)  # raises StaleRedexError on mismatch
    trie = {}
    _surgery_for(trie, d, ext, redex)
    result = _rebuild(d, trie)
    report = check(result, SKS)
    if not report.ok:
        raise CheckFailure(report)
    if endpoints_of(result) != endpoints_of(d):
        raise LiftError("lift step changed the endpoints")
    if verify:
        reduct = apply_redex(ext.flow, redex)
        new_ext = extract(result, assume_checked=True)
        if new_ext.flow.kind_census() != reduct.kind_census() or len(
            new_ext.flow.edges
        ) != len(reduct.edges):
            raise LiftError("lifted flow does not match the reduct")
        if len(reduct.nodes) <= 40 and not iso(new_ext.flow, reduct):
            raise LiftError("lifted flow is not isomorphic to the reduct")
    return result


def endpoints_of(d: Derivation):
    return premiss(d), conclusion(d)


@dataclass
class NormalizeProofReport:
    wk_steps: int
    cont_steps: int
    passes: int
    input_size: int
    output_size: int
    input_flow_edges: int
    output_flow_edges: int


def normalize_proof(d: Derivation, with_report: bool = False):
    """Turn a KS+ proof into a KS proof of the same conclusion.

    Weakening redexes are lifted until exhausted, then cocontraction ones;
    disjoint redexes are lifted in batches between extractions.  The final
    flow is checked redex-free and against the flow-level normal form.
    """
    ensure_checked(d, KS_PLUS)
    if not is_proof(d):
        raise LiftError("normalize_proof expects a proof (premiss T)")
    ext0 = extract(d, assume_checked=True)
    target, _ = normalize(ext0.flow, measures=False)

    current = d
    ext = ext0
    wk_steps = cont_steps = passes = 0
    careful = size(d) <= 20000
    for sub in (WK, CONT):
        while True:
            redexes = _scan(ext.flow.nodes, ext.flow.edges, sub)
            if not redexes:
                break
            passes += 1
            trie = {}
            used = set()
            applied = 0
            for r in redexes:
                if r.src in used or r.tgt in used:
                    continue
                _surgery_for(trie, current, ext, r)
                used.add(r.src)
                used.add(r.tgt)
                applied += 1
            current = _rebuild(current, trie)
            if careful:
                ensure_checked(current, SKS)
            if sub is WK:
                wk_steps += applied
            else:
                cont_steps += applied
            ext = extract(current, assume_checked=True)

    ensure_checked(current, KS)
    if endpoints_of(current) != endpoints_of(d):
        raise LiftError("normalization changed the endpoints")
    final = ext.flow
    if _scan(final.nodes, final.edges, NORM):
        raise LiftError("result flow still has redexes")
    if final.kind_census() != target.kind_census() or len(final.edges) != len(target.edges):
        raise LiftError("result flow disagrees with the flow-level normal form")
    if len(target.nodes) <= 40 and not iso(final, target):
        raise LiftError("result flow not isomorphic to the flow-level normal form")
    if with_report:
        report = NormalizeProofReport(
            wk_steps,
            cont_steps,
            passes,
            size(d),
            size(current),
            len(ext0.flow.edges),
            len(final.edges),
        )
        return current, report
    return current
