"""The eight-rule flow rewriting system and its normalization strategies.

Every left-hand side is a pair of nodes joined by one edge, so redex
discovery is a single scan over edges.  Normalization exhausts the
size-decreasing weakening rules first and the two cocontraction rules second;
by confluence the normal form does not depend on the order within a phase,
which also licenses applying batches of node-disjoint redexes between
rescans.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .derivation import ACD, ACU, AID, AWD, AWU
from .flow import AtomicFlow, flow_fingerprint, iso, topo_order, validate

WD_CD, ID_WU, CU_WU, WD_CU, WD_WU, CD_WU, CD_CU, ID_CU = (
    "wd-cd",
    "id-wu",
    "cu-wu",
    "wd-cu",
    "wd-wu",
    "cd-wu",
    "cd-cu",
    "id-cu",
)

RULES = (WD_CD, ID_WU, CU_WU, WD_CU, WD_WU, CD_WU, CD_CU, ID_CU)
WK = frozenset({WD_CD, ID_WU, CU_WU, WD_CU, WD_WU, CD_WU})
CONT = frozenset({CD_CU, ID_CU})
NORM = WK | CONT

_RULE_INDEX = {r: i for i, r in enumerate(RULES)}

_PATTERN = {
    (AWD, ACD): WD_CD,
    (AID, AWU): ID_WU,
    (ACU, AWU): CU_WU,
    (AWD, ACU): WD_CU,
    (AWD, AWU): WD_WU,
    (ACD, AWU): CD_WU,
    (ACD, ACU): CD_CU,
    (AID, ACU): ID_CU,
}

# net change in edge count per rule
_SIZE_DELTA = {
    WD_CD: -2,
    ID_WU: -1,
    CU_WU: -2,
    WD_CU: -1,
    WD_WU: -1,
    CD_WU: -1,
    CD_CU: 3,
    ID_CU: 1,
}


@dataclass(frozen=True)
class Redex:
    rule: str
    src: int
    tgt: int
    edge: int

    def anchors(self):
        return (self.src, self.tgt)


class StaleRedexError(ValueError):
    pass


@dataclass
class TraceStep:
    rule: str
    anchors: tuple
    size_after: int
    d_after: tuple | None


def trace_to_json(trace) -> str:
    return (
        json.dumps(
            [
                {
                    "rule": t.rule,
                    "anchors": list(t.anchors),
                    "size_after": t.size_after,
                    "D_after": None if t.d_after is None else list(t.d_after),
                }
                for t in trace
            ],
            indent=1,
        )
        + "\n"
    )


def find_redexes(flow: AtomicFlow, sub=NORM):
    """All redexes of the subsystem, deterministically ordered."""
    report = validate(flow)
    if not report.ok:
        raise ValueError(f"invalid flow: {report.errors}")
    return _scan(flow.nodes, flow.edges, sub)


def _scan(nodes, edges, sub):
    out = []
    for e, (s, t) in edges.items():
        if s is None or t is None:
            continue
        rule = _PATTERN.get((nodes[s[0]], nodes[t[0]]))
        if rule is not None and rule in sub:
            out.append(Redex(rule, s[0], t[0], e))
    out.sort(key=lambda r: (_RULE_INDEX[r.rule], r.src, r.tgt, r.edge))
    return out


class _MutFlow:
    """Mutable flow with incrementally maintained port adjacency."""

    def __init__(self, flow: AtomicFlow):
        self.nodes = dict(flow.nodes)
        self.edges = dict(flow.edges)
        self.ins = {n: {} for n in self.nodes}
        self.outs = {n: {} for n in self.nodes}
        for e, (s, t) in self.edges.items():
            if s is not None:
                self.outs[s[0]][s[1]] = e
            if t is not None:
                self.ins[t[0]][t[1]] = e
        self.next_id = max([*self.nodes, *self.edges], default=-1) + 1

    def freeze(self) -> AtomicFlow:
        return AtomicFlow(self.nodes, self.edges)

    def add_node(self, kind):
        n = self.next_id
        self.next_id += 1
        self.nodes[n] = kind
        self.ins[n] = {}
        self.outs[n] = {}
        return n

    def add_edge(self, src, tgt):
        e = self.next_id
        self.next_id += 1
        self.edges[e] = (src, tgt)
        if src is not None:
            self.outs[src[0]][src[1]] = e
        if tgt is not None:
            self.ins[tgt[0]][tgt[1]] = e
        return e

    def del_edge(self, e):
        s, t = self.edges.pop(e)
        if s is not None:
            self.outs[s[0]].pop(s[1], None)
        if t is not None:
            self.ins[t[0]].pop(t[1], None)

    def del_node(self, n):
        del self.nodes[n]
        del self.ins[n]
        del self.outs[n]

    def set_src(self, e, src):
        s, t = self.edges[e]
        if s is not None:
            self.outs[s[0]].pop(s[1], None)
        self.edges[e] = (src, t)
        if src is not None:
            self.outs[src[0]][src[1]] = e

    def set_tgt(self, e, tgt):
        s, t = self.edges[e]
        if t is not None:
            self.ins[t[0]].pop(t[1], None)
        self.edges[e] = (s, tgt)
        if tgt is not None:
            self.ins[tgt[0]][tgt[1]] = e

    def in_edge(self, n, port):
        return self.ins[n][port]

    def out_edge(self, n, port):
        return self.outs[n][port]

    def check_redex(self, r: Redex):
        if (
            r.edge not in self.edges
            or r.src not in self.nodes
            or r.tgt not in self.nodes
        ):
            raise StaleRedexError(f"redex {r} no longer present")
        s, t = self.edges[r.edge]
        if s is None or t is None or s[0] != r.src or t[0] != r.tgt:
            raise StaleRedexError(f"redex {r} no longer matches the flow")
        if _PATTERN.get((self.nodes[r.src], self.nodes[r.tgt])) != r.rule:
            raise StaleRedexError(f"redex {r} rule does not match node kinds")

    def apply(self, r: Redex):
        self.check_redex(r)
        rule, n1, n2, e = r.rule, r.src, r.tgt, r.edge
        if rule == WD_CD:
            other = self.in_edge(n2, 1 - self.edges[e][1][1])
            below = self.out_edge(n2, 0)
            tgt = self.edges[below][1]
            self.del_edge(below)
            self.set_tgt(other, tgt)
            self.del_edge(e)
            self.del_node(n1)
            self.del_node(n2)
        elif rule == ID_WU:
            o = self.out_edge(n1, 1 - self.edges[e][0][1])
            w = self.add_node(AWD)
            self.set_src(o, (w, 0))
            self.del_edge(e)
            self.del_node(n1)
            self.del_node(n2)
        elif rule == CU_WU:
            above = self.in_edge(n1, 0)
            o = self.out_edge(n1, 1 - self.edges[e][0][1])
            tgt = self.edges[o][1]
            self.del_edge(o)
            self.set_tgt(above, tgt)
            self.del_edge(e)
            self.del_node(n1)
            self.del_node(n2)
        elif rule == WD_CU:
            f1 = self.out_edge(n2, 0)
            f2 = self.out_edge(n2, 1)
            self.del_edge(e)
            w1 = self.add_node(AWD)
            w2 = self.add_node(AWD)
            self.set_src(f1, (w1, 0))
            self.set_src(f2, (w2, 0))
            self.del_node(n1)
            self.del_node(n2)
        elif rule == WD_WU:
            self.del_edge(e)
            self.del_node(n1)
            self.del_node(n2)
        elif rule == CD_WU:
            g1 = self.in_edge(n1, 0)
            g2 = self.in_edge(n1, 1)
            self.del_edge(e)
            u1 = self.add_node(AWU)
            u2 = self.add_node(AWU)
            self.set_tgt(g1, (u1, 0))
            self.set_tgt(g2, (u2, 0))
            self.del_node(n1)
            self.del_node(n2)
        elif rule == CD_CU:
            g1 = self.in_edge(n1, 0)
            g2 = self.in_edge(n1, 1)
            f1 = self.out_edge(n2, 0)
            f2 = self.out_edge(n2, 1)
            self.del_edge(e)
            u1 = self.add_node(ACU)
            u2 = self.add_node(ACU)
            d1 = self.add_node(ACD)
            d2 = self.add_node(ACD)
            self.set_tgt(g1, (u1, 0))
            self.set_tgt(g2, (u2, 0))
            self.add_edge((u1, 0), (d1, 0))
            self.add_edge((u1, 1), (d2, 0))
            self.add_edge((u2, 0), (d1, 1))
            self.add_edge((u2, 1), (d2, 1))
            self.set_src(f1, (d1, 0))
            self.set_src(f2, (d2, 0))
            self.del_node(n1)
            self.del_node(n2)
        elif rule == ID_CU:
            o = self.out_edge(n1, 1 - self.edges[e][0][1])
            f1 = self.out_edge(n2, 0)
            f2 = self.out_edge(n2, 1)
            self.del_edge(e)
            i1 = self.add_node(AID)
            i2 = self.add_node(AID)
            c = self.add_node(ACD)
            self.set_src(f1, (i1, 0))
            self.set_src(f2, (i2, 0))
            self.add_edge((i1, 1), (c, 0))
            self.add_edge((i2, 1), (c, 1))
            self.set_src(o, (c, 0))
            self.del_node(n1)
            self.del_node(n2)
        else:
            raise ValueError(f"unknown rewrite rule {rule!r}")


def apply_redex(flow: AtomicFlow, r: Redex) -> AtomicFlow:
    """One-step reduction; raises StaleRedexError when r no longer matches."""
    m = _MutFlow(flow)
    m.apply(r)
    return m.freeze()


# -- termination measure -----------------------------------------------------------


def _distance_values(nodes, edges, ins):
    """Longest-hop distance of each node from a creating element above it.

    A node whose in-edge comes from an identity, a weakening, or a pending
    top end is at distance 1.
    """
    order = topo_order(AtomicFlow(nodes, edges))
    d = {}
    for n in order:
        best = 0
        for e in ins[n].values():
            s = edges[e][0]
            if s is None or nodes[s[0]] in (AID, AWD):
                hop = 1
            else:
                hop = 1 + d[s[0]]
            if hop > best:
                best = hop
        d[n] = best
    return d


def termination_measure(flow: AtomicFlow):
    """(D sequence counting cocontractions by distance from the top, size)."""
    report = validate(flow)
    if not report.ok:
        raise ValueError(f"invalid flow: {report.errors}")
    ins = {n: {} for n in flow.nodes}
    for e, (s, t) in flow.edges.items():
        if t is not None:
            ins[t[0]][t[1]] = e
    d = _distance_values(flow.nodes, flow.edges, ins)
    if not flow.nodes:
        return (), len(flow.edges)
    counts = {}
    for n, kind in flow.nodes.items():
        if kind == ACU:
            counts[d[n]] = counts.get(d[n], 0) + 1
    if not counts:
        return (), len(flow.edges)
    seq = [0] * (max(counts) + 1)
    for i, c in counts.items():
        seq[i] = c
    return tuple(seq), len(flow.edges)


def d_sequence_less(a, b):
    """a < b when a_k < b_k for some k and a_i <= b_i for every i > k."""
    n = max(len(a), len(b))
    a = tuple(a) + (0,) * (n - len(a))
    b = tuple(b) + (0,) * (n - len(b))
    for i in range(n - 1, -1, -1):
        if a[i] != b[i]:
            return a[i] < b[i]
    return False


def _pad_le(a, b):
    n = max(len(a), len(b))
    pa = tuple(a) + (0,) * (n - len(a))
    pb = tuple(b) + (0,) * (n - len(b))
    return pa == pb or d_sequence_less(pa, pb)


def measure_less(m1, m2):
    """Strict decrease of the lexicographic product D x size."""
    n = max(len(m1[0]), len(m2[0]))
    pa = tuple(m1[0]) + (0,) * (n - len(m1[0]))
    pb = tuple(m2[0]) + (0,) * (n - len(m2[0]))
    if pa == pb:
        return m1[1] < m2[1]
    return d_sequence_less(pa, pb)


# -- normalization -------------------------------------------------------------------


class NormalizationError(AssertionError):
    pass


def normalize(flow: AtomicFlow, strategy: str = "wk-first", measures: bool | None = None):
    """Reduce to the unique normal form; returns (normal flow, trace).

    strategy 'wk-first' exhausts the weakening subsystem before the
    cocontraction one; 'cont-first' greedily prefers cocontraction redexes at
    every step (exponentially long on the tower family).

    With measures on, every applied step is checked against the per-rule
    monotonicity facts: weakening steps shrink the flow without raising the
    cocontraction distance sequence, cd-cu steps strictly decrease the
    lexicographic product, and id-cu steps strictly reduce the cocontraction
    count.  (The full product does not decrease for id-cu in general; see the
    format notes.)
    """
    report = validate(flow)
    if not report.ok:
        raise ValueError(f"invalid flow: {report.errors}")
    if measures is None:
        measures = len(flow.edges) <= 600

    m = _MutFlow(flow)
    trace = []
    initial_size = len(flow.edges)
    wk_steps = 0
    cont_steps = 0

    def snapshot():
        if not measures:
            return None, None
        d = _distance_values(m.nodes, m.edges, m.ins)
        counts = {}
        for n, kind in m.nodes.items():
            if kind == ACU:
                counts[d[n]] = counts.get(d[n], 0) + 1
        seq = [0] * ((max(counts) + 1) if counts else 0)
        for i, c in counts.items():
            seq[i] = c
        return tuple(seq), len(m.edges)

    def run_batch(redexes):
        nonlocal wk_steps, cont_steps
        used = set()
        for r in redexes:
            if r.src in used or r.tgt in used:
                continue
            before = snapshot() if measures else (None, None)
            acu_before = sum(1 for k in m.nodes.values() if k == ACU)
            size_before = len(m.edges)
            m.apply(r)
            used.add(r.src)
            used.add(r.tgt)
            size_after = len(m.edges)
            if size_after - size_before != _SIZE_DELTA[r.rule]:
                raise NormalizationError(f"{r.rule} changed size by {size_after - size_before}")
            d_after = None
            if measures:
                after = snapshot()
                d_after = after[0]
                if r.rule in WK:
                    if not size_after < size_before:
                        raise NormalizationError(f"wk step {r.rule} did not shrink the flow")
                    if not _pad_le(after[0], before[0]):
                        raise NormalizationError(f"wk step {r.rule} raised the distance sequence")
                elif r.rule == CD_CU:
                    if not measure_less(after, before):
                        raise NormalizationError("cd-cu did not decrease the measure")
                else:  # id-cu
                    acu_after = sum(1 for k in m.nodes.values() if k == ACU)
                    if not acu_after < acu_before:
                        raise NormalizationError("id-cu did not remove a cocontraction")
                if r.rule in CONT and not size_after > size_before:
                    raise NormalizationError(f"cont step {r.rule} did not grow the flow")
            trace.append(TraceStep(r.rule, r.anchors(), size_after, d_after))
            if r.rule in WK:
                wk_steps += 1
            else:
                cont_steps += 1

    if strategy == "wk-first":
        for sub in (WK, CONT):
            while True:
                redexes = _scan(m.nodes, m.edges, sub)
                if not redexes:
                    break
                run_batch(redexes)
    elif strategy == "cont-first":
        while True:
            redexes = _scan(m.nodes, m.edges, CONT)
            if redexes:
                run_batch(redexes[:1])
                continue
            redexes = _scan(m.nodes, m.edges, WK)
            if not redexes:
                break
            run_batch(redexes[:1])
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    if _scan(m.nodes, m.edges, NORM):
        raise NormalizationError("normal form still has redexes")
    result = m.freeze()
    if strategy == "wk-first":
        if wk_steps > initial_size:
            raise NormalizationError("weakening phase exceeded the initial size bound")
        if cont_steps > len(result.edges):
            raise NormalizationError("cocontraction phase exceeded the result size bound")
    return result, trace


# -- exhaustive exploration ------------------------------------------------------------


class ExplorationCapExceeded(RuntimeError):
    pass


def explore_reductions(flow: AtomicFlow, cap: int = 20000):
    """Exhaustive set of all normal forms reachable from flow, up to iso.

    Confluence predicts a singleton; the cap bounds the number of distinct
    states explored.
    """
    report = validate(flow)
    if not report.ok:
        raise ValueError(f"invalid flow: {report.errors}")

    def seen_before(buckets, f):
        key = flow_fingerprint(f)
        bucket = buckets.setdefault(key, [])
        for g in bucket:
            if iso(f, g, cap=max(64, len(f.nodes) + 1)):
                return True
        bucket.append(f)
        return False

    visited = {}
    normals = {}
    queue = [flow]
    seen_before(visited, flow)
    states = 1
    while queue:
        current = queue.pop()
        redexes = find_redexes(current)
        if not redexes:
            seen_before(normals, current)
            continue
        for r in redexes:
            nxt = apply_redex(current, r)
            if not seen_before(visited, nxt):
                states += 1
                if states > cap:
                    raise ExplorationCapExceeded(f"more than {cap} states")
                queue.append(nxt)
    return [g for bucket in normals.values() for g in bucket]
