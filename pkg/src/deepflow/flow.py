"""Atomic flows: directed port graphs tracing atom occurrences in a derivation.

A flow has six node kinds with fixed port arities.  Edges run top to bottom
and may be pending at either end.  Extraction walks the derivation tree once,
creating one node per structural step and threading every literal occurrence
onto an edge; switch, medial and eq steps leave no nodes, they only connect
occurrences across the step interface.

The occurrence map produced by extraction is plumbing for proof lifting: it
records which leaf occurrences of the derivation lie on each edge, and which
derivation step each node came from.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .derivation import (
    ACD,
    ACU,
    AID,
    AIU,
    AWD,
    AWU,
    COMP,
    EQ,
    LEAF,
    M,
    S,
    SKS,
    Derivation,
    conclusion,
    ensure_checked,
    premiss,
)
from .formula import canonical_occurrence_map, n_occurrences

NODE_KINDS = (AID, AWD, ACD, AIU, AWU, ACU)

# (in ports, out ports)
ARITY = {
    AID: (0, 2),
    AWD: (0, 1),
    ACD: (2, 1),
    AIU: (2, 0),
    AWU: (1, 0),
    ACU: (1, 2),
}

DUAL_KIND = {AID: AIU, AIU: AID, AWD: AWU, AWU: AWD, ACD: ACU, ACU: ACD}


class AtomicFlow:
    """Immutable-by-convention port graph.

    nodes: id -> kind.  edges: id -> (src, tgt) where each end is None
    (pending) or a (node id, port index) pair; src ends sit on out-ports,
    tgt ends on in-ports.
    """

    __slots__ = ("nodes", "edges", "_ins", "_outs")

    def __init__(self, nodes, edges):
        self.nodes = dict(nodes)
        self.edges = dict(edges)
        self._ins = None
        self._outs = None

    @property
    def n_edges(self):
        return len(self.edges)

    def size(self):
        return len(self.edges)

    def _adjacency(self):
        if self._ins is None:
            ins = {n: {} for n in self.nodes}
            outs = {n: {} for n in self.nodes}
            for e, (src, tgt) in self.edges.items():
                if src is not None:
                    outs[src[0]][src[1]] = e
                if tgt is not None:
                    ins[tgt[0]][tgt[1]] = e
            self._ins = {n: [v for _, v in sorted(d.items())] for n, d in ins.items()}
            self._outs = {n: [v for _, v in sorted(d.items())] for n, d in outs.items()}
        return self._ins, self._outs

    def in_edges(self, n):
        return self._adjacency()[0][n]

    def out_edges(self, n):
        return self._adjacency()[1][n]

    def pending_top(self):
        return sorted(e for e, (s, _) in self.edges.items() if s is None)

    def pending_bottom(self):
        return sorted(e for e, (_, t) in self.edges.items() if t is None)

    def kind_census(self):
        out = {}
        for k in self.nodes.values():
            out[k] = out.get(k, 0) + 1
        return out

    def copy(self):
        return AtomicFlow(self.nodes, self.edges)

    def __repr__(self):
        return f"AtomicFlow(nodes={len(self.nodes)}, edges={len(self.edges)})"


def empty_flow() -> AtomicFlow:
    return AtomicFlow({}, {})


class FlowBuilder:
    """Convenience constructor for hand-built flows in tests and families."""

    def __init__(self):
        self._nodes = {}
        self._edges = {}
        self._next = 0

    def node(self, kind):
        if kind not in ARITY:
            raise ValueError(f"unknown node kind {kind!r}")
        n = self._next
        self._next += 1
        self._nodes[n] = kind
        return n

    def edge(self, src=None, tgt=None):
        e = self._next
        self._next += 1
        self._edges[e] = (src, tgt)
        return e

    def build(self, validated=True) -> AtomicFlow:
        f = AtomicFlow(self._nodes, self._edges)
        if validated:
            report = validate(f)
            if not report.ok:
                raise ValueError(f"invalid flow: {report.errors}")
        return f


@dataclass
class FlowReport:
    ok: bool
    errors: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def validate(flow: AtomicFlow) -> FlowReport:
    """Arity, port typing and acyclicity checks."""
    errors = []
    ins = {n: set() for n in flow.nodes}
    outs = {n: set() for n in flow.nodes}
    for e, (src, tgt) in flow.edges.items():
        for end, table, which in ((src, outs, "out"), (tgt, ins, "in")):
            if end is None:
                continue
            n, port = end
            if n not in flow.nodes:
                errors.append(("dangling-port", f"edge {e} references missing node {n}"))
                continue
            lim = ARITY[flow.nodes[n]][0 if which == "in" else 1]
            if not (0 <= port < lim):
                errors.append(("arity-violation", f"edge {e} uses {which}-port {port} of {flow.nodes[n]} node {n}"))
                continue
            if port in table[n]:
                errors.append(("arity-violation", f"{which}-port {port} of node {n} attached twice"))
            table[n].add(port)
    for n, kind in flow.nodes.items():
        want_in, want_out = ARITY[kind]
        if len(ins[n]) != want_in:
            errors.append(("arity-violation", f"node {n} ({kind}) has {len(ins[n])}/{want_in} in-edges"))
        if len(outs[n]) != want_out:
            errors.append(("arity-violation", f"node {n} ({kind}) has {len(outs[n])}/{want_out} out-edges"))
    # acyclicity of the node graph, edges oriented downward
    succ = {n: [] for n in flow.nodes}
    indeg = {n: 0 for n in flow.nodes}
    for e, (src, tgt) in flow.edges.items():
        if src is not None and tgt is not None:
            succ[src[0]].append(tgt[0])
            indeg[tgt[0]] += 1
    queue = [n for n, d in indeg.items() if d == 0]
    seen = 0
    while queue:
        n = queue.pop()
        seen += 1
        for m in succ[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                queue.append(m)
    if seen != len(flow.nodes):
        errors.append(("cycle-found", "directed cycle among nodes"))
    return FlowReport(not errors, errors)


def topo_order(flow: AtomicFlow):
    """Nodes in a topological order of the downward edge relation."""
    succ = {n: [] for n in flow.nodes}
    indeg = {n: 0 for n in flow.nodes}
    for e, (src, tgt) in flow.edges.items():
        if src is not None and tgt is not None:
            succ[src[0]].append(tgt[0])
            indeg[tgt[0]] += 1
    queue = sorted((n for n, d in indeg.items() if d == 0), reverse=True)
    out = []
    while queue:
        n = queue.pop()
        out.append(n)
        for m in succ[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                queue.append(m)
    if len(out) != len(flow.nodes):
        raise ValueError("flow has a cycle")
    return out


# -- extraction -----------------------------------------------------------------


class Extraction:
    """Flow of a derivation plus the edge <-> occurrence bookkeeping."""

    __slots__ = ("flow", "_segments", "_node_paths", "_premiss_edges", "_conclusion_edges")

    def __init__(self, flow, segments, node_paths, premiss_edges, conclusion_edges):
        self.flow = flow
        self._segments = segments
        self._node_paths = node_paths
        self._premiss_edges = premiss_edges
        self._conclusion_edges = conclusion_edges

    def segment(self, edge):
        """Occurrences on an edge as (derivation path, in-order occ index) pairs."""
        return [(_materialize(p), i) for p, i in self._segments[edge]]

    def node_path(self, node):
        return _materialize(self._node_paths[node])

    def premiss_edges(self):
        return list(self._premiss_edges)

    def conclusion_edges(self):
        return list(self._conclusion_edges)

    def occurrence_count(self):
        return sum(len(s) for s in self._segments.values())


def _materialize(pathnode):
    out = []
    while pathnode is not None:
        pathnode, branch = pathnode
        out.append(branch)
    out.reverse()
    return tuple(out)


def _flatten(rope, out):
    stack = [rope]
    while stack:
        r = stack.pop()
        if isinstance(r, list):
            out.extend(r)
        else:
            stack.append(r[1])
            stack.append(r[0])
    return out


def extract(d: Derivation, assume_checked: bool = False) -> Extraction:
    """Extract the atomic flow of a checked SKS derivation."""
    if not assume_checked:
        ensure_checked(d, SKS)

    src = []
    tgt = []
    seg = []
    uf = []

    def new_edge(pathnode, idx):
        e = len(uf)
        uf.append(e)
        src.append(None)
        tgt.append(None)
        seg.append([(pathnode, idx)])
        return e

    def find(e):
        while uf[e] != e:
            uf[e] = uf[uf[e]]
            e = uf[e]
        return e

    def union_vert(e, f):
        # e's bottom end meets f's top end; e stays the representative
        e = find(e)
        f = find(f)
        if e == f:
            raise AssertionError("occurrence threading collapsed an edge onto itself")
        se, sf = seg[e], seg[f]
        if len(sf) > len(se):
            sf.extend(se)
            seg[e] = sf
        else:
            se.extend(sf)
        seg[f] = None
        tgt[e] = tgt[f]
        uf[f] = e

    nodes = {}
    node_paths = {}
    node_ports = {}

    def new_node(kind, pathnode):
        n = len(nodes)
        nodes[n] = kind
        node_paths[n] = pathnode
        node_ports[n] = ([None] * ARITY[kind][0], [None] * ARITY[kind][1])
        return n

    # post-order over tree positions; results are (premiss rope, conclusion rope)
    results = []
    stack = [(d, None, False)]
    while stack:
        node, pathnode, done = stack.pop()
        if not done:
            if node.kind == LEAF:
                ids = [new_edge(pathnode, i) for i in range(n_occurrences(node.a))]
                results.append((ids, ids))
                continue
            stack.append((node, pathnode, True))
            stack.append((node.b, (pathnode, 1), False))
            stack.append((node.a, (pathnode, 0), False))
            continue
        pb, cb = results.pop()
        pa, ca = results.pop()
        if node.kind == COMP:
            results.append(((pa, pb), (ca, cb)))
            continue
        # a step: wire the conclusion of the upper part to the premiss of the lower
        rule = node.rule
        upper = _flatten(ca, [])
        lower = _flatten(pb, [])
        if rule == EQ:
            x = conclusion(node.a)
            y = premiss(node.b)
            mx = canonical_occurrence_map(x)
            my = canonical_occurrence_map(y)
            inv = [0] * len(my)
            for j, pos in enumerate(my):
                inv[pos] = j
            for i, e in enumerate(upper):
                union_vert(e, lower[inv[mx[i]]])
        elif rule == S:
            for e, f in zip(upper, lower):
                union_vert(e, f)
        elif rule == M:
            x = conclusion(node.a)
            na = n_occurrences(x.a.a)
            nb = n_occurrences(x.a.b)
            nc = n_occurrences(x.b.a)
            for i, e in enumerate(upper):
                if i < na:
                    j = i
                elif i < na + nb:
                    j = na + nc + (i - na)
                elif i < na + nb + nc:
                    j = na + (i - na - nb)
                else:
                    j = i
                union_vert(e, lower[j])
        else:
            n = new_node(rule, pathnode)
            ins, outs = node_ports[n]
            for port, e in enumerate(upper):
                e = find(e)
                tgt[e] = (n, port)
                ins[port] = e
            for port, f in enumerate(lower):
                f = find(f)
                src[f] = (n, port)
                outs[port] = f
        results.append((pa, cb))

    prem_rope, conc_rope = results.pop()
    prem = [find(e) for e in _flatten(prem_rope, [])]
    conc = [find(e) for e in _flatten(conc_rope, [])]

    roots = [e for e in range(len(uf)) if uf[e] == e]
    remap = {e: i for i, e in enumerate(roots)}
    edges = {}
    segments = {}
    for e in roots:
        i = remap[e]
        edges[i] = (src[e], tgt[e])
        segments[i] = seg[e]
    flow = AtomicFlow(nodes, edges)
    return Extraction(
        flow,
        segments,
        node_paths,
        [remap[e] for e in prem],
        [remap[e] for e in conc],
    )


def flip_dual(flow: AtomicFlow) -> AtomicFlow:
    """The flow turned upside down with every node kind replaced by its dual."""
    nodes = {n: DUAL_KIND[k] for n, k in flow.nodes.items()}
    edges = {e: (tgt, src) for e, (src, tgt) in flow.edges.items()}
    return AtomicFlow(nodes, edges)


# -- isomorphism -----------------------------------------------------------------

PENDING_TOP = "pending-top"
PENDING_BOTTOM = "pending-bottom"


class IsoCapExceeded(ValueError):
    pass


def _signatures(flow: AtomicFlow, rounds=None):
    """Iterated neighbourhood refinement colors, per node."""
    color = {n: (k,) for n, k in flow.nodes.items()}
    if rounds is None:
        rounds = max(4, len(flow.nodes))
    for _ in range(rounds):
        nxt = {}
        for n in flow.nodes:
            up = []
            down = []
            for e in flow.in_edges(n):
                s = flow.edges[e][0]
                up.append(color[s[0]] if s is not None else PENDING_TOP)
            for e in flow.out_edges(n):
                t = flow.edges[e][1]
                down.append(color[t[0]] if t is not None else PENDING_BOTTOM)
            nxt[n] = (color[n], tuple(sorted(up, key=repr)), tuple(sorted(down, key=repr)))
        # compress canonically: rank signatures by their sorted order so that
        # isomorphic flows with different node numbering get matching colors
        ranks = {sig: i for i, sig in enumerate(sorted(set(nxt.values()), key=repr))}
        comp = {n: (ranks[nxt[n]], flow.nodes[n]) for n in nxt}
        if len(set(comp.values())) == len(set(color.values())):
            color = comp
            break
        color = comp
    return color


def _edge_profile(flow: AtomicFlow):
    """Multiset of (src kind/pending, tgt kind/pending) over edges."""
    prof = {}
    for e, (s, t) in flow.edges.items():
        key = (
            flow.nodes[s[0]] if s is not None else PENDING_TOP,
            flow.nodes[t[0]] if t is not None else PENDING_BOTTOM,
        )
        prof[key] = prof.get(key, 0) + 1
    return prof


def flow_fingerprint(flow: AtomicFlow):
    """Iso-invariant hash key; equal fingerprints still need an iso check."""
    colors = _signatures(flow)
    census = sorted(colors.values(), key=repr)
    prof = tuple(sorted(_edge_profile(flow).items()))
    return (len(flow.nodes), len(flow.edges), tuple(repr(c) for c in census), prof)


def iso(f1: AtomicFlow, f2: AtomicFlow, cap: int = 40) -> bool:
    """Kind- and attachment-preserving graph isomorphism.

    The two in-ports of contractions (and cut) and the two out-ports of
    cocontractions (and identity) are treated as unordered, which reduces the
    question to a labeled multigraph isomorphism including pending stubs.
    """
    if len(f1.nodes) != len(f2.nodes) or len(f1.edges) != len(f2.edges):
        return False
    if max(len(f1.nodes), len(f2.nodes)) > cap:
        raise IsoCapExceeded(f"iso cap {cap} exceeded")
    if f1.kind_census() != f2.kind_census():
        return False
    if _edge_profile(f1) != _edge_profile(f2):
        return False

    c1 = _signatures(f1)
    c2 = _signatures(f2)
    hist1 = {}
    hist2 = {}
    for n, c in c1.items():
        hist1[c] = hist1.get(c, 0) + 1
    for n, c in c2.items():
        hist2[c] = hist2.get(c, 0) + 1
    if hist1 != hist2:
        return False

    def adjacency(flow):
        adj = {}
        for e, (s, t) in flow.edges.items():
            ks = s[0] if s is not None else PENDING_TOP
            kt = t[0] if t is not None else PENDING_BOTTOM
            adj.setdefault(ks, {}).setdefault(kt, 0)
            adj[ks][kt] += 1
        return adj

    a1 = adjacency(f1)
    a2 = adjacency(f2)
    nodes1 = sorted(f1.nodes, key=lambda n: (hist1[c1[n]], repr(c1[n]), n))
    mapping = {}
    used = set()

    def compatible(n, m):
        if c1[n] != c2[m]:
            return False
        # every already-mapped neighbour relation must match in multiplicity
        row1 = a1.get(n, {})
        row2 = a2.get(m, {})
        if row1.get(PENDING_BOTTOM, 0) != row2.get(PENDING_BOTTOM, 0):
            return False
        if a1.get(PENDING_TOP, {}).get(n, 0) != a2.get(PENDING_TOP, {}).get(m, 0):
            return False
        for x, cnt in row1.items():
            if x == PENDING_BOTTOM:
                continue
            if x in mapping and row2.get(mapping[x], 0) != cnt:
                return False
        for x, mx in mapping.items():
            if a1.get(x, {}).get(n, 0) != a2.get(mx, {}).get(m, 0):
                return False
        return True

    def backtrack(i):
        if i == len(nodes1):
            return True
        n = nodes1[i]
        for m in sorted(f2.nodes):
            if m in used or not compatible(n, m):
                continue
            mapping[n] = m
            used.add(m)
            if backtrack(i + 1):
                return True
            del mapping[n]
            used.discard(m)
        return False

    return backtrack(0)


# -- export ----------------------------------------------------------------------

_DOT_SHAPE = {
    AID: "invtriangle",
    AWD: "invhouse",
    ACD: "triangle",
    AIU: "triangle",
    AWU: "house",
    ACU: "invtriangle",
}


def to_dot(flow: AtomicFlow) -> str:
    """Deterministic DOT rendering; pending ends become point nodes."""
    lines = ["digraph flow {", "  rankdir=TB;"]
    for n in sorted(flow.nodes):
        kind = flow.nodes[n]
        lines.append(f'  n{n} [label="{kind}" shape={_DOT_SHAPE[kind]}];')
    for e in sorted(flow.edges):
        s, t = flow.edges[e]
        if s is None:
            lines.append(f"  pt{e} [shape=point];")
        if t is None:
            lines.append(f"  pb{e} [shape=point];")
        a = f"n{s[0]}" if s is not None else f"pt{e}"
        b = f"n{t[0]}" if t is not None else f"pb{e}"
        lines.append(f'  {a} -> {b} [label="{e}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(flow: AtomicFlow) -> str:
    nodes = [{"id": n, "kind": flow.nodes[n]} for n in sorted(flow.nodes)]
    edges = []
    for e in sorted(flow.edges):
        s, t = flow.edges[e]
        edges.append(
            {
                "id": e,
                "from": PENDING_TOP if s is None else [s[0], s[1]],
                "to": PENDING_BOTTOM if t is None else [t[0], t[1]],
            }
        )
    return json.dumps({"nodes": nodes, "edges": edges}, indent=1) + "\n"


def from_json(text: str) -> AtomicFlow:
    data = json.loads(text)
    nodes = {int(n["id"]): n["kind"] for n in data["nodes"]}
    edges = {}
    for e in data["edges"]:
        s = None if e["from"] == PENDING_TOP else (int(e["from"][0]), int(e["from"][1]))
        t = None if e["to"] == PENDING_BOTTOM else (int(e["to"][0]), int(e["to"][1]))
        edges[int(e["id"])] = (s, t)
    flow = AtomicFlow(nodes, edges)
    report = validate(flow)
    if not report.ok:
        raise ValueError(f"invalid flow JSON: {report.errors}")
    return flow
