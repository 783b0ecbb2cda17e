"""Flow measurements: ai-path counting, dimensions, contraction loops, weights.

An ai-path walks edges monotonically up or down and changes vertical
direction only at identity and cut nodes; it is open when both endpoints are
pending edge ends.  Open paths are counted modulo inversion.  The fast
counter is a dynamic program over (edge, direction) states; the brute-force
enumerator is the oracle it is tested against.
"""

from __future__ import annotations

from .derivation import ACD, ACU, AID, AIU, AWD, AWU
from .flow import AtomicFlow, validate

DOWN, UP = 0, 1


class PathCountDivergence(RuntimeError):
    """The state graph has a directed cycle, so path counts are unbounded."""


class CapExceeded(ValueError):
    pass


def _require_valid(flow):
    report = validate(flow)
    if not report.ok:
        raise ValueError(f"invalid flow: {report.errors}")


def _state_graph(flow: AtomicFlow):
    """Successor states of each (edge, direction) traversal.

    Returns (succ, endnode) where succ[(e, dir)] is the list of next
    traversals and endnode[(e, dir)] the node at the far end (None when the
    far end is pending).
    """
    succ = {}
    endnode = {}
    for e, (src, tgt) in flow.edges.items():
        # downward
        nxt = []
        if tgt is None:
            endnode[(e, DOWN)] = None
        else:
            n, port = tgt
            kind = flow.nodes[n]
            endnode[(e, DOWN)] = n
            if kind == ACD:
                nxt = [(flow.out_edges(n)[0], DOWN)]
            elif kind == ACU:
                nxt = [(o, DOWN) for o in flow.out_edges(n)]
            elif kind == AIU:
                other = [x for x in flow.in_edges(n) if x != e]
                nxt = [(other[0], UP)] if other else []
            elif kind == AWU:
                nxt = []
            else:
                raise AssertionError(f"edge enters {kind} from above")
        succ[(e, DOWN)] = nxt
        # upward
        nxt = []
        if src is None:
            endnode[(e, UP)] = None
        else:
            n, port = src
            kind = flow.nodes[n]
            endnode[(e, UP)] = n
            if kind == AID:
                other = [x for x in flow.out_edges(n) if x != e]
                nxt = [(other[0], DOWN)] if other else []
            elif kind == ACD:
                nxt = [(i, UP) for i in flow.in_edges(n)]
            elif kind == ACU:
                nxt = [(flow.in_edges(n)[0], UP)]
            elif kind == AWD:
                nxt = []
            else:
                raise AssertionError(f"edge leaves {kind} from below")
        succ[(e, UP)] = nxt
    return succ, endnode


def _topo_states(succ):
    indeg = {s: 0 for s in succ}
    for s, nxt in succ.items():
        for t in nxt:
            indeg[t] += 1
    queue = [s for s, d in indeg.items() if d == 0]
    order = []
    while queue:
        s = queue.pop()
        order.append(s)
        for t in succ[s]:
            indeg[t] -= 1
            if indeg[t] == 0:
                queue.append(t)
    if len(order) != len(succ):
        raise PathCountDivergence("ai-path state graph is cyclic")
    return order


def open_ai_paths(flow: AtomicFlow) -> int:
    """Number of open ai-paths modulo inversion, by dynamic programming.

    Each open path is counted once from each pending endpoint, so the total
    is half the sum over pending ends of the continuation counts.
    """
    _require_valid(flow)
    if not flow.edges:
        return 0
    succ, endnode = _state_graph(flow)
    order = _topo_states(succ)
    count = {}
    for s in reversed(order):
        if endnode[s] is None:
            count[s] = 1
        else:
            count[s] = sum(count[t] for t in succ[s])
    total = 0
    for e, (src, tgt) in flow.edges.items():
        if src is None:
            total += count[(e, DOWN)]
        if tgt is None:
            total += count[(e, UP)]
    assert total % 2 == 0
    return total // 2


def open_ai_paths_bruteforce(flow: AtomicFlow, cap: int = 25) -> int:
    """Exhaustive DFS enumeration of open ai-paths, deduplicated modulo
    inversion by keeping the lexicographically smaller orientation."""
    _require_valid(flow)
    if len(flow.edges) > cap:
        raise CapExceeded(f"flow has {len(flow.edges)} > {cap} edges")
    paths = set()

    def continuations(e, direction):
        src, tgt = flow.edges[e]
        end = tgt if direction == DOWN else src
        if end is None:
            return None  # open end reached
        n, _ = end
        kind = flow.nodes[n]
        if direction == DOWN:
            if kind == ACD:
                return [(flow.out_edges(n)[0], DOWN)]
            if kind == ACU:
                return [(o, DOWN) for o in flow.out_edges(n)]
            if kind == AIU:
                return [(x, UP) for x in flow.in_edges(n) if x != e]
            return []  # awu: dead end, not open
        if kind == AID:
            return [(x, DOWN) for x in flow.out_edges(n) if x != e]
        if kind == ACD:
            return [(i, UP) for i in flow.in_edges(n)]
        if kind == ACU:
            return [(flow.in_edges(n)[0], UP)]
        return []  # awd

    def walk(e, direction, acc, used):
        cont = continuations(e, direction)
        if cont is None:
            t = tuple(acc)
            paths.add(min(t, tuple(reversed(t))))
            return
        for e2, d2 in cont:
            if e2 in used:
                continue
            used.add(e2)
            acc.append(e2)
            walk(e2, d2, acc, used)
            acc.pop()
            used.discard(e2)

    for e, (src, tgt) in flow.edges.items():
        if src is None:
            walk(e, DOWN, [e], {e})
        if tgt is None:
            walk(e, UP, [e], {e})
    return len(paths)


def node_count(flow: AtomicFlow, kind: str) -> int:
    return sum(1 for k in flow.nodes.values() if k == kind)


def edge_weight(flow: AtomicFlow, edge: int) -> int:
    """Number of directed paths from the edge to a coweakening node or a
    pending bottom end."""
    _require_valid(flow)
    if edge not in flow.edges:
        raise KeyError(f"unknown edge id {edge}")
    return _all_weights(flow)[edge]


def _all_weights(flow: AtomicFlow):
    succ = {}
    for e, (src, tgt) in flow.edges.items():
        if tgt is None:
            succ[e] = None
            continue
        n, _ = tgt
        kind = flow.nodes[n]
        if kind == AWU:
            succ[e] = None
        elif kind == ACD:
            succ[e] = [flow.out_edges(n)[0]]
        elif kind == ACU:
            succ[e] = list(flow.out_edges(n))
        else:  # aiu: not a bottom element
            succ[e] = []
    weights = {}
    indeg = {e: 0 for e in flow.edges}
    for e, nxt in succ.items():
        if nxt:
            for t in nxt:
                indeg[t] += 1
    # reverse topological: process edges whose successors are done
    order = []
    pending = {e: (len(succ[e]) if succ[e] else 0) for e in flow.edges}
    rdeps = {e: [] for e in flow.edges}
    for e, nxt in succ.items():
        if nxt:
            for t in nxt:
                rdeps[t].append(e)
    queue = [e for e, c in pending.items() if c == 0]
    while queue:
        e = queue.pop()
        order.append(e)
        nxt = succ[e]
        weights[e] = 1 if nxt is None else sum(weights[t] for t in nxt)
        for p in rdeps[e]:
            pending[p] -= 1
            if pending[p] == 0:
                queue.append(p)
    if len(order) != len(flow.edges):
        raise PathCountDivergence("weight recursion is cyclic")
    return weights


def dimensions(flow: AtomicFlow):
    """(length, width, breadth) of a flow.

    Width is the fan size of the largest connected same-kind contraction or
    cocontraction configuration (a block of n-1 connected binary nodes acts
    as one n-ary node).  Length is the maximum number of node-kind changes
    along any ai-path, with connected same-kind runs collapsed by that super
    node convention.  Breadth counts connected components.
    """
    _require_valid(flow)
    if not flow.nodes and not flow.edges:
        return 0, 0, 0

    # breadth: components over nodes and edges
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    for n in flow.nodes:
        parent[("n", n)] = ("n", n)
    for e in flow.edges:
        parent[("e", e)] = ("e", e)
    for e, (src, tgt) in flow.edges.items():
        if src is not None:
            union(("e", e), ("n", src[0]))
        if tgt is not None:
            union(("e", e), ("n", tgt[0]))
    breadth = len({find(x) for x in parent})

    # width: connected same-kind contraction blocks
    width = 1
    for kind in (ACD, ACU):
        members = [n for n, k in flow.nodes.items() if k == kind]
        if not members:
            continue
        p2 = {n: n for n in members}

        def find2(x):
            while p2[x] != x:
                p2[x] = p2[p2[x]]
                x = p2[x]
            return x

        for e, (src, tgt) in flow.edges.items():
            if (
                src is not None
                and tgt is not None
                and flow.nodes[src[0]] == kind
                and flow.nodes[tgt[0]] == kind
            ):
                p2[find2(src[0])] = find2(tgt[0])
        sizes = {}
        for n in members:
            r = find2(n)
            sizes[r] = sizes.get(r, 0) + 1
        width = max(width, max(sizes.values()) + 1)

    # length: max kind changes along any ai-path
    succ, endnode = _state_graph(flow)
    order = _topo_states(succ)
    best = {}
    for s in reversed(order):
        n = endnode[s]
        if n is None:
            best[s] = 0
            continue
        kind = flow.nodes[n]
        b = 0
        for t in succ[s]:
            m = endnode[t]
            step = best[t] + (1 if m is not None and flow.nodes[m] != kind else 0)
            if step > b:
                b = step
        best[s] = b
    length = 0
    for s, b in best.items():
        if b > length:
            length = b
        # paths may also start at a node (e.g. at a weakening); count the
        # change between that node and the first far node as well
        e, direction = s
        src, tgt = flow.edges[e]
        near = src if direction == DOWN else tgt
        far = endnode[s]
        if near is not None and far is not None:
            v = b + (1 if flow.nodes[near[0]] != flow.nodes[far] else 0)
            if v > length:
                length = v
    return length, width, breadth


def contraction_loops(flow: AtomicFlow):
    """All (cocontraction, contraction) pairs joined by two edge-disjoint
    directed paths, found by unit-capacity max flow."""
    _require_valid(flow)
    ups = sorted(n for n, k in flow.nodes.items() if k == ACU)
    downs = sorted(n for n, k in flow.nodes.items() if k == ACD)
    if not ups or not downs:
        return []
    arcs = []  # (src node, tgt node)
    out_arcs = {n: [] for n in flow.nodes}
    in_arcs = {n: [] for n in flow.nodes}
    for e, (src, tgt) in sorted(flow.edges.items()):
        if src is not None and tgt is not None:
            i = len(arcs)
            arcs.append((src[0], tgt[0]))
            out_arcs[src[0]].append(i)
            in_arcs[tgt[0]].append(i)

    # plain reachability prefilter
    reach = {}

    def descendants(u):
        if u in reach:
            return reach[u]
        seen = set()
        stack = [u]
        while stack:
            x = stack.pop()
            for i in out_arcs[x]:
                y = arcs[i][1]
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        reach[u] = seen
        return seen

    def maxflow_at_least_2(u, v):
        cap = [1] * len(arcs)
        flow_val = 0
        for _ in range(2):
            # BFS in the residual graph
            prev = {u: None}
            queue = [u]
            qi = 0
            while qi < len(queue) and v not in prev:
                x = queue[qi]
                qi += 1
                for i in out_arcs[x]:
                    if cap[i] > 0 and arcs[i][1] not in prev:
                        prev[arcs[i][1]] = (i, 1)
                        queue.append(arcs[i][1])
                for i in in_arcs[x]:
                    if cap[i] == 0 and arcs[i][0] not in prev:
                        prev[arcs[i][0]] = (i, -1)
                        queue.append(arcs[i][0])
            if v not in prev:
                break
            x = v
            while prev[x] is not None:
                i, sign = prev[x]
                cap[i] -= sign
                x = arcs[i][0] if sign == 1 else arcs[i][1]
            flow_val += 1
            if flow_val >= 2:
                return True
        return False

    loops = []
    for u in ups:
        desc = descendants(u)
        for v in downs:
            if v in desc and maxflow_at_least_2(u, v):
                loops.append((u, v))
    return loops


def metrics_record(flow: AtomicFlow) -> dict:
    """The JSON-facing metrics summary of a flow."""
    length, width, breadth = dimensions(flow)
    census = flow.kind_census()
    return {
        "edges": len(flow.edges),
        "nodes": {k: census.get(k, 0) for k in (AID, AWD, ACD, AIU, AWU, ACU)},
        "length": length,
        "width": width,
        "breadth": breadth,
        "open_ai_paths": str(open_ai_paths(flow)),
        "contraction_loops": [[u, v] for u, v in contraction_loops(flow)],
    }
