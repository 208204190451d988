"""
Receiver computation graphs. Edges are committed interfaces carrying a primitive budget m_e and
reliable bits b_e; the compute supply of a DAG receiver is its minimum s-t cut of m_e C_gate + b_e.
"""
from collections import defaultdict, deque
from dataclasses import dataclass, field, replace
import json
import logging
import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from limitstools.errors import GraphValidationException, ResolutionException, ScenarioParseException


log = logging.getLogger(__name__)

# finest flow unit is 1e-6 bit; coarsened by decades for large graphs
FLOW_SCALE = 10 ** 6
INT32_MAX = np.iinfo(np.int32).max


@dataclass(frozen=True)
class Edge:
    """
    Directed interface tail -> head.

    Attributes:
    -----------
    tail, head : hashable
        node labels
    m : float
        primitive budget per instance
    b : float
        reliable bits per instance
    gain : float
        capacity multiplier of this edge's primitives relative to C_gate (heterogeneous primitives)
    """
    tail: object
    head: object
    m: float
    b: float = 0.0
    gain: float = 1.0

    def capacity(self, c_gate):
        return self.m * self.gain * c_gate + self.b


@dataclass(frozen=True)
class ComputationGraph:
    nodes: tuple
    source: object
    sink: object
    edges: tuple = field(default_factory=tuple)
    validated: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'nodes', tuple(self.nodes))
        object.__setattr__(self, 'edges', tuple(e if isinstance(e, Edge) else Edge(*e) for e in self.edges))

    @property
    def index(self):
        return {node: i for i, node in enumerate(self.nodes)}

    def with_budgets(self, budgets):
        """
        Copy of this graph whose i-th edge carries budgets[i].
        """
        if len(budgets) != len(self.edges):
            raise GraphValidationException(f'{len(budgets)} budgets for {len(self.edges)} edges')
        edges = tuple(replace(e, m=float(m)) for e, m in zip(self.edges, budgets))
        return ComputationGraph(self.nodes, self.source, self.sink, edges)


@dataclass(frozen=True)
class CutResult:
    """
    Witness of a minimum s-t cut.

    Attributes:
    -----------
    cut_value : float
        exact float sum of m_e C_gate + b_e over cut_edges (bits/instance)
    cut_edges : tuple[Edge]
        edges leaving the partition
    partition : frozenset
        source side, the nodes reachable from s in the residual graph
    flow_value : float
        max-flow certificate, descaled from the solver's integer units
    """
    cut_value: float
    cut_edges: tuple
    partition: frozenset
    flow_value: float


def _find_cycle(nodes, successors):
    colour = {v: 0 for v in nodes}
    parent = {}
    for root in nodes:
        if colour[root]:
            continue
        stack = [(root, iter(successors[root]))]
        colour[root] = 1
        while stack:
            v, it = stack[-1]
            for w in it:
                if w not in colour:
                    continue
                if colour[w] == 1:
                    cycle = [w]
                    u = v
                    while u != w:
                        cycle.append(u)
                        u = parent[u]
                    cycle.append(w)
                    return cycle[::-1]
                if colour[w] == 0:
                    colour[w] = 1
                    parent[w] = v
                    stack.append((w, iter(successors[w])))
                    break
            else:
                colour[v] = 2
                stack.pop()
    return []


def _reachable(start, adjacency):
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adjacency[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def validate(graph):
    """
    Checks a receiver graph and returns its canonical form.

    Duplicate (tail, head) edges are merged by summing their effective budgets m_e * gain and
    reliable bits. The result is acyclic, s has no incoming edge, t no outgoing edge, and every
    node lies on some s -> t path.

    Parameters:
    -----------
    graph : ComputationGraph

    Returns:
    --------
    graph : ComputationGraph
        validated copy with merged unit-gain edges

    Raises:
    -------
    GraphValidationException
        naming the offending cycle, node or edge
    """
    if graph.validated:
        return graph
    nodes = graph.nodes
    if len(set(nodes)) != len(nodes):
        raise GraphValidationException('node labels must be unique')
    known = set(nodes)
    s, t = graph.source, graph.sink
    if s not in known or t not in known:
        raise GraphValidationException(f'source {s!r} and sink {t!r} must be graph nodes')
    if s == t:
        raise GraphValidationException('source and sink must differ')

    merged = {}
    for e in graph.edges:
        if e.tail not in known or e.head not in known:
            raise GraphValidationException(f'edge {e.tail!r} -> {e.head!r} has an unknown endpoint')
        for name, value in (('m', e.m), ('b', e.b), ('gain', e.gain)):
            if value is None or not math.isfinite(value) or value < 0:
                raise GraphValidationException(
                    f'edge {e.tail!r} -> {e.head!r}: {name} must be finite and nonnegative, got {value}')
        if e.tail == e.head:
            raise GraphValidationException(f'cycle: {e.tail!r} -> {e.head!r}')
        if e.head == s:
            raise GraphValidationException(f'source {s!r} has an incoming edge from {e.tail!r}')
        if e.tail == t:
            raise GraphValidationException(f'sink {t!r} has an outgoing edge to {e.head!r}')
        m, b = merged.get((e.tail, e.head), (0.0, 0.0))
        merged[(e.tail, e.head)] = (m + e.m * e.gain, b + e.b)

    successors = defaultdict(list)
    predecessors = defaultdict(list)
    indegree = {v: 0 for v in nodes}
    for tail, head in merged:
        successors[tail].append(head)
        predecessors[head].append(tail)
        indegree[head] += 1

    # Kahn
    queue = deque(v for v in nodes if indegree[v] == 0)
    order = []
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in successors[v]:
            indegree[w] -= 1
            if indegree[w] == 0:
                queue.append(w)
    if len(order) != len(nodes):
        remaining = [v for v in nodes if indegree[v] > 0]
        cycle = _find_cycle(remaining, successors)
        raise GraphValidationException('cycle: ' + ' -> '.join(repr(v) for v in cycle))

    forward = _reachable(s, successors)
    backward = _reachable(t, predecessors)
    for v in nodes:
        if v not in forward:
            raise GraphValidationException(f'node {v!r} is unreachable from the source')
        if v not in backward:
            raise GraphValidationException(f'node {v!r} does not reach the sink')

    edges = tuple(Edge(tail, head, m, b) for (tail, head), (m, b) in merged.items())
    log.debug('validated graph: %d nodes, %d edges (%d merged)', len(nodes), len(edges), len(graph.edges) - len(edges))
    return ComputationGraph(nodes, s, t, edges, validated=True)


def flow_scale(caps):
    """
    Largest power of ten up to FLOW_SCALE at which the summed capacities, plus one unit of rounding per
    edge, stay within int32.
    """
    bound = math.ceil(math.fsum(caps)) + len(caps)
    scale = FLOW_SCALE
    while scale > 1 and bound * scale > INT32_MAX:
        scale //= 10
    if bound * scale > INT32_MAX:
        raise ResolutionException(f'total capacity {math.fsum(caps)!r} exceeds the max-flow range {INT32_MAX}')
    if scale < FLOW_SCALE:
        log.debug('total capacity %.10g: flow unit coarsened to 1/%d bit', math.fsum(caps), scale)
    return scale


def min_cut_supply(graph, c_gate):
    """
    Minimum over s-t cuts of sum_{e in cut} (m_e c_gate + b_e), solved as an integer max-flow.

    Capacities are rounded half-even to integer units of 1/scale bit before the flow solve, with scale
    the largest decade up to FLOW_SCALE whose total fits the int32 solver. The witness partition is
    the source side of the final residual graph (the minimum cut closest to s). The reported value is
    the exact float sum over the witnessing cut.

    Parameters:
    -----------
    graph : ComputationGraph
    c_gate : float
        bits per primitive use

    Returns:
    --------
    result : CutResult

    Raises:
    -------
    ResolutionException
        a positive capacity below the flow unit, or a total beyond the int32 range even at unit scale
    """
    graph = validate(graph)
    index = graph.index
    s, t = index[graph.source], index[graph.sink]
    size = len(graph.nodes)
    caps = np.array([e.capacity(c_gate) for e in graph.edges], dtype=float)
    scale = flow_scale(caps)
    quantized = np.rint(caps * scale).astype(np.int64)
    for e, cap, q in zip(graph.edges, caps, quantized):
        if cap > 0 and q == 0:
            raise ResolutionException(
                f'edge {e.tail!r} -> {e.head!r} capacity {cap!r} is below the max-flow resolution 1/{scale}')

    keep = quantized > 0
    if keep.any():
        rows = np.array([index[e.tail] for e in graph.edges])[keep]
        cols = np.array([index[e.head] for e in graph.edges])[keep]
        capacity = csr_matrix((quantized[keep].astype(np.int32), (rows, cols)), shape=(size, size))
        result = maximum_flow(capacity, s, t, method='dinic')
        flow_units = int(result.flow_value)
        residual = (capacity - result.flow).tocsr()
        residual.data = (residual.data > 0).astype(np.int32)
        residual.eliminate_zeros()
        side = breadth_first_order(residual, s, directed=True, return_predecessors=False)
    else:
        flow_units = 0
        side = np.array([s])

    partition = frozenset(graph.nodes[i] for i in side)
    cut = [(e, cap, q) for e, cap, q in zip(graph.edges, caps, quantized)
           if e.tail in partition and e.head not in partition]
    cut_units = int(sum(q for _, _, q in cut))
    if cut_units != flow_units:
        raise AssertionError(f'flow certificate {flow_units} does not match cut {cut_units}')
    cut_value = math.fsum(cap for _, cap, _ in cut)
    log.debug('min cut %.10g over %d edges (flow %d units of 1/%d bit)', cut_value, len(cut), flow_units, scale)
    return CutResult(cut_value=cut_value,
                     cut_edges=tuple(e for e, _, _ in cut),
                     partition=partition,
                     flow_value=flow_units / scale)


def combined_supply(graph, c_gate, n, c_ch):
    """
    min{n C_ch, min-cut compute supply}
    """
    return min(n * c_ch, min_cut_supply(graph, c_gate).cut_value)


def _flatten(kind, children):
    flat = []
    for child in children:
        if child[0] == kind:
            flat.extend(child[1])
        else:
            flat.append(child)
    return (kind, flat)


def series_parallel_tree(graph):
    """
    Reduces a two-terminal graph by parallel merges and series contractions.

    Returns:
    --------
    tree : tuple or None
        nested ('edge', i) / ('series', [...]) / ('parallel', [...]) over indices into graph.edges,
        or None when the graph is not series-parallel
    """
    s, t = graph.source, graph.sink
    edges = [(e.tail, e.head, ('edge', i)) for i, e in enumerate(graph.edges)]
    changed = True
    while changed and len(edges) > 1:
        changed = False
        groups = defaultdict(list)
        for tail, head, tree in edges:
            groups[(tail, head)].append(tree)
        if any(len(trees) > 1 for trees in groups.values()):
            edges = [(tail, head, trees[0] if len(trees) == 1 else _flatten('parallel', trees))
                     for (tail, head), trees in groups.items()]
            changed = True
            continue
        incoming = defaultdict(list)
        outgoing = defaultdict(list)
        for k, (tail, head, _) in enumerate(edges):
            outgoing[tail].append(k)
            incoming[head].append(k)
        for v in graph.nodes:
            if v in (s, t) or len(incoming[v]) != 1 or len(outgoing[v]) != 1:
                continue
            a, b = incoming[v][0], outgoing[v][0]
            joined = (edges[a][0], edges[b][1], _flatten('series', [edges[a][2], edges[b][2]]))
            edges = [e for k, e in enumerate(edges) if k not in (a, b)] + [joined]
            changed = True
            break
    if len(edges) == 1 and edges[0][0] == s and edges[0][1] == t:
        return edges[0][2]
    return None


def graph_from_dict(obj):
    """
    Builds a ComputationGraph from {nodes, source, sink, edges: [{tail, head, m, b, gain}]}.
    """
    allowed = {'nodes', 'source', 'sink', 'edges'}
    unknown = set(obj) - allowed
    if unknown:
        raise ScenarioParseException(f'graph: unknown field(s) {", ".join(sorted(unknown))}')
    for key in ('nodes', 'source', 'sink', 'edges'):
        if key not in obj:
            raise ScenarioParseException(f'graph.{key}: required field missing')
    edges = []
    for k, e in enumerate(obj['edges']):
        unknown = set(e) - {'tail', 'head', 'm', 'b', 'gain'}
        if unknown:
            raise ScenarioParseException(f'graph.edges[{k}]: unknown field(s) {", ".join(sorted(unknown))}')
        try:
            edges.append(Edge(e['tail'], e['head'], float(e.get('m', 0.0)), float(e.get('b', 0.0)),
                              float(e.get('gain', 1.0))))
        except (KeyError, TypeError, ValueError) as err:
            raise ScenarioParseException(f'graph.edges[{k}]: {err}') from err
    return ComputationGraph(tuple(obj['nodes']), obj['source'], obj['sink'], tuple(edges))


def load_graph(path):
    """
    Reads and validates a graph description file.
    """
    with open(path) as f:
        text = f.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioParseException(f'{path}: line {err.lineno} column {err.colno}: {err.msg}') from err
    return validate(graph_from_dict(obj))
