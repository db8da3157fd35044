"""Directed multigraphs of closed trace walks and their tree classification.

A partition pi of {1..k} induces a directed multigraph on its blocks with one
edge block(m) -> block(m+1) per walk step (cyclically).  Whether the limit of
the corresponding trace term survives is decided entirely by the shape of
this graph:

* thick tree  - no loops, every adjacent pair joined by >= 2 edges in total,
  reduced simple graph a tree (dependent-pair models);
* fat tree    - thick tree whose every adjacent pair carries edges in one
  direction only (independent-entry models);
* colored fat tree - fat-tree shape with blue/red edge colors (two-block
  models); colors are free, the direction rule is the same.

Edges may carry a color tag: BLUE edges take weights from the first block
matrix, RED from the second.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

from .partitions import CrossPartition, SetPartition

BLUE = 1
RED = 2

ADMISSIBLE_TREE = "admissible_tree"
ZERO_SINGLE_EDGE_OR_LOOP = "zero_by_single_edge_or_loop"
ZERO_CYCLE = "zero_by_cycle"
ZERO_DIRECTION_OR_COLOR = "zero_by_direction_or_color_rule"

GRAPH_MODELS = ("elliptic", "iid", "colored_block")


@dataclass(frozen=True)
class TraceGraph:
    """Directed multigraph with optional per-edge colors, canonically encoded
    as a sorted edge tuple (used as cache key downstream)."""

    vertex_count: int
    edges: tuple[tuple[int, int, Optional[int]], ...]

    def __post_init__(self):
        for u, v, c in self.edges:
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u},{v}) endpoint out of range")
            if c not in (None, BLUE, RED):
                raise ValueError(f"unknown edge color {c!r}")
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=_edge_key)))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def recolored(self, color: Optional[int]) -> "TraceGraph":
        return TraceGraph(self.vertex_count, tuple((u, v, color) for u, v, _ in self.edges))


def _edge_key(edge):
    u, v, c = edge
    return (u, v, -1 if c is None else c)


def make_graph(vertex_count: int, edges: Iterable[tuple[int, int]],
               colors: Optional[Iterable[Optional[int]]] = None) -> TraceGraph:
    edges = list(edges)
    if colors is None:
        tagged = [(u, v, None) for u, v in edges]
    else:
        tagged = [(u, v, c) for (u, v), c in zip(edges, colors, strict=True)]
    return TraceGraph(vertex_count, tuple(tagged))


def graph_of_partition(pi: SetPartition) -> TraceGraph:
    """Blocks become vertices; one edge block(m) -> block(m+1) per step, with
    k+1 identified with 1.  Exactly k edges in total."""
    k = pi.ground_size
    vertex_of = {}
    for i, block in enumerate(pi.blocks):
        for element in block:
            vertex_of[element] = i
    edges = []
    for m in range(1, k + 1):
        nxt = 1 if m == k else m + 1
        edges.append((vertex_of[m], vertex_of[nxt], None))
    return TraceGraph(pi.num_blocks, tuple(edges))


@dataclass(frozen=True)
class GraphStats:
    """Loop and pair multiplicity counters of a trace graph.

    loop_counts[k]           - number of vertices carrying exactly k loops
    ordered_pair_counts[(k,l)] - vertex pairs u < v with k edges u->v and l edges v->u
    unordered_counts[k]      - vertex pairs with exactly k edges in total
    colored_pair_counts[(b,r)] - pairs whose edges all point one way, b blue + r red
    reduced_edge_count       - edges after forgetting multiplicity and orientation
                               (each loop vertex and each adjacent pair counts once)
    """

    vertex_count: int
    loop_counts: tuple[tuple[int, int], ...]
    ordered_pair_counts: tuple[tuple[tuple[int, int], int], ...]
    unordered_counts: tuple[tuple[int, int], ...]
    colored_pair_counts: Optional[tuple[tuple[tuple[int, int], int], ...]]
    reduced_edge_count: int
    component_count: int

    @property
    def cycle_excess(self) -> int:
        return self.reduced_edge_count + self.component_count - self.vertex_count

    @property
    def has_loop(self) -> bool:
        return bool(self.loop_counts)

    @property
    def has_single_loop_vertex(self) -> bool:
        return any(k == 1 for k, _ in self.loop_counts)

    @property
    def has_single_multiplicity_pair(self) -> bool:
        return any(k == 1 for k, _ in self.unordered_counts)

    @property
    def all_pairs_unidirectional(self) -> bool:
        return all(k == 0 or l == 0 for (k, l), _ in self.ordered_pair_counts)


def _components(vertex_count: int, pairs: Iterable[tuple[int, int]]) -> int:
    parent = list(range(vertex_count))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in pairs:
        ra, rb = find(u), find(v)
        if ra != rb:
            parent[ra] = rb
    return len({find(i) for i in range(vertex_count)})


@lru_cache(maxsize=65536)
def stats(g: TraceGraph) -> GraphStats:
    """All multiplicity counters of a graph; deterministic and cached."""
    loops: dict[int, int] = {}
    updown: dict[tuple[int, int], list[int]] = {}
    colored: dict[tuple[int, int], list[int]] = {}
    colored_ok = True
    for u, v, c in g.edges:
        if u == v:
            loops[u] = loops.get(u, 0) + 1
            continue
        a, b = (u, v) if u < v else (v, u)
        rec = updown.setdefault((a, b), [0, 0])
        rec[0 if u == a else 1] += 1
        crec = colored.setdefault((a, b), [0, 0])
        if c == BLUE:
            crec[0] += 1
        elif c == RED:
            crec[1] += 1
        else:
            colored_ok = False
    loop_counts: dict[int, int] = {}
    for _v, n in loops.items():
        loop_counts[n] = loop_counts.get(n, 0) + 1
    ordered: dict[tuple[int, int], int] = {}
    unordered: dict[int, int] = {}
    for (a, b), (k, l) in updown.items():
        ordered[(k, l)] = ordered.get((k, l), 0) + 1
        unordered[k + l] = unordered.get(k + l, 0) + 1
    colored_counts: Optional[dict[tuple[int, int], int]] = None
    if colored_ok:
        colored_counts = {}
        for key, (k, l) in updown.items():
            if k > 0 and l > 0:
                continue  # bidirectional pairs never reach a colored product
            br = tuple(colored[key])
            colored_counts[br] = colored_counts.get(br, 0) + 1
    reduced = len(loops) + len(updown)
    comps = _components(g.vertex_count, ((min(u, v), max(u, v)) for u, v, _ in g.edges if u != v))
    return GraphStats(
        vertex_count=g.vertex_count,
        loop_counts=tuple(sorted(loop_counts.items())),
        ordered_pair_counts=tuple(sorted(ordered.items())),
        unordered_counts=tuple(sorted(unordered.items())),
        colored_pair_counts=tuple(sorted(colored_counts.items())) if colored_counts is not None else None,
        reduced_edge_count=reduced,
        component_count=comps,
    )


@lru_cache(maxsize=65536)
def classify(g: TraceGraph, model: str) -> str:
    """Decide whether a connected graph's limit term survives.

    Loops and single-multiplicity pairs zero out under every model; a cycle
    in the reduced simple graph loses an order of N; the independent-entry
    and colored models additionally require every adjacent pair to point one
    way (a pair with >= 2 edges in each direction costs two moment factors
    against one reduced edge and vanishes).
    """
    if model not in GRAPH_MODELS:
        raise ValueError(f"unknown model {model!r}; expected one of {GRAPH_MODELS}")
    s = stats(g)
    if s.has_loop or s.has_single_multiplicity_pair:
        return ZERO_SINGLE_EDGE_OR_LOOP
    if s.cycle_excess > 0 or s.component_count > 1:
        return ZERO_CYCLE
    if model in ("iid", "colored_block") and not s.all_pairs_unidirectional:
        return ZERO_DIRECTION_OR_COLOR
    return ADMISSIBLE_TREE


def merge_under_cross_partition(
    graphs: list[TraceGraph], sigma: CrossPartition
) -> tuple[TraceGraph, bool]:
    """Union of the graphs with vertices re-addressed to sigma's blocks.

    The flag is true iff some edge of one graph coincides with an edge of
    another graph on the same ordered endpoint blocks (colors ignored).
    """
    if tuple(g.vertex_count for g in graphs) != sigma.parts:
        raise ValueError("cross partition parts do not match graph vertex counts")
    block_of = {}
    for i, block in enumerate(sigma.blocks):
        for tag in block:
            block_of[tag] = i
    edges = []
    seen_by: dict[tuple[int, int], set[int]] = {}
    for gi, g in enumerate(graphs):
        for u, v, c in g.edges:
            a, b = block_of[(gi, u)], block_of[(gi, v)]
            edges.append((a, b, c))
            seen_by.setdefault((a, b), set()).add(gi)
    shared = any(len(owners) > 1 for owners in seen_by.values())
    return TraceGraph(sigma.num_blocks, tuple(edges)), shared


def to_dot(g: TraceGraph) -> str:
    """DOT text for visual inspection: multiplicity as labels, colors as
    edge attributes."""
    groups: dict[tuple[int, int, Optional[int]], int] = {}
    for u, v, c in g.edges:
        groups[(u, v, c)] = groups.get((u, v, c), 0) + 1
    lines = ["digraph tracegraph {"]
    for i in range(g.vertex_count):
        lines.append(f"  v{i};")
    for (u, v, c), mult in sorted(groups.items(), key=lambda kv: _edge_key(kv[0])):
        attrs = [f'label="{mult}"']
        if c == BLUE:
            attrs.append("color=blue")
        elif c == RED:
            attrs.append("color=red")
        lines.append(f"  v{u} -> v{v} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines)
