"""Weighted directed graphs and multipath shortest-path computation.

The multipath strategy runs Dijkstra repeatedly: after each found path the
arc costs are inflated so that later rounds are steered away from arcs the
path already uses (and, more gently, away from arcs that merely touch its
nodes).  Costs compound across rounds, so a path can repeat only when the
topology offers no alternative.  A stricter variant deletes intermediate
nodes instead, which guarantees node-disjointness but may find fewer paths.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

# Node ids are opaque but must be mutually orderable: equal-cost choices are
# broken toward the smallest id so runs are reproducible.
NodeId = int | str

Arc = tuple[NodeId, NodeId]


class RouteNotFound(Exception):
    """No path exists between the requested endpoints."""


class Graph:
    """Immutable weighted digraph with strictly positive finite arc costs."""

    __slots__ = ("nodes", "arcs", "_adjacency", "_incoming")

    def __init__(
        self,
        arcs: Mapping[Arc, float] | Iterable[tuple[NodeId, NodeId, float]],
        nodes: Iterable[NodeId] = (),
        _validate: bool = True,
    ):
        if isinstance(arcs, Mapping):
            arc_items = [(t, h, c) for (t, h), c in arcs.items()]
        else:
            arc_items = list(arcs)
        arc_map: dict[Arc, float] = {}
        node_set = set(nodes)
        for tail, head, cost in arc_items:
            cost = float(cost)
            if _validate:
                if tail == head:
                    raise ValueError(f"self-loop arc on node {tail!r}")
                if (tail, head) in arc_map:
                    raise ValueError(f"duplicate arc {tail!r} -> {head!r}")
                if not math.isfinite(cost) or cost <= 0.0:
                    raise ValueError(
                        f"arc {tail!r} -> {head!r} has invalid cost {cost!r}; "
                        "costs must be finite and > 0"
                    )
            arc_map[(tail, head)] = cost
            node_set.add(tail)
            node_set.add(head)
        self.nodes: tuple[NodeId, ...] = tuple(sorted(node_set))
        self.arcs: dict[Arc, float] = arc_map
        adjacency: dict[NodeId, list[tuple[NodeId, float]]] = {
            n: [] for n in self.nodes
        }
        for (tail, head), cost in arc_map.items():
            adjacency[tail].append((head, cost))
        for lst in adjacency.values():
            lst.sort()
        self._adjacency = adjacency
        self._incoming = None

    @classmethod
    def _prebuilt(cls, nodes, arcs, adjacency) -> "Graph":
        """Adopt caller-built structures without copying or validation."""
        g = object.__new__(cls)
        g.nodes = nodes
        g.arcs = arcs
        g._adjacency = adjacency
        g._incoming = None
        return g

    def successors(self, node: NodeId) -> list[tuple[NodeId, float]]:
        return self._adjacency[node]

    def incoming_arcs(self, node: NodeId) -> list[Arc]:
        """Arcs whose head is ``node`` (reverse index built on first use)."""
        if self._incoming is None:
            incoming: dict[NodeId, list[Arc]] = {}
            for arc in self.arcs:
                incoming.setdefault(arc[1], []).append(arc)
            self._incoming = incoming
        return self._incoming.get(node, [])

    def with_costs(self, costs: Mapping[Arc, float]) -> "Graph":
        """Same structure, new costs.  Caller guarantees validity."""
        return Graph._prebuilt(
            self.nodes,
            dict(costs),
            {
                n: [(h, costs[(n, h)]) for h, _ in lst]
                for n, lst in self._adjacency.items()
            },
        )

    def __contains__(self, node: NodeId) -> bool:
        return node in self._adjacency

    def __repr__(self) -> str:
        return f"Graph(nodes={len(self.nodes)}, arcs={len(self.arcs)})"


@dataclass
class SourceTree:
    """Shortest-path tree rooted at ``root``: distance and parent per node."""

    root: NodeId
    distance: dict[NodeId, float]
    parent: dict[NodeId, NodeId]

    def path_to(self, dest: NodeId) -> list[NodeId] | None:
        if dest not in self.distance:
            return None
        hops = [dest]
        while hops[-1] != self.root:
            hops.append(self.parent[hops[-1]])
        hops.reverse()
        return hops


def dijkstra(
    graph: Graph, source: NodeId, stop_at: NodeId | None = None
) -> SourceTree:
    """Shortest-path tree from ``source``.

    The heap is keyed by (distance, node id) and relaxation is strict, so
    equal-cost alternatives always resolve toward smaller node ids and the
    result is independent of input ordering.  With ``stop_at`` the search
    halts once that node is settled; the returned tree is partial but the
    branch to ``stop_at`` is final and identical to the full run's.
    """
    if source not in graph:
        raise ValueError(f"source {source!r} not in graph")
    distance: dict[NodeId, float] = {source: 0.0}
    parent: dict[NodeId, NodeId] = {}
    done: set[NodeId] = set()
    frontier: list[tuple[float, NodeId]] = [(0.0, source)]
    adjacency = graph._adjacency
    dist_get = distance.get
    pop, push = heapq.heappop, heapq.heappush
    while frontier:
        dist, node = pop(frontier)
        if node in done:
            continue
        if node == stop_at:
            return SourceTree(root=source, distance=distance, parent=parent)
        done.add(node)
        for head, cost in adjacency[node]:
            if head in done:
                continue
            new = dist + cost
            old = dist_get(head)
            if old is None or new < old:
                distance[head] = new
                parent[head] = node
                push(frontier, (new, head))
    return SourceTree(root=source, distance=distance, parent=parent)


def get_path(tree: SourceTree, dest: NodeId) -> list[NodeId] | None:
    """Hop list from the tree root to ``dest``, or None if unreachable."""
    return tree.path_to(dest)


@dataclass(frozen=True)
class CostTransform:
    """Penalty functions applied after each multipath round.

    ``on_path`` hits arcs the found path used in either direction;
    ``entering`` hits remaining arcs whose head lies on the path.  Both must
    be non-decreasing penalties with on_path(c) >= entering(c) >= c, checked
    where they are applied.
    """

    name: str
    on_path: Callable[[float], float] = field(compare=False)
    entering: Callable[[float], float] = field(compare=False)


PRESETS: dict[str, CostTransform] = {
    "identity": CostTransform("identity", lambda c: c, lambda c: c),
    "double": CostTransform("double", lambda c: 2.0 * c, lambda c: 2.0 * c),
    "triple": CostTransform("triple", lambda c: 3.0 * c, lambda c: 2.0 * c),
}

DEFAULT_TRANSFORM = PRESETS["double"]


def _apply_penalty(
    graph: Graph,
    override: dict[Arc, float],
    path: list[NodeId],
    transform: CostTransform,
) -> None:
    """Raise costs around ``path`` in the override map (missing = base).

    Every affected arc has its head on the path, so only incoming arcs of
    path nodes need touching.
    """
    path_arcs = set(zip(path, path[1:]))
    path_nodes = set(path)
    for head in path_nodes:
        for arc in graph.incoming_arcs(head):
            tail = arc[0]
            if arc in path_arcs or (head, tail) in path_arcs:
                fn, kind = transform.on_path, "on_path"
            else:
                fn, kind = transform.entering, "entering"
            cur = override.get(arc, graph.arcs[arc])
            new = fn(cur)
            if not math.isfinite(new) or new < cur:
                raise ValueError(
                    f"cost transform {transform.name!r} {kind} reduced or "
                    f"broke cost {cur!r} -> {new!r}"
                )
            override[arc] = new


def _dijkstra_override(
    graph: Graph,
    source: NodeId,
    override: dict[Arc, float],
    stop_at: NodeId | None = None,
) -> SourceTree:
    # dijkstra() with per-arc cost overrides; tie-breaks must stay
    # identical to the plain version
    distance: dict[NodeId, float] = {source: 0.0}
    parent: dict[NodeId, NodeId] = {}
    done: set[NodeId] = set()
    frontier: list[tuple[float, NodeId]] = [(0.0, source)]
    adjacency = graph._adjacency
    over_get = override.get
    dist_get = distance.get
    pop, push = heapq.heappop, heapq.heappush
    while frontier:
        dist, node = pop(frontier)
        if node in done:
            continue
        if node == stop_at:
            return SourceTree(root=source, distance=distance, parent=parent)
        done.add(node)
        for head, cost in adjacency[node]:
            if head in done:
                continue
            new = dist + over_get((node, head), cost)
            old = dist_get(head)
            if old is None or new < old:
                distance[head] = new
                parent[head] = node
                push(frontier, (new, head))
    return SourceTree(root=source, distance=distance, parent=parent)


def multipath_dijkstra(
    graph: Graph,
    source: NodeId,
    dest: NodeId,
    n_paths: int,
    transform: CostTransform = DEFAULT_TRANSFORM,
) -> list[list[NodeId]]:
    """Up to ``n_paths`` source->dest paths via iterative cost penalties.

    Always returns exactly ``n_paths`` entries when the destination is
    reachable at all: when no alternative remains the cheapest path simply
    repeats.  Raises RouteNotFound when it is unreachable.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    if source == dest:
        raise ValueError("source and destination must differ")
    if source not in graph:
        raise ValueError(f"source {source!r} not in graph")
    if dest not in graph:
        raise RouteNotFound(f"destination {dest!r} not in graph")
    paths: list[list[NodeId]] = []
    override: dict[Arc, float] = {}
    while len(paths) < n_paths:
        if override:
            tree = _dijkstra_override(graph, source, override, stop_at=dest)
        else:
            tree = dijkstra(graph, source, stop_at=dest)
        path = get_path(tree, dest)
        if path is None:
            if not paths:
                raise RouteNotFound(f"no path from {source!r} to {dest!r}")
            break
        paths.append(path)
        if len(paths) < n_paths:
            _apply_penalty(graph, override, path, transform)
    return paths


def multipath_node_delete(
    graph: Graph, source: NodeId, dest: NodeId, n_paths: int
) -> list[list[NodeId]]:
    """Strictly node-disjoint variant: deletes intermediate nodes per round.

    May return fewer than ``n_paths`` paths; raises RouteNotFound only when
    the destination is unreachable in the original graph.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    if source == dest:
        raise ValueError("source and destination must differ")
    paths: list[list[NodeId]] = []
    removed: set[NodeId] = set()
    removed_arcs: set[Arc] = set()
    while len(paths) < n_paths:
        arcs = {
            arc: cost
            for arc, cost in graph.arcs.items()
            if arc[0] not in removed
            and arc[1] not in removed
            and arc not in removed_arcs
        }
        work = Graph(arcs, nodes=[n for n in graph.nodes if n not in removed],
                     _validate=False)
        path = get_path(dijkstra(work, source), dest) if source in work else None
        if path is None:
            if not paths:
                raise RouteNotFound(f"no path from {source!r} to {dest!r}")
            break
        paths.append(path)
        removed.update(path[1:-1])
        if not path[1:-1]:
            # A direct arc deletes no nodes; drop the arc itself so the
            # next round cannot just repeat it.
            removed_arcs.add((source, dest))
    return paths


def path_cost(graph: Graph, path: list[NodeId]) -> float:
    """Total cost of consecutive arcs; 0.0 for a single-node path."""
    if not path:
        raise ValueError("empty path")
    total = 0.0
    for tail, head in zip(path, path[1:]):
        try:
            total += graph.arcs[(tail, head)]
        except KeyError:
            raise ValueError(f"path uses missing arc {tail!r} -> {head!r}")
    return total


def arc_disjoint(a: list[NodeId], b: list[NodeId]) -> bool:
    """True when the paths share no link, treating links as undirected."""
    links = {frozenset(arc) for arc in zip(a, a[1:])}
    return all(frozenset(arc) not in links for arc in zip(b, b[1:]))


def node_disjoint(a: list[NodeId], b: list[NodeId]) -> bool:
    """True when the paths share no nodes besides common endpoints."""
    ends = {a[0], a[-1]} & {b[0], b[-1]}
    inner = set(a) - ends
    return not any(n in inner for n in set(b) - ends)


def load_topology(text: str) -> Graph:
    """Parse an arc-per-line topology: ``tail head cost``, # comments."""
    arcs: list[tuple[NodeId, NodeId, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ValueError(
                f"line {lineno}: expected 'tail head cost', got {raw!r}"
            )
        tail, head, cost_text = fields
        try:
            cost = float(cost_text)
        except ValueError:
            raise ValueError(f"line {lineno}: bad cost {cost_text!r}")
        arcs.append((_parse_node(tail), _parse_node(head), cost))
    try:
        return Graph(arcs)
    except ValueError as exc:
        raise ValueError(f"invalid topology: {exc}")


def dump_topology(graph: Graph) -> str:
    lines = [
        f"{tail} {head} {cost:g}"
        for (tail, head), cost in sorted(graph.arcs.items())
    ]
    return "\n".join(lines) + "\n"


def _parse_node(token: str) -> NodeId:
    return int(token) if token.lstrip("-").isdigit() else token
