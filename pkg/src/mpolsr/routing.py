"""Source routing over the sensed topology, with in-flight route repair.

Sources compute several paths on demand from their local graph and stamp
the full hop list into each packet header.  Intermediate nodes follow the
list; when the listed next hop is no longer a symmetric neighbor they may
recover by recomputing a single shortest tail from themselves and
splicing it over the remainder, bounded by a recovery cap and a hop
budget.

One local refinement: when this node computes routes (or a recovery
tail), its own outgoing arcs are restricted to its current symmetric
neighbors.  Third-party topology advertisements can keep a departed
neighbor alive for a full hold time, and without the restriction every
recovery here would re-splice the same dead first hop.  Remote stale arcs
are left alone; recovery at later hops deals with them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import netgraph
from .netgraph import CostTransform, DEFAULT_TRANSFORM, Graph, NodeId, \
    RouteNotFound, dijkstra, get_path
from .olsr import NodeState

DROP_NO_ROUTE = "no-route"
DROP_TTL = "ttl"

DEFAULT_MAX_HOPS = 32
DEFAULT_MAX_RECOVERIES = 4


@dataclass(frozen=True)
class SourceRouteHeader:
    hops: tuple[NodeId, ...]
    next_index: int
    flow_id: int
    packet_seq: int
    description_index: int | None = None
    recovery_count: int = 0

    def __post_init__(self):
        if not 0 <= self.next_index <= len(self.hops):
            raise ValueError("next_index outside hop list")
        if len(self.hops) < 2:
            raise ValueError("a route needs source and destination")

    @property
    def destination(self) -> NodeId:
        return self.hops[-1]


@dataclass
class RouteSet:
    destination: NodeId
    paths: tuple[tuple[NodeId, ...], ...]
    topology_version: int
    next_path_index: int = 0

    def __post_init__(self):
        if not self.paths:
            raise ValueError("route set needs at least one path")


@dataclass(frozen=True)
class Deliver:
    header: SourceRouteHeader


@dataclass(frozen=True)
class Forward:
    next_hop: NodeId
    header: SourceRouteHeader


@dataclass(frozen=True)
class Recovered:
    next_hop: NodeId
    header: SourceRouteHeader


@dataclass(frozen=True)
class Drop:
    reason: str
    header: SourceRouteHeader


Action = Deliver | Forward | Recovered | Drop


def routing_graph(state: NodeState) -> Graph:
    """Local graph with this node's outgoing arcs pruned to live neighbors."""
    cached = state._routing_graph_cache
    if cached is not None and cached[0] == state.version:
        return cached[1]
    graph = state.build_graph()
    me = state.self_id
    sym = state.symmetric_neighbors()
    mine = graph.successors(me) if me in graph else []
    keep = [(head, cost) for head, cost in mine if head in sym]
    if len(keep) != len(mine):
        # share every unaffected row with the base graph
        arcs = dict(graph.arcs)
        for head, _ in mine:
            if head not in sym:
                del arcs[(me, head)]
        adjacency = dict(graph._adjacency)
        adjacency[me] = keep
        graph = netgraph.Graph._prebuilt(graph.nodes, arcs, adjacency)
    state._routing_graph_cache = (state.version, graph)
    return graph


def compute_routes(
    state: NodeState,
    dest: NodeId,
    n_paths: int,
    transform: CostTransform = DEFAULT_TRANSFORM,
) -> RouteSet:
    """Fresh multipath route set stamped with the current topology version."""
    if dest == state.self_id:
        raise ValueError("cannot route to self")
    graph = routing_graph(state)
    if dest not in graph:
        raise RouteNotFound(f"destination {dest!r} unknown")
    paths = netgraph.multipath_dijkstra(graph, state.self_id, dest,
                                        n_paths, transform)
    return RouteSet(
        destination=dest,
        paths=tuple(tuple(p) for p in paths),
        topology_version=state.version,
    )


class RouteCache:
    """Per-destination route sets, recomputed only when the graph changes.

    Many state updates (two-hop refreshes, selector changes) bump the
    topology version without touching the routing graph; recomputing then
    would yield the same paths, so the cache also keeps the round-robin
    cursor where it was.
    """

    def __init__(self, n_paths: int,
                 transform: CostTransform = DEFAULT_TRANSFORM):
        if n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        self.n_paths = n_paths
        self.transform = transform
        self._routes: dict[NodeId, RouteSet] = {}
        self._graph: Graph | None = None

    def get(self, state: NodeState, dest: NodeId) -> RouteSet:
        cached = self._routes.get(dest)
        if cached is not None and cached.topology_version == state.version:
            return cached
        graph = routing_graph(state)
        if self._graph is not graph:
            if self._graph is None or self._graph.arcs != graph.arcs:
                self._routes.clear()
            self._graph = graph
        cached = self._routes.get(dest)
        if cached is not None:
            cached.topology_version = state.version
            return cached
        fresh = compute_routes(state, dest, self.n_paths, self.transform)
        self._routes[dest] = fresh
        return fresh


def dispatch(
    route_set: RouteSet,
    flow_id: int,
    packet_seq: int,
    description_index: int | None = None,
) -> SourceRouteHeader:
    """Assign a packet to a path: round-robin, or by description index.

    Descriptions of one block map deterministically to path
    description_index mod path count, independent of the cursor, so a
    block's spread over paths never depends on unrelated traffic.
    """
    paths = route_set.paths
    if description_index is None:
        path = paths[route_set.next_path_index % len(paths)]
        route_set.next_path_index = \
            (route_set.next_path_index + 1) % len(paths)
    else:
        path = paths[description_index % len(paths)]
    return SourceRouteHeader(
        hops=path,
        next_index=1,
        flow_id=flow_id,
        packet_seq=packet_seq,
        description_index=description_index,
    )


def forward(
    header: SourceRouteHeader,
    state: NodeState,
    allow_recovery: bool = True,
    max_hops: int = DEFAULT_MAX_HOPS,
    max_recoveries: int = DEFAULT_MAX_RECOVERIES,
) -> Action:
    """Decide what this node does with a source-routed packet."""
    me = state.self_id
    hops = header.hops
    if me == hops[-1]:
        return Deliver(header)
    i = header.next_index
    if not (0 < i < len(hops)) or hops[i - 1] != me:
        raise ValueError(
            f"node {me!r} is not the current hop of {hops} at {i}"
        )
    if i > max_hops:
        return Drop(DROP_TTL, header)
    next_hop = hops[i]
    if next_hop in state.symmetric_neighbors():
        return Forward(next_hop, replace(header, next_index=i + 1))
    if not allow_recovery or header.recovery_count >= max_recoveries:
        return Drop(DROP_NO_ROUTE, header)
    tail = get_path(dijkstra(routing_graph(state), me, stop_at=hops[-1]),
                    hops[-1])
    if tail is None or len(tail) < 2:
        return Drop(DROP_NO_ROUTE, header)
    repaired = replace(
        header,
        hops=hops[:i] + tuple(tail[1:]),
        next_index=i + 1,
        recovery_count=header.recovery_count + 1,
    )
    return Recovered(tail[1], repaired)
