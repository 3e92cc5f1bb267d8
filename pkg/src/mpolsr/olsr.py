"""Per-node link-state topology sensing.

Nodes broadcast periodic hello messages listing every neighbor they hear
and with what confidence; hearing yourself in a neighbor's hello upgrades
the link to symmetric.  Each node picks multipoint relays (MPRs), a small
neighbor subset covering all strict two-hop nodes; relays flood topology
messages that advertise the sender's full symmetric neighborhood under a
freshness counter.  All databases are soft state with hold-time expiry.

``version`` counts content changes of the exported routing graph
(symmetric links and advertised topology); refreshes that change nothing
leave it alone, so route caches keyed on it stay valid across steady-state
signaling.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import netgraph
from .netgraph import Graph, NodeId

SYM = "SYM"
ASYM = "ASYM"
MPR_SELECTED = "MPR_SELECTED"

_STATUS_RANK = {ASYM: 0, SYM: 1, MPR_SELECTED: 2}

ANSN_MOD = 1 << 16


def ansn_newer(a: int, b: int) -> bool:
    """Serial-number order on 16-bit counters: is ``a`` fresher than ``b``?"""
    return 0 < (a - b) % ANSN_MOD < ANSN_MOD // 2


@dataclass(frozen=True)
class HelloMsg:
    originator: NodeId
    listed_neighbors: tuple[tuple[NodeId, str], ...]
    emission_time: float


@dataclass(frozen=True)
class TcMsg:
    originator: NodeId
    advertised_neighbors: tuple[NodeId, ...]
    ansn: int
    emission_time: float


@dataclass
class _Link:
    status: str
    expires: float


@dataclass
class _TwoHop:
    nodes: frozenset
    expires: float


@dataclass
class _Topology:
    neighbors: frozenset
    ansn: int
    expires: float


class NodeState:
    """Soft-state databases of one node, advanced by its owner only."""

    def __init__(
        self,
        self_id: NodeId,
        hello_interval: float = 2.0,
        tc_interval: float = 5.0,
        hold_multiplier: float = 3.0,
    ):
        if hello_interval <= 0 or tc_interval <= 0 or hold_multiplier <= 0:
            raise ValueError("intervals and hold multiplier must be > 0")
        self.self_id = self_id
        self.hello_interval = hello_interval
        self.tc_interval = tc_interval
        self.link_hold = hold_multiplier * hello_interval
        self.topology_hold = hold_multiplier * tc_interval
        self.link_set: dict[NodeId, _Link] = {}
        self.two_hop_set: dict[NodeId, _TwoHop] = {}
        self.mpr_set: set[NodeId] = set()
        self.mpr_selector_set: set[NodeId] = set()
        self.topology_set: dict[NodeId, _Topology] = {}
        self.clock = 0.0
        self.version = 0
        self._ansn = 0
        self._last_advertised: frozenset | None = None
        self._graph_cache: tuple[int, Graph] | None = None
        self._sym_cache: tuple[int, set[NodeId]] | None = None
        # scratch slot for the routing layer's pruned-graph cache
        self._routing_graph_cache: tuple[int, Graph] | None = None

    # -- queries ---------------------------------------------------------

    def symmetric_neighbors(self) -> set[NodeId]:
        cache = self._sym_cache
        if cache is not None and cache[0] == self.version:
            return cache[1]
        sym = {n for n, l in self.link_set.items() if l.status == SYM}
        self._sym_cache = (self.version, sym)
        return sym

    def strict_two_hop(self) -> set[NodeId]:
        """Nodes reachable in exactly two hops through symmetric neighbors."""
        sym = self.symmetric_neighbors()
        out: set[NodeId] = set()
        for n in sym:
            entry = self.two_hop_set.get(n)
            if entry is not None:
                out |= entry.nodes
        out -= sym
        out.discard(self.self_id)
        return out

    # -- message processing ----------------------------------------------

    def process_hello(self, msg: HelloMsg, now: float) -> None:
        sender = msg.originator
        if sender == self.self_id:
            return
        self.clock = max(self.clock, now)
        listed: dict[NodeId, str] = {}
        for node, status in msg.listed_neighbors:
            if node in listed and _STATUS_RANK[listed[node]] >= \
                    _STATUS_RANK[status]:
                continue
            listed[node] = status
        my_status = listed.get(self.self_id)
        status = SYM if my_status is not None else ASYM
        old = self.link_set.get(sender)
        self.link_set[sender] = _Link(status, now + self.link_hold)
        old_status = old.status if old else None
        if (status == SYM) != (old_status == SYM):
            self._bump()

        sym_listed = frozenset(
            n for n, s in listed.items()
            if s in (SYM, MPR_SELECTED) and n != self.self_id
        )
        old_two = self.two_hop_set.get(sender)
        self.two_hop_set[sender] = _TwoHop(sym_listed, now + self.link_hold)

        if my_status == MPR_SELECTED:
            self.mpr_selector_set.add(sender)
        else:
            self.mpr_selector_set.discard(sender)

        if (old_status != status or old_two is None
                or old_two.nodes != sym_listed):
            self.select_mprs()

    def process_tc(self, msg: TcMsg, now: float) -> bool:
        """Apply a topology message; True when fresher content was stored."""
        origin = msg.originator
        if origin == self.self_id:
            return False
        self.clock = max(self.clock, now)
        entry = self.topology_set.get(origin)
        if entry is not None and not ansn_newer(msg.ansn, entry.ansn):
            if msg.ansn == entry.ansn:
                # Same content re-announced: keep it alive.  Without the
                # refresh a stable topology would expire between counter
                # bumps, which only happen on change.
                entry.expires = now + self.topology_hold
            return False
        advertised = frozenset(msg.advertised_neighbors) - {origin}
        changed = entry is None or entry.neighbors != advertised
        self.topology_set[origin] = _Topology(
            advertised, msg.ansn, now + self.topology_hold
        )
        if changed:
            self._bump()
        return True

    # -- MPR selection -----------------------------------------------------

    def select_mprs(self) -> set[NodeId]:
        """Greedy two-hop cover: sole reachers first, then best coverage.

        Ties go to the smaller node id.  The coverage invariant (every
        strict two-hop node reachable through some chosen relay) is
        asserted because later flooding correctness depends on it.
        """
        sym = sorted(self.symmetric_neighbors())
        targets = self.strict_two_hop()
        reach = {}
        for n in sym:
            entry = self.two_hop_set.get(n)
            reach[n] = (entry.nodes & targets) if entry else frozenset()
        chosen: set[NodeId] = set()
        covered: set[NodeId] = set()
        for z in sorted(targets):
            reachers = [n for n in sym if z in reach[n]]
            if len(reachers) == 1:
                chosen.add(reachers[0])
        for n in chosen:
            covered |= reach[n]
        while covered < targets:
            best = None
            best_gain = 0
            for n in sym:
                if n in chosen:
                    continue
                gain = len(reach[n] - covered)
                if gain > best_gain:
                    best, best_gain = n, gain
            if best is None:
                break
            chosen.add(best)
            covered |= reach[best]
        assert covered >= targets, "two-hop coverage invariant violated"
        self.mpr_set = chosen
        return set(chosen)

    # -- generation --------------------------------------------------------

    def generate_hello(self, now: float) -> HelloMsg:
        self.clock = max(self.clock, now)
        listed = []
        for n in sorted(self.link_set):
            link = self.link_set[n]
            if link.status == SYM and n in self.mpr_set:
                listed.append((n, MPR_SELECTED))
            else:
                listed.append((n, link.status))
        return HelloMsg(self.self_id, tuple(listed), now)

    def generate_tc(self, now: float) -> TcMsg:
        self.clock = max(self.clock, now)
        advertised = tuple(sorted(self.symmetric_neighbors()))
        current = frozenset(advertised)
        if self._last_advertised is not None \
                and current != self._last_advertised:
            self._ansn = (self._ansn + 1) % ANSN_MOD
        self._last_advertised = current
        return TcMsg(self.self_id, advertised, self._ansn, now)

    # -- maintenance -------------------------------------------------------

    def expire_entries(self, now: float) -> bool:
        self.clock = max(self.clock, now)
        removed = False
        neighborhood_changed = False
        for n in [n for n, l in self.link_set.items() if l.expires <= now]:
            if self.link_set[n].status == SYM:
                self._bump()
            del self.link_set[n]
            self.mpr_selector_set.discard(n)
            removed = neighborhood_changed = True
        for n in [n for n, e in self.two_hop_set.items()
                  if e.expires <= now]:
            del self.two_hop_set[n]
            removed = neighborhood_changed = True
        for o in [o for o, e in self.topology_set.items()
                  if e.expires <= now]:
            if self.topology_set[o].neighbors:
                self._bump()
            del self.topology_set[o]
            removed = True
        if neighborhood_changed:
            self.select_mprs()
        return removed

    def purge_link(self, neighbor: NodeId, now: float) -> None:
        """Drop a neighbor immediately (link-layer failure feedback)."""
        self.clock = max(self.clock, now)
        link = self.link_set.pop(neighbor, None)
        self.two_hop_set.pop(neighbor, None)
        self.mpr_selector_set.discard(neighbor)
        if link is not None:
            if link.status == SYM:
                self._bump()
            self.select_mprs()

    # -- graph export --------------------------------------------------------

    def build_graph(self) -> Graph:
        """Unit-cost digraph of everything this node currently believes.

        Symmetric one-hop links and advertised topology links both yield
        arcs in both directions.  Stale topology entries keep yielding
        arcs until they expire; that is what route recovery exists for.
        """
        cache = self._graph_cache
        if cache is not None and cache[0] == self.version:
            return cache[1]
        me = self.self_id
        arcs: dict[tuple[NodeId, NodeId], float] = {}
        adjacency: dict[NodeId, list] = {me: []}
        for n in self.link_set:
            adjacency[n] = []
        me_row = adjacency[me]
        for n in self.symmetric_neighbors():
            arcs[(me, n)] = 1.0
            arcs[(n, me)] = 1.0
            me_row.append((n, 1.0))
            adjacency[n].append((me, 1.0))
        for origin, entry in self.topology_set.items():
            for a in entry.neighbors:
                if a == origin or (origin, a) in arcs:
                    continue
                arcs[(origin, a)] = 1.0
                arcs[(a, origin)] = 1.0
                row = adjacency.get(origin)
                if row is None:
                    row = adjacency[origin] = []
                row.append((a, 1.0))
                row = adjacency.get(a)
                if row is None:
                    row = adjacency[a] = []
                row.append((origin, 1.0))
        graph = netgraph.Graph._prebuilt(
            tuple(sorted(adjacency)), arcs, adjacency
        )
        self._graph_cache = (self.version, graph)
        return graph

    def _bump(self) -> None:
        self.version += 1
        self._graph_cache = None
        self._sym_cache = None
