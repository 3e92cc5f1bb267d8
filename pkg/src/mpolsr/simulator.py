"""Discrete-event MANET simulator hosting five routing variants.

A single (time, sequence) heap orders all events, so identical
configurations replay identically.  Nodes share a unit-disk radio:
broadcasts reach every node within range, a unicast to a node that moved
out of range fails at transmit time.  Each node serves its outgoing
queue at ``link_bandwidth`` packets per second regardless of size, and a
full queue tail-drops.

Variants differ along three switches:

==========  =============  ========  ========
protocol    routing        feedback  recovery
==========  =============  ========  ========
OLSR        hop-by-hop     no        no
OLSR_FB     hop-by-hop     yes       no
SR_MPOLSR   source routes  yes       no
RE_MPOLSR   source routes  yes       yes
MDC_MPOLSR  source routes  yes       yes (+ coding)
==========  =============  ========  ========

Feedback means a failed unicast synchronously purges the link and (for
hop-by-hop) retries via the rebuilt table or (for source routes) re-runs
the forwarding decision, which may splice a recovery tail.  MDC_MPOLSR
additionally buffers payloads into blocks, encodes each block into n
descriptions spread over the paths, and counts a block delivered when
any m distinct descriptions reach the destination.

Metrics ignore the warm-up window: a packet (or block) is measured when
it was emitted at or after ``warmup``.  Measured packets satisfy
sent == delivered + dropped(no-route) + dropped(queue) + dropped(ttl)
+ in flight at the end; for MDC the drop and in-flight counters track
description packets while sent/delivered count payload rows.
"""

from __future__ import annotations

import heapq
import random
import struct
from collections import deque
from dataclasses import dataclass

from .mobility import Motion, init_motions, step_motions
from .mojette import CodecConfig, GeometricalBuffer, decode, encode
from .netgraph import PRESETS, RouteNotFound, dijkstra
from .olsr import HelloMsg, NodeState, TcMsg
from .redundancy import AllocationError, PathStats, allocate, \
    largest_remainder_round
from .routing import Drop, Forward, Recovered, RouteCache, \
    SourceRouteHeader, dispatch, forward, routing_graph
from .scenario import ScenarioConfig

EVT_HELLO = "hello-emit"
EVT_TC = "tc-emit"
EVT_EXPIRY = "expiry-scan"
EVT_MOBILITY = "mobility-update"
EVT_APP = "app-send"
EVT_TX = "link-transmit-complete"
EVT_RETRY = "link-retries-exhausted"
EVT_FLUSH = "flush-timer"

_HELLO = 0
_TC = 1
_DATA = 2

_EXPIRY_PERIOD = 0.5

# repeated slice source for deterministic payload bodies
_PATTERN = bytes(range(256)) * 257


class SimulationError(RuntimeError):
    """Internal invariant violated while running (always a bug)."""


@dataclass
class MetricsReport:
    """Counters for one run; measured window only (see module docstring)."""

    protocol: str
    sent_app_packets: int
    delivered_app_packets: int
    delivery_ratio: float
    mean_delay: float | None
    control_overhead_bytes: int
    recoveries: int
    dropped_no_route: int
    dropped_queue: int
    dropped_ttl: int
    in_flight_at_end: int
    blocks_sent: int
    blocks_reconstructed: int
    descriptions_lost: int
    mdc_overhead_bytes: int


class _Packet:
    __slots__ = ("flow", "seq", "send_time", "dst", "size", "hop_count",
                 "header", "desc", "block_id", "measured")

    def __init__(self, flow, seq, send_time, dst, size, measured,
                 header=None, desc=None, block_id=None):
        self.flow = flow
        self.seq = seq
        self.send_time = send_time
        self.dst = dst
        self.size = size
        self.measured = measured
        self.hop_count = 0
        self.header = header
        self.desc = desc
        self.block_id = block_id


class _BlockMeta:
    __slots__ = ("rows", "row_meta", "measured", "done", "got", "descs")

    def __init__(self, rows, row_meta, measured):
        self.rows = rows
        self.row_meta = row_meta      # (seq, push_time, row_measured) tuples
        self.measured = measured
        self.done = False
        self.got = set()
        self.descs = []


class _Flow:
    __slots__ = ("id", "src", "dst", "next_seq", "next_desc_seq",
                 "buffer", "pending", "blocks")

    def __init__(self, fid, src, dst):
        self.id = fid
        self.src = src
        self.dst = dst
        self.next_seq = 0
        self.next_desc_seq = 0
        self.buffer: GeometricalBuffer | None = None
        self.pending: list[tuple[int, float, bool]] = []
        self.blocks: dict[int, _BlockMeta] = {}


def _payload_bytes(flow_id: int, seq: int, size: int) -> bytes:
    head = struct.pack("<II", flow_id & 0xFFFFFFFF, seq & 0xFFFFFFFF)
    if size <= 8:
        return head[:size]
    off = (flow_id * 37 + seq) % 251
    return head + _PATTERN[off:off + size - 8]


def _desc_size(desc) -> int:
    # byte-size model for a description packet: framing plus either the
    # verbatim row or two bytes per projection bin
    if desc.is_systematic_row:
        return 16 + len(desc.bins)
    return 16 + 2 * len(desc.bins)


class Simulation:
    """One configured run.  Build, then call :meth:`run` exactly once."""

    def __init__(self, config: ScenarioConfig, trace=None, packet_log=None):
        config.validate()
        self.cfg = config
        self.trace = trace
        self.packet_log = packet_log
        self.rng = random.Random(config.seed)
        self.now = 0.0
        self._heap: list = []
        self._evseq = 0

        n = config.node_count
        self.source_routed = config.protocol in (
            "SR_MPOLSR", "RE_MPOLSR", "MDC_MPOLSR")
        self.feedback = config.protocol != "OLSR"
        self.recovery = config.protocol in ("RE_MPOLSR", "MDC_MPOLSR")
        self.mdc = config.protocol == "MDC_MPOLSR"

        self.states = [
            NodeState(i, config.hello_interval, config.tc_interval,
                      config.hold_multiplier)
            for i in range(n)
        ]
        self.queues: list[deque] = [deque() for _ in range(n)]
        self.busy = [False] * n
        self.service = 1.0 / config.link_bandwidth
        self.retry_hold = (config.mac_retries - 1) * self.service
        self.last_adv: list[frozenset] = [frozenset()] * n
        self.tc_ok = [0.0] * n
        self.dup: list[dict] = [dict() for _ in range(n)]
        self.dup_hold = config.tc_interval * config.hold_multiplier
        transform = PRESETS[config.cost_transform]
        self.caches = [RouteCache(config.n_paths, transform)
                       for _ in range(n)]
        self.tables: list[dict | None] = [None] * n
        self.table_graph: list = [None] * n

        self.motions: list[Motion] = init_motions(
            n, config.area, self.rng, config.placements)
        self.script = sorted(config.script)
        self._script_idx = 0
        self.nbr_list: list[list[int]] = [[] for _ in range(n)]
        self.nbr_set: list[set[int]] = [set() for _ in range(n)]
        self._rebuild_neighbors()

        self.flows = self._make_flows()
        if self.mdc:
            self.codec = CodecConfig(config.mdc.m, config.mdc.n)
            flush = config.mdc.flush_timeout
            if flush is None:
                # a block filled at the CBR rate takes (m-1) intervals;
                # leave headroom so only trailing partials ever flush
                flush = max(0.05,
                            1.5 * config.mdc.m * config.traffic.packet_interval)
            for flow in self.flows:
                flow.buffer = GeometricalBuffer(config.mdc.m, flush)

        # measured-window counters
        self.m_sent = 0
        self.m_delivered = 0
        self.m_delay_sum = 0.0
        self.m_delay_count = 0
        self.m_control_bytes = 0
        self.m_recoveries = 0
        self.m_drop = {"no-route": 0, "queue": 0, "ttl": 0}
        self.m_live = 0
        self.m_blocks_sent = 0
        self.m_blocks_rec = 0
        self.m_desc_lost = 0
        self.m_mdc_overhead = 0
        self._ran = False

        for i in range(n):
            self._push(self.rng.uniform(0.0, config.hello_interval),
                       EVT_HELLO, i)
        for i in range(n):
            self._push(
                config.hello_interval + self.rng.uniform(0.0, config.tc_interval),
                EVT_TC, i)
        for flow in self.flows:
            self._push(
                self.rng.uniform(0.0, config.traffic.packet_interval),
                EVT_APP, flow.id)
        self._push(_EXPIRY_PERIOD, EVT_EXPIRY, None)
        if config.speed[1] > 0 or self.script:
            self._push(config.mobility_step, EVT_MOBILITY, None)

    # -- setup -------------------------------------------------------------

    def _make_flows(self) -> list[_Flow]:
        cfg = self.cfg
        if cfg.flows is not None:
            pairs = list(cfg.flows)
        else:
            sources = self.rng.sample(range(cfg.node_count),
                                      cfg.traffic.n_sources)
            pairs = []
            for src in sources:
                dst = self.rng.randrange(cfg.node_count - 1)
                if dst >= src:
                    dst += 1
                pairs.append((src, dst))
        return [_Flow(i, src, dst) for i, (src, dst) in enumerate(pairs)]

    def _rebuild_neighbors(self) -> None:
        n = self.cfg.node_count
        limit = self.cfg.radio_range * self.cfg.radio_range
        motions = self.motions
        lists = [[] for _ in range(n)]
        for i in range(n):
            mi = motions[i]
            for j in range(i + 1, n):
                mj = motions[j]
                dx = mi.x - mj.x
                dy = mi.y - mj.y
                if dx * dx + dy * dy <= limit:
                    lists[i].append(j)
                    lists[j].append(i)
        self.nbr_list = lists
        self.nbr_set = [set(l) for l in lists]

    # -- event plumbing ------------------------------------------------------

    def _push(self, time: float, kind: str, arg, extra=None) -> None:
        self._evseq += 1
        heapq.heappush(self._heap, (time, self._evseq, kind, arg, extra))

    def _trace(self, kind: str, node, detail: str) -> None:
        if self.trace is not None:
            self.trace(self.now, kind, node, detail)

    def run(self) -> MetricsReport:
        if self._ran:
            raise SimulationError("a Simulation instance runs once")
        self._ran = True
        duration = self.cfg.duration
        heap = self._heap
        while heap:
            time, _, kind, arg, extra = heapq.heappop(heap)
            if time > duration:
                break
            self.now = time
            if kind == EVT_TX:
                self._on_tx(arg)
            elif kind == EVT_RETRY:
                self._on_retry(arg, extra)
            elif kind == EVT_APP:
                self._on_app(arg)
            elif kind == EVT_HELLO:
                self._on_hello(arg)
            elif kind == EVT_TC:
                self._on_tc(arg)
            elif kind == EVT_MOBILITY:
                self._on_mobility()
            elif kind == EVT_EXPIRY:
                self._on_expiry()
            elif kind == EVT_FLUSH:
                self._on_flush(arg, extra)
            else:  # pragma: no cover
                raise SimulationError(f"unknown event kind {kind!r}")
        self.now = duration
        return self._report()

    def _report(self) -> MetricsReport:
        sent = self.m_sent
        ratio = self.m_delivered / sent if sent else 0.0
        mean_delay = (self.m_delay_sum / self.m_delay_count
                      if self.m_delay_count else None)
        return MetricsReport(
            protocol=self.cfg.protocol,
            sent_app_packets=sent,
            delivered_app_packets=self.m_delivered,
            delivery_ratio=ratio,
            mean_delay=mean_delay,
            control_overhead_bytes=self.m_control_bytes,
            recoveries=self.m_recoveries,
            dropped_no_route=self.m_drop["no-route"],
            dropped_queue=self.m_drop["queue"],
            dropped_ttl=self.m_drop["ttl"],
            in_flight_at_end=self.m_live,
            blocks_sent=self.m_blocks_sent,
            blocks_reconstructed=self.m_blocks_rec,
            descriptions_lost=self.m_desc_lost,
            mdc_overhead_bytes=self.m_mdc_overhead,
        )

    # -- control plane -------------------------------------------------------

    def _on_hello(self, i: int) -> None:
        msg = self.states[i].generate_hello(self.now)
        self._trace(EVT_HELLO, i, f"listed={len(msg.listed_neighbors)}")
        self._enqueue(i, _HELLO, msg, None)
        self._push(self.now + self.cfg.hello_interval, EVT_HELLO, i)

    def _on_tc(self, i: int) -> None:
        self._emit_tc(i)
        self._push(self.now + self.cfg.tc_interval, EVT_TC, i)

    def _emit_tc(self, i: int) -> None:
        state = self.states[i]
        if state.mpr_selector_set:
            msg = state.generate_tc(self.now)
            self._trace(EVT_TC, i,
                        f"ansn={msg.ansn} adv={len(msg.advertised_neighbors)}")
            self.dup[i][(i, msg.ansn, msg.emission_time)] = \
                self.now + self.dup_hold
            self._enqueue(i, _TC, msg, None)
            self.last_adv[i] = frozenset(msg.advertised_neighbors)
        else:
            self._trace(EVT_TC, i, "suppressed, nobody selected this node")
        self.tc_ok[i] = self.now + self.cfg.tc_min_interval

    def _maybe_trigger_tc(self, i: int) -> None:
        # Early TC when the advertised neighbor set changed, so the rest of
        # the network stops planning routes over links this node knows are
        # gone.  Rate-limited; the periodic schedule keeps running untouched.
        if self.now < self.tc_ok[i]:
            return
        state = self.states[i]
        if not state.mpr_selector_set:
            return
        if frozenset(state.symmetric_neighbors()) != self.last_adv[i]:
            self._emit_tc(i)

    def _recv_hello(self, receiver: int, msg: HelloMsg) -> None:
        self.states[receiver].process_hello(msg, self.now)
        self._maybe_trigger_tc(receiver)

    def _recv_tc(self, receiver: int, sender: int, msg: TcMsg) -> None:
        key = (msg.originator, msg.ansn, msg.emission_time)
        dup = self.dup[receiver]
        if key in dup:
            return
        dup[key] = self.now + self.dup_hold
        state = self.states[receiver]
        state.process_tc(msg, self.now)
        if sender in state.mpr_selector_set:
            self._enqueue(receiver, _TC, msg, None)

    def _on_expiry(self) -> None:
        now = self.now
        for i, state in enumerate(self.states):
            if state.expire_entries(now):
                self._maybe_trigger_tc(i)
        self.dup = [{k: v for k, v in d.items() if v > now}
                    for d in self.dup]
        self._trace(EVT_EXPIRY, None, "")
        self._push(now + _EXPIRY_PERIOD, EVT_EXPIRY, None)

    def _on_mobility(self) -> None:
        cfg = self.cfg
        moved = step_motions(self.motions, cfg.area, cfg.speed,
                             cfg.pause_time, cfg.mobility_step, self.now,
                             self.rng)
        while (self._script_idx < len(self.script)
               and self.script[self._script_idx][0] <= self.now):
            _, node, x, y = self.script[self._script_idx]
            motion = self.motions[node]
            motion.x, motion.y = x, y
            motion.target_x, motion.target_y = x, y
            self._script_idx += 1
            moved = True
        if moved:
            self._rebuild_neighbors()
        self._trace(EVT_MOBILITY, None, "moved" if moved else "static")
        nxt = self.now + cfg.mobility_step
        if nxt <= cfg.duration:
            self._push(nxt, EVT_MOBILITY, None)

    # -- queueing and the radio ----------------------------------------------

    def _enqueue(self, node: int, kind: int, payload, dest) -> None:
        q = self.queues[node]
        if len(q) >= self.cfg.queue_capacity:
            if kind == _DATA:
                self._drop(payload, "queue")
            return
        q.append((kind, payload, dest))
        if not self.busy[node]:
            self.busy[node] = True
            self._push(self.now + self.service, EVT_TX, node)

    def _on_tx(self, node: int) -> None:
        q = self.queues[node]
        while True:
            if not q:
                self.busy[node] = False
                return
            kind, payload, dest = q.popleft()
            if kind != _DATA or dest is not None:
                break
            dest = self._resolve(node, payload)
            if dest is not None:
                break
            # packet evaporated at resolve time; the slot moves on
        if kind == _HELLO:
            size = 16 + 6 * len(payload.listed_neighbors)
            if self.now >= self.cfg.warmup:
                self.m_control_bytes += size
            self._trace(EVT_TX, node, "hello broadcast")
            for receiver in self.nbr_list[node]:
                self._recv_hello(receiver, payload)
        elif kind == _TC:
            size = 16 + 4 * len(payload.advertised_neighbors)
            if self.now >= self.cfg.warmup:
                self.m_control_bytes += size
            self._trace(EVT_TX, node, f"tc broadcast from {payload.originator}")
            for receiver in self.nbr_list[node]:
                self._recv_tc(receiver, node, payload)
        else:
            if dest in self.nbr_set[node]:
                self._trace(EVT_TX, node, f"data to {dest}")
                self._recv_data(dest, payload)
            elif self.retry_hold > 0.0:
                # Unacked unicast: the radio keeps retrying until the retry
                # limit lapses, holding the queue the whole time.  Only then
                # does the loss (and any feedback) surface.
                self._trace(EVT_TX, node, f"data to {dest} failed, retrying")
                self._push(self.now + self.retry_hold, EVT_RETRY, node,
                           (payload, dest))
                return
            else:
                self._trace(EVT_TX, node, f"data to {dest} failed")
                self._tx_failed(node, payload, dest)
        if q:
            self._push(self.now + self.service, EVT_TX, node)
        else:
            self.busy[node] = False

    def _on_retry(self, node: int, item) -> None:
        pkt, dest = item
        self._trace(EVT_RETRY, node, f"data to {dest} dropped")
        self._tx_failed(node, pkt, dest)
        q = self.queues[node]
        if q:
            self._push(self.now + self.service, EVT_TX, node)
        else:
            self.busy[node] = False

    def _tx_failed(self, node: int, pkt: _Packet, dest: int) -> None:
        # the radio already spent the slot; the packet is gone either way.
        # Feedback variants at least learn the neighbor is dead, so every
        # later packet gets steered around the break.
        if self.feedback:
            self.states[node].purge_link(dest, self.now)
            self._maybe_trigger_tc(node)
        self._drop(pkt, "no-route")

    # -- data plane ------------------------------------------------------------

    def _next_hop(self, node: int, dst: int):
        # tables survive version bumps that leave the graph itself intact
        state = self.states[node]
        graph = routing_graph(state)
        held = self.table_graph[node]
        if held is not graph:
            if held is None or held.arcs != graph.arcs:
                self.tables[node] = self._build_table(state)
            self.table_graph[node] = graph
        return self.tables[node].get(dst)

    def _build_table(self, state: NodeState) -> dict:
        graph = routing_graph(state)
        if state.self_id not in graph:
            return {}
        tree = dijkstra(graph, state.self_id)
        root = state.self_id
        first: dict = {}

        def first_hop(dest):
            known = first.get(dest)
            if known is not None:
                return known
            parent = tree.parent[dest]
            hop = dest if parent == root else first_hop(parent)
            first[dest] = hop
            return hop

        return {dest: first_hop(dest)
                for dest in tree.distance if dest != root}

    def _on_app(self, fid: int) -> None:
        flow = self.flows[fid]
        now = self.now
        measured = now >= self.cfg.warmup
        self._trace(EVT_APP, flow.src,
                    f"flow={flow.id} seq={flow.next_seq} dst={flow.dst}")
        if self.mdc:
            self._mdc_push(flow, measured)
        else:
            seq = flow.next_seq
            flow.next_seq += 1
            if self.packet_log is not None:
                self.packet_log.append(("send", flow.id, seq, now))
            if measured:
                self.m_sent += 1
                self.m_live += 1
            size = 12 + self.cfg.traffic.payload_bytes
            pkt = _Packet(flow.id, seq, now, flow.dst, size, measured)
            if self.source_routed:
                self._send_source_routed(flow, pkt)
            else:
                nh = self._next_hop(flow.src, flow.dst)
                if nh is None:
                    self._drop(pkt, "no-route")
                else:
                    self._enqueue(flow.src, _DATA, pkt, nh)
        nxt = now + self.cfg.traffic.packet_interval
        if nxt <= self.cfg.duration - self.cfg.cooldown:
            self._push(nxt, EVT_APP, fid)

    def _send_source_routed(self, flow: _Flow, pkt: _Packet) -> None:
        state = self.states[flow.src]
        try:
            routes = self.caches[flow.src].get(state, flow.dst)
        except RouteNotFound:
            self._drop(pkt, "no-route")
            return
        pkt.header = dispatch(routes, flow.id, pkt.seq)
        pkt.size += 4 * len(pkt.header.hops)
        self._enqueue(flow.src, _DATA, pkt, None)

    def _resolve(self, node: int, pkt: _Packet):
        """Pick the next hop of a source-routed packet at service time.

        Source routes are re-checked when the packet reaches the head of
        the queue, not when it enters it, so a link that died while the
        packet was waiting is still caught (and recovered from) in time.
        Returns the next hop, or None when the packet was dropped.
        """
        action = forward(pkt.header, self.states[node],
                         allow_recovery=self.recovery,
                         max_hops=self.cfg.max_hops,
                         max_recoveries=self.cfg.max_recoveries)
        if isinstance(action, Forward):
            pkt.header = action.header
            return action.next_hop
        if isinstance(action, Recovered):
            pkt.header = action.header
            if pkt.measured:
                self.m_recoveries += 1
            return action.next_hop
        if isinstance(action, Drop):
            self._drop(pkt, action.reason)
            return None
        raise SimulationError(f"unexpected action {action!r}")

    def _recv_data(self, node: int, pkt: _Packet) -> None:
        if pkt.header is not None:
            if node == pkt.header.hops[-1]:
                self._deliver(pkt)
            else:
                self._enqueue(node, _DATA, pkt, None)
            return
        if pkt.dst == node:
            self._deliver(pkt)
            return
        nh = self._next_hop(node, pkt.dst)
        if nh is None:
            self._drop(pkt, "no-route")
            return
        pkt.hop_count += 1
        if pkt.hop_count > self.cfg.max_hops:
            self._drop(pkt, "ttl")
        else:
            self._enqueue(node, _DATA, pkt, nh)

    def _deliver(self, pkt: _Packet) -> None:
        if pkt.desc is not None:
            self._mdc_deliver(pkt)
            return
        if pkt.measured:
            self.m_live -= 1
            self.m_delivered += 1
            self.m_delay_sum += self.now - pkt.send_time
            self.m_delay_count += 1
        if self.packet_log is not None:
            self.packet_log.append(("deliver", pkt.flow, pkt.seq, self.now))

    def _drop(self, pkt: _Packet, reason: str) -> None:
        if pkt.measured:
            self.m_live -= 1
            self.m_drop[reason] += 1
            if pkt.desc is not None:
                self.m_desc_lost += 1
        if self.packet_log is not None and pkt.desc is None:
            self.packet_log.append(("drop", pkt.flow, pkt.seq, self.now))

    # -- multiple-description pipeline ---------------------------------------

    def _mdc_push(self, flow: _Flow, measured: bool) -> None:
        seq = flow.next_seq
        flow.next_seq += 1
        if self.packet_log is not None:
            self.packet_log.append(("send", flow.id, seq, self.now))
        if measured:
            self.m_sent += 1
        payload = _payload_bytes(flow.id, seq,
                                 self.cfg.traffic.payload_bytes)
        flow.pending.append((seq, self.now, measured))
        block = flow.buffer.push(payload, self.now)
        if block is not None:
            self._emit_block(flow, block)
        elif len(flow.pending) == 1:
            deadline = flow.buffer.deadline
            self._push(deadline, EVT_FLUSH, flow.id, deadline)

    def _on_flush(self, fid: int, deadline) -> None:
        flow = self.flows[fid]
        current = flow.buffer.deadline
        if current is None or current != deadline:
            return  # block completed or re-opened since this was scheduled
        self._trace(EVT_FLUSH, flow.src,
                    f"flow={flow.id} rows={flow.buffer.pending_count}")
        block = flow.buffer.flush()
        if block is not None:
            self._emit_block(flow, block)

    def _emit_block(self, flow: _Flow, block) -> None:
        row_meta = tuple(flow.pending)
        flow.pending = []
        measured = row_meta[0][2]
        meta = _BlockMeta(block.rows, row_meta, measured)
        flow.blocks[block.block_id] = meta
        if measured:
            self.m_blocks_sent += 1
        descs = encode(block, self.codec)
        sizes = [_desc_size(d) for d in descs]
        if measured:
            self.m_mdc_overhead += sum(sizes) - sum(block.original_lengths)
        state = self.states[flow.src]
        packets = []
        for desc, size in zip(descs, sizes):
            pkt = _Packet(flow.id, flow.next_desc_seq, self.now, flow.dst,
                          size, measured, desc=desc,
                          block_id=block.block_id)
            flow.next_desc_seq += 1
            packets.append(pkt)
        try:
            routes = self.caches[flow.src].get(state, flow.dst)
        except RouteNotFound:
            for pkt in packets:
                if measured:
                    self.m_live += 1
                self._drop(pkt, "no-route")
            return
        mapping = self._alloc_paths(len(descs), routes.paths)
        for pkt, path_index in zip(packets, mapping):
            hops = routes.paths[path_index]
            pkt.header = SourceRouteHeader(
                hops=hops, next_index=1, flow_id=flow.id,
                packet_seq=pkt.seq,
                description_index=pkt.desc.description_index)
            pkt.size += 4 * len(hops)
            if measured:
                self.m_live += 1
            self._enqueue(flow.src, _DATA, pkt, None)

    def _alloc_paths(self, n_descs: int, paths) -> list[int]:
        n_paths = len(paths)
        m = self.codec.m
        mapping = [j % n_paths for j in range(min(m, n_descs))]
        redundant = n_descs - len(mapping)
        if redundant <= 0:
            return mapping
        if self.cfg.mdc.allocation == "buffer" and n_paths > 1:
            capacity = self.cfg.queue_capacity
            stats = [
                PathStats(max(len(self.queues[v]) for v in path[:-1]),
                          capacity)
                for path in paths
            ]
            try:
                shares = allocate(stats, redundant)
                counts = largest_remainder_round(shares, redundant)
                for path_index, count in enumerate(counts):
                    mapping.extend([path_index] * count)
                return mapping
            except AllocationError:
                pass  # all paths saturated: fall back to round robin
        mapping.extend((m + j) % n_paths for j in range(redundant))
        return mapping

    def _mdc_deliver(self, pkt: _Packet) -> None:
        if pkt.measured:
            self.m_live -= 1
        flow = self.flows[pkt.flow]
        meta = flow.blocks.get(pkt.block_id)
        if meta is None or meta.done:
            return  # straggler description of an already rebuilt block
        idx = pkt.desc.description_index
        if idx in meta.got:
            return
        meta.got.add(idx)
        meta.descs.append(pkt.desc)
        if len(meta.got) < self.codec.m:
            return
        block = decode(meta.descs, self.codec)
        if block.rows != meta.rows:
            raise SimulationError(
                f"block {pkt.block_id} of flow {flow.id} rebuilt wrong")
        meta.done = True
        meta.descs = []
        if meta.measured:
            self.m_blocks_rec += 1
            self.m_delay_sum += self.now - meta.row_meta[0][1]
            self.m_delay_count += 1
        for seq, _, row_measured in meta.row_meta:
            if row_measured:
                self.m_delivered += 1
            if self.packet_log is not None:
                self.packet_log.append(("deliver", flow.id, seq, self.now))


def run_scenario(config: ScenarioConfig, trace=None,
                 packet_log=None) -> MetricsReport:
    """Convenience wrapper: build a Simulation, run it, return the report."""
    return Simulation(config, trace=trace, packet_log=packet_log).run()
