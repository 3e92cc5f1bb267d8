"""Multiple-description coding of packet blocks via discrete projections.

A block is an M x L byte grid (M packet rows zero-padded to a common width
L).  A projection along direction (p, q) sums the cells lying on each line
b = q*k - p*l into one bin.  With q fixed to 1 and pairwise distinct p,
any M distinct descriptions of a block suffice to rebuild it exactly: each
line then crosses each row once, and corner-based inversion always finds a
bin covering a single unknown cell, solves it, and propagates.

Encoding is systematic by default: the first M descriptions are the padded
rows themselves, so when they all arrive decoding is a zero-cost copy.  The
remaining descriptions are true projections that stand in for lost rows.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from operator import add, sub


class InsufficientDescriptions(Exception):
    """Fewer distinct descriptions than the decoder needs."""


class ReconstructionError(Exception):
    """Descriptions were mutually inconsistent or geometrically unusable."""


class OversizeError(ValueError):
    """Payload longer than the configured maximum row length."""


@dataclass
class OpCounter:
    """Counts elementary additive operations for complexity checks."""

    count: int = 0

    def add(self, n: int) -> None:
        self.count += n


@dataclass(frozen=True)
class DataBlock:
    """M x L byte grid plus the pre-padding length of every row."""

    rows: tuple[bytes, ...]
    block_id: int
    original_lengths: tuple[int, ...]

    def __post_init__(self):
        if not self.rows:
            raise ValueError("block needs at least one row")
        width = len(self.rows[0])
        if width < 1:
            raise ValueError("row width must be >= 1")
        if any(len(r) != width for r in self.rows):
            raise ValueError("all rows must share one width")
        if len(self.original_lengths) != len(self.rows):
            raise ValueError("one original length per row required")
        if any(not 0 <= n <= width for n in self.original_lengths):
            raise ValueError("original lengths must lie in [0, width]")

    @property
    def height(self) -> int:
        return len(self.rows)

    @property
    def width(self) -> int:
        return len(self.rows[0])


@dataclass(frozen=True)
class Description:
    """One transmissible unit: either a verbatim row or a projection.

    ``bins`` holds bin sums for projections, or the row's byte values when
    ``is_systematic_row`` is set (then ``direction`` is vestigial).  Row
    lengths ride along so the receiver can strip padding without any side
    channel.
    """

    direction: tuple[int, int]
    bins: tuple[int, ...]
    block_id: int
    description_index: int
    is_systematic_row: bool
    row_lengths: tuple[int, ...]

    def __post_init__(self):
        if not self.is_systematic_row and self.direction[1] < 1:
            raise ValueError("projection direction needs q >= 1")


def default_directions(count: int) -> list[tuple[int, int]]:
    """(0,1), (1,1), (-1,1), (2,1), ...: small |p| first to keep bins few."""
    if count < 0:
        raise ValueError("direction count must be >= 0")
    out = []
    p = 0
    while len(out) < count:
        out.append((p, 1))
        if p > 0 and len(out) < count:
            out.append((-p, 1))
        p += 1
    return out[:count]


@dataclass(frozen=True)
class CodecConfig:
    """Fixed coding geometry: need any ``m`` of ``n`` descriptions."""

    m: int
    n: int
    systematic: bool = True
    directions: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.n < self.m:
            raise ValueError("n must be >= m")
        needed = self.n - self.m if self.systematic else self.n
        dirs = tuple(self.directions) or tuple(default_directions(needed))
        object.__setattr__(self, "directions", dirs)
        if len(dirs) != needed:
            raise ValueError(f"need exactly {needed} directions, got {len(dirs)}")
        if any(q != 1 for _, q in dirs):
            # q = 1 makes every line cross every row exactly once, which is
            # what guarantees that any m descriptions reconstruct.
            raise ValueError("all directions must have q = 1")
        if len({p for p, _ in dirs}) != len(dirs):
            raise ValueError("direction p values must be pairwise distinct")


def bin_count(direction: tuple[int, int], height: int, width: int) -> int:
    p, q = direction
    return q * (width - 1) + abs(p) * (height - 1) + 1


def project(
    block: DataBlock,
    direction: tuple[int, int],
    description_index: int = 0,
    op_counter: OpCounter | None = None,
) -> Description:
    """Sum block cells into bins along lines b = q*k - p*l."""
    p, q = direction
    if q < 1:
        raise ValueError("projection direction needs q >= 1")
    height, width = block.height, block.width
    nbins = bin_count(direction, height, width)
    bmin = -p * (height - 1) if p > 0 else 0
    bins = [0] * nbins
    for l, row in enumerate(block.rows):
        # row l hits bins base, base+q, ... so the update is one strided
        # slice per row
        base = -p * l - bmin
        end = base + q * width
        bins[base:end:q] = map(add, bins[base:end:q], row)
    if op_counter is not None:
        op_counter.add(height * width)
    return Description(
        direction=direction,
        bins=tuple(bins),
        block_id=block.block_id,
        description_index=description_index,
        is_systematic_row=False,
        row_lengths=tuple(block.original_lengths),
    )


def encode(
    block: DataBlock,
    config: CodecConfig,
    op_counter: OpCounter | None = None,
) -> list[Description]:
    """All ``n`` descriptions of a block, systematic rows first."""
    if block.height != config.m:
        raise ValueError(
            f"block has {block.height} rows, codec expects {config.m}"
        )
    out: list[Description] = []
    if config.systematic:
        for i, row in enumerate(block.rows):
            out.append(
                Description(
                    direction=(0, 1),
                    bins=tuple(row),
                    block_id=block.block_id,
                    description_index=i,
                    is_systematic_row=True,
                    row_lengths=tuple(block.original_lengths),
                )
            )
    base = len(out)
    for j, direction in enumerate(config.directions):
        out.append(
            project(block, direction, description_index=base + j,
                    op_counter=op_counter)
        )
    return out


def decode(
    descriptions: list[Description],
    config: CodecConfig,
    op_counter: OpCounter | None = None,
) -> DataBlock:
    """Rebuild the block from any ``m`` distinct descriptions.

    When all systematic rows are present this is a straight copy with zero
    arithmetic.  Otherwise known rows are subtracted from the received
    projections and the rest is solved by corner propagation: repeatedly
    take a bin whose line covers exactly one unknown cell, read the cell
    off it, and update every other projection.
    """
    if not descriptions:
        raise InsufficientDescriptions("no descriptions received")
    by_index: dict[int, Description] = {}
    for d in descriptions:
        by_index.setdefault(d.description_index, d)
    if len(by_index) < config.m:
        raise InsufficientDescriptions(
            f"need {config.m} distinct descriptions, got {len(by_index)}"
        )
    received = sorted(by_index.values(), key=lambda d: d.description_index)
    block_id = received[0].block_id
    lengths = received[0].row_lengths
    if any(d.block_id != block_id or d.row_lengths != lengths
           for d in received):
        raise ValueError("descriptions mix different blocks")
    if len(lengths) != config.m:
        raise ValueError("descriptions disagree with codec row count")

    m = config.m
    sys_rows = {d.description_index: d for d in received if d.is_systematic_row}
    projections = [d for d in received if not d.is_systematic_row]
    if any(i >= m for i in sys_rows):
        raise ValueError("systematic row index out of range")

    width = None
    for i, d in sys_rows.items():
        width = len(d.bins) if width is None else width
        if len(d.bins) != width:
            raise ValueError("descriptions disagree on block width")
    for d in projections:
        w = len(d.bins) - abs(d.direction[0]) * (m - 1)
        width = w if width is None else width
        if w != width:
            raise ValueError("descriptions disagree on block width")
    if width is None or width < 1:
        raise ReconstructionError("cannot establish block width")

    rows: list[bytes | bytearray | None] = [None] * m
    for i, d in sys_rows.items():
        if any(not 0 <= v <= 255 for v in d.bins):
            raise ReconstructionError("systematic row byte out of range")
        rows[i] = bytes(d.bins)
    unknown_rows = [l for l in range(m) if rows[l] is None]
    if not unknown_rows:
        return DataBlock(tuple(rows), block_id, lengths)

    # Peel known rows out of each projection, then corner-propagate.
    # Projections beyond the minimum still participate: their bins must
    # also reduce to zero, which exposes inconsistent input.
    ops = 0
    work = []
    for d in projections:
        p = d.direction[0]
        bmin = -p * (m - 1) if p > 0 else 0
        bins = list(d.bins)
        cnt = [0] * len(bins)
        for l in range(m):
            base = -p * l - bmin
            row = rows[l]
            if row is None:
                cnt[base:base + width] = \
                    [c + 1 for c in cnt[base:base + width]]
            else:
                bins[base:base + width] = \
                    map(sub, bins[base:base + width], row)
                ops += width
        work.append((p, bmin, bins, cnt))
    if len(work) < len(unknown_rows):
        raise InsufficientDescriptions(
            f"{len(unknown_rows)} rows missing but only {len(work)} "
            "projections received"
        )

    for l in unknown_rows:
        rows[l] = bytearray(width)
    solved = [bytearray(width) for _ in range(m)]  # per-cell done flags
    for i, d in sys_rows.items():
        solved[i] = bytearray(b"\x01" * width)
    remaining = len(unknown_rows) * width

    ready = deque(
        (j, b)
        for j, (_, _, _, cnt) in enumerate(work)
        for b, c in enumerate(cnt)
        if c == 1
    )
    while ready and remaining:
        j, b = ready.popleft()
        p, bmin, bins, cnt = work[j]
        if cnt[b] != 1:
            continue
        real_b = b + bmin
        cell = None
        for l in unknown_rows:
            k = real_b + p * l
            if 0 <= k < width and not solved[l][k]:
                cell = (l, k)
                break
        if cell is None:
            raise ReconstructionError("bin bookkeeping lost its cell")
        l, k = cell
        v = bins[b]
        if not 0 <= v <= 255:
            raise ReconstructionError(
                f"cell ({l}, {k}) solved to {v}, outside byte range"
            )
        rows[l][k] = v
        solved[l][k] = 1
        remaining -= 1
        for j2, (p2, bmin2, bins2, cnt2) in enumerate(work):
            b2 = k - p2 * l - bmin2
            bins2[b2] -= v
            cnt2[b2] -= 1
            ops += 1
            if cnt2[b2] == 1:
                ready.append((j2, b2))
    if remaining:
        raise ReconstructionError(f"{remaining} cells left unsolved")
    if any(v for _, _, bins, _ in work for v in bins):
        raise ReconstructionError("projections inconsistent after solve")
    if op_counter is not None:
        op_counter.add(ops)
    return DataBlock(tuple(bytes(r) for r in rows), block_id, lengths)


class GeometricalBuffer:
    """Groups consecutive payloads into fixed-height blocks.

    Payloads accumulate until ``height`` of them form a block; a pending
    partial block should be flushed once ``deadline`` passes so the last
    packets of a burst are not stranded.  Flush padding uses zero-length
    rows, which ``deblock`` strips (hence empty payloads are rejected).
    """

    def __init__(
        self,
        height: int,
        flush_timeout: float = 0.05,
        max_row_len: int = 65535,
        first_block_id: int = 0,
    ):
        if height < 1:
            raise ValueError("height must be >= 1")
        if flush_timeout <= 0:
            raise ValueError("flush_timeout must be > 0")
        self.height = height
        self.flush_timeout = flush_timeout
        self.max_row_len = max_row_len
        self.next_block_id = first_block_id
        self._pending: list[bytes] = []
        self._first_push_time: float | None = None

    @property
    def pending_count(self) -> int:
        return len(self._pending)

    @property
    def deadline(self) -> float | None:
        if self._first_push_time is None:
            return None
        return self._first_push_time + self.flush_timeout

    def push(self, payload: bytes, now: float) -> DataBlock | None:
        if not payload:
            raise ValueError("empty payloads cannot be buffered")
        if len(payload) > self.max_row_len:
            raise OversizeError(
                f"payload of {len(payload)} bytes exceeds row limit "
                f"{self.max_row_len}"
            )
        if not self._pending:
            self._first_push_time = now
        self._pending.append(bytes(payload))
        if len(self._pending) == self.height:
            return self._emit()
        return None

    def flush(self, now: float | None = None) -> DataBlock | None:
        """Emit the pending partial block (zero-padded), if any."""
        if not self._pending:
            return None
        return self._emit()

    def _emit(self) -> DataBlock:
        payloads = self._pending
        width = max(len(p) for p in payloads)
        lengths = [len(p) for p in payloads]
        while len(payloads) < self.height:
            payloads.append(b"")
            lengths.append(0)
        rows = tuple(p.ljust(width, b"\x00") for p in payloads)
        block = DataBlock(rows, self.next_block_id, tuple(lengths))
        self.next_block_id += 1
        self._pending = []
        self._first_push_time = None
        return block


def deblock(block: DataBlock) -> list[bytes]:
    """Original payloads in push order, padding rows dropped."""
    return [
        row[:n]
        for row, n in zip(block.rows, block.original_lengths)
        if n > 0
    ]
