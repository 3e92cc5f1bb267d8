"""Block coding tests.

The projection oracle below recomputes every bin with a literal per-cell
double loop over the line equation, independent of the row-sliced
implementation.  Round-trip expectations compare decoded blocks against
the encoder's input, exhaustively over description subsets.
"""

import itertools
import random

import pytest

from mpolsr import filecodec, mojette
from mpolsr.mojette import (
    CodecConfig,
    DataBlock,
    Description,
    GeometricalBuffer,
    InsufficientDescriptions,
    OpCounter,
    OversizeError,
    ReconstructionError,
    bin_count,
    deblock,
    decode,
    default_directions,
    encode,
    project,
)


def oracle_project(rows, p, q):
    """Per-cell oracle: bin index of cell (k, l) is q*k - p*l, rebased."""
    height, width = len(rows), len(rows[0])
    values = {}
    for l in range(height):
        for k in range(width):
            b = q * k - p * l
            values[b] = values.get(b, 0) + rows[l][k]
    lo = min(q * k - p * l for k in range(width) for l in range(height))
    hi = max(q * k - p * l for k in range(width) for l in range(height))
    return [values.get(b, 0) for b in range(lo, hi + 1)]


def random_block(rng, height, width, block_id=0):
    rows = tuple(bytes(rng.randrange(256) for _ in range(width))
                 for _ in range(height))
    return DataBlock(rows, block_id, tuple(width for _ in range(height)))


# --- projections ---

@pytest.mark.parametrize("direction", [(0, 1), (1, 1), (-1, 1), (2, 1),
                                       (-3, 1), (1, 2), (-2, 3)])
def test_project_matches_per_cell_oracle(direction):
    rng = random.Random(20260814)
    for _ in range(10):
        block = random_block(rng, rng.randint(1, 5), rng.randint(1, 9))
        got = project(block, direction)
        assert list(got.bins) == oracle_project(block.rows, *direction)

def test_bin_count_formula_matches_oracle_and_known_grid():
    rng = random.Random(2)
    for _ in range(20):
        h, w = rng.randint(1, 6), rng.randint(1, 9)
        p, q = rng.randint(-3, 3), rng.randint(1, 3)
        block = random_block(rng, h, w)
        assert bin_count((p, q), h, w) == len(oracle_project(block.rows, p, q))
    # 4x4 grid: the four cheapest directions give 4, 7, 7 and 10 bins
    assert [bin_count(d, 4, 4) for d in [(0, 1), (1, 1), (-1, 1), (2, 1)]] \
        == [4, 7, 7, 10]

def test_projection_conserves_total_mass():
    rng = random.Random(3)
    block = random_block(rng, 4, 16)
    total = sum(sum(row) for row in block.rows)
    for direction in [(0, 1), (3, 1), (-2, 1), (1, 2)]:
        assert sum(project(block, direction).bins) == total

def test_project_rejects_nonpositive_q():
    block = random_block(random.Random(1), 2, 4)
    with pytest.raises(ValueError):
        project(block, (1, 0))


# --- configs and descriptions ---

def test_default_directions_prefer_small_p():
    assert default_directions(5) == [(0, 1), (1, 1), (-1, 1), (2, 1), (-2, 1)]
    assert default_directions(0) == []

def test_codec_config_validation():
    assert CodecConfig(2, 4).directions == ((0, 1), (1, 1))
    assert len(CodecConfig(2, 4, systematic=False).directions) == 4
    with pytest.raises(ValueError):
        CodecConfig(0, 2)
    with pytest.raises(ValueError):
        CodecConfig(3, 2)
    with pytest.raises(ValueError):
        CodecConfig(2, 4, directions=((0, 1),))
    with pytest.raises(ValueError):
        CodecConfig(2, 4, directions=((0, 1), (1, 2)))
    with pytest.raises(ValueError):
        CodecConfig(2, 4, directions=((1, 1), (1, 1)))

def test_block_validation():
    with pytest.raises(ValueError):
        DataBlock((), 0, ())
    with pytest.raises(ValueError):
        DataBlock((b"ab", b"abc"), 0, (2, 3))
    with pytest.raises(ValueError):
        DataBlock((b"ab",), 0, (3,))
    with pytest.raises(ValueError):
        DataBlock((b"ab",), 0, (1, 1))


# --- encode/decode round trips ---

@pytest.mark.parametrize("m,n,systematic", [
    (1, 2, True), (2, 4, True), (2, 4, False), (3, 5, True), (4, 6, True),
    (2, 2, True), (3, 3, False),
])
def test_any_m_of_n_descriptions_rebuild_the_block(m, n, systematic):
    rng = random.Random(1000 * m + n)
    config = CodecConfig(m, n, systematic=systematic)
    block = random_block(rng, m, rng.randint(1, 12), block_id=7)
    descriptions = encode(block, config)
    assert len(descriptions) == n
    assert [d.description_index for d in descriptions] == list(range(n))
    for subset in itertools.combinations(descriptions, m):
        assert decode(list(subset), config) == block

def test_extra_descriptions_are_harmless():
    config = CodecConfig(2, 4)
    block = random_block(random.Random(5), 2, 9)
    descriptions = encode(block, config)
    assert decode(descriptions, config) == block

def test_ragged_row_lengths_survive_round_trip():
    config = CodecConfig(3, 5)
    block = DataBlock((b"abcde", b"xy\x00\x00\x00", b"\x00" * 5), 3, (5, 2, 0))
    descriptions = encode(block, config)
    for subset in itertools.combinations(descriptions, 3):
        got = decode(list(subset), config)
        assert got == block
        assert deblock(got) == [b"abcde", b"xy"]

def test_systematic_fast_path_costs_zero_operations():
    config = CodecConfig(3, 5)
    block = random_block(random.Random(8), 3, 64)
    descriptions = encode(block, config)
    counter = OpCounter()
    assert decode(descriptions[:3], config, op_counter=counter) == block
    assert counter.count == 0
    # losing one systematic row forces real arithmetic
    counter = OpCounter()
    subset = [descriptions[0], descriptions[1], descriptions[3]]
    assert decode(subset, config, op_counter=counter) == block
    assert counter.count > 0

def test_decode_requires_m_distinct_descriptions():
    config = CodecConfig(2, 4)
    block = random_block(random.Random(9), 2, 6)
    descriptions = encode(block, config)
    with pytest.raises(InsufficientDescriptions):
        decode([], config)
    with pytest.raises(InsufficientDescriptions):
        decode([descriptions[0]], config)
    with pytest.raises(InsufficientDescriptions):
        decode([descriptions[0], descriptions[0]], config)

def test_decode_rejects_mixed_blocks():
    config = CodecConfig(2, 4)
    rng = random.Random(10)
    a = encode(random_block(rng, 2, 6, block_id=1), config)
    b = encode(random_block(rng, 2, 6, block_id=2), config)
    with pytest.raises(ValueError):
        decode([a[0], b[1]], config)

def test_corrupted_bins_are_detected():
    config = CodecConfig(2, 4)
    block = random_block(random.Random(11), 2, 6)
    descriptions = encode(block, config)
    bad = descriptions[2]

    def tamper(delta):
        bins = list(bad.bins)
        bins[0] += delta
        return Description(bad.direction, tuple(bins), bad.block_id,
                           bad.description_index, False, bad.row_lengths)

    # with exactly m descriptions only impossible cell values are provable
    with pytest.raises(ReconstructionError):
        decode([descriptions[0], tamper(10_000)], config)
    # a redundant projection exposes even a one-off corruption
    with pytest.raises(ReconstructionError):
        decode([descriptions[0], tamper(1), descriptions[3]], config)

def test_operation_count_grows_linearly_with_block_width():
    config = CodecConfig(2, 4, systematic=False)
    costs = []
    for width in (64, 128, 256):
        block = DataBlock((bytes(i % 256 for i in range(width)),
                           bytes((i * 7) % 256 for i in range(width))),
                          0, (width, width))
        counter = OpCounter()
        descriptions = encode(block, config, op_counter=counter)
        decode(descriptions[:2], config, op_counter=counter)
        costs.append(counter.count)
    assert 1.6 < costs[1] / costs[0] < 2.5
    assert 1.6 < costs[2] / costs[1] < 2.5


# --- buffering ---

def test_buffer_emits_block_after_height_pushes():
    buf = GeometricalBuffer(height=3, flush_timeout=0.05)
    assert buf.push(b"aa", 0.00) is None
    assert buf.deadline == pytest.approx(0.05)
    assert buf.push(b"bbbb", 0.01) is None
    block = buf.push(b"c", 0.02)
    assert block is not None
    assert block.rows == (b"aa\x00\x00", b"bbbb", b"c\x00\x00\x00")
    assert block.original_lengths == (2, 4, 1)
    assert block.block_id == 0
    assert buf.pending_count == 0 and buf.deadline is None
    assert deblock(block) == [b"aa", b"bbbb", b"c"]

def test_buffer_flush_pads_with_empty_rows():
    buf = GeometricalBuffer(height=3)
    assert buf.flush(1.0) is None
    buf.push(b"solo", 1.0)
    block = buf.flush(1.1)
    assert block.rows == (b"solo", b"\x00" * 4, b"\x00" * 4)
    assert block.original_lengths == (4, 0, 0)
    assert deblock(block) == [b"solo"]
    assert buf.flush(1.2) is None

def test_buffer_block_ids_increase():
    buf = GeometricalBuffer(height=1, first_block_id=5)
    assert buf.push(b"x", 0.0).block_id == 5
    assert buf.push(b"y", 0.0).block_id == 6

def test_buffer_rejects_bad_payloads():
    buf = GeometricalBuffer(height=2, max_row_len=4)
    with pytest.raises(ValueError):
        buf.push(b"", 0.0)
    with pytest.raises(OversizeError):
        buf.push(b"12345", 0.0)

def test_flushed_partial_block_round_trips():
    buf = GeometricalBuffer(height=3)
    buf.push(b"tail packet", 0.0)
    block = buf.flush(1.0)
    config = CodecConfig(3, 5)
    descriptions = encode(block, config)
    for subset in itertools.combinations(descriptions, 3):
        assert deblock(decode(list(subset), config)) == [b"tail packet"]


# --- file parts ---

def test_file_round_trip_all_subsets():
    rng = random.Random(42)
    data = bytes(rng.randrange(256) for _ in range(10_000))
    parts = filecodec.encode_file(data, m=3, n=5, row_len=256)
    assert len(parts) == 5
    for subset in itertools.combinations(parts, 3):
        assert filecodec.decode_file(list(subset)) == data

def test_file_round_trip_awkward_sizes():
    for size in (0, 1, 255, 256, 257, 5 * 256):
        data = bytes((i * 31) % 256 for i in range(size))
        parts = filecodec.encode_file(data, m=2, n=3, row_len=256)
        assert filecodec.decode_file(parts[1:]) == data

def test_file_trailing_zeros_survive():
    data = b"payload" + b"\x00" * 600
    parts = filecodec.encode_file(data, m=2, n=4, row_len=128)
    assert filecodec.decode_file([parts[2], parts[3]]) == data

def test_file_decoder_rejects_garbage_and_mixtures():
    data = b"some stable content" * 20
    parts = filecodec.encode_file(data, m=2, n=3, row_len=64)
    with pytest.raises(filecodec.FormatError):
        filecodec.decode_file([b"not a part"])
    with pytest.raises(filecodec.FormatError):
        filecodec.decode_file([parts[0][:-3]])
    other = filecodec.encode_file(data, m=2, n=3, row_len=32)
    with pytest.raises(ValueError):
        filecodec.decode_file([parts[0], other[1]])
    with pytest.raises(InsufficientDescriptions):
        filecodec.decode_file([parts[0], parts[0]])
