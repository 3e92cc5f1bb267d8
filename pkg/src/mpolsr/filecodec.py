"""Serialize descriptions of whole files for the encode/decode commands.

A file is cut into fixed-width rows, grouped into blocks of ``m`` rows, and
each block is encoded into ``n`` descriptions.  Description ``i`` of every
block goes into one output part, so losing a part costs exactly one
description per block and any ``m`` surviving parts restore the file
byte-for-byte.

Each part is self-describing: a fixed header (magic, geometry, direction,
row width, total size, block count) followed by per-block bin sections as
little-endian 32-bit values.  Row lengths are not stored; they follow from
the total size.
"""

from __future__ import annotations

import struct

from . import mojette
from .mojette import CodecConfig, DataBlock, Description

MAGIC = b"MJTD"
VERSION = 1
_HEADER = struct.Struct("<4sBBHHHhHIIQ")
_FLAG_ROW = 1

DEFAULT_ROW_LEN = 4096


class FormatError(ValueError):
    """A description part is malformed or truncated."""


def _row_lengths(total_size: int, row_len: int, m: int, block_id: int):
    lengths = []
    for i in range(m):
        start = (block_id * m + i) * row_len
        lengths.append(max(0, min(row_len, total_size - start)))
    return tuple(lengths)


def encode_file(
    data: bytes,
    m: int,
    n: int,
    systematic: bool = True,
    row_len: int = DEFAULT_ROW_LEN,
) -> list[bytes]:
    """Encode ``data`` into ``n`` parts, any ``m`` of which restore it."""
    if row_len < 1:
        raise ValueError("row_len must be >= 1")
    config = CodecConfig(m=m, n=n, systematic=systematic)
    total = len(data)
    block_bytes = m * row_len
    n_blocks = (total + block_bytes - 1) // block_bytes if total else 0
    parts: list[bytearray] = []
    for index in range(n):
        is_row = systematic and index < m
        direction = (0, 1) if is_row else (
            config.directions[index - m if systematic else index]
        )
        parts.append(
            bytearray(
                _HEADER.pack(
                    MAGIC,
                    VERSION,
                    _FLAG_ROW if is_row else 0,
                    m,
                    n,
                    index,
                    direction[0],
                    direction[1],
                    row_len,
                    n_blocks,
                    total,
                )
            )
        )
    for block_id in range(n_blocks):
        base = block_id * block_bytes
        rows = tuple(
            data[base + i * row_len: base + (i + 1) * row_len].ljust(
                row_len, b"\x00"
            )
            for i in range(m)
        )
        block = DataBlock(rows, block_id,
                          _row_lengths(total, row_len, m, block_id))
        for desc in mojette.encode(block, config):
            buf = parts[desc.description_index]
            buf += struct.pack("<I", len(desc.bins))
            buf += struct.pack(f"<{len(desc.bins)}I", *desc.bins)
    return [bytes(p) for p in parts]


def _parse_part(blob: bytes):
    if len(blob) < _HEADER.size:
        raise FormatError("part shorter than header")
    (magic, version, flags, m, n, index, p, q, row_len, n_blocks,
     total) = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError("bad magic; not a description part")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    blocks = []
    offset = _HEADER.size
    for _ in range(n_blocks):
        if offset + 4 > len(blob):
            raise FormatError("truncated part: missing bin count")
        (count,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        end = offset + 4 * count
        if end > len(blob):
            raise FormatError("truncated part: missing bins")
        blocks.append(struct.unpack_from(f"<{count}I", blob, offset))
        offset += 4 * count
    if offset != len(blob):
        raise FormatError("trailing bytes after last block")
    meta = (m, n, row_len, n_blocks, total)
    return meta, index, bool(flags & _FLAG_ROW), (p, q), blocks


def decode_file(parts: list[bytes]) -> bytes:
    """Restore the original bytes from any ``m`` distinct parts."""
    if not parts:
        raise mojette.InsufficientDescriptions("no parts supplied")
    parsed = [_parse_part(blob) for blob in parts]
    meta = parsed[0][0]
    if any(p[0] != meta for p in parsed):
        raise ValueError("parts come from different encodings")
    m, n, row_len, n_blocks, total = meta
    config = CodecConfig(m=m, n=n)
    by_index = {}
    for _, index, is_row, direction, blocks in parsed:
        by_index.setdefault(index, (is_row, direction, blocks))
    if len(by_index) < m:
        raise mojette.InsufficientDescriptions(
            f"need {m} distinct parts, got {len(by_index)}"
        )
    out = bytearray()
    for block_id in range(n_blocks):
        lengths = _row_lengths(total, row_len, m, block_id)
        received = [
            Description(
                direction=direction,
                bins=blocks[block_id],
                block_id=block_id,
                description_index=index,
                is_systematic_row=is_row,
                row_lengths=lengths,
            )
            for index, (is_row, direction, blocks) in by_index.items()
        ]
        block = mojette.decode(received, config)
        for row, length in zip(block.rows, block.original_lengths):
            out += row[:length]
    return bytes(out[:total])
