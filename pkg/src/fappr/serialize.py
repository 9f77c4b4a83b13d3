"""Versioned little-endian container for alias trees and big-move tables.

Layout: ``FAPR`` magic, u16 version, u16 payload kind, u64 record count,
then records. Every array is written as a u64 length followed by its
little-endian payload.
"""
from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

from .alias import AliasBlock, AliasTable, AliasTree
from .bigmove import BigMove, BigMoveTable

MAGIC = b"FAPR"
VERSION = 1
KIND_TREES = 1
KIND_BIG_MOVES = 2

_HEADER = struct.Struct("<4sHHQ")


class FormatError(ValueError):
    pass


def _put(fh: BinaryIO, fmt: str, *values) -> None:
    fh.write(struct.pack("<" + fmt, *values))


def _get(fh: BinaryIO, fmt: str):
    size = struct.calcsize("<" + fmt)
    raw = fh.read(size)
    if len(raw) != size:
        raise FormatError("truncated file")
    out = struct.unpack("<" + fmt, raw)
    return out if len(out) > 1 else out[0]


def _put_array(fh: BinaryIO, arr, dtype: str) -> None:
    arr = np.ascontiguousarray(arr, dtype=np.dtype(dtype).newbyteorder("<"))
    _put(fh, "Q", len(arr))
    fh.write(arr.tobytes())


def _get_array(fh: BinaryIO, dtype: str) -> np.ndarray:
    n = _get(fh, "Q")
    dt = np.dtype(dtype).newbyteorder("<")
    raw = fh.read(n * dt.itemsize)
    if len(raw) != n * dt.itemsize:
        raise FormatError("truncated array")
    return np.frombuffer(raw, dtype=dt).astype(dtype)


def _header(fh: BinaryIO, kind: int, count: int) -> None:
    fh.write(_HEADER.pack(MAGIC, VERSION, kind, count))


def _read_header(fh: BinaryIO, kind: int) -> int:
    raw = fh.read(_HEADER.size)
    if len(raw) != _HEADER.size:
        raise FormatError("truncated header")
    magic, version, got_kind, count = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise FormatError("not a FAPR container")
    if version != VERSION:
        raise FormatError(f"unsupported container version {version}")
    if got_kind != kind:
        raise FormatError(f"expected payload kind {kind}, found {got_kind}")
    return count


def dump_trees(trees: dict[int, AliasTree], fh: BinaryIO) -> None:
    """Write alias trees whose leaf elements are integers, keyed by node id."""
    _header(fh, KIND_TREES, len(trees))
    for v in sorted(trees):
        tree = trees[v]
        blocks = list(tree.blocks())
        pos = {id(b): i for i, b in enumerate(blocks)}
        _put(fh, "QIIQQ", v, tree.block_size, tree.height, tree.size, len(blocks))
        for block in blocks:
            _put(fh, "B", 1 if block.is_leaf else 0)
            _put_array(fh, block.table.prob, "f8")
            _put_array(fh, block.table.alias, "i8")
            if block.is_leaf:
                _put_array(fh, block.table.elements, "i8")
            else:
                _put_array(fh, [pos[id(c)] for c in block.children], "i8")


def load_trees(fh: BinaryIO) -> dict[int, AliasTree]:
    count = _read_header(fh, KIND_TREES)
    out: dict[int, AliasTree] = {}
    for _ in range(count):
        v, d, height, size, n_blocks = _get(fh, "QIIQQ")
        raw = []
        for _ in range(n_blocks):
            is_leaf = _get(fh, "B")
            prob = _get_array(fh, "f8")
            alias = _get_array(fh, "i8")
            elems = _get_array(fh, "i8")
            raw.append((is_leaf, prob, alias, elems))
        built: dict[int, AliasBlock] = {}
        # children always follow their parent in depth-first order
        for i in range(n_blocks - 1, -1, -1):
            is_leaf, prob, alias, elems = raw[i]
            prob.setflags(write=False)
            alias.setflags(write=False)
            if is_leaf:
                built[i] = AliasBlock(AliasTable(tuple(elems.tolist()), prob, alias))
            else:
                children = tuple(built[int(c)] for c in elems)
                built[i] = AliasBlock(AliasTable(tuple(range(len(children))), prob, alias), children)
        out[v] = AliasTree(built[0], d, height, size)
    return out


def dump_big_moves(table: BigMoveTable, fh: BinaryIO) -> None:
    _header(fh, KIND_BIG_MOVES, len(table.moves))
    _put(fh, "dI", table.alpha, table.d)
    for v in sorted(table.moves):
        moves = table.moves[v]
        _put(fh, "QI", v, table.iterations.get(v, 0))
        _put_array(fh, [m.target for m in moves], "i8")
        _put_array(fh, [m.mark for m in moves], "u1")
        _put_array(fh, [m.p for m in moves], "f8")
        _put_array(fh, table.tables[v].prob, "f8")
        _put_array(fh, table.tables[v].alias, "i8")


def load_big_moves(fh: BinaryIO) -> BigMoveTable:
    count = _read_header(fh, KIND_BIG_MOVES)
    alpha, d = _get(fh, "dI")
    moves, tables, iterations = {}, {}, {}
    for _ in range(count):
        v, k = _get(fh, "QI")
        target = _get_array(fh, "i8").tolist()
        mark = _get_array(fh, "u1").tolist()
        p = _get_array(fh, "f8").tolist()
        prob = _get_array(fh, "f8")
        alias = _get_array(fh, "i8")
        prob.setflags(write=False)
        alias.setflags(write=False)
        moves[v] = tuple(BigMove(t, m, q) for t, m, q in zip(target, mark, p))
        tables[v] = AliasTable(tuple(range(len(target))), prob, alias)
        iterations[v] = k
    return BigMoveTable(moves, tables, iterations, alpha, d)
