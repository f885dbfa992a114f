"""LAY1 binary layout file: the finished 2D map the server loads at startup."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

LAY1_MAGIC = b"LAY1"

NODE_KIND_TALENT = 0
NODE_KIND_DATASET = 1
_KIND_NAMES = {NODE_KIND_TALENT: "talent", NODE_KIND_DATASET: "dataset"}
_KIND_CODES = {v: k for k, v in _KIND_NAMES.items()}


class LayoutFileError(ValueError):
    pass


@dataclass(frozen=True)
class LayoutRecord:
    node_id: str
    x: float
    y: float
    node_kind: str  # "talent" | "dataset"
    display_size: float


def write_layout(path: str | Path, records: list[LayoutRecord]) -> None:
    with open(path, "wb") as fh:
        fh.write(LAY1_MAGIC)
        fh.write(struct.pack("<Q", len(records)))
        for rec in records:
            id_bytes = rec.node_id.encode("utf-8")
            fh.write(struct.pack("<H", len(id_bytes)))
            fh.write(id_bytes)
            fh.write(struct.pack("<ffBf", rec.x, rec.y, _KIND_CODES[rec.node_kind], rec.display_size))


def read_layout(path: str | Path) -> list[LayoutRecord]:
    data = Path(path).read_bytes()
    if data[:4] != LAY1_MAGIC:
        raise LayoutFileError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < 12:
        raise LayoutFileError(f"{path}: truncated header")
    (count,) = struct.unpack_from("<Q", data, 4)
    offset = 12
    out: list[LayoutRecord] = []
    for _ in range(count):
        if offset + 2 > len(data):
            raise LayoutFileError(f"{path}: truncated record header at byte {offset}")
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + id_len + 13 > len(data):
            raise LayoutFileError(f"{path}: truncated record at byte {offset}")
        node_id = data[offset : offset + id_len].decode("utf-8")
        offset += id_len
        x, y, kind, size = struct.unpack_from("<ffBf", data, offset)
        offset += 13
        if kind not in _KIND_NAMES:
            raise LayoutFileError(f"{path}: record {node_id!r} has unknown node kind {kind}")
        out.append(LayoutRecord(node_id, float(x), float(y), _KIND_NAMES[kind], float(size)))
    return out
