"""Full-computation subgraph fingerprinting and training-frequency index.

The full computation FC(v) is the ancestor-closed subgraph rooted at v. Two
full computations count as the same exposure when they are isomorphic
preserving op tags, argument order and (by default) node values; node ids
never matter. Fingerprints are Merkle-style: a node's fingerprint hashes its
op, its value and its parents' fingerprints in order, memoized so indexing a
graph is linear in |V| even with heavy sharing.
"""

from __future__ import annotations

import hashlib
import io
import json
import struct
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .graph import ComputationGraph, layer_numbers, split_op_tag

_MAGIC = b"FCIX"
_VERSION = 1


@dataclass(frozen=True)
class Fingerprint:
    digest: bytes
    depth: int

    @property
    def hex(self) -> str:
        return self.digest.hex()


def graph_fingerprints(graph: ComputationGraph, include_values: bool = True) -> dict[str, Fingerprint]:
    """Fingerprint of FC(v) for every node v, bottom-up with memoization."""
    layers = layer_numbers(graph)
    order = sorted(graph.nodes, key=lambda nid: layers[nid])
    out: dict[str, Fingerprint] = {}
    for nid in order:
        node = graph.nodes[nid]
        h = hashlib.sha256()
        h.update(node.op.encode())
        h.update(b"\x00")
        if include_values:
            h.update(json.dumps(node.value.to_json(), sort_keys=True).encode())
        h.update(b"\x00")
        for p in node.parents:
            h.update(out[p].digest)
        out[nid] = Fingerprint(h.digest(), layers[nid])
    return out


def full_computation(graph: ComputationGraph, node_id: str) -> ComputationGraph:
    """The ancestor-closed induced subgraph rooted at ``node_id``."""
    if node_id not in graph.nodes:
        raise KeyError(f"unknown node {node_id!r}")
    keep = {node_id}
    stack = [node_id]
    while stack:
        for p in graph.nodes[stack.pop()].parents:
            if p not in keep:
                keep.add(p)
                stack.append(p)
    nodes = {nid: graph.nodes[nid] for nid in graph.nodes if nid in keep}
    return ComputationGraph(graph.task, nodes, node_id, meta=dict(graph.meta))


def fingerprint(graph: ComputationGraph, node_id: str | None = None, include_values: bool = True) -> Fingerprint:
    """Fingerprint of FC(node_id) (default: the sink's, i.e. the whole graph)."""
    fps = graph_fingerprints(graph, include_values)
    return fps[node_id if node_id is not None else graph.sink]


def fc_equal(a: ComputationGraph, va: str, b: ComputationGraph, vb: str, include_values: bool = True) -> bool:
    """Structural equality of two full computations (the collision verifier).

    Recursively compares op tags, argument order and (optionally) values,
    identifying nodes up to renaming. Independent of the hash path.
    """
    memo: dict[tuple[str, str], bool] = {}

    def eq(x: str, y: str) -> bool:
        key = (x, y)
        if key in memo:
            return memo[key]
        na, nb = a.nodes[x], b.nodes[y]
        ok = split_op_tag(na.op) == split_op_tag(nb.op) and len(na.parents) == len(nb.parents)
        if ok and include_values:
            ok = na.value == nb.value
        if ok:
            memo[key] = True  # guard against revisits along shared ancestors
            ok = all(eq(p, q) for p, q in zip(na.parents, nb.parents))
        memo[key] = ok
        return ok

    return eq(va, vb)


@dataclass
class FingerprintIndex:
    """Multiset of full-computation fingerprints from a training corpus."""

    corpus_id: str = ""
    include_values: bool = True
    counts: dict[bytes, int] = field(default_factory=dict)
    depths: dict[bytes, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def add_graph(self, graph: ComputationGraph) -> None:
        for fp in graph_fingerprints(graph, self.include_values).values():
            self.counts[fp.digest] = self.counts.get(fp.digest, 0) + 1
            self.depths[fp.digest] = fp.depth

    def frequency(self, fp: Fingerprint) -> int:
        return self.counts.get(fp.digest, 0)

    # -- persistence (single binary file, versioned header) -----------------

    def dump(self, path: str) -> None:
        with open(path, "wb") as f:
            f.write(_MAGIC)
            f.write(struct.pack("<HBB", _VERSION, int(self.include_values), 0))
            cid = self.corpus_id.encode()
            f.write(struct.pack("<I", len(cid)))
            f.write(cid)
            f.write(struct.pack("<Q", len(self.counts)))
            for digest, count in sorted(self.counts.items()):
                f.write(digest)
                f.write(struct.pack("<QI", count, self.depths[digest]))

    @staticmethod
    def load(path: str) -> "FingerprintIndex":
        with open(path, "rb") as f:
            data = io.BytesIO(f.read())
        if data.read(4) != _MAGIC:
            raise ValueError("not a fingerprint index file")
        version, include_values, _ = struct.unpack("<HBB", data.read(4))
        if version != _VERSION:
            raise ValueError(f"unsupported index version {version}")
        (cid_len,) = struct.unpack("<I", data.read(4))
        corpus_id = data.read(cid_len).decode()
        (n,) = struct.unpack("<Q", data.read(8))
        index = FingerprintIndex(corpus_id=corpus_id, include_values=bool(include_values))
        for _ in range(n):
            digest = data.read(32)
            count, depth = struct.unpack("<QI", data.read(12))
            index.counts[digest] = count
            index.depths[digest] = depth
        return index


def build_index(graphs: Iterable[ComputationGraph], corpus_id: str = "", include_values: bool = True) -> FingerprintIndex:
    index = FingerprintIndex(corpus_id=corpus_id, include_values=include_values)
    for graph in graphs:
        index.add_graph(graph)
    return index


@dataclass(frozen=True)
class MatchReport:
    per_node: dict[str, int]
    per_depth_mean: dict[int, float]


def match_frequency(graph: ComputationGraph, index: FingerprintIndex) -> MatchReport:
    """Training frequency of every node's full computation, plus per-depth means."""
    fps = graph_fingerprints(graph, index.include_values)
    per_node = {nid: index.frequency(fp) for nid, fp in fps.items()}
    by_depth: dict[int, list[int]] = defaultdict(list)
    for nid, fp in fps.items():
        by_depth[fp.depth].append(per_node[nid])
    per_depth = {d: sum(v) / len(v) for d, v in sorted(by_depth.items())}
    return MatchReport(per_node, per_depth)


def frequency_rows(
    graphs_with_flags: Iterable[tuple[ComputationGraph, bool]], index: FingerprintIndex
) -> list[dict]:
    """Fig-6-schema rows: mean FC frequency per depth, split by answer correctness."""
    sums: dict[tuple[int, bool], list[float]] = defaultdict(lambda: [0.0, 0])
    for graph, correct in graphs_with_flags:
        report = match_frequency(graph, index)
        fps = graph_fingerprints(graph, index.include_values)
        for nid, fp in fps.items():
            cell = sums[(fp.depth, bool(correct))]
            cell[0] += report.per_node[nid]
            cell[1] += 1
    rows = []
    for (depth, correct), (total, n) in sorted(sums.items()):
        rows.append(
            {"depth": depth, "answer_correct": int(correct), "mean_frequency": total / n, "count": n}
        )
    return rows
