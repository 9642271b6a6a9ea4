"""Bipartite left-regular graphs represented as total functions.

A graph on left side {0,1}^n with left degree D = 2^d maps every pair
(x, y) of a left node and an edge label to one right node of m bits; multi
edges are implicit (two labels mapping to the same right node).  Prefix
views truncate right labels to ``k - a`` bits, where ``a = n - m`` may be
negative; left degrees never change under truncation.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bitstrings import check_bits
from .errors import BackendError, CapacityError, FormatError, ParameterError
from .exact import frac_sqrt

MAX_TABLE_BITS = 26   # largest n + d for explicit tables / full dumps
MAX_RIGHT_BITS = 28   # largest k - a for exhaustive right-side enumeration

BGEX_MAGIC = b"BGEX"
BGEX_VERSION = 1
_BACKEND_TABLE = 0
_BACKEND_LINEAR = 1


def _entry_dtype(m: int):
    if m <= 8:
        return np.uint8
    if m <= 16:
        return np.uint16
    if m <= 32:
        return np.uint32
    return np.uint64


class ExtractorGraph:
    """Total function {0,1}^n x {0,1}^d -> {0,1}^m with a table or linear backend."""

    def __init__(self, n: int, d: int, m: int, *, table=None, family=None):
        if n < 1 or d < 0 or m < 1:
            raise ParameterError(f"bad dimensions n={n} d={d} m={m}")
        if (table is None) == (family is None):
            raise ParameterError("exactly one of table/family must be given")
        self.n = n
        self.d = d
        self.m = m
        self._table = table
        self._family = family
        if table is not None:
            if n + d > MAX_TABLE_BITS:
                raise CapacityError(
                    f"table with n+d={n + d} bits exceeds the {MAX_TABLE_BITS}-bit budget"
                )
            expected = 1 << (n + d)
            if table.ndim != 1 or table.size != expected:
                raise FormatError(f"table must hold {expected} entries, got {table.size}")
            if m < 64 and int(table.max()) >> m:
                raise FormatError("table entry exceeds m bits")
            table.setflags(write=False)
        else:
            if family.m != m:
                raise ParameterError(f"family produces {family.m}-bit outputs, graph wants {m}")

    @property
    def a(self) -> int:
        return self.n - self.m

    @property
    def degree(self) -> int:
        return 1 << self.d

    @property
    def backend_kind(self) -> str:
        return "table" if self._table is not None else "linear"

    @property
    def table(self) -> np.ndarray:
        if self._table is None:
            raise BackendError("graph has a linear backend, no explicit table")
        return self._table

    @property
    def family(self):
        if self._family is None:
            raise BackendError("graph has a table backend, no linear family")
        return self._family

    def ext_eval(self, x: int, y: int) -> int:
        """Right endpoint of the y-labeled edge out of x."""
        check_bits(x, self.n, "left node")
        check_bits(y, self.d, "edge label")
        if self._table is not None:
            return int(self._table[(x << self.d) | y])
        return self._family.matrix(y).mat_vec(x)

    def prefix_view(self, k: int) -> "PrefixView":
        return PrefixView(self, k)

    def __repr__(self) -> str:
        return (
            f"ExtractorGraph(n={self.n}, d={self.d}, m={self.m}, "
            f"backend={self.backend_kind})"
        )


class PrefixView:
    """The graph with right labels truncated to ``k - a`` bits (borrowed, not copied)."""

    def __init__(self, graph: ExtractorGraph, k: int):
        if not 1 <= k <= graph.n:
            raise ParameterError(f"prefix parameter k={k} outside 1..{graph.n}")
        if k - graph.a < 1:
            raise ParameterError(f"k - a = {k - graph.a} < 1; no right bits would remain")
        self.graph = graph
        self.k = k
        self.m_k = k - graph.a

    @property
    def r_size(self) -> int:
        return 1 << self.m_k

    def ext_eval(self, x: int, y: int) -> int:
        return self.graph.ext_eval(x, y) >> (self.graph.m - self.m_k)

    def neighbors(self, x: int) -> list[int]:
        """Neighbor multiset of x, one entry per edge label in increasing label order."""
        check_bits(x, self.graph.n, "left node")
        g = self.graph
        shift = g.m - self.m_k
        if g.backend_kind == "table":
            row = g.table[(x << g.d) : ((x + 1) << g.d)]
            return [int(v) >> shift for v in row]
        return [g.ext_eval(x, y) >> shift for y in range(g.degree)]

    def right_degree(self, z: int) -> int:
        """Number of (x, y) pairs whose truncated image is z."""
        check_bits(z, self.m_k, "right node")
        g = self.graph
        if g.backend_kind == "table":
            shift = g.m - self.m_k
            return int(np.count_nonzero((g.table >> shift).astype(np.int64) == z))
        from .gf2 import solve_affine

        total = 0
        for y in range(g.degree):
            trunc = g.family.matrix(y).truncate_rows(self.m_k)
            space = solve_affine(trunc, z)
            if space is not None:
                total += space.size()
        return total

    def degree_counts(self) -> np.ndarray:
        """Right-degree histogram indexed by right label; exhaustive."""
        if self.m_k > MAX_RIGHT_BITS:
            raise CapacityError(
                f"right side of 2^{self.m_k} nodes exceeds the 2^{MAX_RIGHT_BITS} budget"
            )
        g = self.graph
        if g.backend_kind == "table":
            shift = g.m - self.m_k
            pref = (g.table >> shift).astype(np.int64)
            return np.bincount(pref, minlength=self.r_size)
        counts = np.zeros(self.r_size, dtype=np.int64)
        for y in range(g.degree):
            trunc = g.family.matrix(y).truncate_rows(self.m_k)
            members = _span_members([trunc.column(j) for j in range(trunc.cols)])
            rank = members.size.bit_length() - 1
            counts[members] += 1 << (g.n - rank)
        return counts

    def min_nonzero_right_degree(self) -> int:
        counts = self.degree_counts()
        nz = counts[counts > 0]
        return int(nz.min()) if nz.size else 0

    def prefixed_rows(self) -> np.ndarray:
        """(2^n, D) array of truncated images; the hot-loop input layout."""
        g = self.graph
        if g.n + g.d > MAX_TABLE_BITS:
            raise CapacityError(
                f"materializing 2^{g.n + g.d} edges exceeds the {MAX_TABLE_BITS}-bit budget"
            )
        shift = g.m - self.m_k
        if g.backend_kind == "table":
            return (g.table.reshape(1 << g.n, g.degree) >> shift).astype(np.int64)
        out = np.empty((1 << g.n, g.degree), dtype=np.int64)
        for y in range(g.degree):
            trunc = g.family.matrix(y).truncate_rows(self.m_k)
            out[:, y] = _linear_output_column(trunc, g.n)
        return out

    def member_rows(self, members: np.ndarray) -> np.ndarray:
        """(len(members), D) array of truncated images for selected left nodes."""
        g = self.graph
        if g.backend_kind == "table":
            table = g.table.reshape(1 << g.n, g.degree)
            return (table[members] >> (g.m - self.m_k)).astype(np.int64)
        out = np.empty((len(members), g.degree), dtype=np.int64)
        for y in range(g.degree):
            trunc = g.family.matrix(y).truncate_rows(self.m_k)
            out[:, y] = [trunc.mat_vec(int(x)) for x in members]
        return out


def _span_members(vectors: list[int]) -> np.ndarray:
    """All members of the GF(2) span of the given vectors (size 2^rank)."""
    slots: dict[int, int] = {}
    for v in vectors:
        while v:
            lead = v.bit_length() - 1
            if lead not in slots:
                slots[lead] = v
                break
            v ^= slots[lead]
    basis = list(slots.values())
    members = np.zeros(1 << len(basis), dtype=np.int64)
    size = 1
    for b in basis:
        members[size : 2 * size] = members[:size] ^ b
        size *= 2
    return members


def _linear_output_column(trunc, n: int) -> np.ndarray:
    """Outputs of a linear map on every x in 0..2^n-1 via subset-xor doubling."""
    out = np.zeros(1 << n, dtype=np.int64)
    size = 1
    for bit in range(n):
        img = trunc.mat_vec(1 << bit)
        out[size : 2 * size] = out[:size] ^ img
        size *= 2
    return out


@dataclass(frozen=True)
class BalanceParams:
    """Congestion parameters: error epsilon, block size Delta, threshold t.

    ``delta = sqrt(epsilon)`` is kept symbolic; whenever a decision compares
    against delta the comparison is squared so it stays exact even when
    epsilon is not a perfect square.  ``s = delta * Delta`` is the light-node
    occupancy bound.
    """

    epsilon: Fraction
    Delta: int
    t: int

    def __post_init__(self) -> None:
        eps = Fraction(self.epsilon)
        if not 0 < eps < 1:
            raise ParameterError(f"epsilon must lie in (0,1), got {eps}")
        object.__setattr__(self, "epsilon", eps)
        if self.Delta < 1:
            raise ParameterError(f"Delta must be positive, got {self.Delta}")
        if self.t < 1:
            raise ParameterError(f"t must be >= 1, got {self.t}")

    @property
    def delta_exact(self) -> Fraction | None:
        return frac_sqrt(self.epsilon)

    @property
    def delta(self) -> float:
        exact = self.delta_exact
        return float(exact) if exact is not None else float(self.epsilon) ** 0.5

    @property
    def s(self) -> float:
        return self.delta * self.Delta

    def list_size(self, degree: int) -> int:
        return degree * self.Delta

    def check_with_graph(self, graph: ExtractorGraph) -> None:
        if self.t > graph.n:
            raise ParameterError(f"t={self.t} exceeds n={graph.n}")
        if self.t - graph.a < 1:
            raise ParameterError(f"t - a = {self.t - graph.a} < 1")

    def to_dict(self) -> dict:
        return {
            "epsilon": str(self.epsilon),
            "delta": "sqrt(%s)" % self.epsilon if self.delta_exact is None else str(self.delta_exact),
            "Delta": self.Delta,
            "t": self.t,
        }


def serialize(graph: ExtractorGraph) -> bytes:
    """Binary graph format; see the README for the normative layout."""
    head = BGEX_MAGIC + struct.pack(
        "<HIII", BGEX_VERSION, graph.n, graph.d, graph.m
    )
    if graph.backend_kind == "table":
        entry_bytes = (graph.m + 7) // 8
        wide = graph.table.astype("<u8").reshape(-1, 1).view(np.uint8)
        payload = wide[:, :entry_bytes].tobytes()
        return head + bytes([_BACKEND_TABLE]) + payload
    descriptor = json.dumps(
        graph.family.descriptor(), sort_keys=True, separators=(",", ":")
    ).encode("utf-8")
    return head + bytes([_BACKEND_LINEAR]) + struct.pack("<I", len(descriptor)) + descriptor


def deserialize(data: bytes) -> ExtractorGraph:
    if len(data) < 19 or data[:4] != BGEX_MAGIC:
        raise FormatError("not a BGEX graph file (bad magic)")
    version, n, d, m = struct.unpack_from("<HIII", data, 4)
    if version != BGEX_VERSION:
        raise FormatError(f"unsupported BGEX version {version}")
    tag = data[18]
    payload = data[19:]
    if tag == _BACKEND_TABLE:
        if n + d > MAX_TABLE_BITS:
            raise CapacityError(f"table with n+d={n + d} bits exceeds the budget")
        entry_bytes = (m + 7) // 8
        expected = (1 << (n + d)) * entry_bytes
        if len(payload) != expected:
            raise FormatError(
                f"table payload must be {expected} bytes, got {len(payload)}"
            )
        raw = np.frombuffer(payload, dtype=np.uint8).reshape(-1, entry_bytes)
        wide = np.zeros((raw.shape[0], 8), dtype=np.uint8)
        wide[:, :entry_bytes] = raw
        values = wide.view("<u8").ravel().astype(_entry_dtype(m))
        return ExtractorGraph(n, d, m, table=values)
    if tag == _BACKEND_LINEAR:
        if len(payload) < 4:
            raise FormatError("truncated linear descriptor")
        (desc_len,) = struct.unpack_from("<I", payload, 0)
        body = payload[4:]
        if len(body) != desc_len:
            raise FormatError(
                f"descriptor length field says {desc_len}, payload has {len(body)} bytes"
            )
        try:
            descriptor = json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FormatError(f"bad linear descriptor: {exc}") from exc
        from .lineargraph import family_from_descriptor

        family = family_from_descriptor(descriptor, n=n, d=d)
        return ExtractorGraph(n, d, m, family=family)
    raise FormatError(f"unknown backend tag {tag}")


def save_graph(graph: ExtractorGraph, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(graph))


def load_graph(path) -> ExtractorGraph:
    with open(path, "rb") as fh:
        return deserialize(fh.read())


def graph_digest(graph: ExtractorGraph) -> str:
    return "sha256:" + hashlib.sha256(serialize(graph)).hexdigest()
