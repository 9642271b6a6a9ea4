"""Linear graph backend: every edge label acts on left nodes as a GF(2) matrix.

The matrix for edge label y has row i equal to ``mask_i(y)`` applied to the
evaluation matrix at ``point_i(y)``, so bit i of the output is the inner
product of ``mask_i(y)`` with the chunk-polynomial evaluation of x at
``point_i(y)``.  The (point, mask) pairs come from a pluggable seed
expansion:

* ``counter`` — pairs derived by keyed BLAKE2b hashing of (y, i); fully
  deterministic from a 64-bit seed.  No extractor quality is claimed for this
  scheme; it is assessed empirically with the sampled verifier.
* ``external`` — pairs loaded verbatim from a JSON table file, so a
  purpose-built expansion can be plugged in without code changes.

Exact derivation for ``counter`` (normative): for row index i (0-based) of
edge label y, ``digest = blake2b(data=y.to_bytes(8,'little') +
i.to_bytes(4,'little'), key=seed.to_bytes(8,'little'), digest_size=16)``;
``point = digest[0:8]`` and ``mask = digest[8:16]`` as little-endian
integers, each reduced to the low s bits.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, log2

import numpy as np

from .bitstrings import check_bits
from .errors import BackendError, CapacityError, FormatError, ParameterError
from .exact import ceil_log2, ceil_scaled_sqrt
from .gf2 import AffineSpace, Field2s, Gf2Matrix, field_make, row_assemble, solve_affine
from .graphs import (
    MAX_TABLE_BITS,
    ExtractorGraph,
    _entry_dtype,
    _linear_output_column,
)

COUNTER_SCHEME = "counter"
EXTERNAL_SCHEME = "external"


@dataclass(frozen=True)
class SeedExpansion:
    """Deterministic map from (edge label, row index) to a (point, mask) pair."""

    scheme: str
    s: int
    m: int
    seed: int | None = None
    table_path: str | None = None

    def __post_init__(self) -> None:
        if self.scheme not in (COUNTER_SCHEME, EXTERNAL_SCHEME):
            raise ParameterError(f"unknown expansion scheme {self.scheme!r}")
        if self.m < 1:
            raise ParameterError(f"expansion output length m={self.m} must be >= 1")
        if self.scheme == COUNTER_SCHEME:
            if self.seed is None or not 0 <= self.seed < 1 << 64:
                raise ParameterError("counter expansion needs a seed in [0, 2^64)")
        else:
            if self.table_path is None:
                raise ParameterError("external expansion needs a table file path")
            object.__setattr__(self, "_table", _load_pair_table(self.table_path, self.s, self.m))

    def pairs(self, y: int) -> list[tuple[int, int]]:
        if self.scheme == COUNTER_SCHEME:
            mask = (1 << self.s) - 1
            key = self.seed.to_bytes(8, "little")
            out = []
            for i in range(self.m):
                digest = hashlib.blake2b(
                    y.to_bytes(8, "little") + i.to_bytes(4, "little"),
                    key=key,
                    digest_size=16,
                ).digest()
                point = int.from_bytes(digest[0:8], "little") & mask
                h = int.from_bytes(digest[8:16], "little") & mask
                out.append((point, h))
            return out
        table = getattr(self, "_table")
        if y >= len(table):
            raise ParameterError(f"external table covers {len(table)} edge labels, not y={y}")
        return table[y]

    def descriptor(self) -> dict:
        out = {"id": self.scheme, "s": self.s, "m": self.m}
        if self.scheme == COUNTER_SCHEME:
            out["seed"] = self.seed
        else:
            out["table"] = self.table_path
        return out


def _load_pair_table(path: str, s: int, m: int) -> list[list[tuple[int, int]]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot load expansion table {path}: {exc}") from exc
    if doc.get("s") != s or doc.get("m") != m:
        raise FormatError(
            f"expansion table {path} carries s={doc.get('s')} m={doc.get('m')}, "
            f"descriptor says s={s} m={m}"
        )
    table = []
    for y, rows in enumerate(doc.get("pairs", [])):
        if len(rows) != m:
            raise FormatError(f"edge label {y}: expected {m} pairs, got {len(rows)}")
        checked = []
        for point, h in rows:
            check_bits(point, s, "table point")
            check_bits(h, s, "table mask")
            checked.append((point, h))
        table.append(checked)
    if not table:
        raise FormatError(f"expansion table {path} lists no edge labels")
    return table


def save_pair_table(path, s: int, m: int, pairs: list[list[tuple[int, int]]]) -> None:
    """Write an external-expansion table file."""
    doc = {"s": s, "m": m, "pairs": [[[p, h] for p, h in rows] for rows in pairs]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


class LinearFamily:
    """Matrix family for one graph; matrices are cached per edge label."""

    def __init__(self, n: int, d: int, expansion: SeedExpansion):
        self.n = n
        self.d = d
        self.expansion = expansion
        self.field: Field2s = field_make(expansion.s)
        self._cache: dict[int, Gf2Matrix] = {}

    @property
    def m(self) -> int:
        return self.expansion.m

    def matrix(self, y: int) -> Gf2Matrix:
        check_bits(y, self.d, "edge label")
        mat = self._cache.get(y)
        if mat is None:
            mat = row_assemble(self.field, self.n, self.expansion.pairs(y), self.m)
            self._cache[y] = mat
        return mat

    def descriptor(self) -> dict:
        return self.expansion.descriptor()


def family_from_descriptor(descriptor: dict, *, n: int, d: int) -> LinearFamily:
    try:
        scheme = descriptor["id"]
        s = descriptor["s"]
        m = descriptor["m"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"linear descriptor missing fields: {descriptor!r}") from exc
    try:
        if scheme == COUNTER_SCHEME:
            expansion = SeedExpansion(scheme, s, m, seed=descriptor.get("seed"))
        else:
            expansion = SeedExpansion(scheme, s, m, table_path=descriptor.get("table"))
    except ParameterError as exc:
        raise FormatError(str(exc)) from exc
    return LinearFamily(n, d, expansion)


def linear_graph(n: int, d: int, expansion: SeedExpansion) -> ExtractorGraph:
    """Graph with explicit dimensions; m comes from the expansion."""
    return ExtractorGraph(n, d, expansion.m, family=LinearFamily(n, d, expansion))


def derive_dims(n: int, epsilon: Fraction, c: int = 1, kappa: float = 1.0) -> tuple[int, int]:
    """Edge-label length d = ceil(kappa * log2(n)^3 * log2(1/eps)^2) and m = n - c*d."""
    epsilon = Fraction(epsilon)
    if not 0 < epsilon < 1:
        raise ParameterError(f"epsilon must lie in (0,1), got {epsilon}")
    if n < 2:
        raise ParameterError("need n >= 2 to derive dimensions")
    if c < 1 or kappa <= 0:
        raise ParameterError(f"need c >= 1 and kappa > 0, got c={c} kappa={kappa}")
    d = max(1, ceil(kappa * log2(n) ** 3 * log2(1 / epsilon) ** 2))
    return d, n - c * d


def derive_amplification(n: int, epsilon: Fraction, d: int, c: int = 1) -> tuple[int, int]:
    """Block size Delta = ceil(2 * (1/eps)^{3/2} * D^{c+1}) and its threshold t."""
    epsilon = Fraction(epsilon)
    degree = 1 << d
    delta_blocks = ceil_scaled_sqrt(2 * degree ** (c + 1), (1 / epsilon) ** 3)
    t = n - (ceil_log2(delta_blocks) - c * d)
    return delta_blocks, t


def build_linear_graph(
    n: int,
    epsilon: Fraction,
    expansion: SeedExpansion,
    c: int = 1,
    kappa: float = 1.0,
) -> ExtractorGraph:
    """Linear graph with the derived dimensions; expansion.m must equal n - c*d."""
    d, m = derive_dims(n, epsilon, c, kappa)
    if m < 1:
        raise ParameterError(
            f"derived m = n - c*d = {n} - {c}*{d} = {m} < 1; "
            "decrease kappa/c or increase n"
        )
    if expansion.m != m:
        raise ParameterError(
            f"expansion produces {expansion.m}-bit outputs but derived m is {m}"
        )
    return linear_graph(n, d, expansion)


def linearity_check(
    graph: ExtractorGraph, y: int, trials: int = 256, seed: int = 0
) -> bool:
    """Verify f_y(0) = 0 and f_y(x1 ^ x2) = f_y(x1) ^ f_y(x2).

    Exhaustive for n <= 16 (checks every x against the span of the unit
    images, which is equivalent to full additivity); sampled pairs otherwise.
    """
    if graph.backend_kind != "linear":
        raise BackendError("linearity_check needs a linear backend")
    if graph.ext_eval(0, y) != 0:
        return False
    n = graph.n
    if n <= 16:
        filled = _linear_output_column(graph.family.matrix(y), n)
        for x in range(1 << n):
            if graph.ext_eval(x, y) != int(filled[x]):
                return False
        return True
    rng = np.random.Generator(np.random.Philox(key=seed))
    for _ in range(trials):
        x1 = int(rng.integers(0, 1 << n, dtype=np.uint64))
        x2 = int(rng.integers(0, 1 << n, dtype=np.uint64))
        if graph.ext_eval(x1 ^ x2, y) != graph.ext_eval(x1, y) ^ graph.ext_eval(x2, y):
            return False
    return True


@dataclass(frozen=True)
class PreimageList:
    """Indexed view of Delta left-neighbors of z under one edge label."""

    z: int
    y: int
    space: AffineSpace
    Delta: int

    def element(self, i: int) -> int:
        if not 0 <= i < self.Delta:
            raise IndexError(f"preimage index {i} outside 0..{self.Delta - 1}")
        return self.space.element(i)

    def __len__(self) -> int:
        return self.Delta

    def __iter__(self):
        for i in range(self.Delta):
            yield self.space.element(i)


def left_neighbors_indexed(
    graph: ExtractorGraph, z: int, y: int, Delta: int, t: int
) -> PreimageList | None:
    """First Delta preimages of z under edge label y in the t-prefix graph.

    Returns None when z has fewer than Delta preimages under label y
    (including the unreachable case).
    """
    if graph.backend_kind != "linear":
        raise BackendError("left_neighbors_indexed needs a linear backend")
    if Delta < 1:
        raise ParameterError(f"Delta must be positive, got {Delta}")
    m_t = t - graph.a
    if not 1 <= t <= graph.n or m_t < 1 or m_t > graph.m:
        raise ParameterError(f"threshold t={t} gives invalid prefix length {m_t}")
    check_bits(z, m_t, "right node")
    check_bits(y, graph.d, "edge label")
    trunc = graph.family.matrix(y).truncate_rows(m_t)
    space = solve_affine(trunc, z)
    if space is None or space.size() < Delta:
        return None
    return PreimageList(z, y, space, Delta)


def delta_guarantee(
    graph: ExtractorGraph, t: int, Delta: int, samples: int = 16, seed: int = 0
) -> bool:
    """Whether every reachable right node of the t-prefix graph has at least
    Delta preimages under each edge label that reaches it.

    The decision is arithmetic (2^(n - m_t) >= Delta by the kernel dimension
    bound); a handful of sampled (z, y) pairs are additionally solved and
    counted as a self-check.
    """
    if graph.backend_kind != "linear":
        raise BackendError("delta_guarantee needs a linear backend")
    if Delta < 1:
        raise ParameterError(f"Delta must be positive, got {Delta}")
    m_t = t - graph.a
    if not 1 <= t <= graph.n or m_t < 1 or m_t > graph.m:
        raise ParameterError(f"threshold t={t} gives invalid prefix length {m_t}")
    free = graph.n - m_t
    if free < 0:
        return Delta <= 1
    if (1 << free) < Delta:
        return False
    rng = np.random.Generator(np.random.Philox(key=seed))
    for _ in range(samples):
        y = int(rng.integers(0, graph.degree))
        x = int(rng.integers(0, 1 << graph.n, dtype=np.uint64))
        z = graph.prefix_view(t).ext_eval(x, y)
        trunc = graph.family.matrix(y).truncate_rows(m_t)
        space = solve_affine(trunc, z)
        if space is None or space.size() < Delta:
            return False
    return True


def dump_to_table(graph: ExtractorGraph) -> ExtractorGraph:
    """Materialize a linear graph as an explicit table with identical outputs."""
    if graph.backend_kind != "linear":
        raise BackendError("dump_to_table needs a linear backend")
    if graph.n + graph.d > MAX_TABLE_BITS:
        raise CapacityError(
            f"dump of 2^{graph.n + graph.d} entries exceeds the {MAX_TABLE_BITS}-bit budget"
        )
    out = np.empty((1 << graph.n, graph.degree), dtype=np.int64)
    for y in range(graph.degree):
        out[:, y] = _linear_output_column(graph.family.matrix(y), graph.n)
    table = out.ravel().astype(_entry_dtype(graph.m))
    return ExtractorGraph(graph.n, graph.d, graph.m, table=table)
