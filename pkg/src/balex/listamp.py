"""Congestion analysis and the two-step list amplifier.

Given a left set B the right nodes split into light and heavy by their
B-restricted degree against the exact threshold ``(1/eps) * |B| * D / |R|``;
a member of B is bad when at least a ``sqrt(eps)`` fraction of its edges land
on heavy nodes (edge multiplicities count).  The amplifier maps an input x to
the multiset union, over x's neighbor multiset at prefix parameter t, of the
first Delta canonical left-neighbors of each neighbor; the list always has
exactly ``D * Delta`` entries.

All classification thresholds involving ``delta = sqrt(eps)`` are decided by
squaring, so decisions stay exact for every rational eps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bitstrings import check_bits, from_hex, to_hex
from .errors import FormatError, InvariantError, ParameterError
from .exact import ge_scaled_sqrt, le_scaled_sqrt
from .gf2 import solve_affine
from .graphs import BalanceParams, ExtractorGraph, PrefixView


def light_threshold(epsilon: Fraction, b_size: int, degree: int, r_size: int) -> Fraction:
    """Exact light/heavy cutoff (1/eps) * b_size * degree / r_size."""
    epsilon = Fraction(epsilon)
    if epsilon <= 0 or b_size <= 0 or degree <= 0 or r_size <= 0:
        raise ParameterError("light_threshold needs positive arguments")
    return Fraction(b_size * degree, r_size) / epsilon


def bad_bound_ok(bad_count: int, b_size: int, epsilon: Fraction) -> bool:
    """Whether bad_count <= 2 * sqrt(eps) * b_size, exactly."""
    return le_scaled_sqrt(Fraction(bad_count), Fraction(2 * b_size), Fraction(epsilon))


def survival_ok(fraction: Fraction, epsilon: Fraction) -> bool:
    """Whether fraction >= 1 - 2 * sqrt(eps), exactly (fraction in [0,1])."""
    return le_scaled_sqrt(1 - Fraction(fraction), Fraction(2), Fraction(epsilon))


def _checked_members(view: PrefixView, B) -> list[int]:
    members = sorted(set(B))
    for x in members:
        check_bits(x, view.graph.n, "member of B")
    return members


def _b_degree_counts(view: PrefixView, members: list[int]) -> np.ndarray:
    rows = view.member_rows(np.asarray(members, dtype=np.int64))
    return np.bincount(rows.ravel(), minlength=view.r_size)


def classify_heavy(view: PrefixView, B, epsilon: Fraction) -> frozenset[int]:
    """Right nodes whose B-restricted degree exceeds the light threshold.

    The counting consequence |heavy| <= eps * |R| is asserted; its failure
    would mean a tallying bug, not bad input.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    members = _checked_members(view, B)
    if not members:
        return frozenset()
    threshold = light_threshold(epsilon, len(members), view.graph.degree, view.r_size)
    counts = _b_degree_counts(view, members)
    num, den = threshold.numerator, threshold.denominator
    heavy = frozenset(
        int(z) for z in np.nonzero(counts)[0] if int(counts[z]) * den > num
    )
    if len(heavy) > epsilon * view.r_size:
        raise InvariantError(
            f"heavy set of size {len(heavy)} exceeds eps*|R| = {epsilon * view.r_size}"
        )
    return heavy


def bad_set(view: PrefixView, B, epsilon: Fraction) -> frozenset[int]:
    """Members of B with at least a sqrt(eps) fraction of their edges on heavy nodes."""
    members = _checked_members(view, B)
    if not members:
        return frozenset()
    heavy = classify_heavy(view, members, epsilon)
    epsilon = Fraction(epsilon)
    degree = view.graph.degree
    rows = view.member_rows(np.asarray(members, dtype=np.int64))
    bad = []
    for x, row in zip(members, rows):
        hits = sum(1 for z in row if int(z) in heavy)
        if ge_scaled_sqrt(Fraction(hits), Fraction(degree), epsilon):
            bad.append(x)
    return frozenset(bad)


@dataclass
class CongestionReport:
    """Light/heavy/bad classification of one B at its own prefix parameter."""

    n: int
    right_bits: int
    b_size: int
    s: int
    epsilon: Fraction
    threshold: Fraction
    heavy_set: frozenset[int]
    bad_set: frozenset[int]

    @property
    def bad_fraction(self) -> Fraction:
        return Fraction(len(self.bad_set), self.b_size)

    @property
    def bound_ok(self) -> bool:
        return bad_bound_ok(len(self.bad_set), self.b_size, self.epsilon)

    def to_dict(self) -> dict:
        return {
            "b_size": self.b_size,
            "s": self.s,
            "epsilon": str(self.epsilon),
            "threshold": str(self.threshold),
            "heavy_size": len(self.heavy_set),
            "heavy_set": sorted(to_hex(z, self.right_bits) for z in self.heavy_set),
            "bad_size": len(self.bad_set),
            "bad_set": sorted(to_hex(x, self.n) for x in self.bad_set),
            "bad_fraction": str(self.bad_fraction),
            "pass": self.bound_ok,
        }


def congestion_report(
    graph: ExtractorGraph, B, epsilon: Fraction, t: int
) -> CongestionReport:
    """Classify B in the prefix graph at s = floor(log2 |B|); requires s <= t."""
    members = sorted(set(B))
    if not members:
        raise ParameterError("congestion analysis needs a non-empty B")
    s = len(members).bit_length() - 1
    if s > t:
        raise ParameterError(
            f"floor(log2 |B|) = {s} exceeds the threshold t = {t}; "
            "the classification precondition fails"
        )
    view = graph.prefix_view(s)
    epsilon = Fraction(epsilon)
    heavy = classify_heavy(view, members, epsilon)
    bad = bad_set(view, members, epsilon)
    return CongestionReport(
        n=graph.n,
        right_bits=view.m_k,
        b_size=len(members),
        s=s,
        epsilon=epsilon,
        threshold=light_threshold(epsilon, len(members), graph.degree, view.r_size),
        heavy_set=heavy,
        bad_set=bad,
    )


@dataclass(frozen=True)
class AmplifiedList:
    """Output multiset of the two-step amplifier, segment per edge label."""

    x: int
    n: int
    degree: int
    Delta: int
    t: int
    elements: tuple[int, ...]
    segment_labels: tuple[int, ...]
    padded_labels: tuple[int, ...]

    def block(self, y: int) -> tuple[int, ...]:
        if not 0 <= y < self.degree:
            raise IndexError(f"edge label {y} outside 0..{self.degree - 1}")
        return self.elements[y * self.Delta : (y + 1) * self.Delta]

    @property
    def padded(self) -> bool:
        return bool(self.padded_labels)

    def __len__(self) -> int:
        return len(self.elements)


def _table_left_neighbors(view: PrefixView, wanted: set[int]) -> dict[int, np.ndarray]:
    """Distinct left neighbors (ascending) of each wanted right node, any label."""
    g = view.graph
    pref = (g.table >> (g.m - view.m_k)).astype(np.int64)
    out = {}
    for p in wanted:
        hits = np.nonzero(pref == p)[0]
        out[p] = np.unique(hits >> g.d)
    return out


def _linear_block(graph: ExtractorGraph, p: int, y: int, Delta: int, t: int):
    from .lineargraph import left_neighbors_indexed

    pl = left_neighbors_indexed(graph, p, y, Delta, t)
    if pl is not None:
        return list(pl), False
    trunc = graph.family.matrix(y).truncate_rows(t - graph.a)
    space = solve_affine(trunc, p)
    if space is None:
        raise InvariantError(f"right node {p:#x} unreachable although an edge lands there")
    size = space.size()
    return [space.element(i % size) for i in range(Delta)], True


def amplify(graph: ExtractorGraph, params: BalanceParams, x: int) -> AmplifiedList:
    """Two-step list: all neighbors of x at prefix t, then the first Delta
    canonical left-neighbors of each (cyclically padded and flagged if a
    right node has fewer than Delta; impossible on degree-verified graphs)."""
    params.check_with_graph(graph)
    check_bits(x, graph.n, "input")
    view = graph.prefix_view(params.t)
    labels = view.neighbors(x)
    elements: list[int] = []
    padded_at: list[int] = []
    if graph.backend_kind == "table":
        neighbor_map = _table_left_neighbors(view, set(labels))
        for y, p in enumerate(labels):
            xs = neighbor_map[p]
            if xs.size >= params.Delta:
                block = [int(v) for v in xs[: params.Delta]]
            else:
                block = [int(xs[i % xs.size]) for i in range(params.Delta)]
                padded_at.append(y)
            elements.extend(block)
    else:
        for y, p in enumerate(labels):
            block, padded = _linear_block(graph, p, y, params.Delta, params.t)
            if padded:
                padded_at.append(y)
            elements.extend(block)
    return AmplifiedList(
        x=x,
        n=graph.n,
        degree=graph.degree,
        Delta=params.Delta,
        t=params.t,
        elements=tuple(elements),
        segment_labels=tuple(labels),
        padded_labels=tuple(padded_at),
    )


def list_element(graph: ExtractorGraph, params: BalanceParams, x: int, i: int) -> int:
    """Element i of the amplified list without materializing it.

    Index layout is edge-label major: i = y * Delta + j.
    """
    params.check_with_graph(graph)
    check_bits(x, graph.n, "input")
    total = graph.degree * params.Delta
    if not 0 <= i < total:
        raise IndexError(f"list index {i} outside 0..{total - 1}")
    y, j = divmod(i, params.Delta)
    view = graph.prefix_view(params.t)
    p = view.ext_eval(x, y)
    if graph.backend_kind == "table":
        xs = _table_left_neighbors(view, {p})[p]
        if xs.size >= params.Delta:
            return int(xs[j])
        return int(xs[j % xs.size])
    block, _ = _linear_block(graph, p, y, params.Delta, params.t)
    return block[j]


def survival_fraction(alist: AmplifiedList, B) -> Fraction:
    """Fraction of list entries (with multiplicity) outside B."""
    members = set(B)
    outside = sum(1 for e in alist.elements if e not in members)
    return Fraction(outside, len(alist.elements))


def save_list(alist: AmplifiedList, path, graph_digest: str) -> None:
    """Newline-delimited hex with a JSON header line."""
    header = {
        "n": alist.n,
        "degree": alist.degree,
        "Delta": alist.Delta,
        "t": alist.t,
        "x": to_hex(alist.x, alist.n),
        "graph_digest": graph_digest,
        "padded_labels": list(alist.padded_labels),
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")))
        fh.write("\n")
        for e in alist.elements:
            fh.write(to_hex(e, alist.n))
            fh.write("\n")


def load_list(path) -> tuple[dict, list[int]]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(f"empty list file {path}")
    try:
        header = json.loads(lines[0])
        n = header["n"]
    except (json.JSONDecodeError, KeyError) as exc:
        raise FormatError(f"bad list header in {path}: {exc}") from exc
    elements = [from_hex(line, n) for line in lines[1:] if line]
    return header, elements
