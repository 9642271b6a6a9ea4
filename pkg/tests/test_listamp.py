import itertools
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

import balex
from balex.errors import ParameterError
from balex.exact import le_scaled_sqrt
from balex.graphs import BalanceParams, ExtractorGraph
from balex.listamp import (
    bad_bound_ok,
    light_threshold,
    survival_ok,
)


def brute_b_degrees(view, B):
    counts = Counter()
    for x in B:
        for z in view.neighbors(x):
            counts[z] += 1
    return counts


# --- thresholds --------------------------------------------------------------


def test_light_threshold_formula():
    assert light_threshold(Fraction(1, 16), 8, 4, 256) == 2
    assert light_threshold(Fraction(1), 32, 8, 32) == 8
    assert light_threshold(Fraction(1, 3), 5, 4, 8) == Fraction(15, 2)


def test_light_threshold_positivity():
    with pytest.raises(ParameterError):
        light_threshold(Fraction(0), 8, 4, 256)
    with pytest.raises(ParameterError):
        light_threshold(Fraction(1, 2), 0, 4, 256)


def test_threshold_bound_chain_holds():
    # with B < 2^{S+1}, R = 2^{S-a}, Delta = 2 * delta^-3 * D * 2^a:
    # threshold <= delta * Delta, for 100 random parameter tuples
    rng = np.random.Generator(np.random.Philox(key=31))
    found = 0
    while found < 100:
        j = int(rng.integers(1, 4))          # delta = 1/2^j
        s_param = int(rng.integers(1, 10))
        a = int(rng.integers(0, s_param + 1))
        d = int(rng.integers(0, 6))
        eps = Fraction(1, 1 << (2 * j))
        b_size = int(rng.integers(1 << s_param, 1 << (s_param + 1)))
        r_size = 1 << (s_param - a)
        degree = 1 << d
        delta_blocks = 2 * (1 << (3 * j)) * degree * (1 << a)
        threshold = light_threshold(eps, b_size, degree, r_size)
        assert le_scaled_sqrt(threshold, delta_blocks, eps)
        found += 1


def test_exact_delta_predicates():
    # eps = 1/4: delta = 1/2 exactly
    assert bad_bound_ok(4, 4, Fraction(1, 4))
    assert not bad_bound_ok(5, 4, Fraction(1, 4))
    assert survival_ok(Fraction(1, 2), Fraction(1, 16))
    assert not survival_ok(Fraction(0), Fraction(1, 16))
    # irrational delta: 2*sqrt(1/2) = 1.414..; 5/4 <= 1.414 but 3/2 > 1.414
    assert le_scaled_sqrt(Fraction(5, 4), 2, Fraction(1, 2))
    assert not le_scaled_sqrt(Fraction(3, 2), 2, Fraction(1, 2))


# --- heavy classification -------------------------------------------------------


def test_classify_heavy_empty_b(table_graph):
    assert balex.classify_heavy(table_graph.prefix_view(2), set(), Fraction(1, 4)) == frozenset()


def test_classify_heavy_constant_graph(constant_table_graph):
    view = constant_table_graph.prefix_view(2)
    B = {1, 2, 3}
    # all 12 edges land on node 0; threshold = 4*3*4/4 = 12 with eps=1/4... pick eps
    heavy = balex.classify_heavy(view, B, Fraction(1, 2))
    # threshold = 2*3*4/4 = 6 < 12
    assert heavy == frozenset({0})


def test_classify_heavy_matches_brute_force(table_graph):
    rng = np.random.Generator(np.random.Philox(key=41))
    view = table_graph.prefix_view(2)
    eps = Fraction(1, 4)
    for _ in range(25):
        B = set(int(v) for v in rng.choice(16, size=4, replace=False))
        threshold = light_threshold(eps, len(B), 8, 4)
        brute = {z for z, c in brute_b_degrees(view, B).items() if c > threshold}
        assert balex.classify_heavy(view, B, eps) == frozenset(brute)


def test_heavy_count_bound_always(table_graph, sharp_graph):
    for graph, eps in ((table_graph, Fraction(1, 4)), (sharp_graph, Fraction(1, 16))):
        view = graph.prefix_view(2)
        for B in itertools.combinations(range(16), 4):
            heavy = balex.classify_heavy(view, B, eps)
            assert Fraction(len(heavy)) <= eps * view.r_size


# --- bad sets ----------------------------------------------------------------------


def test_bad_set_empty_b(table_graph):
    assert balex.bad_set(table_graph.prefix_view(2), set(), Fraction(1, 4)) == frozenset()


def test_bad_set_constant_graph_everything_bad(constant_table_graph):
    view = constant_table_graph.prefix_view(2)
    B = {1, 2, 3}
    assert balex.bad_set(view, B, Fraction(1, 2)) == frozenset(B)


def test_claim_nine_bound_nonvacuous_exhaustive(sharp_graph):
    # graph passes exact verification at k=2 with eps=1/16, so at most a
    # 2*sqrt(eps) = 1/2 fraction of every size-4 B may be bad: exact, no slack
    eps = Fraction(1, 16)
    view = sharp_graph.prefix_view(2)
    worst = 0
    for B in itertools.combinations(range(16), 4):
        bad = balex.bad_set(view, B, eps)
        assert bad_bound_ok(len(bad), 4, eps), f"B={B} bad={sorted(bad)}"
        worst = max(worst, len(bad))
    assert worst <= 2  # 2*sqrt(1/16)*4


def test_congestion_report_pipeline(sharp_graph):
    B = set(range(4, 12))  # size 8 -> s = 3
    report = balex.congestion_report(sharp_graph, B, Fraction(1, 16), t=4)
    assert report.s == 3
    assert report.b_size == 8
    assert report.threshold == light_threshold(Fraction(1, 16), 8, 512, 8)
    doc = report.to_dict()
    assert doc["s"] == 3 and isinstance(doc["pass"], bool)
    assert doc["bad_fraction"] == str(report.bad_fraction)


def test_congestion_report_guards():
    g = balex.sample_table(4, 3, 4, seed=3)
    with pytest.raises(ParameterError):
        balex.congestion_report(g, set(), Fraction(1, 4), t=3)
    with pytest.raises(ParameterError):
        balex.congestion_report(g, set(range(16)), Fraction(1, 4), t=3)  # s=4 > t
    with pytest.raises(ParameterError):
        balex.congestion_report(g, {1}, Fraction(1, 4), t=3)  # s=0 -> no view


def test_congestion_on_linear_backend(linear_graph_12):
    # a = 4 so the view at s = floor(log2 |B|) needs |B| >= 2^5
    B = set(range(100, 164))  # size 64 -> s = 6
    report = balex.congestion_report(linear_graph_12, B, Fraction(1, 4), t=10)
    assert report.s == 6
    assert report.right_bits == 2
    assert Fraction(len(report.heavy_set)) <= Fraction(1, 4) * (1 << 2)
    assert report.bad_set <= frozenset(B)


# --- amplification -----------------------------------------------------------------


def test_amplify_size_formula(table_graph):
    params = BalanceParams(epsilon=Fraction(1, 2), Delta=4, t=3)
    alist = balex.amplify(table_graph, params, x=5)
    assert len(alist) == 8 * 4
    assert len(alist.segment_labels) == 8
    assert alist.block(0) == alist.elements[:4]


def test_amplify_blocks_are_neighbors_of_segment_labels(table_graph):
    params = BalanceParams(epsilon=Fraction(1, 2), Delta=2, t=3)
    view = table_graph.prefix_view(3)
    alist = balex.amplify(table_graph, params, x=9)
    for y, p in enumerate(alist.segment_labels):
        assert view.ext_eval(9, y) == p
        for e in alist.block(y):
            assert p in view.neighbors(e)


def test_amplify_self_membership_when_among_first_delta(table_graph):
    params = BalanceParams(epsilon=Fraction(1, 2), Delta=16, t=3)
    alist = balex.amplify(table_graph, params, x=5)
    # Delta = 2^n: every neighbor list is exhausted (possibly padded), so x
    # itself must appear in each of its own segments
    for y, p in enumerate(alist.segment_labels):
        assert 5 in alist.block(y)


def test_amplify_linear_elements_satisfy_edge_equations(linear_graph_12):
    params = BalanceParams(epsilon=Fraction(1, 4), Delta=64, t=10)
    view = linear_graph_12.prefix_view(10)
    alist = balex.amplify(linear_graph_12, params, x=0x5A3)
    assert len(alist) == 16 * 64
    assert not alist.padded
    for y, p in enumerate(alist.segment_labels):
        for e in alist.block(y):
            assert view.ext_eval(e, y) == p


def test_amplify_padding_flag_and_totality():
    # right node 0 has a single distinct neighbor (x=0), so Delta=2 pads
    table = np.array([0, 0, 1, 1, 2, 2, 3, 3], dtype=np.uint8)
    g = ExtractorGraph(2, 1, 2, table=table)
    params = BalanceParams(epsilon=Fraction(1, 4), Delta=2, t=2)
    alist = balex.amplify(g, params, x=0)
    assert len(alist) == 4
    assert alist.padded and alist.padded_labels == (0, 1)
    assert alist.block(0) == (0, 0)


def test_amplify_padding_on_linear_backend(identity_linear_graph):
    # every (z, y) pair has exactly one solution, so Delta=2 pads every block
    params = BalanceParams(epsilon=Fraction(1, 4), Delta=2, t=4)
    alist = balex.amplify(identity_linear_graph, params, x=9)
    assert alist.padded and len(alist.padded_labels) == 4
    for y in range(4):
        assert alist.block(y) == (9, 9)
    assert balex.list_element(identity_linear_graph, params, 9, 3) == 9


def test_amplify_with_negative_a():
    # m > n: right labels longer than left ones, a = -2
    g = balex.sample_table(3, 2, 5, seed=19)
    assert g.a == -2
    params = BalanceParams(epsilon=Fraction(1, 4), Delta=1, t=3)
    view = g.prefix_view(3)
    alist = balex.amplify(g, params, x=6)
    assert len(alist) == 4
    for y, p in enumerate(alist.segment_labels):
        assert view.ext_eval(6, y) == p
        assert p in view.neighbors(alist.block(y)[0])


def test_amplify_multiplicity_repeats_blocks(constant_table_graph):
    params = BalanceParams(epsilon=Fraction(1, 2), Delta=3, t=2)
    alist = balex.amplify(constant_table_graph, params, x=0)
    # all 4 edges hit right node 0, so its block appears 4 times
    assert alist.segment_labels == (0, 0, 0, 0)
    assert alist.block(0) == alist.block(1) == alist.block(2) == alist.block(3)


def test_list_element_agrees_with_amplify_table(table_graph):
    params = BalanceParams(epsilon=Fraction(1, 2), Delta=2, t=3)
    for x in (0, 5, 15):
        alist = balex.amplify(table_graph, params, x)
        for i in range(len(alist)):
            assert balex.list_element(table_graph, params, x, i) == alist.elements[i]


def test_list_element_agrees_with_amplify_linear(linear_graph_12):
    params = BalanceParams(epsilon=Fraction(1, 4), Delta=64, t=10)
    x = 0xABC
    alist = balex.amplify(linear_graph_12, params, x)
    for i in range(0, len(alist), 7):
        assert balex.list_element(linear_graph_12, params, x, i) == alist.elements[i]


def test_list_element_bounds_and_determinism(table_graph):
    params = BalanceParams(epsilon=Fraction(1, 2), Delta=2, t=3)
    with pytest.raises(IndexError):
        balex.list_element(table_graph, params, 0, 16)
    with pytest.raises(IndexError):
        balex.list_element(table_graph, params, 0, -1)
    assert balex.list_element(table_graph, params, 3, 7) == balex.list_element(
        table_graph, params, 3, 7
    )


def test_list_size_identity_matches_closed_form():
    # Delta * D == 2 * (1/delta)^3 * D^2 * 2^a when Delta is canonical
    for j, d, a in [(1, 3, 0), (2, 2, 1), (1, 4, 2)]:
        delta = Fraction(1, 1 << j)
        degree = 1 << d
        delta_blocks = 2 * delta ** -3 * degree * (1 << a)
        assert delta_blocks == int(delta_blocks)
        assert int(delta_blocks) * degree == 2 * (1 / delta) ** 3 * degree**2 * (1 << a)


# --- survival ---------------------------------------------------------------------


def test_survival_fraction_edges():
    alist = balex.AmplifiedList(
        x=0, n=4, degree=2, Delta=2, t=3,
        elements=(1, 2, 3, 4), segment_labels=(0, 1), padded_labels=(),
    )
    assert balex.survival_fraction(alist, set()) == 1
    assert balex.survival_fraction(alist, {1, 2, 3, 4}) == 0
    assert balex.survival_fraction(alist, {1, 9}) == Fraction(3, 4)


def test_survival_sweep_on_verified_graph(table_graph):
    # on an exact-verified graph, sweeping adversarial B: every x outside
    # the bad set keeps survival >= 1 - 2*sqrt(eps)
    eps = Fraction(1, 2)
    for k in range(1, 5):
        assert balex.verify_extractor_exact(table_graph, k, eps).passed
    params = BalanceParams(epsilon=eps, Delta=2, t=3)
    view = table_graph.prefix_view(2)
    checked = 0
    for B in itertools.combinations(range(16), 4):
        bad = balex.bad_set(view, B, eps)
        for x in set(B) - bad:
            alist = balex.amplify(table_graph, params, x)
            assert len(alist) == 16
            assert survival_ok(balex.survival_fraction(alist, B), eps)
            checked += 1
        if checked > 400:
            break
    assert checked > 0


# --- list files ---------------------------------------------------------------------


def test_list_file_round_trip(tmp_path, table_graph):
    params = BalanceParams(epsilon=Fraction(1, 2), Delta=2, t=3)
    alist = balex.amplify(table_graph, params, x=11)
    path = tmp_path / "list.txt"
    digest = balex.graph_digest(table_graph)
    balex.listamp.save_list(alist, path, digest)
    header, elements = balex.listamp.load_list(path)
    assert header["graph_digest"] == digest
    assert header["x"] == "b"
    assert elements == list(alist.elements)
