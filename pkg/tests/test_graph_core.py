import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from gnp_spectra.graph_core import (
    GENERATOR_VERSION,
    Graph,
    GraphFormatError,
    VertexSet,
    bipartite_components,
    complete,
    complete_bipartite,
    components,
    cut,
    cycle,
    degrees,
    disjoint_union,
    edge_subgraph,
    from_edges,
    gen_gnp,
    gen_gnp_naive,
    induced,
    is_bipartite,
    is_forest,
    max_degree,
    path,
    read_edgelist,
    star,
    write_edgelist,
)


@st.composite
def graphs(draw, max_n=30):
    n = draw(st.integers(0, max_n))
    if n < 2:
        return from_edges(n, [])
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=60))
    return from_edges(n, chosen)


# ---------------------------------------------------------------- sampling


def test_gen_p_zero_is_empty():
    g = gen_gnp(5, 0.0, 1)
    assert g.n == 5 and g.m == 0


def test_gen_p_one_is_complete():
    g = gen_gnp(5, 1.0, 1)
    assert g.m == 10
    assert g == complete(5)


def test_gen_edge_count_fixture():
    # mean C(n,2) p = 499995, sd ~ 707; first run gave 500469 (+0.67 sd)
    g = gen_gnp(10**5, 1e-4, 7)
    mean = 10**5 * (10**5 - 1) / 2 * 1e-4
    assert abs(g.m - mean) <= 4 * math.sqrt(mean * (1 - 1e-4))
    assert g.m == 500469


@pytest.mark.parametrize("p", [-0.1, 1.5, float("nan")])
def test_gen_rejects_bad_probability(p):
    with pytest.raises(ValueError):
        gen_gnp(10, p, 0)


def test_gen_rejects_bad_seed():
    with pytest.raises(ValueError):
        gen_gnp(10, 0.5, -1)
    with pytest.raises(ValueError):
        gen_gnp(10, 0.5, 2**64)


def test_gen_deterministic():
    a = gen_gnp(2000, 3 / 2000, 12345)
    b = gen_gnp(2000, 3 / 2000, 12345)
    assert a == b
    assert np.array_equal(a.edges(), b.edges())
    assert gen_gnp(2000, 3 / 2000, 12346) != a


def test_generator_version_recorded():
    assert GENERATOR_VERSION.startswith("gnp-skip/")


def test_gen_edges_valid():
    g = gen_gnp(500, 0.05, 3)
    e = g.edges()
    assert np.all(e[:, 0] < e[:, 1])
    assert np.all(e[:, 1] < 500)
    keys = e[:, 0] * 500 + e[:, 1]
    assert np.all(np.diff(keys) > 0)


def test_gen_edge_count_statistics():
    n, p, trials = 1000, 0.01, 200
    total = n * (n - 1) // 2
    counts = np.array([gen_gnp(n, p, s).m for s in range(trials)])
    sigma = math.sqrt(total * p * (1 - p))
    assert abs(counts.mean() - total * p) <= 4 * sigma / math.sqrt(trials)
    # counts are Binomial(total, p): compare with the reference sampler by KS
    naive = np.array([gen_gnp_naive(n, p, 10_000 + s).m for s in range(trials)])
    assert stats.ks_2samp(counts, naive).pvalue > 1e-3


def test_gen_probe_pair_frequencies():
    n, p, trials = 1000, 0.01, 200
    rng = np.random.default_rng(0)
    probes = set()
    while len(probes) < 20:
        u, v = sorted(rng.choice(n, size=2, replace=False))
        probes.add((int(u), int(v)))
    hits = dict.fromkeys(probes, 0)
    for s in range(trials):
        g = gen_gnp(n, p, s)
        for u, v in probes:
            nb = g.neighbors(u)
            i = np.searchsorted(nb, v)
            hits[(u, v)] += bool(i < len(nb) and nb[i] == v)
    band = 4 * math.sqrt(trials * p * (1 - p))
    for count in hits.values():
        assert abs(count - trials * p) <= band


def test_gen_degree_chi_square_against_binomial():
    n, p = 1000, 0.01
    deg = np.concatenate([gen_gnp(n, p, s).degrees for s in range(50)])
    ks = np.arange(0, 22)
    observed = np.array([np.count_nonzero(deg == k) for k in ks[:-1]] + [np.count_nonzero(deg >= 21)])
    probs = stats.binom.pmf(ks[:-1], n - 1, p)
    probs = np.append(probs, 1 - probs.sum())
    expected = probs * len(deg)
    keep = expected >= 5
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    assert stats.chisquare(obs, exp).pvalue > 1e-4


# ---------------------------------------------------------------- construction


def test_from_edges_path():
    g = from_edges(3, [(0, 1), (1, 2)])
    assert g.m == 2
    assert g == path(3)


def test_from_edges_self_loop():
    with pytest.raises(GraphFormatError, match="self-loop") as info:
        from_edges(2, [(0, 0)])
    assert info.value.line == 0


def test_from_edges_duplicate():
    with pytest.raises(GraphFormatError, match="duplicate") as info:
        from_edges(4, [(0, 1), (1, 0)])
    assert info.value.line == 1


def test_from_edges_out_of_range():
    with pytest.raises(GraphFormatError, match="out of range") as info:
        from_edges(3, [(0, 1), (1, 3)])
    assert info.value.line == 1


def test_neighbors_sorted():
    g = from_edges(5, [(3, 0), (0, 4), (0, 1)])
    assert g.neighbors(0).tolist() == [1, 3, 4]
    assert g.neighbors(3).tolist() == [0]


def test_arrays_read_only():
    g = star(3)
    with pytest.raises(ValueError):
        g.indices[0] = 2


@given(graphs())
def test_round_trip_edge_list(g):
    assert from_edges(g.n, g.to_edge_list()) == g


@given(graphs())
def test_round_trip_file_format(g):
    buf = io.StringIO()
    write_edgelist(g, buf)
    buf.seek(0)
    assert read_edgelist(buf) == g


def test_edge_list_text_exact():
    buf = io.StringIO()
    write_edgelist(from_edges(4, [(2, 3), (1, 0)]), buf)
    assert buf.getvalue() == "gnp-graph 1 4 2\n0 1\n2 3\n"


@pytest.mark.parametrize(
    "text, line",
    [
        ("gnp-graph 2 3 0\n", 1),
        ("gnp-graph 1 3 2\n0 1\n", 1),
        ("gnp-graph 1 3 1\n0 x\n", 2),
        ("gnp-graph 1 3 2\n0 1\n1 1\n", 3),
        ("gnp-graph 1 3 2\n0 1\n0 1\n", 3),
        ("gnp-graph 1 3 1\n0 7\n", 2),
        ("gnp-graph 1 3 1\n2 1\n", 2),
        ("gnp-graph 1 3 2\n1 2\n0 1\n", 3),
    ],
)
def test_read_edgelist_errors_name_line(text, line):
    with pytest.raises(GraphFormatError) as info:
        read_edgelist(io.StringIO(text))
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_file_round_trip(tmp_path):
    g = gen_gnp(300, 0.02, 9)
    f = tmp_path / "g.txt"
    write_edgelist(g, f)
    assert f.read_bytes().count(b"\r") == 0
    assert read_edgelist(f) == g


# ---------------------------------------------------------------- queries


def test_components_examples():
    lab = components(from_edges(4, []))
    assert lab.count == 4
    lab = components(from_edges(4, [(0, 1), (1, 2)]))
    assert lab.count == 2
    assert sorted(lab.sizes.tolist()) == [1, 3]
    assert components(complete(5)).count == 1


@given(graphs())
def test_components_partition(g):
    lab = components(g)
    assert lab.sizes.sum() == g.n
    assert lab.edge_counts.sum() == g.m
    if g.n:
        assert set(np.unique(lab.labels).tolist()) == set(range(lab.count))
        # canonical ids: components numbered by their smallest vertex
        firsts = [int(np.flatnonzero(lab.labels == c)[0]) for c in range(lab.count)]
        assert firsts == sorted(firsts)


def test_components_stable_under_rebuild():
    g = gen_gnp(400, 0.004, 5)
    h = from_edges(g.n, g.edges()[::-1])
    assert np.array_equal(components(g).labels, components(h).labels)


def test_is_forest_examples():
    assert is_forest(path(3))
    assert not is_forest(cycle(3))
    assert is_forest(from_edges(4, [(0, 1), (2, 3)]))


def test_degrees_examples():
    assert max_degree(star(6)) == 6
    assert degrees(cycle(4)).tolist() == [2, 2, 2, 2]
    assert max_degree(from_edges(3, [])) == 0


def test_bipartite():
    assert is_bipartite(cycle(4))
    assert not is_bipartite(cycle(5))
    assert is_bipartite(complete_bipartite(2, 3))
    g = disjoint_union(cycle(3), path(4))
    assert bipartite_components(g).tolist() == [False, True]


@given(graphs())
def test_bipartite_matches_two_colouring(g):
    # reference: BFS 2-colouring
    colour = [-1] * g.n
    ok = True
    for s in range(g.n):
        if colour[s] >= 0:
            continue
        colour[s] = 0
        queue = [s]
        while queue:
            u = queue.pop()
            for w in g.neighbors(u):
                if colour[w] < 0:
                    colour[w] = 1 - colour[u]
                    queue.append(int(w))
                elif colour[w] == colour[u]:
                    ok = False
    assert is_bipartite(g) == ok


# ---------------------------------------------------------------- subgraphs


def test_induced_examples():
    h, mapping = induced(complete(3), VertexSet.from_indices(3, [0, 1]))
    assert h.m == 1 and mapping.tolist() == [0, 1]
    g = gen_gnp(30, 0.2, 1)
    assert induced(g, VertexSet.empty(30))[0].m == 0
    leaves, _ = induced(star(4), VertexSet.from_indices(5, [1, 2, 3, 4]), relabel=False)
    assert leaves.n == 5 and leaves.m == 0


def test_cut_examples():
    assert cut(complete(3), VertexSet.from_indices(3, [0])).m == 2
    assert cut(path(3), VertexSet.from_indices(3, [1])).m == 2
    g = gen_gnp(30, 0.2, 2)
    assert cut(g, VertexSet.full(30)).m == 0


def test_vertex_set_size_mismatch():
    with pytest.raises(ValueError):
        cut(path(3), VertexSet.empty(4))


@settings(max_examples=50)
@given(graphs(), st.data())
def test_partition_sum(g, data):
    mask = np.array(data.draw(st.lists(st.booleans(), min_size=g.n, max_size=g.n)), dtype=bool)
    s = VertexSet(mask)
    a, _ = induced(g, s)
    b, _ = induced(g, s.complement())
    assert a.m + b.m + cut(g, s).m == g.m


def test_edge_subgraph_keeps_ids():
    g = complete(4)
    keep = np.zeros(g.m, dtype=bool)
    keep[-1] = True
    h = edge_subgraph(g, keep)
    assert h.n == 4 and h.to_edge_list() == [(2, 3)]


def test_vertex_set_ops():
    a = VertexSet.from_indices(5, [0, 1, 2])
    b = VertexSet.from_indices(5, [2, 3])
    assert (a | b).members().tolist() == [0, 1, 2, 3]
    assert (a & b).members().tolist() == [2]
    assert (a - b).members().tolist() == [0, 1]
    assert 4 in a.complement() and len(a) == 3


def test_disjoint_union_offsets():
    g = disjoint_union(star(2), path(2))
    assert g.n == 5
    assert g.to_edge_list() == [(0, 1), (0, 2), (3, 4)]


def test_graph_value_equality():
    assert isinstance(star(2), Graph)
    assert star(2) == star(2)
    assert star(2) != star(3)
