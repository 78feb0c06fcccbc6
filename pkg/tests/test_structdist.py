import itertools
import os
import subprocess
import sys

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperstruc.graph import generate_barbell, hop_rings
from hyperstruc.structdist import (
    StructuralDistanceTable,
    all_pair_distances,
    cached_distances,
    dtw_cost,
    exact_dtw,
    fast_dtw,
)

from conftest import graph_from_nx


def brute_force_dtw(a, b):
    """Minimum over every monotone warping path, enumerated explicitly."""
    best = np.inf

    def walk(i, j, acc):
        nonlocal best
        acc += max(a[i], b[j]) / min(a[i], b[j]) - 1
        if i == len(a) - 1 and j == len(b) - 1:
            best = min(best, acc)
            return
        if i + 1 < len(a):
            walk(i + 1, j, acc)
        if j + 1 < len(b):
            walk(i, j + 1, acc)
        if i + 1 < len(a) and j + 1 < len(b):
            walk(i + 1, j + 1, acc)

    walk(0, 0, 0.0)
    return best


degrees = st.lists(st.integers(1, 6), min_size=1, max_size=5)


@pytest.mark.parametrize("a, b, expected", [(2, 4, 1.0), (1, 5, 4.0), (4, 2, 1.0), (7, 7, 0.0)])
def test_dtw_cost(a, b, expected):
    assert dtw_cost(a, b) == expected


def test_dtw_cost_rejects_zero():
    with pytest.raises(ValueError):
        dtw_cost(0, 3)


@pytest.mark.parametrize(
    "a, b, expected", [([1], [1], 0.0), ([2], [4], 1.0), ([1, 2], [2, 4], 2.0)]
)
def test_exact_dtw_hand_cases(a, b, expected):
    assert brute_force_dtw(a, b) == expected
    assert exact_dtw(a, b) == expected


@settings(max_examples=200, deadline=None)
@given(degrees, degrees)
def test_exact_dtw_matches_path_enumeration(a, b):
    assert exact_dtw(a, b) == pytest.approx(brute_force_dtw(a, b), abs=1e-12)


def test_empty_sequences_rejected():
    with pytest.raises(ValueError):
        exact_dtw([], [1])
    with pytest.raises(ValueError):
        fast_dtw([1], [], 1)
    with pytest.raises(ValueError):
        fast_dtw([1], [1], -1)


def test_fast_dtw_small_case_radius_one():
    assert fast_dtw([1, 2], [2, 4], 1) == 2.0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 9), min_size=1, max_size=30), st.lists(st.integers(1, 9), min_size=1, max_size=30))
def test_fast_dtw_full_window_is_exact(a, b):
    r = max(len(a), len(b))
    assert fast_dtw(a, b, r) == exact_dtw(a, b)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 9), min_size=1, max_size=60), st.lists(st.integers(1, 9), min_size=1, max_size=60),
       st.integers(0, 4))
def test_fast_dtw_never_beats_exact(a, b, radius):
    # FastDTW searches a subset of warping paths, so it can only overestimate
    assert fast_dtw(a, b, radius) >= exact_dtw(a, b) - 1e-9


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 20), min_size=1, max_size=80), st.integers(0, 3))
def test_fast_dtw_identity_zero(a, radius):
    assert fast_dtw(a, a, radius) == 0.0


def test_fast_dtw_long_sequences_close_to_exact():
    rng = np.random.default_rng(3)
    a = np.sort(rng.integers(1, 40, 300))
    b = np.sort(rng.integers(1, 40, 250))
    exact = exact_dtw(a, b)
    approx = fast_dtw(a, b, 1)
    assert exact <= approx <= 1.5 * exact + 1e-9


def direct_table(g, radius=1):
    """Per-pair evaluation straight from the cumulative definition."""
    n = g.node_count
    rings = [hop_rings(g, u) for u in range(n)]
    layers = max(r.eccentricity for r in rings) + 1
    out = {}
    for u, v in itertools.combinations_with_replacement(range(n), 2):
        total = 0.0
        for k in range(layers):
            ru, rv = rings[u].ring(k), rings[v].ring(k)
            if not ru or not rv:
                break
            total += fast_dtw(ru, rv, radius)
            out[k, u, v] = total
    return out


@pytest.mark.parametrize(
    "G", [nx.path_graph(5), nx.barbell_graph(4, 2), nx.lollipop_graph(4, 3), nx.karate_club_graph()]
)
def test_all_pairs_matches_direct_evaluation(G):
    g = graph_from_nx(G)
    table = all_pair_distances(g)
    ref = direct_table(g)
    L, n = table.layer_count, table.node_count
    for k in range(L):
        for u in range(n):
            for v in range(u, n):
                expected = ref.get((k, u, v))
                got = table.distance(k, u, v)
                if expected is None:
                    assert got is None
                else:
                    assert got == pytest.approx(expected, abs=1e-12)
                    assert table.distance(k, v, u) == got


def test_path_layer_zero(path3):
    table = all_pair_distances(path3)
    a, b, c = (path3.index[t] for t in "012")
    assert table.distance(0, a, c) == 0.0
    assert table.distance(0, a, b) == 1.0


def test_table_invariants(karate_table):
    d = karate_table.distances
    n = karate_table.node_count
    for k in range(karate_table.layer_count):
        ok = ~np.isnan(d[k])
        assert np.all(d[k][ok] >= 0) and np.all(np.isfinite(d[k][ok]))
        assert np.array_equal(ok, ok.T)
        assert np.array_equal(d[k][ok], d[k].T[ok])
        assert np.all(np.diag(d[k])[np.diag(ok)] == 0)
        if k:
            prev_ok = ~np.isnan(d[k - 1])
            assert not np.any(ok & ~prev_ok)
            assert np.all(d[k][ok] >= d[k - 1][ok])
    assert n == 68


def test_barbell_clique_interior_zero(barbell):
    g, roles = barbell
    table = all_pair_distances(g)
    interior = [u for u, r in roles.items() if r == 0]
    for k in range(table.layer_count):
        sub = table.distances[k][np.ix_(interior, interior)]
        ok = ~np.isnan(sub)
        assert np.all(sub[ok] == 0.0)
    # the same clique gives the same eccentricity, so layer 0 covers all interior pairs
    assert not np.isnan(table.distances[0][np.ix_(interior, interior)]).any()


def test_mirror_pairs_zero_every_layer(karate_mirror, karate_table):
    _, pairs = karate_mirror
    for k in range(karate_table.layer_count):
        for a, b in pairs:
            d = karate_table.distance(k, a, b)
            assert d is None or d == 0.0


def test_automorphism_preserves_distances(karate_mirror, karate_table):
    _, pairs = karate_mirror
    sigma = np.empty(68, dtype=int)
    for a, b in pairs:
        sigma[a], sigma[b] = b, a
    d = karate_table.distances
    permuted = d[:, sigma][:, :, sigma]
    assert np.array_equal(np.isnan(d), np.isnan(permuted))
    ok = ~np.isnan(d)
    assert np.array_equal(d[ok], permuted[ok])


def test_cache_round_trip(tmp_path, barbell):
    g, _ = barbell
    first = cached_distances(g, 1, tmp_path)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    again = cached_distances(g, 1, tmp_path)
    assert np.array_equal(first.distances, again.distances, equal_nan=True)
    direct = StructuralDistanceTable.load(files[0])
    assert np.array_equal(direct.distances, first.distances, equal_nan=True)


def test_distances_independent_of_thread_count():
    script = (
        "import hashlib, numba\n"
        "from hyperstruc.graph import mirrored_karate\n"
        "from hyperstruc.structdist import all_pair_distances\n"
        "numba.set_num_threads(numba.config.NUMBA_NUM_THREADS)\n"
        "d = all_pair_distances(mirrored_karate()[0]).distances\n"
        "print(hashlib.sha256(d.tobytes()).hexdigest())\n"
    )
    digests = set()
    for threads in ("1", "4"):
        env = dict(os.environ, NUMBA_NUM_THREADS=threads)
        out = subprocess.run([sys.executable, "-c", script], env=env, capture_output=True, text=True, check=True)
        digests.add(out.stdout.strip())
    assert len(digests) == 1
