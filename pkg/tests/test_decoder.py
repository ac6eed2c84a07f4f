import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from demest.circuit import (
    NoiseConfig,
    build_color_code,
    build_repetition_bare,
    build_repetition_steane,
    build_surface_unrotated,
)
from demest.decoder import (
    DecodeReport,
    DecompositionError,
    DisconnectedDefect,
    ExactDecoder,
    MatchingGraph,
    PyMatchingDecoder,
    brute_force_decode,
    build_matching_graph,
    decode_shot,
    decompose_hyperedges,
    logical_error_rate,
    make_decoder,
)
from demest.refdem import DEM, derive_dem
from demest.sampler import DetectionData, sample_shots, unpack_rows
from oracles import random_graph_dem


def _xor(parts):
    d, o = set(), set()
    for dets, obs in parts:
        d ^= set(dets)
        o ^= set(obs)
    return tuple(sorted(d)), tuple(sorted(o))


# -- decomposition ------------------------------------------------------------

def test_graphlike_decomposes_to_itself():
    dem = derive_dem(build_repetition_bare(3, 2, NoiseConfig(p_data=0.02, p_gate=0.01)))
    assert decompose_hyperedges(dem).to_text() == dem.to_text()


def test_steane_four_point_split_into_two_pairs():
    dem = derive_dem(build_repetition_steane(3, 3, NoiseConfig(p_data=0.05, p_anc=0.08, p_gate=0.025)))
    existing = {m.signature for m in dem if len(m.detectors) <= 2}
    from demest.decoder import decomposition_of
    from demest.decoder.decompose import _mask

    available = {}
    for m in dem:
        if len(m.detectors) <= 2:
            available.setdefault(m.detectors, []).append(_mask(m.observables))
    four = [m for m in dem if len(m.detectors) == 4]
    assert four
    for m in four:
        i, j, k, l = m.detectors
        parts = decomposition_of(m.signature, {key: sorted(set(v)) for key, v in available.items()}, allow_new=False)
        assert sorted(p[0] for p in parts) == [(i, j), (k, l)]
        assert _xor(parts) == m.signature
        assert set(parts) <= existing
    out = decompose_hyperedges(dem)
    assert out.is_graphlike()


def test_color_three_point_pair_plus_boundary():
    from demest.decoder import decomposition_of
    from demest.decoder.decompose import _mask

    dem = derive_dem(build_color_code(5, 2, NoiseConfig.uniform(2e-3)), basis="Z")
    available = {}
    for m in dem:
        if len(m.detectors) <= 2:
            available.setdefault(m.detectors, []).append(_mask(m.observables))
    available = {k: sorted(set(v)) for k, v in available.items()}
    threes = [m for m in dem if len(m.detectors) == 3]
    assert threes
    for m in threes:
        parts = decomposition_of(m.signature, available)
        assert _xor(parts) == m.signature
        assert sorted(len(d) for d, _ in parts) in ([1, 2], [1, 1, 1])
    # most triples use one pair and one boundary
    sizes = [sorted(len(d) for d, _ in decomposition_of(m.signature, available)) for m in threes]
    assert sizes.count([1, 2]) > len(sizes) / 2


def test_decomposition_probability_and_merge():
    dem = DEM(3, 1, [((0, 1), (0,), 0.1), ((2,), (), 0.05), ((0, 1, 2), (0,), 0.02)])
    out = decompose_hyperedges(dem)
    assert out.signatures() == [((0, 1), (0,)), ((2,), ())]
    assert out[((0, 1), (0,))] == pytest.approx(0.1 * 0.98 + 0.02 * 0.9)
    assert out[((2,), ())] == pytest.approx(0.05 * 0.98 + 0.02 * 0.95)


def test_decomposition_without_existing_edges():
    dem = DEM(4, 0, [((0, 1, 2, 3), (), 0.01)])
    with pytest.raises(DecompositionError, match="D0 D1 D2 D3"):
        decompose_hyperedges(dem, allow_new=False)
    out = decompose_hyperedges(dem)
    assert out.is_graphlike()
    assert _xor([m.signature for m in out]) == ((0, 1, 2, 3), ())


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_decomposition_is_xor_consistent(seed):
    from demest.decoder import decomposition_of
    from demest.decoder.decompose import _mask

    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 7))
    dem = random_graph_dem(rng, n, 2, 0.3)
    dets = tuple(sorted(rng.choice(n, size=int(rng.integers(3, n + 1)), replace=False).tolist()))
    sig = (dets, tuple(o for o in range(2) if rng.random() < 0.5))
    available = {}
    for m in dem:
        available.setdefault(m.detectors, []).append(_mask(m.observables))
    parts = decomposition_of(sig, {k: sorted(set(v)) for k, v in available.items()})
    assert all(1 <= len(d) <= 2 for d, _ in parts)
    assert _xor(parts) == sig


def test_equal_structure_decomposes_identically():
    c = build_repetition_steane(3, 3, NoiseConfig(p_data=0.05, p_anc=0.08, p_gate=0.025))
    a = derive_dem(c)
    b = DEM(a.detector_count, a.observable_count, [(m.detectors, m.observables, m.probability * 0.7) for m in a])
    assert decompose_hyperedges(a).signatures() == decompose_hyperedges(b).signatures()


# -- graph --------------------------------------------------------------------

def test_single_boundary_graph():
    g = build_matching_graph(DEM(1, 0, [((0,), (), 0.1)]))
    assert g.node_count == 2
    assert [(e.u, e.v) for e in g.boundary_edges()] == [(0, 1)]
    assert g.boundary_edges()[0].weight == pytest.approx(math.log(9))


def test_half_probability_edge_weight_zero():
    g = build_matching_graph(DEM(2, 0, [((0, 1), (), 0.5), ((0,), (), 0.9)]))
    assert all(e.weight == 0.0 for e in g.edges)
    assert g.clamped == 1


def test_hyperedge_rejected():
    with pytest.raises(ValueError, match="decompose"):
        build_matching_graph(DEM(3, 0, [((0, 1, 2), (), 0.1)]))


@pytest.mark.parametrize("d,r", [(3, 1), (3, 3), (5, 2), (7, 3)])
def test_repetition_graph_counts(d, r):
    g = build_matching_graph(derive_dem(build_repetition_bare(d, r, NoiseConfig(p_data=0.01, p_anc=0.01, p_gate=0.01))))
    assert g.node_count == (d - 1) * (r + 1) + 1
    # per layer: d - 2 space edges and two boundaries; time edges; one diagonal per inner gap
    assert g.edge_count() == d * (r + 1) + (d - 1) * r + (d - 2) * r


def test_parallel_edges_keep_most_likely():
    g = build_matching_graph(DEM(2, 1, [((0, 1), (), 0.1), ((0, 1), (0,), 0.2)]))
    assert len(g.edges) == 1 and g.edges[0].observables == 1
    assert g.dropped_parallel == 1


def test_edge_order_deterministic():
    dem = derive_dem(build_surface_unrotated(3, 2, NoiseConfig(p_data=0.01, p_anc=0.01, p_gate=0.01)))
    a, b = build_matching_graph(dem), build_matching_graph(DEM.from_text(dem.to_text()))
    assert [(e.u, e.v, e.observables) for e in a.edges] == [(e.u, e.v, e.observables) for e in b.edges]
    assert [(e.u, e.v) for e in a.edges] == sorted((e.u, e.v) for e in a.edges)


# -- decoding -----------------------------------------------------------------

def test_zero_syndrome():
    g = build_matching_graph(derive_dem(build_repetition_bare(3, 1, NoiseConfig(p_data=0.05))))
    assert not decode_shot(g, np.zeros(g.detector_count, bool)).any()
    assert not brute_force_decode(g, np.zeros(g.detector_count, bool)).any()


def test_single_defect_goes_to_boundary():
    g = build_matching_graph(derive_dem(build_repetition_bare(3, 1, NoiseConfig(p_data=0.05))))
    b = {e.u: e for e in g.boundary_edges()}
    syn = np.zeros(g.detector_count, bool)
    syn[0] = True
    pred, w = decode_shot(g, syn, return_weight=True)
    assert w == pytest.approx(b[0].weight)
    assert list(pred) == [bool(b[0].observables & 1)]


def test_two_defects_min_of_two_cases():
    dem = DEM(2, 1, [((0, 1), (), 0.01), ((0,), (0,), 0.2), ((1,), (), 0.2)])
    g = build_matching_graph(dem)
    syn = np.array([True, True])
    pred, w = brute_force_decode(g, syn, return_weight=True)
    direct, via_boundary = math.log(99), 2 * math.log(4)
    assert via_boundary < direct
    assert w == pytest.approx(via_boundary)
    # D0's boundary edge carries the observable
    assert pred[0]
    dem2 = DEM(2, 1, [((0, 1), (), 0.3), ((0,), (0,), 0.05), ((1,), (), 0.05)])
    pred2, w2 = brute_force_decode(build_matching_graph(dem2), syn, return_weight=True)
    assert w2 == pytest.approx(math.log(0.7 / 0.3)) and not pred2[0]
    assert decode_shot(build_matching_graph(dem2), syn, return_weight=True)[1] == pytest.approx(w2)


def test_four_defects_match_brute_force():
    c = build_surface_unrotated(3, 2, NoiseConfig(p_data=0.02, p_anc=0.02, p_gate=0.01))
    g = build_matching_graph(decompose_hyperedges(derive_dem(c)))
    rng = np.random.default_rng(1)
    for _ in range(20):
        syn = np.zeros(g.detector_count, bool)
        syn[rng.choice(g.detector_count, 4, replace=False)] = True
        assert decode_shot(g, syn, True)[1] == pytest.approx(brute_force_decode(g, syn, True)[1], abs=1e-9)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(0, 8))
def test_matching_weight_equals_brute_force(seed, k):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(max(k, 2), 12))
    g = build_matching_graph(random_graph_dem(rng, n))
    syn = np.zeros(n, bool)
    syn[rng.choice(n, min(k, n), replace=False)] = True
    w_fast = decode_shot(g, syn, return_weight=True)[1]
    w_slow = brute_force_decode(g, syn, return_weight=True)[1]
    assert w_fast == pytest.approx(w_slow, rel=1e-12, abs=1e-12)


def test_blossom_path_matches_dp():
    from demest.decoder import graph as graph_mod

    rng = np.random.default_rng(3)
    g = build_matching_graph(random_graph_dem(rng, 16))
    for _ in range(10):
        syn = rng.random(16) < 0.5
        w_dp = decode_shot(g, syn, return_weight=True)[1]
        old = graph_mod.DP_LIMIT
        graph_mod.DP_LIMIT = 0
        try:
            w_bl = decode_shot(g, syn, return_weight=True)[1]
        finally:
            graph_mod.DP_LIMIT = old
        assert w_bl == pytest.approx(w_dp, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.2, 5.0))
def test_weight_scaling_keeps_predictions(seed, scale):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 10))
    dem = random_graph_dem(rng, n)
    scaled = DEM(n, dem.observable_count)
    for m in dem:
        # weight ln((1-p)/p) times `scale`
        odds = ((1 - m.probability) / m.probability) ** scale
        scaled.add(m.detectors, m.observables, 1.0 / (1.0 + odds))
    g, gs = build_matching_graph(dem), build_matching_graph(scaled)
    syn = rng.random(n) < 0.4
    (p1, w1), (p2, w2) = decode_shot(g, syn, True), decode_shot(gs, syn, True)
    assert w2 == pytest.approx(scale * w1, rel=1e-9, abs=1e-9)
    assert np.array_equal(p1, p2)


def test_decode_is_pure():
    g = build_matching_graph(derive_dem(build_repetition_bare(5, 3, NoiseConfig(p_data=0.03, p_gate=0.01))))
    syn = np.zeros(g.detector_count, bool)
    syn[[1, 5, 9]] = True
    out = [decode_shot(g, syn.copy(), True) for _ in range(3)]
    assert all(np.array_equal(o[0], out[0][0]) and o[1] == out[0][1] for o in out)


def test_disconnected_defect():
    g = build_matching_graph(DEM(3, 0, [((0, 1), (), 0.1)]))
    syn = np.array([False, False, True])
    with pytest.raises(DisconnectedDefect, match="D2"):
        decode_shot(g, syn)


def test_brute_force_limit():
    g = build_matching_graph(DEM(12, 0, [((i,), (), 0.1) for i in range(12)]))
    with pytest.raises(MemoryError):
        brute_force_decode(g, np.ones(12, bool))


def test_syndrome_width_checked():
    g = build_matching_graph(DEM(3, 0, [((0,), (), 0.1)]))
    with pytest.raises(ValueError):
        decode_shot(g, np.zeros(4, bool))


# -- batches ------------------------------------------------------------------

def test_decode_report_json():
    r = DecodeReport.from_counts(1000, 25)
    assert r.rate == 0.025
    assert r.stderr == pytest.approx(math.sqrt(0.025 * 0.975 / 1000))
    d = json.loads(r.to_json())
    assert set(d) == {"shots", "failures", "rate", "stderr"}
    assert DecodeReport.from_counts(0, 0).rate == 0.0


def test_zero_noise_rate_zero():
    noisy = derive_dem(build_repetition_bare(3, 2, NoiseConfig(p_data=0.05)))
    data = sample_shots(build_repetition_bare(3, 2, NoiseConfig()), 1000, seed=0)
    for backend in ("pymatching", "exact"):
        r = logical_error_rate(noisy, data, backend)
        assert r.failures == 0 and r.rate == 0.0


def test_pymatching_agrees_with_exact():
    c = build_surface_unrotated(3, 2, NoiseConfig(p_data=0.02, p_anc=0.02, p_gate=0.005))
    dem = derive_dem(c)
    data = sample_shots(c, 4000, seed=6)
    dets = unpack_rows(data.detectors, data.shots).T
    graph = MatchingGraph(decompose_hyperedges(dem))
    pm_pred, pm_w = PyMatchingDecoder(graph).decode_batch(dets, return_weights=True)
    ex = [decode_shot(graph, row, True) for row in dets]
    ex_w = np.array([w for _, w in ex])
    assert np.allclose(pm_w, ex_w, rtol=1e-6, atol=1e-6)
    ex_pred = np.array([p for p, _ in ex])
    # predictions may only differ on equal-weight ties
    assert (pm_pred != ex_pred).any(axis=1).mean() < 0.01
    r_pm, r_ex = logical_error_rate(dem, data, "pymatching"), logical_error_rate(dem, data, "exact")
    assert abs(r_pm.failures - r_ex.failures) <= 0.01 * data.shots


def test_logical_rate_width_and_backend_checks():
    dem = derive_dem(build_repetition_bare(3, 1, NoiseConfig(p_data=0.05)))
    with pytest.raises(ValueError):
        logical_error_rate(dem, DetectionData.empty(3, 1))
    with pytest.raises(ValueError):
        make_decoder(dem, "union-find")


def test_exact_decoder_batch_matches_shots():
    c = build_repetition_bare(5, 2, NoiseConfig(p_data=0.04, p_gate=0.01))
    dem = derive_dem(c)
    dec = make_decoder(dem, "exact")
    assert isinstance(dec, ExactDecoder)
    data = sample_shots(c, 500, seed=2)
    dets, obs = data.to_bool()
    batch = dec.decode_batch(dets)
    for s in range(0, 500, 50):
        assert np.array_equal(batch[s], decode_shot(dec.graph, dets[s]))
    r = logical_error_rate(dem, data, "exact")
    assert r.failures == int((batch != obs).any(axis=1).sum())
