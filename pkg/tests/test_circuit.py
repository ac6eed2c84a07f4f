import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from demest.circuit import (
    COLOR_CNOT_SCHEDULE,
    Circuit,
    CircuitError,
    CircuitParseError,
    NoiseConfig,
    build_color_code,
    build_repetition_bare,
    build_repetition_steane,
    build_surface_unrotated,
    decompose_depol1,
    decompose_depol2,
    parse_circuit,
    sample_lognormal_rates,
    serialize_circuit,
)
from demest.refdem import derive_dem
from demest.sampler import sample_shots


def test_depol1_endpoints():
    assert decompose_depol1(0.0) == 0.0
    assert decompose_depol1(0.75) == pytest.approx(0.5, abs=1e-15)


def test_depol1_closed_form():
    p = 0.3
    assert decompose_depol1(p) == pytest.approx((1 - math.sqrt(1 - 4 * p / 3)) / 2, abs=1e-15)


def test_depol1_ptm_composition_at_0_3():
    got = oracles.composed_ptm(decompose_depol1(0.3), 1)
    np.testing.assert_allclose(got, oracles.depolarizing_ptm(0.3, 1), atol=1e-12)


def test_depol2_endpoints_and_example():
    assert decompose_depol2(0.0) == 0.0
    assert decompose_depol2(15 / 16) == pytest.approx(0.5, abs=1e-15)
    assert decompose_depol2(0.1) == pytest.approx(0.5 - 0.5 * (1 - 16 * 0.1 / 15) ** 0.125, abs=1e-15)


def test_depol2_ptm_composition_at_0_1():
    got = oracles.composed_ptm(decompose_depol2(0.1), 2)
    np.testing.assert_allclose(got, oracles.depolarizing_ptm(0.1, 2), atol=1e-12)


@pytest.mark.parametrize("p", [-0.01, 0.76, 1.0])
def test_depol1_domain(p):
    with pytest.raises(ValueError):
        decompose_depol1(p)


@pytest.mark.parametrize("p", [-0.01, 0.95])
def test_depol2_domain(p):
    with pytest.raises(ValueError):
        decompose_depol2(p)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 0.75))
def test_depol1_ptm_property(p):
    np.testing.assert_allclose(oracles.composed_ptm(decompose_depol1(p), 1), oracles.depolarizing_ptm(p, 1), atol=1e-12)


def test_lognormal_zero_spread():
    assert sample_lognormal_rates(0.05, 0.0, 4, 7) == [0.05] * 4


def test_lognormal_statistics():
    xs = np.array(sample_lognormal_rates(0.05, 1e-3, 10 ** 6, 17))
    assert abs(xs.mean() - 0.05) <= 3 * 1e-3 / math.sqrt(10 ** 6)
    assert abs(xs.std() - 1e-3) <= 0.05 * 1e-3
    assert (xs > 0).all()


def test_lognormal_determinism_and_errors():
    assert sample_lognormal_rates(0.01, 1e-3, 20, 3) == sample_lognormal_rates(0.01, 1e-3, 20, 3)
    with pytest.raises(ValueError):
        sample_lognormal_rates(0.0, 1e-3, 3, 1)


def test_noise_config_bounds():
    with pytest.raises(ValueError):
        NoiseConfig(p_data=1.5)
    with pytest.raises(ValueError):
        NoiseConfig(sigma=-1)
    n = NoiseConfig(p_data=0.01, sigma=1e-3)
    assert n.fixed().data_rates(5) == [0.01] * 5


def test_parse_single_lines():
    c = parse_circuit("CX 0 1\n")
    assert c.instructions[0].name == "CX" and c.instructions[0].targets == (0, 1)
    c = parse_circuit("DEPOLARIZE1(0.01) 2  # comment\n")
    ins = c.instructions[0]
    assert ins.name == "DEPOLARIZE1" and ins.args == (0.01,) and ins.targets == (2,)


@pytest.mark.parametrize("text, line", [
    ("R 0\nFOO 1\n", 2),
    ("M 0\nDETECTOR rec[-2]\n", 2),
    ("CX 0 0\n", 1),
    ("X_ERROR(1.5) 0\n", 1),
    ("DEPOLARIZE2(0.1) 0 1 2\n", 1),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(CircuitParseError) as err:
        parse_circuit(text)
    assert err.value.line_no == line


def test_detector_offsets_must_reference_earlier_records():
    c = Circuit()
    c.append("M", [0])
    c.append("DETECTOR", [-2])
    with pytest.raises(CircuitError):
        c.validate()


def _builders():
    n = NoiseConfig(p_data=0.01, p_anc=0.02, p_gate=0.005, p_idle=0.001, p_meas=0.002, p_reset=0.003, p_init=0.004)
    return {
        "rep-bare": build_repetition_bare(3, 3, n),
        "steane": build_repetition_steane(3, 3, n),
        "surface-x": build_surface_unrotated(3, 3, n, "x"),
        "surface-both": build_surface_unrotated(3, 2, n, "both"),
        "color-3": build_color_code(3, 2, n),
        "color-5": build_color_code(5, 2, n),
    }


@pytest.mark.parametrize("name", list(_builders()))
def test_serialize_roundtrip_on_builders(name):
    c = _builders()[name]
    text = serialize_circuit(c)
    again = parse_circuit(text)
    assert again == c
    assert serialize_circuit(again) == text


def test_probabilities_printed_with_enough_digits():
    c = Circuit()
    c.append("X_ERROR", [0], [0.1234567890123456])
    c.append("M", [0])
    assert parse_circuit(serialize_circuit(c)).instructions[0].args[0] == 0.1234567890123456


@pytest.mark.parametrize("d, rounds", [(3, 1), (3, 3), (5, 2), (7, 4)])
def test_repetition_bare_detector_count(d, rounds):
    c = build_repetition_bare(d, rounds)
    assert c.detector_count == (d - 1) * (rounds + 1)
    assert c.qubit_count == 2 * d - 1


@pytest.mark.parametrize("d, rounds", [(3, 1), (3, 3), (5, 3)])
def test_repetition_steane_detector_count(d, rounds):
    assert build_repetition_steane(d, rounds).detector_count == (d - 1) * (rounds + 1)


@pytest.mark.parametrize("L", [3, 5, 7])
def test_surface_qubit_counts(L):
    c = build_surface_unrotated(L, 2, checks="x")
    assert c.qubit_count == L * L + (L - 1) ** 2 + L * (L - 1)
    assert c.detector_count == L * (L - 1) * 3


def test_surface_l3_counts():
    c = build_surface_unrotated(3, 3)
    assert c.qubit_count - 6 == 13
    both = build_surface_unrotated(3, 3, checks="both")
    # Z detectors start in the second round
    assert both.detector_count == 6 * 4 + 6 * 2


@pytest.mark.parametrize("d, rounds, faces", [(3, 1, 3), (5, 2, 9), (7, 3, 18)])
def test_color_detector_counts(d, rounds, faces):
    # faces of the triangular code = (3d^2 + 1)/8; Z checks get rounds+1 layers, X checks rounds-1
    assert (3 * d * d + 1) // 8 == faces
    assert build_color_code(d, rounds).detector_count == faces * (rounds + 1) + faces * (rounds - 1)


def test_color_rejects_unsupported():
    with pytest.raises(ValueError):
        build_color_code(4, 1)
    with pytest.raises(ValueError):
        build_color_code(13, 1)


def test_builders_reject_even_distance():
    for build in (build_repetition_bare, build_repetition_steane, build_surface_unrotated):
        with pytest.raises(ValueError):
            build(4, 1)
        with pytest.raises(ValueError):
            build(1, 1)


@pytest.mark.parametrize("name", ["rep", "steane", "surface", "color"])
def test_zero_noise_samples_all_zero(name):
    c = {"rep": build_repetition_bare(3, 3), "steane": build_repetition_steane(3, 3),
         "surface": build_surface_unrotated(3, 3, checks="both"), "color": build_color_code(3, 2)}[name]
    data = sample_shots(c, 1000, 3)
    assert not data.detectors.any() and not data.observables.any()


def test_builders_deterministic():
    n = NoiseConfig(p_data=0.01, p_anc=0.01, p_gate=0.01, sigma=1e-3, seed_data=5)
    assert build_surface_unrotated(3, 3, n) == build_surface_unrotated(3, 3, n)
    assert build_surface_unrotated(3, 3, n) != build_surface_unrotated(3, 3, NoiseConfig(
        p_data=0.01, p_anc=0.01, p_gate=0.01, sigma=1e-3, seed_data=6))


def test_repetition_gate_noise_gives_diagonal_edges():
    dem = derive_dem(build_repetition_bare(3, 3, NoiseConfig(p_gate=0.025)))
    # detector index = round * (d-1) + check; a diagonal edge joins different rounds and different checks
    diag = [m for m in dem.mechanisms if len(m.detectors) == 2
            and m.detectors[0] // 2 != m.detectors[1] // 2 and m.detectors[0] % 2 != m.detectors[1] % 2]
    assert diag


def test_repetition_data_error_adjacent_checks():
    d = 5
    c = build_repetition_bare(d, 1, NoiseConfig(p_data=0.01))
    for (dets, obs), p in oracles.oracle_signatures(c):
        flipped = [k for k in range(c.detector_count) if dets >> k & 1]
        if not flipped:
            continue
        # each data X error flips the same checks in the first-round and final layers
        checks = {k % (d - 1) for k in flipped}
        assert 1 <= len(checks) <= 2
        if len(checks) == 2:
            a, b = sorted(checks)
            assert b == a + 1


def test_steane_middle_ancilla_error_flips_four():
    c = build_repetition_steane(3, 1)
    # find the X error site right after the GHZ block on the middle ancilla
    ins = c.instructions
    cxs = [k for k, i in enumerate(ins) if i.name == "CX"]
    # transversal CNOT is the last CX layer before measurement of the ancillas
    last = cxs[-1]
    anc_mid = 3 + 1
    site = Circuit(ins[:last] + [type(ins[0])("X_ERROR", (anc_mid,), (1.0,))] + ins[last:], c.qubit_count)
    dem = derive_dem(site)
    assert any(len(m.detectors) == 4 for m in dem.mechanisms)


def test_steane_generic_noise_has_four_point_mechanisms():
    dem = derive_dem(build_repetition_steane(3, 3, NoiseConfig(p_data=0.05, p_anc=0.08, p_gate=0.025)))
    assert any(len(m.detectors) == 4 for m in dem.mechanisms)


def test_surface_single_data_qubit_space_edges():
    from demest.circuit import surface_layout
    L, rounds = 3, 3
    lay = surface_layout(L)
    q = lay.data[(2, 2)]
    base = build_surface_unrotated(L, rounds, NoiseConfig())
    # phenomenological Z noise on one data qubit at the start of every round
    c = Circuit([], base.qubit_count)
    anc = set(lay.x_checks.values())
    for ins in base.instructions:
        if ins.name == "R" and set(ins.targets) <= anc:
            c.append("Z_ERROR", [q], [0.01])
        c.instructions.append(ins)
    dem = derive_dem(c)
    adjacent = {k for k, s in enumerate(lay.x_checks) if q in lay.neighbours(s)}
    assert len(dem.mechanisms) == rounds
    for m in dem.mechanisms:
        assert len(m.detectors) == 2
        assert {k % len(lay.x_checks) for k in m.detectors} == adjacent


def test_color_d5_hyperedges_both_bases():
    n = NoiseConfig.uniform(2e-3)
    c = build_color_code(5, 2, n)
    for basis in ("Z", "X"):
        assert derive_dem(c, basis).max_order() == 3


def test_color_d3_boundary_logical_ambiguity():
    dem = derive_dem(build_color_code(3, 1, NoiseConfig.uniform(1e-3)), "Z")
    sigs = set(dem.signatures())
    assert any(((j,), ()) in sigs and ((j,), (0,)) in sigs for j in range(dem.detector_count))


def test_color_schedule_is_documented_and_conflict_free():
    assert len(COLOR_CNOT_SCHEDULE) == 12
    build_color_code(7, 1)
