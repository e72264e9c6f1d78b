import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_valid_process
from proccontext import linalg, quantum
from proccontext.contradiction import proj
from proccontext.errors import DimensionError, NumericalConsistencyError, ValidationError
from proccontext.linalg import I2, X, Y, Z
from proccontext.quantum import RegionSpec

KET0 = np.diag([1.0, 0.0])
KET1 = np.diag([0.0, 1.0])
A_OUT = RegionSpec("A", 1, 2)
B_IN = RegionSpec("B", 2, 1)


def identity_channel_process():
    return quantum.ProcessMatrix((A_OUT, B_IN), proj(I2))


def direct_output(kraus, rho):
    return sum(k @ rho @ k.conj().T for k in kraus)


# --- constructors ------------------------------------------------------------


@pytest.mark.parametrize(
    "u, printed",
    [
        (I2, np.eye(4) + np.kron(X, X) - np.kron(Y, Y) + np.kron(Z, Z)),
        (X, np.eye(4) + np.kron(X, X) + np.kron(Y, Y) - np.kron(Z, Z)),
    ],
    ids=["identity", "x"],
)
def test_choi_of_unitary_matches_expansion(u, printed):
    # the Choi matrix has trace d_in = 2; the Pauli expansion is twice that
    c = quantum.choi_of_unitary(u)
    assert np.trace(c.choi) == pytest.approx(2)
    np.testing.assert_allclose(2 * c.choi, printed, atol=1e-12)
    assert c.is_trace_preserving()


def test_choi_of_unitary_rejects_non_unitary():
    with pytest.raises(ValidationError):
        quantum.choi_of_unitary(np.diag([1.0, 0.5]))


def test_choi_apply_matches_kraus(rng):
    kraus = quantum.random_kraus(2, 3, rng)
    c = quantum.CpMap(quantum.choi_from_kraus(kraus), 2, 3)
    rho = linalg.random_density_matrix(2, rng)
    np.testing.assert_allclose(c.apply(rho), direct_output(kraus, rho), atol=1e-12)


def test_cpmap_rejects_bad_maps():
    with pytest.raises(ValidationError):
        quantum.CpMap(np.diag([1.0, -0.1, 0, 0]), 2, 2)
    with pytest.raises(ValidationError):
        quantum.CpMap(2 * proj(I2), 2, 2)  # trace increasing
    with pytest.raises(DimensionError):
        quantum.CpMap(np.eye(3), 2, 2)


def test_instrument_must_sum_to_cptp():
    quantum.Instrument((quantum.povm_event(KET0), quantum.povm_event(KET1)))
    with pytest.raises(ValidationError):
        quantum.Instrument((quantum.povm_event(KET0),))


def test_process_matrix_checks():
    with pytest.raises(ValidationError):
        quantum.ProcessMatrix((B_IN, A_OUT), proj(I2))  # labels out of order
    with pytest.raises(ValidationError):
        quantum.ProcessMatrix((A_OUT, B_IN), -np.eye(4))
    with pytest.raises(DimensionError):
        quantum.ProcessMatrix((A_OUT, B_IN), np.eye(2))


# --- Born rule ---------------------------------------------------------------


def test_born_identity_channel_examples():
    w = identity_channel_process()
    prep = quantum.preparation_event(KET0)
    assert quantum.born_probability([prep, quantum.povm_event(KET0)], w) == pytest.approx(1, abs=1e-12)
    assert quantum.born_probability([prep, quantum.povm_event(KET1)], w) == pytest.approx(0, abs=1e-12)


def test_born_state_process_example():
    w = quantum.state_process(KET0)
    assert quantum.born_probability([quantum.povm_event(KET0)], w) == pytest.approx(1)
    plus = np.full((2, 2), 0.5)
    assert quantum.born_probability([quantum.povm_event(plus)], w) == pytest.approx(0.5)


def test_born_channel_matches_kraus_propagation(rng):
    for _ in range(10):
        kraus = quantum.random_kraus(2, 2, rng)
        w = quantum.channel_process(quantum.choi_from_kraus(kraus), 2, 2)
        rho = linalg.random_density_matrix(2, rng)
        e = linalg.random_density_matrix(2, rng)
        expected = np.trace(direct_output(kraus, rho) @ e).real
        got = quantum.born_probability([quantum.preparation_event(rho), quantum.povm_event(e)], w)
        assert got == pytest.approx(expected, abs=1e-12)


def test_channel_process_reversed_labels(rng):
    kraus = quantum.random_kraus(2, 2, rng)
    w = quantum.channel_process(quantum.choi_from_kraus(kraus), 2, 2, source="B", target="A")
    assert [r.label for r in w.regions] == ["A", "B"]
    rho, e = linalg.random_density_matrix(2, rng), linalg.random_density_matrix(2, rng)
    got = quantum.born_probability([quantum.povm_event(e), quantum.preparation_event(rho)], w)
    assert got == pytest.approx(np.trace(direct_output(kraus, rho) @ e).real, abs=1e-12)


def test_sequential_process_matches_propagation(rng):
    # A receives rho, applies its own channel, result sent through N to B, B measures
    first, second = RegionSpec("A", 2, 2), RegionSpec("B", 2, 1)
    rho = linalg.random_density_matrix(2, rng)
    n_kraus = quantum.random_kraus(2, 2, rng)
    w = quantum.sequential_process(rho, quantum.choi_from_kraus(n_kraus), first, second)
    a_kraus = quantum.random_kraus(2, 2, rng)
    e = linalg.random_density_matrix(2, rng)
    expected = np.trace(direct_output(n_kraus, direct_output(a_kraus, rho)) @ e).real
    events = [quantum.CpMap(quantum.choi_from_kraus(a_kraus), 2, 2), quantum.povm_event(e)]
    assert quantum.born_probability(events, w) == pytest.approx(expected, abs=1e-12)


def test_born_dimension_mismatch():
    w = identity_channel_process()
    with pytest.raises(DimensionError):
        quantum.born_probability([quantum.povm_event(KET0), quantum.povm_event(KET0)], w)
    with pytest.raises(DimensionError):
        quantum.born_probability([quantum.preparation_event(KET0)], w)


def test_born_flags_imaginary_probability():
    # a Hermitian event paired with a non-Hermitian matrix is not a physical input;
    # bypass validation to exercise the consistency guard
    w = quantum.state_process(KET0)
    object.__setattr__(w, "matrix", np.array([[0.5, 1j], [0, 0.5]]))
    ev = quantum.CpMap(np.array([[0.5, 0.5], [0.5, 0.5]]), 2, 1)
    with pytest.raises(NumericalConsistencyError):
        quantum.born_probability([ev], w)


# --- validation --------------------------------------------------------------


def test_validate_process_examples():
    trivial = quantum.ProcessMatrix((RegionSpec("A", 1, 1),), np.eye(1))
    assert quantum.validate_process(trivial).passed

    rep = quantum.validate_process(identity_channel_process())
    assert rep.passed and rep.psd and rep.max_residual < 1e-12

    doubled = quantum.ProcessMatrix((A_OUT, B_IN), 2 * proj(I2))
    rep = quantum.validate_process(doubled)
    assert not rep.passed
    assert rep.max_residual == pytest.approx(1.0)


def test_validate_process_rejects_signalling_loop():
    # identity channels in both directions: a causal loop, not a valid process
    a, b = RegionSpec("A", 2, 2), RegionSpec("B", 2, 2)
    # factors in the order A_O B_I B_O A_I, then reordered to A_I A_O B_I B_O
    loop = linalg.kron(proj(I2), proj(I2))
    loop = linalg.permute_factors(loop, [2, 2, 2, 2], [3, 0, 1, 2])
    assert not quantum.validate_process(quantum.ProcessMatrix((a, b), loop)).passed


@pytest.mark.parametrize("di, do", [(1, 2), (2, 1), (2, 2), (2, 3), (3, 2)])
def test_spanning_family_spans_affine_hull(di, do):
    fam = quantum.cptp_spanning_family(di, do)
    vecs = np.array([linalg.hermitian_to_real(m) for m in fam])
    diffs = vecs[1:] - vecs[0]
    assert np.linalg.matrix_rank(diffs, tol=1e-9) == di**2 * do**2 - di**2
    for m in fam:
        assert quantum.CpMap(m, di, do).is_trace_preserving()


# --- ontic model candidates --------------------------------------------------


def test_eta_identity_normaliser_on_states(rng):
    sigmas = [quantum.state_process(KET0), quantum.state_process(KET1)]
    # g(W) = (tr[|0><0| W], tr[|1><1| W]) sums to tr W = 1
    good = quantum.OnticModelCandidate(sigmas, etas=[KET0, KET1])
    tests = [quantum.state_process(linalg.random_density_matrix(2, rng)) for _ in range(5)]
    assert quantum.check_eta_instrument(good, tests)
    bad = quantum.OnticModelCandidate(sigmas, etas=[0.9 * KET0, 0.9 * KET1])
    assert not quantum.check_eta_instrument(bad, tests)
    not_psd = quantum.OnticModelCandidate(sigmas, etas=[KET0 + 0.1 * X, KET1 - 0.1 * X])
    assert not quantum.check_eta_instrument(not_psd, tests)


def test_crude_model_single_process(rng):
    w = identity_channel_process()
    model = quantum.crude_model([w])
    assert quantum.check_eta_instrument(model, [w])
    for _ in range(20):
        events = [
            quantum.random_instrument(1, 2, 3, rng).events[0],
            quantum.random_instrument(2, 1, 2, rng).events[1],
        ]
        assert model.predict(events, w) == pytest.approx(quantum.born_probability(events, w), abs=1e-12)


def test_crude_model_mixture_weights(rng):
    w1 = identity_channel_process()
    w2 = quantum.ProcessMatrix((A_OUT, B_IN), proj(X))
    model = quantum.crude_model([w1, w2])
    mix = quantum.convex_mix([w1, w2], [0.5, 0.5])
    events = [quantum.preparation_event(KET0), quantum.povm_event(KET0)]
    assert model.probability(events, [0.5, 0.5]) == pytest.approx(quantum.born_probability(events, mix))
    assert model.probability(events, [0.5, 0.5]) == pytest.approx(0.5)
    np.testing.assert_array_equal(model.g(w2), [0, 1])


def test_crude_model_rejects_duplicates():
    w = identity_channel_process()
    with pytest.raises(ValidationError):
        quantum.crude_model([w, w])


def test_convex_mix_examples():
    w = identity_channel_process()
    assert np.array_equal(quantum.convex_mix([w], [1]).matrix, w.matrix)
    parts = [quantum.ProcessMatrix((A_OUT, B_IN), proj(p)) for p in (I2, X, Y, Z)]
    mixed = quantum.convex_mix(parts, [0.25] * 4)
    np.testing.assert_allclose(2 * mixed.matrix, np.eye(4), atol=1e-12)
    with pytest.raises(ValidationError):
        quantum.convex_mix(parts, [0.5] * 4)


def test_process_json_roundtrip(rng):
    w = random_valid_process(rng, 2)
    back = quantum.process_from_json(quantum.process_to_json(w))
    assert back.regions == w.regions and np.array_equal(back.matrix, w.matrix)
    with pytest.raises(ValidationError):
        quantum.process_from_json({"matrix": {}})


# --- properties --------------------------------------------------------------

seed_st = st.integers(min_value=0, max_value=2**32 - 1)


def _random_instruments(w, rng):
    return [
        quantum.random_instrument(r.dim_in, r.dim_out, int(rng.integers(1, 4)), rng) for r in w.regions
    ]


@settings(max_examples=60, deadline=None)
@given(seed_st)
def test_probabilities_normalised_over_instruments(seed):
    rng = np.random.default_rng(seed)
    w = random_valid_process(rng)
    instruments = _random_instruments(w, rng)
    probs = [quantum.born_probability(ev, w) for ev in itertools.product(*instruments)]
    assert min(probs) >= -1e-9
    assert sum(probs) == pytest.approx(1, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed_st)
def test_random_valid_processes_validate(seed):
    rng = np.random.default_rng(seed)
    assert quantum.validate_process(random_valid_process(rng), samples=3).passed


@settings(max_examples=40, deadline=None)
@given(seed_st, st.floats(0, 1))
def test_convex_linearity(seed, p):
    rng = np.random.default_rng(seed)
    w1 = random_valid_process(rng, 2)
    w2 = random_valid_process(rng, 2)
    if w1.regions != w2.regions:
        return
    mix = quantum.convex_mix([w1, w2], [p, 1 - p])
    events = [ins.events[0] for ins in _random_instruments(w1, rng)]
    expected = p * quantum.born_probability(events, w1) + (1 - p) * quantum.born_probability(events, w2)
    assert quantum.born_probability(events, mix) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed_st)
def test_event_probabilities_match_born(seed):
    rng = np.random.default_rng(seed)
    w = random_valid_process(rng)
    instruments = _random_instruments(w, rng)
    table = quantum.event_probabilities([np.array([e.choi for e in ins]) for ins in instruments], w)
    for idx in itertools.product(*(range(len(ins)) for ins in instruments)):
        events = [ins.events[i] for ins, i in zip(instruments, idx)]
        assert table[idx].real == pytest.approx(quantum.born_probability(events, w), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed_st)
def test_single_region_reduction(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 4))
    rho = linalg.random_density_matrix(d, rng)
    e = linalg.random_density_matrix(d, rng) * rng.uniform()
    p = quantum.born_probability([quantum.povm_event(e)], quantum.state_process(rho))
    assert p == pytest.approx(np.trace(rho @ e).real, abs=1e-12)
