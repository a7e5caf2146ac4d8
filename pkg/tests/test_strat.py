from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from causalorder import qmat, sim, strat
from causalorder.errors import C0Degenerate, InvalidStrategy
from causalorder.randomgen import random_channel_choi, random_seq_memoryless

seeds = st.integers(0, 2**32 - 1)


def test_validate_identity_channel():
    rep = strat.validate(strat.seq("1to2", np.eye(2) / 2, strat.identity_choi()))
    assert rep["valid"] and not rep["quasi"]


def test_validate_reports_tp_violation():
    rep = strat.validate(strat.seq("1to2", np.eye(2) / 2, 2 * strat.identity_choi()))
    assert not rep["valid"]
    assert rep["choi_tp_error"] == pytest.approx(1.0)


def test_validate_swap_is_quasi():
    rep = strat.validate(strat.seq("1to2", np.eye(2) / 2, qmat.swap_operator()))
    assert rep["choi_tp_error"] <= 1e-12
    assert rep["quasi"] and not rep["valid"]
    assert rep["choi_min_eig"] == pytest.approx(-1)


def test_pauli_probs_identity_and_sigma1():
    assert np.allclose(strat.choi_from_pauli_probs([1, 0, 0, 0]), strat.identity_choi())
    direct = strat.choi_of_map(lambda x: qmat.SX @ x @ qmat.SX, 2)
    assert np.allclose(strat.choi_from_pauli_probs([0, 1, 0, 0]), direct)


def test_pauli_probs_depolarizing_lambdas():
    mu = 0.3
    p = [1 - 3 * mu / 4, mu / 4, mu / 4, mu / 4]
    assert np.allclose(strat.pauli_lambdas(p), [1 - mu, -(1 - mu), 1 - mu])
    assert np.allclose(strat.choi_from_pauli_probs(p), strat.depolarizing_choi(mu))


def test_pauli_probs_example_lambdas():
    assert np.allclose(strat.pauli_lambdas([0.4, 0.3, 0.2, 0.1]), [0.4, -0.2, 0.0])
    c = strat.choi_from_pauli_probs([0.4, 0.3, 0.2, 0.1])
    assert strat.tp_residual(c, 2, 2) <= 1e-15


def test_pauli_probs_rejects_bad_vector():
    with pytest.raises(InvalidStrategy):
        strat.choi_from_pauli_probs([0.5, 0.5, 0.5, -0.5])


def test_canonical_form_examples():
    f = strat.canonical_qubit_form(strat.identity_choi())
    assert f.t == 3 and np.allclose(f.lam, 1)
    f = strat.canonical_qubit_form(strat.depolarizing_choi(0.4))
    assert f.t == 3 and np.allclose(f.lam, 0.6)
    assert strat.canonical_qubit_form(strat.depolarizing_choi(1.0)).t == 0


def test_canonical_form_rejects_non_tp():
    with pytest.raises(InvalidStrategy):
        strat.canonical_qubit_form(2 * strat.identity_choi())


def test_presets():
    mem = strat.preset("entangled_memory")
    assert np.allclose(qmat.partial_trace(mem.rho, [2, 2], [0]), np.eye(2) / 2)
    flip = strat.preset("flip_depolarize")
    branch = flip.components[0]
    out = strat.apply_choi(branch.choi_in_out(), np.diag([1.0, 0.0]), 2, 2)
    assert np.allclose(out, 0.5 * np.diag([1.0, 0.0]) + 0.25 * np.eye(2))
    with pytest.raises(C0Degenerate):
        strat.preset("classical_flip", 0)
    with pytest.raises(InvalidStrategy):
        strat.preset("nope")


def test_family_strategies():
    s = strat.family_strategy("depolarizing", {"mu": 0.5}, (0.3, 0, 0))
    assert strat.validate(s)["valid"]
    s = strat.family_strategy("phase_damping_s1", {"lam3": 0.6}, (0.2, 0, 0))
    assert strat.validate(s)["valid"]
    s = strat.family_strategy("pauli", {"p": [0.4, 0.3, 0.2, 0.1]}, (0, 0, 0))
    assert strat.validate(s)["valid"]
    with pytest.raises(InvalidStrategy):
        strat.family_strategy("depolarizing", {"mu": 0.5}, (1.0, 1.0, 0))
    with pytest.raises(InvalidStrategy):
        strat.family_strategy("depolarizing", {"mu": 1.5}, (0, 0, 0))


def test_strategy_json_round_trip(rng):
    for s in (strat.preset("entangled_memory"), strat.preset("flip_depolarize"), random_seq_memoryless(rng, "2to1")):
        obj = json.loads(json.dumps(strat.strategy_to_json(s)))
        back = strat.strategy_from_json(obj)
        assert np.allclose(sim.simulate_exact(back).table, sim.simulate_exact(s).table, atol=1e-14)


@given(seeds)
def test_canonical_form_reconstructs_random_channels(seed):
    rng = np.random.default_rng(seed)
    c = random_channel_choi(rng, 2, 2)
    f = strat.canonical_qubit_form(c)
    assert np.max(np.abs(strat.choi_from_canonical(f) - c)) <= 1e-10
    k = f.t
    assert np.allclose(f.a[:k] @ f.a[:k].T, np.eye(k)) and np.allclose(f.b[:k] @ f.b[:k].T, np.eye(k))


@given(st.lists(st.floats(0, 1), min_size=4, max_size=4).filter(lambda v: sum(v) > 0.1))
def test_pauli_choi_is_cptp(v):
    p = np.array(v) / sum(v)
    c = strat.choi_from_pauli_probs(p)
    assert strat.tp_residual(c, 2, 2) <= 1e-12
    assert np.linalg.eigvalsh(c)[0] >= -1e-12


@given(seeds, st.floats(0, 1))
def test_mixture_simulation_is_linear(seed, w):
    rng = np.random.default_rng(seed)
    a, b = random_seq_memoryless(rng), random_seq_memoryless(rng)
    mix = strat.mixture((w, 1 - w), (a, b))
    expected = w * sim.simulate_exact(a).table + (1 - w) * sim.simulate_exact(b).table
    assert np.max(np.abs(sim.simulate_exact(mix).table - expected)) <= 1e-12
