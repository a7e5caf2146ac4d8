from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from causalorder import measure, qmat, recon, sim, strat
from causalorder.errors import A1Violation, C0Degenerate, SingularAnchor
from causalorder.randomgen import random_individual, random_parallel, random_seq_memoryless, random_state

seeds = st.integers(0, 2**32 - 1)
PHI = qmat.proj(qmat.bell_phi_plus())
FLIP_DEPOLARIZE_CHOI = np.array([[3, 0, 0, 1], [0, 1, 1, 0], [0, 1, 3, 0], [1, 0, 0, 1]]) / 4


def dist_of(s):
    return sim.simulate_exact(s)


def test_moments_examples():
    m = recon.moments(dist_of(strat.Parallel(PHI, 2, 2))).values
    assert np.allclose(np.diag(m)[1:], [1, -1, 1])
    assert np.allclose(m[0, 1:], 0) and np.allclose(m[1:, 0], 0)
    m = recon.moments(dist_of(strat.Individual(np.eye(2) / 2, np.eye(2) / 2))).values
    assert m[0, 0] == pytest.approx(1) and np.allclose(m.ravel()[1:], 0)
    m = recon.moments(dist_of(strat.preset("flip_depolarize"))).values
    assert m[0, 3] == pytest.approx(0.5) and m[1, 1] == pytest.approx(0.5)


def test_pdm_examples(rng):
    rho = random_state(rng, 4)
    assert np.allclose(recon.pdm(dist_of(strat.Parallel(rho, 2, 2))), rho, atol=1e-12)
    # identity channel: every sigma_j (x) sigma_j correlation is +1, giving SWAP/2
    r = recon.pdm(dist_of(strat.seq("1to2", np.eye(2) / 2, strat.identity_choi())))
    assert np.allclose(r, qmat.swap_operator() / 2, atol=1e-12)
    assert np.allclose(recon.pdm(dist_of(strat.preset("entangled_memory"))), PHI, atol=1e-12)


def test_pdm_needs_A1():
    fam, _ = measure.build_pauli_family()
    small_fam = measure.make_family(2, (1, 3), (fam.vectors[0], fam.vectors[2]))
    small = measure.build_operator_basis(small_fam, strict=False)
    d = sim.simulate_exact(strat.preset("flip_depolarize"), small_fam, fam)
    with pytest.raises(A1Violation):
        recon.pdm(d, small, measure.pauli_basis())


def test_marginal_examples(rng):
    kappa, lam = 0.6, np.array([0.4, -0.2, 0.0])
    s = strat.family_strategy("pauli", {"p": [0.4, 0.3, 0.2, 0.1]}, (kappa, 0, 0))
    assert np.allclose(recon.rho2(dist_of(s)), np.eye(2) / 2 + kappa * lam[0] / 2 * qmat.SX, atol=1e-12)
    ind = random_individual(rng)
    d = dist_of(ind)
    assert np.allclose(recon.rho1(d), ind.rho1, atol=1e-12)
    assert np.allclose(recon.rho2(d), ind.rho2, atol=1e-12)
    for lam in (0.25, 0.7):
        r1 = recon.rho1(dist_of(strat.preset("classical_flip", lam)))
        assert np.allclose(r1, (np.eye(2) + (2 * lam - 1) * qmat.SZ) / 2, atol=1e-12)


def test_tilde_choi_examples():
    d = dist_of(strat.seq("1to2", np.eye(2) / 2, strat.depolarizing_choi(0.3)))
    ct = recon.tilde_choi(d)
    assert np.allclose(qmat.partial_transpose(ct, [2, 2], 0), 2 * recon.pdm(d), atol=1e-12)
    mu, kappa = 0.3, 0.4
    lam = 1 - mu
    d = dist_of(strat.family_strategy("depolarizing", {"mu": mu}, (kappa, 0, 0)))
    ct2 = qmat.partial_transpose(recon.tilde_choi(d, "2to1"), [2, 2], 1)
    u = kappa * (lam**2 - 1) / (kappa**2 * lam**2 - 1)
    v = lam * (kappa**2 - 1) / (kappa**2 * lam**2 - 1)
    coef = lambda i, j: np.trace(np.kron(qmat.PAULI[i], qmat.PAULI[j]) @ ct2).real / 2
    assert coef(1, 0) == pytest.approx(u, abs=1e-12)
    assert coef(1, 1) == pytest.approx(v, abs=1e-12)
    assert coef(2, 2) == pytest.approx(lam, abs=1e-12) and coef(3, 3) == pytest.approx(lam, abs=1e-12)


def test_tilde_choi_singular_anchor():
    d = dist_of(strat.seq("1to2", np.diag([1.0, 0.0]), strat.identity_choi()))
    with pytest.raises(SingularAnchor):
        recon.tilde_choi(d)


def test_hat_choi_examples():
    h = recon.hat_choi(dist_of(strat.preset("flip_depolarize")))
    assert np.max(np.abs(h - FLIP_DEPOLARIZE_CHOI)) <= 1e-12
    assert np.allclose(qmat.herm_eigvals(h), [0.5 - np.sqrt(2) / 4] * 2 + [0.5 + np.sqrt(2) / 4] * 2)
    assert np.max(np.abs(recon.hat_choi(dist_of(strat.preset("entangled_memory"))) - qmat.swap_operator())) <= 1e-12


def test_hat_choi_c0_and_anchor_errors():
    deg = dist_of(strat.preset("classical_flip", 0.0, strict=False))
    with pytest.raises(C0Degenerate):
        recon.hat_choi(deg)
    with pytest.raises(ValueError):
        recon.hat_choi(dist_of(strat.preset("flip_depolarize")), anchor=4)


def test_hat_anchor_spread_zero_on_memoryless(rng):
    h = recon.hat_choi_full(dist_of(random_seq_memoryless(rng)), "1to2", anchor=2)
    assert h.anchor_spread <= 1e-12


@given(seeds, st.sampled_from(["1to2", "2to1"]))
def test_memoryless_images_reconstruct_true_choi(seed, direction):
    rng = np.random.default_rng(seed)
    s = random_seq_memoryless(rng, direction)
    d = dist_of(s)
    hat = recon.hat_choi(d, direction)
    assert np.max(np.abs(hat - s.choi)) <= 1e-9
    assert np.max(np.abs(recon.tilde_choi(d, direction) - hat)) <= 1e-9
    src = 0 if direction == "1to2" else 1
    anchor = qmat.partial_trace(recon.pdm(d), [2, 2], [src])
    assert np.allclose(anchor, s.rho, atol=1e-12)


@given(seeds)
def test_pdm_reproduces_moments(seed):
    rng = np.random.default_rng(seed)
    for s in (random_parallel(rng), random_seq_memoryless(rng), strat.preset("entangled_memory")):
        d = dist_of(s)
        b = measure.pauli_basis()
        r = recon.pdm(d)
        m = recon.moments(d).values
        got = np.array([[np.trace(np.kron(ga, gb) @ r).real for gb in b.G] for ga in b.G])
        assert np.max(np.abs(got - m)) <= 1e-10
        assert np.trace(r).real == pytest.approx(1, abs=1e-10)


@given(seeds)
def test_hat_choi_trace_preserving_on_arbitrary_tables(seed):
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.05, 1, (4, 2, 4, 2))
    t[0, 1] = 0
    t[:, :, 0, 1] = 0
    t /= t.sum(axis=(1, 3), keepdims=True)
    h = recon.hat_choi(sim.JointDistribution(t))
    assert np.max(np.abs(qmat.partial_trace(h, [2, 2], [0]) - np.eye(2))) <= 1e-9


@given(seeds)
def test_round_trip_resimulation(seed):
    rng = np.random.default_rng(seed)
    d = dist_of(random_seq_memoryless(rng))
    again = sim.simulate_exact(strat.seq("1to2", recon.rho1(d), recon.hat_choi(d)), signed=True)
    assert np.max(np.abs(again.table - d.table)) <= 1e-9


def test_partial_transpose_twice_is_bit_exact(rng):
    c = recon.hat_choi(dist_of(random_seq_memoryless(rng)))
    assert np.array_equal(qmat.partial_transpose(qmat.partial_transpose(c, [2, 2], 0), [2, 2], 0), c)
