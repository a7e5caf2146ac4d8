from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from causalorder import crit, qmat, sim, strat
from causalorder.errors import C0Degenerate
from causalorder.randomgen import random_individual, random_parallel, random_seq_memoryless

seeds = st.integers(0, 2**32 - 1)
PHI = qmat.proj(qmat.bell_phi_plus())


def D(s):
    return sim.simulate_exact(s)


def depol(mu, kappa):
    return D(strat.family_strategy("depolarizing", {"mu": mu}, (kappa, 0, 0)))


MEM = D(strat.preset("entangled_memory"))
FLIP = D(strat.preset("flip_depolarize"))
CLASSICAL = D(strat.preset("classical_flip", 0.3))
BELL = D(strat.Parallel(PHI, 2, 2))


def test_markov_x1y1y2_examples(rng):
    assert crit.markov_x1y1y2(D(random_seq_memoryless(rng))).ok
    assert crit.markov_x1y1y2(CLASSICAL).ok
    assert crit.markov_x1y1y2(BELL).ok


def test_markov_y1y2x2_examples(rng):
    assert crit.markov_y1y2x2(D(random_parallel(rng))).ok
    r = crit.markov_y1y2x2(FLIP)
    assert not r.ok and r.residual == pytest.approx(0.25)
    for kappa in (-1, 0.3, 1):
        assert crit.markov_y1y2x2(depol(1.0, kappa)).ok


def test_full_chain_examples(rng):
    assert crit.markov_full_chain(D(random_individual(rng))).ok
    assert not crit.markov_full_chain(BELL).ok
    assert not crit.markov_full_chain(FLIP).ok


def test_C1_examples(rng):
    assert crit.check_C1(D(random_seq_memoryless(rng))).ok
    c = crit.check_C1(FLIP)
    assert not c.ok and c.witness == (1, 3, 0)
    assert c.lhs == pytest.approx(1, abs=1e-12) and c.rhs == pytest.approx(1.5, abs=1e-12)
    assert crit.check_C1(MEM).ok
    with pytest.raises(C0Degenerate):
        crit.check_C1(D(strat.preset("classical_flip", 1.0, strict=False)))


def test_C0_checks():
    assert crit.check_C0(FLIP).ok
    assert not crit.check_C0(D(strat.preset("classical_flip", 0.0, strict=False))).ok


def test_membership_N12_examples():
    m = crit.membership_N12(depol(0.5, 0.3))
    assert m.status == "member" and m.roundtrip <= 1e-9
    m = crit.membership_N12(MEM)
    assert m.status == "non-member" and m.checks["psd_hatC"].residual == pytest.approx(-1)
    m = crit.membership_N12(FLIP)
    assert m.status == "non-member" and not m.checks["C1"].ok and m.checks["C1"].witness == (1, 3, 0)
    m = crit.membership_N12(D(strat.preset("classical_flip", 0.0, strict=False)))
    assert m.status == "inconclusive:C0" and m.verdict is None


def test_membership_N21_examples(rng):
    assert crit.membership_N21(D(random_seq_memoryless(rng, "2to1"))).verdict is True
    assert crit.membership_N21(CLASSICAL).verdict is False
    assert crit.membership_N21(D(random_individual(rng))).verdict is True


def test_membership_parallel_examples():
    assert crit.membership_parallel(BELL).verdict is True
    m = crit.membership_parallel(MEM)
    assert m.verdict is True and np.max(np.abs(m.R - PHI)) <= 1e-12
    m = crit.membership_parallel(FLIP)
    assert m.verdict is False and m.checks["psd_R"].ok and m.psd_without_chains


def test_membership_individual_examples(rng):
    assert crit.membership_individual(D(random_individual(rng))).ok
    assert not crit.membership_individual(BELL).ok
    assert not crit.membership_individual(MEM).ok


def test_d1d2d3_examples():
    for kappa in (-0.7, 0.0, 0.4):
        assert crit.d1d2d3(depol(1.0, kappa)).indistinguishable is True
    # a pure input leaves some first-party outcome at probability zero, so the
    # membership precondition is inconclusive; the checks themselves still hold
    for kappa in (-1.0, 1.0):
        assert crit.d1d2d3(depol(1.0, kappa)).status == "inconclusive:C0"
        assert crit.d1d2d3(depol(1.0, kappa), require_member=False).indistinguishable is True
    dc = crit.d1d2d3(depol(0.5, 0.0))
    assert dc.D1.ok and dc.D2.ok and dc.D3.ok
    dc = crit.d1d2d3(depol(0.5, 0.3))
    assert not dc.D1.ok and dc.indistinguishable is False
    assert crit.d1d2d3(FLIP).status.startswith("inconclusive")


def test_classify_examples(rng):
    rep = crit.classify(D(random_individual(rng)))
    assert rep["status"] == "classified"
    assert all(rep[k] for k in ("member_N12", "member_N21", "member_parallel", "member_individual"))
    rep = crit.classify(MEM)
    assert rep["member_parallel"] is True and rep["member_N12"] is False and rep["member_N21"] is False
    rep = crit.classify(depol(0.5, 0.3))
    assert rep["member_N12"] is True and rep["D1"]["ok"] is False and rep["order_indistinguishable"] is False
    rep = crit.classify(D(strat.preset("classical_flip", 0.0, strict=False)))
    assert rep["status"] == "inconclusive:C0"
    assert list(rep)[:3] == ["status", "markov_X1Y1Y2", "markov_Y1Y2X2"]


@given(seeds, st.sampled_from(["ind", "par", "seq12", "seq21"]))
def test_hierarchy_monotone(seed, kind):
    rng = np.random.default_rng(seed)
    s = {"ind": random_individual, "par": random_parallel,
         "seq12": lambda r: random_seq_memoryless(r, "1to2"), "seq21": lambda r: random_seq_memoryless(r, "2to1")}[kind](rng)
    rep = crit.classify(D(s))
    if rep["member_individual"]:
        assert rep["member_parallel"] and rep["member_N12"] and rep["member_N21"]
    if rep["member_parallel"]:
        assert rep["markov_X1Y1Y2"]["ok"] and rep["markov_Y1Y2X2"]["ok"]
    if kind == "ind":
        assert rep["member_individual"]
    if kind == "seq12":
        assert rep["member_N12"]


@given(seeds)
def test_memoryless_images_satisfy_C1_and_chain(seed):
    rng = np.random.default_rng(seed)
    d = D(random_seq_memoryless(rng))
    assert crit.check_C1(d).residual <= 1e-9
    assert crit.markov_x1y1y2(d).residual <= 1e-12


@given(seeds)
def test_C1_qubit_form_matches_general(seed):
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.05, 1, (4, 2, 4, 2))
    t[0, 1] = 0
    t[:, :, 0, 1] = 0
    t /= t.sum(axis=(1, 3), keepdims=True)
    for d in (sim.JointDistribution(t), D(random_seq_memoryless(rng)), FLIP):
        lhs, rhs = crit.c1_sides(d)
        assert np.max(np.abs(np.abs(lhs - rhs[None]) - crit.c1_qubit_residuals(d))) <= 1e-12


@given(seeds)
def test_member_tables_resimulate(seed):
    rng = np.random.default_rng(seed)
    m = crit.membership_N12(D(random_seq_memoryless(rng)))
    assert m.status == "member" and m.roundtrip <= 1e-9
