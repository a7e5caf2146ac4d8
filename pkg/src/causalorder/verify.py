"""Analytic-versus-numeric oracle suites.

Each suite compares a closed form against an independent numeric computation
(eigenvalues of an explicitly built operator, or the full simulate and
reconstruct pipeline) and reports the number of disagreements.  Points whose
numeric minimum eigenvalue lies within `band` of zero are excluded from the
comparison, since their sign is a rounding artifact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import count, crit, qmat, qubit, recon, sim, strat
from .measure import pauli_family
from .randomgen import random_canonical_form

BAND = 1e-9


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checked: int
    disagreements: int
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "disagreements": self.disagreements,
            "detail": self.detail,
        }


def suite_axial(n: int = 100_000, seed: int = 0, band: float = BAND) -> SuiteResult:
    rng = np.random.default_rng(seed)
    params = rng.uniform(-1, 1, (n, 5))
    verdict, min_eig = qubit.axial_batch(params)
    keep = np.abs(min_eig) > band
    bad = int(np.sum(verdict[keep] != (min_eig[keep] > 0)))
    return SuiteResult("axial", bad == 0, int(keep.sum()), bad, {"excluded_band": int((~keep).sum())})


def suite_canonical(n: int = 10_000, seed: int = 0, band: float = BAND, n_pipeline: int = 100) -> SuiteResult:
    """Case formulas for the forward Choi, reverse Choi and PDM against eigenvalues,
    plus a pipeline check that the operators are what the data reconstructs."""
    rng = np.random.default_rng(seed)
    bad = {"forward": 0, "reverse": 0, "pdm": 0, "directional": 0}
    checked = 0
    worst_op = 0.0
    for t in (1, 2, 3):
        for k in range(n):
            c1, form = random_canonical_form(rng, t)
            if not (qubit.form_D1(c1, form) and qubit.form_D2(form)):
                bad["directional"] += 1
            cases = (
                ("forward", qubit.forward_operator(form), qubit.forward_psd_closed(form)),
                ("reverse", qubit.reverse_operator(c1, form), qubit.reverse_psd_closed(c1, form)),
                ("pdm", qubit.pdm_operator(c1, form), qubit.pdm_psd_closed(c1, form.c2, form)),
            )
            for key, op, verdict in cases:
                me = np.linalg.eigvalsh(op)[0]
                if abs(me) <= band:
                    continue
                checked += 1
                bad[key] += int((me > 0) != verdict)
            if k < n_pipeline:
                try:
                    s = strat.seq("1to2", qmat.bloch_state(c1), qubit.forward_operator(form))
                    dist = sim.simulate_exact(s, signed=True)
                    ct = recon.tilde_choi(dist, "2to1")
                except Exception:
                    continue
                worst_op = max(worst_op, float(np.max(np.abs(ct - qubit.reverse_operator(c1, form)))),
                               float(np.max(np.abs(recon.pdm(dist) - qubit.pdm_operator(c1, form)))))
    total = sum(bad.values())
    ok = total == 0 and worst_op <= 1e-9
    return SuiteResult("canonical", ok, checked, total, {"by_case": bad, "pipeline_operator_residual": worst_op})


def _pauli_numeric(kappa: float, lam) -> crit.DChecks:
    s = strat.seq("1to2", qmat.bloch_state((kappa, 0.0, 0.0)), qubit.pauli_choi_from_lambdas(lam))
    return crit.d1d2d3(sim.simulate_exact(s, signed=True), require_member=False)


def suite_pauli(n_kappa: int = 11, n_lam: int = 11, band: float = BAND) -> SuiteResult:
    """Closed-form (D1, D2, D3) against the pipeline on a grid of completely positive Pauli channels."""
    bad = [0, 0, 0]
    checked = 0
    skipped = 0
    g = np.linspace(-1, 1, n_lam)
    for kappa in np.linspace(-1, 1, n_kappa):
        for lam in itertools.product(g, g, g):
            if np.linalg.eigvalsh(qubit.pauli_choi_from_lambdas(lam))[0] < -1e-12:
                continue
            dc = _pauli_numeric(kappa, lam)
            an = qubit.pauli_D_conditions(kappa, *lam)
            for i, c in enumerate((dc.D1, dc.D2, dc.D3)):
                if c is None or (i == 2 and abs(c.residual) <= band):
                    skipped += 1
                    continue
                checked += 1
                bad[i] += int(bool(c) != an[i])
    total = sum(bad)
    return SuiteResult("pauli", total == 0, checked, total, {"D1": bad[0], "D2": bad[1], "D3": bad[2], "skipped": skipped})


def suite_phase_damping(n: int = 21, band: float = BAND) -> SuiteResult:
    bad = {"s1": 0, "s3": 0}
    checked = 0
    g = np.linspace(-1, 1, n)
    for kappa in g:
        for l2, l3 in itertools.product(g, g):
            lam = (1.0, l2, l3)
            if np.linalg.eigvalsh(qubit.pauli_choi_from_lambdas(lam))[0] < -1e-12:
                continue
            c = _pauli_numeric(kappa, lam).D3
            if c is None or abs(c.residual) <= band:
                continue
            checked += 1
            bad["s1"] += int(bool(c) != qubit.phase_damping_D3("s1", kappa, 1.0, l2, l3))
        for l1 in g:
            lam = (l1, -l1, 1.0)
            c = _pauli_numeric(kappa, lam).D3
            if c is None or abs(c.residual) <= band:
                continue
            checked += 1
            bad["s3"] += int(bool(c) != qubit.phase_damping_D3("s3", kappa, l1))
    total = sum(bad.values())
    return SuiteResult("phase_damping", total == 0, checked, total, bad)


def suite_depolarizing(tol_kappa: float = 1e-8, match_tol: float = 1e-6, n_grid: int = 21,
                       tol_eq: float = 1e-9) -> SuiteResult:
    rows = []
    worst = 0.0
    for mu in np.round(np.arange(0.05, 0.951, 0.05), 10):
        k_an = qubit.depol_D3_bound(mu).kappa_max
        k_num = qubit.depol_D3_bound_numeric(mu, tol_kappa)
        worst = max(worst, abs(k_an - k_num))
        rows.append((float(mu), k_an, k_num))
    region_bad = 0
    for mu in np.linspace(0, 1, n_grid):
        for kappa in np.linspace(-1, 1, n_grid):
            s = strat.family_strategy("depolarizing", {"mu": mu}, (kappa, 0.0, 0.0))
            dc = crit.d1d2d3(sim.simulate_exact(s), tol_eq=tol_eq, require_member=False)
            got = dc.indistinguishable
            region_bad += int(got is None or got != qubit.depol_indistinguishable(mu, kappa))
    ok = worst <= match_tol and region_bad == 0
    return SuiteResult("depolarizing", ok, len(rows) + n_grid * n_grid, int(worst > match_tol) + region_bad,
                       {"max_bound_gap": worst, "region_disagreements": region_bad})


def suite_count() -> SuiteResult:
    bad = 0
    checked = 0
    for dims in itertools.product((1, 2), repeat=4):
        d = count.InterfaceDims(*dims)
        checked += 1
        bad += int(count.quotient_dim(d) != count.quotient_dim_enumerated(d))
    rep = count.impossibility_report(pauli_family(), pauli_family(), count.InterfaceDims(2, 2, 2, 2))
    ok = bad == 0 and rep.accessible == 49 and rep.quotient == 88 and rep.impossible
    return SuiteResult("count", ok, checked, bad, {"report": rep.message})


def random_symmetric_models(rng: np.random.Generator, n: int) -> list[qubit.SymmetricModel]:
    """Half uniform draws, a quarter on the set where C1 holds, a quarter where C1
    and the Y1-Y2-X2 chain both hold; uniform draws alone almost never satisfy C1."""
    out = []
    for k in range(n):
        lam = rng.uniform(0, 1, 3)
        eta = rng.uniform(-1, 1, 3)
        zeta = rng.uniform(-1, 1, 3)
        mode = k % 4
        if mode == 2:
            zeta = eta * lam
        elif mode == 3:
            kill = rng.random(3) < 0.5
            eta = np.where(kill, 0.0, eta)
            lam = np.where(kill, lam, 0.0)
            zeta = np.zeros(3)
        out.append(qubit.SymmetricModel(*(tuple(float(v) for v in a) for a in (lam, eta, zeta))))
    return out


def suite_symmetric(n: int = 1000, seed: int = 0, tol_eq: float = 1e-9) -> SuiteResult:
    """Claim 1: max|zeta| > 0.05 implies a C1 residual above 1e-3.
    Claim 2: C1 together with Y1-Y2-X2 implies max|eta lam| <= 1e-9."""
    rng = np.random.default_rng(seed)
    claim1_bad = claim2_bad = 0
    n_c1_pass = n_both = 0
    counterexample = None
    for m in random_symmetric_models(rng, n):
        dist = qubit.symmetric_model_distribution(m)
        c1 = crit.check_C1(dist, tol=tol_eq)
        mk = crit.markov_y1y2x2(dist, tol_eq)
        zeta = float(np.max(np.abs(m.zeta)))
        if zeta > 0.05 and not c1.residual > 1e-3:
            claim1_bad += 1
            if counterexample is None:
                counterexample = {"lam": list(m.lam), "eta": list(m.eta), "zeta": list(m.zeta),
                                  "C1_residual": c1.residual}
        if c1.ok:
            n_c1_pass += 1
            if mk.ok:
                n_both += 1
                claim2_bad += int(np.max(np.abs(np.array(m.eta) * np.array(m.lam))) > 1e-9)
    detail = {
        "claim_zeta_fails_C1": claim1_bad == 0,
        "claim_zeta_violations": claim1_bad,
        "claim_eta_lam_zero": claim2_bad == 0,
        "claim_eta_lam_violations": claim2_bad,
        "models_passing_C1": n_c1_pass,
        "models_passing_C1_and_chain": n_both,
        "first_counterexample": counterexample,
    }
    return SuiteResult("symmetric", claim1_bad + claim2_bad == 0, n, claim1_bad + claim2_bad, detail)


SUITES = {
    "axial": suite_axial,
    "canonical": suite_canonical,
    "pauli": suite_pauli,
    "phase_damping": suite_phase_damping,
    "depolarizing": suite_depolarizing,
    "count": suite_count,
    "symmetric": suite_symmetric,
}
