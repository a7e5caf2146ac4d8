"""Closed-form two-qubit Pauli analytics and their numeric counterparts.

Canonical form of a qubit channel: C^{T1} = I (x) rho2 + sum_j (lam_j/2) alpha_j (x) beta_j
with alpha_j = a_j . sigma, beta_j = b_j . sigma (see strat.QubitCanonicalForm).
Input states are rho1 = (I + c1 . sigma)/2.

The case formulas below assume the directional conditions D1 and D2 hold; the
operator builders give the matrices the formulas describe so that every
formula can be checked against a direct eigenvalue computation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmat
from .errors import InvalidStrategy
from .sim import JointDistribution
from .strat import QubitCanonicalForm

# equalities in the case inequalities count as satisfied
BOUNDARY_EPS = 1e-12
ZERO_TOL = 1e-12

def _ge(a: float, b: float) -> bool:
    return bool(a >= b - BOUNDARY_EPS)


def _is_zero(x: float) -> bool:
    return abs(x) <= ZERO_TOL


# ---- the basic four-inequality criterion -------------------------------------------


@dataclass(frozen=True)
class AxialParams:
    """Coefficients of s1 sigma_1 (x) I, s2 I (x) sigma_1 and tau_j sigma_j (x) sigma_j."""

    s1: float
    s2: float
    tau: tuple

    def __post_init__(self):
        vals = [self.s1, self.s2, *self.tau]
        if len(self.tau) != 3 or any(not -1.0 <= float(v) <= 1.0 for v in vals):
            raise ValueError("axial parameters must be three taus and two s values in [-1, 1]")


def axial_operator(p: AxialParams) -> np.ndarray:
    P = qmat.PAULI
    m = qmat.kron(P[0], P[0]) + p.s1 * qmat.kron(P[1], P[0]) + p.s2 * qmat.kron(P[0], P[1])
    for j in range(3):
        m = m + p.tau[j] * qmat.kron(P[j + 1], P[j + 1])
    return m


def axial_inequalities(p: AxialParams) -> np.ndarray:
    """Slack of the four inequalities; the operator is PSD iff all are >= 0."""
    s1, s2 = p.s1, p.s2
    t1, t2, t3 = p.tau
    return np.array([
        1 + t1 + s1 + s2,
        1 - t1 - s1 + s2,
        (1 - t1) ** 2 - (s1 - s2) ** 2 - (t2 + t3) ** 2,
        (1 + t1) ** 2 - (s1 + s2) ** 2 - (t2 - t3) ** 2,
    ])


def axial_psd(p: AxialParams) -> bool:
    return bool(np.all(axial_inequalities(p) >= -BOUNDARY_EPS))


def axial_batch(params) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized check over rows (s1, s2, tau1, tau2, tau3): (closed-form verdicts, minimum eigenvalues)."""
    v = np.asarray(params, dtype=float).reshape(-1, 5)
    s1, s2, t1, t2, t3 = v.T
    ineq = np.stack([
        1 + t1 + s1 + s2,
        1 - t1 - s1 + s2,
        (1 - t1) ** 2 - (s1 - s2) ** 2 - (t2 + t3) ** 2,
        (1 + t1) ** 2 - (s1 + s2) ** 2 - (t2 - t3) ** 2,
    ])
    P = qmat.PAULI
    basis = np.stack([
        qmat.kron(P[0], P[0]), qmat.kron(P[1], P[0]), qmat.kron(P[0], P[1]),
        qmat.kron(P[1], P[1]), qmat.kron(P[2], P[2]), qmat.kron(P[3], P[3]),
    ])
    coeffs = np.column_stack([np.ones(len(v)), v])
    ops = np.einsum("nk,kab->nab", coeffs, basis)
    return np.all(ineq >= -BOUNDARY_EPS, axis=0), np.linalg.eigvalsh(ops)[:, 0]


# ---- directional conditions on the canonical form ----------------------------------


def _axis_condition(c: np.ndarray, vecs: np.ndarray) -> bool:
    """c_i Tr(v_j . sigma sigma_i) = 0 for every axis i and every retained direction j."""
    c = np.asarray(c, dtype=float).reshape(3)
    for i in range(3):
        if _is_zero(c[i]):
            continue
        if any(not _is_zero(2 * v[i]) for v in vecs):
            return False
    return True


def form_D1(c1, form: QubitCanonicalForm) -> bool:
    """Y1-Y2-X2 for the forward strategy, from the input Bloch vector and the alpha directions."""
    return _axis_condition(c1, form.a[: form.t])


def form_D2(form: QubitCanonicalForm) -> bool:
    """Reverse-simulation chain, from the output Bloch vector and the beta directions (D1 assumed)."""
    return _axis_condition(form.c2, form.b[: form.t])


# ---- operators described by the positivity case formulas ---------------------------------


def _corr_term(form: QubitCanonicalForm, scale: float) -> np.ndarray:
    m = np.zeros((4, 4), dtype=complex)
    for j in range(form.t):
        m = m + scale * form.lam[j] * qmat.kron(qmat.pauli_op(form.a[j]), qmat.pauli_op(form.b[j]))
    return m


def forward_operator(form: QubitCanonicalForm) -> np.ndarray:
    """The forward Choi matrix C."""
    ct = qmat.kron(qmat.I2, qmat.bloch_state(form.c2)) + _corr_term(form, 0.5)
    return qmat.partial_transpose(ct, [2, 2], 0)


def reverse_operator(c1, form: QubitCanonicalForm) -> np.ndarray:
    """Reconstructed reverse Choi matrix under D1 and D2: (rho1 (x) I + sum lam/2 alpha (x) beta)^{T2}."""
    m = qmat.kron(qmat.bloch_state(c1), qmat.I2) + _corr_term(form, 0.5)
    return qmat.partial_transpose(m, [2, 2], 1)


def pdm_operator(c1, form: QubitCanonicalForm) -> np.ndarray:
    """Reconstructed PDM under D1: rho1 (x) rho2 + sum lam/4 alpha (x) beta."""
    return qmat.kron(qmat.bloch_state(c1), qmat.bloch_state(form.c2)) + _corr_term(form, 0.25)


# ---- positivity case formulas ------------------------------------------------------


def _rank3_condition(lam: np.ndarray, det_sign: float) -> bool:
    """I + sum_j d_j sigma_j (x) sigma_j with |d_j| = lam_j and sign(prod d_j) = det_sign."""
    l1, l2, l3 = (float(x) for x in lam[:3])
    if det_sign > 0:
        return _ge(1.0, l1 + l2 + l3)
    return _ge(1.0, max(-l1 + l2 + l3, l1 - l2 + l3, l1 + l2 - l3))


def _one_sided(form: QubitCanonicalForm, c, det_sign: float) -> bool:
    lam = form.lam
    c = np.asarray(c, dtype=float).reshape(3)
    if form.t == 3:
        return _rank3_condition(lam, det_sign)
    if form.t == 2:
        return _ge(1.0, (lam[0] + lam[1]) ** 2 + c @ c)
    if form.t == 1:
        return _ge(1.0, lam[0] ** 2 + c @ c)
    return True


def forward_psd_closed(form: QubitCanonicalForm) -> bool:
    """C >= 0.  Transposing the input flips the orientation of the correlation."""
    return _one_sided(form, form.c2, -form.orientation)


def reverse_psd_closed(c1, form: QubitCanonicalForm) -> bool:
    """Reconstructed reverse Choi >= 0.  The output transpose flips the orientation."""
    return _one_sided(form, c1, -form.orientation)


def pdm_psd_closed(c1, c2, form: QubitCanonicalForm) -> bool:
    """Reconstructed PDM >= 0; its correlation keeps the channel orientation."""
    c1 = np.asarray(c1, dtype=float).reshape(3)
    c2 = np.asarray(c2, dtype=float).reshape(3)
    n1, n2 = float(c1 @ c1), float(c2 @ c2)
    if n1 > 1 + BOUNDARY_EPS or n2 > 1 + BOUNDARY_EPS:
        return False
    lam = form.lam
    if form.t == 3:
        return _rank3_condition(lam, form.orientation)
    if form.t == 2:
        return _ge((1 - n1) * (1 - n2), (lam[0] + lam[1]) ** 2)
    if form.t == 1:
        return _ge((1 - n1) * (1 - n2), lam[0] ** 2)
    return True


# ---- Pauli channels with rho1 = (I + kappa sigma_1)/2 ------------------------------


def pauli_choi_from_lambdas(lam) -> np.ndarray:
    """Choi matrix (I (x) I + sum_j lam_j sigma_j (x) sigma_j)/2.

    With this labelling lam_1 and lam_3 are the Bloch contraction factors of
    sigma_1 and sigma_3 while lam_2 is minus that of sigma_2, which is the
    parameterization the Pauli-family formulas below use.
    """
    lam = np.asarray(lam, dtype=float).reshape(3)
    P = qmat.PAULI
    c = 0.5 * np.eye(4, dtype=complex)
    for j in range(3):
        c = c + 0.5 * lam[j] * qmat.kron(P[j + 1], P[j + 1])
    return c


def _check_unit(name: str, x: float) -> None:
    if not -1 - ZERO_TOL <= x <= 1 + ZERO_TOL:
        raise ValueError(f"{name}={x} outside [-1, 1]")


def pauli_D_conditions(kappa: float, lam1: float, lam2: float, lam3: float) -> tuple[bool, bool, bool]:
    """(D1, D2, D3) in closed form."""
    for n, v in (("kappa", kappa), ("lam1", lam1), ("lam2", lam2), ("lam3", lam3)):
        _check_unit(n, v)
    k, l1 = float(kappa), float(lam1)
    d1 = _is_zero(k * l1)
    edge = abs(abs(k) - 1) <= ZERO_TOL
    d2 = _is_zero(l1) or _is_zero(k) or (edge and l1 < 1 - ZERO_TOL)
    if edge:
        d3 = _is_zero(lam2) and _is_zero(lam3)
    else:
        den = k * k * l1 * l1 - 1
        u = k * (l1 * l1 - 1) / den
        v = l1 * (k * k - 1) / den
        d3 = _ge((1 - v) ** 2, u * u + (lam2 + lam3) ** 2) and _ge((1 + v) ** 2, u * u + (lam2 - lam3) ** 2)
    return bool(d1), bool(d2), bool(d3)


def phase_damping_D3(variant: str, kappa: float, lam1: float = 1.0, lam2: float = 0.0, lam3: float = 0.0) -> bool:
    """D3 for the sigma_1 family (lam1 = 1, lam2 and lam3 free) or the
    sigma_3 family (lam3 = 1, lam2 = -lam1)."""
    _check_unit("kappa", kappa)
    edge = abs(abs(kappa) - 1) <= ZERO_TOL
    if variant == "s1":
        if edge:
            return _is_zero(lam2) and _is_zero(lam3)
        return _is_zero(lam2 + lam3) and abs(lam3) < 1 - ZERO_TOL
    if variant == "s3":
        return _is_zero(kappa) or (abs(abs(lam1) - 1) <= ZERO_TOL and not edge)
    raise ValueError(f"unknown phase-damping variant {variant!r}")


# ---- depolarizing family -----------------------------------------------------------


@dataclass(frozen=True)
class KappaBound:
    kappa_max: float
    # True when the bound itself is excluded (|kappa| < kappa_max)
    open_interval: bool


def depol_D3_bound(mu: float) -> KappaBound:
    mu = float(mu)
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu={mu} outside [0, 1]")
    if mu == 0.0:
        return KappaBound(1.0, True)
    if mu == 1.0:
        return KappaBound(1.0, False)
    k = np.sqrt((4 - 3 * mu) / ((3 - 2 * mu) * (2 * mu * mu - 5 * mu + 4)))
    return KappaBound(float(min(k, 1.0)), False)


def depol_reverse_min_eig(mu: float, kappa: float) -> float:
    """Minimum eigenvalue of the reconstructed reverse Choi matrix, computed from the simulated data."""
    from . import recon, sim, strat

    s = strat.family_strategy("depolarizing", {"mu": mu}, (kappa, 0.0, 0.0))
    dist = sim.simulate_exact(s)
    return qmat.is_psd(recon.tilde_choi(dist, "2to1")).min_eig


def depol_D3_bound_numeric(mu: float, tol: float = 1e-8) -> float:
    """Largest kappa in [0, 1] with a PSD reverse Choi, by bisection."""
    if depol_reverse_min_eig(mu, 1.0) >= 0:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if depol_reverse_min_eig(mu, mid) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def depol_indistinguishable(mu: float, kappa: float) -> bool:
    return bool(abs(mu - 1.0) <= ZERO_TOL or _is_zero(kappa))


# ---- symmetric conditional model ---------------------------------------------------


@dataclass(frozen=True)
class SymmetricModel:
    """lam_y: fidelity of Bob's outcome to Alice's when the settings agree;
    eta_y: Alice's bias, P(x1 | y1) = (1 - eta)/2 + eta x1;
    zeta_y: Bob's bias when Alice does nothing, P(x2 | 0, y2) = (1 - zeta)/2 + zeta x2."""

    lam: tuple
    eta: tuple
    zeta: tuple

    def __post_init__(self):
        for name, vals, lo in (("lam", self.lam, 0.0), ("eta", self.eta, -1.0), ("zeta", self.zeta, -1.0)):
            if len(vals) != 3 or any(not lo <= float(v) <= 1.0 for v in vals):
                raise InvalidStrategy(f"{name} must hold three values in [{lo:g}, 1]")


def _biased(b: float) -> np.ndarray:
    return np.array([(1 - b) / 2, (1 + b) / 2])


def symmetric_model_distribution(m: SymmetricModel) -> JointDistribution:
    t = np.zeros((4, 2, 4, 2))
    t[0, 0, 0, 0] = 1.0
    for y2 in range(1, 4):
        t[0, 0, y2] = _biased(m.zeta[y2 - 1])
    for y1 in range(1, 4):
        px1 = _biased(m.eta[y1 - 1])
        t[y1, :, 0, 0] = px1
        lam = m.lam[y1 - 1]
        for y2 in range(1, 4):
            if y1 == y2:
                cond = (1 - lam) / 2 + lam * np.eye(2)  # [x1, x2]
            else:
                cond = np.full((2, 2), 0.5)
            t[y1, :, y2, :] = px1[:, None] * cond
    return JointDistribution(t)
