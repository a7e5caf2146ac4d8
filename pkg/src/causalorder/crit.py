"""Decision criteria on observed distributions and the hierarchy classifier.

Precondition failures (zero-probability outcomes, singular anchors, missing
basis properties) are reported as status "inconclusive:<reason>" and never
as a class rejection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qmat, recon
from .errors import A1Violation, C0Degenerate, SingularAnchor
from .measure import OperatorBasis, pauli_basis
from .sim import JointDistribution, conditionals, simulate_exact
from .strat import Parallel, seq

TOL_EQ = 1e-9
TOL_PSD = 1e-9
TOL_MARKOV = 1e-9


@dataclass(frozen=True)
class Check:
    ok: bool
    residual: float

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class C1Check:
    ok: bool
    residual: float
    witness: tuple  # (y1, y2, x2) of the largest violation
    lhs: float
    rhs: float

    def __bool__(self) -> bool:
        return self.ok


def _bases(dist, basis1, basis2) -> tuple[OperatorBasis, OperatorBasis]:
    return (basis1 if basis1 is not None else pauli_basis(), basis2 if basis2 is not None else pauli_basis())


# ---- Markov chains -----------------------------------------------------------------


def markov_x1y1y2(dist: JointDistribution, tol: float = TOL_MARKOV) -> Check:
    """P(x1 | y1, y2) does not depend on y2 (the y2 = 0 column included)."""
    p = dist.table.sum(axis=3)  # [y1, x1, y2]
    res = float(np.max(p.max(axis=2) - p.min(axis=2)))
    return Check(res <= tol, res)


def markov_y1y2x2(dist: JointDistribution, tol: float = TOL_MARKOV) -> Check:
    """P(x2 | y1, y2) does not depend on y1 (the y1 = 0 row included)."""
    return markov_x1y1y2(dist.swapped(), tol)


def markov_full_chain(dist: JointDistribution, tol: float = TOL_MARKOV) -> Check:
    """Factorization P(x1, x2 | y1, y2) = P(x1 | y1) P(x2 | y2)."""
    t = dist.table
    pa = t[:, :, 0, 0]
    pb = t[0, 0]
    res = float(np.max(np.abs(t - np.einsum("yx,zw->yxzw", pa, pb))))
    return Check(res <= tol, res)


# ---- (C0), (C1), (C2) ---------------------------------------------------------------


def check_C0(dist: JointDistribution, tol: float = 1e-12) -> Check:
    c = conditionals(dist, tol=tol)
    return Check(c.c0_ok, c.c0_min)


def check_C0_reverse(dist: JointDistribution, tol: float = 1e-12) -> Check:
    return check_C0(dist.swapped(), tol)


def c1_sides(dist: JointDistribution, basis1: OperatorBasis | None = None,
             basis2: OperatorBasis | None = None) -> tuple[np.ndarray, np.ndarray]:
    """LHS[y1, y2, x2] and RHS[y2, x2] of the consistency relation, over nontrivial settings.

    LHS = sum_x1 P(x2 | x1, y1, y2)
    RHS = d P(x2 | 0, y2)
          - d sum_{t1, t1' != 0} <G_t1> h_{t1 t1'} sum_x1' g_{x1'|t1'} P(x2 | x1', y(t1'), y2)
    """
    b1, _ = _bases(dist, basis1, basis2)
    cond = conditionals(dist, strict=True)
    pc = cond.p_x2_cond[1:, :, 1:, :]  # [y1, x1, y2, x2]
    lhs = pc.sum(axis=1)
    d = b1.d
    ex = np.array([b1.coeffs[a] @ cond.p_x1[b1.setting_of[a]] for a in range(1, b1.size)])
    weights = ex @ b1.h[1:, 1:]  # per t1'
    contrib = np.zeros(pc.shape[2:])
    for k, a in enumerate(range(1, b1.size)):
        y1 = b1.setting_of[a] - 1
        contrib += weights[k] * np.einsum("x,xzw->zw", b1.coeffs[a], pc[y1])
    rhs = d * cond.p_x2_nothing[1:] - d * contrib
    return lhs, rhs


def check_C1(dist: JointDistribution, basis1=None, basis2=None, tol: float = TOL_EQ) -> C1Check:
    """Raises C0Degenerate when some first-party conditional is undefined."""
    lhs, rhs = c1_sides(dist, basis1, basis2)
    diff = np.abs(lhs - rhs[None])
    res = float(diff.max())
    # ties (up to rounding) resolve to the lexicographically first (y1, y2, x2)
    flat = int(np.flatnonzero(diff.ravel() >= res - 1e-12)[0])
    idx = np.unravel_index(flat, diff.shape)
    y1, y2, x2 = (int(i) for i in idx)
    return C1Check(res <= tol, res, (y1 + 1, y2 + 1, x2), float(lhs[idx]), float(rhs[y2, x2]))


def check_C2(dist: JointDistribution, basis1=None, basis2=None, tol: float = TOL_EQ) -> C1Check:
    """Role-exchanged C1; the witness is reported as (y2, y1, x1)."""
    b1, b2 = _bases(dist, basis1, basis2)
    return check_C1(dist.swapped(), b2, b1, tol)


def c1_qubit_residuals(dist: JointDistribution) -> np.ndarray:
    """Two-qubit Pauli form of C1, |LHS - RHS| indexed [y1, y2, x2]."""
    cond = conditionals(dist, strict=True)
    pc = cond.p_x2_cond[1:, :, 1:, :]
    lhs = pc.sum(axis=1)
    sign = np.array([1.0, -1.0])
    bloch = cond.p_x1[1:] @ sign  # <sigma_y'>
    alt = np.einsum("x,yxzw->yzw", sign, pc)  # sum_x1' (-1)^x1' P(x2|x1',y',y2)
    rhs = 2 * cond.p_x2_nothing[1:] - np.einsum("y,yzw->zw", bloch, alt)
    return np.abs(lhs - rhs[None])


# ---- memberships ---------------------------------------------------------------------


@dataclass
class Membership:
    status: str  # "member", "non-member" or "inconclusive:<reason>"
    checks: dict = field(default_factory=dict)
    rho: np.ndarray | None = None
    choi: np.ndarray | None = None
    roundtrip: float | None = None

    @property
    def verdict(self) -> bool | None:
        if self.status.startswith("inconclusive"):
            return None
        return self.status == "member"


def membership_N12(dist: JointDistribution, basis1=None, basis2=None, tol_eq: float = TOL_EQ,
                   tol_psd: float = TOL_PSD) -> Membership:
    """Memoryless 1->2 membership: X1-Y1-Y2, C1 and hat C >= 0, under C0.

    On success the pair (rho1[P], hat C) is re-simulated and must reproduce P.
    """
    b1, b2 = _bases(dist, basis1, basis2)
    mk = markov_x1y1y2(dist, tol_eq)
    c0 = check_C0(dist)
    if not mk:
        # the chain is necessary for membership whether or not C0 holds
        return Membership("non-member", {"C0": c0, "markov_X1Y1Y2": mk})
    if not c0:
        return Membership("inconclusive:C0", {"C0": c0, "markov_X1Y1Y2": mk})
    try:
        c1 = check_C1(dist, b1, b2, tol_eq)
        hat = recon.hat_choi(dist, "1to2", b1, b2)
        r1 = recon.rho1(dist, b1, b2)
    except A1Violation:
        return Membership("inconclusive:A1", {"C0": c0})
    psd = qmat.is_psd(hat, tol_psd)
    checks = {"C0": c0, "markov_X1Y1Y2": mk, "C1": c1, "psd_hatC": Check(psd.ok, psd.min_eig)}
    ok = bool(mk and c1 and psd)
    out = Membership("member" if ok else "non-member", checks, r1, hat)
    if ok:
        back = simulate_exact(seq("1to2", r1, hat), _family_of(b1), _family_of(b2), signed=True)
        out.roundtrip = float(np.max(np.abs(back.table - dist.table)))
        if out.roundtrip > tol_eq:
            out.status = "non-member"
            checks["roundtrip"] = Check(False, out.roundtrip)
    return out


def membership_N21(dist: JointDistribution, basis1=None, basis2=None, tol_eq: float = TOL_EQ,
                   tol_psd: float = TOL_PSD) -> Membership:
    """Role-exchanged memoryless membership; the returned Choi is in party order."""
    b1, b2 = _bases(dist, basis1, basis2)
    res = membership_N12(dist.swapped(), b2, b1, tol_eq, tol_psd)
    if res.choi is not None:
        res.choi = qmat.swap_parties(res.choi, dist.d2, dist.d1)
    if res.status == "inconclusive:C0":
        res.status = "inconclusive:C0_reverse"
    return res


@dataclass
class ParallelMembership:
    status: str
    checks: dict
    R: np.ndarray | None
    roundtrip: float | None
    # R >= 0 alone would accept, while the chain conditions reject
    psd_without_chains: bool

    @property
    def verdict(self) -> bool | None:
        if self.status.startswith("inconclusive"):
            return None
        return self.status == "member"


def membership_parallel(dist: JointDistribution, basis1=None, basis2=None, tol_eq: float = TOL_EQ,
                        tol_psd: float = TOL_PSD) -> ParallelMembership:
    """Both chains, R >= 0, and the round trip through Parallel(R)."""
    b1, b2 = _bases(dist, basis1, basis2)
    try:
        R = recon.pdm(dist, b1, b2)
    except A1Violation:
        return ParallelMembership("inconclusive:A1", {}, None, None, False)
    m12 = markov_x1y1y2(dist, tol_eq)
    m21 = markov_y1y2x2(dist, tol_eq)
    psd = qmat.is_psd(R, tol_psd)
    back = simulate_exact(Parallel(R, dist.d1, dist.d2), _family_of(b1), _family_of(b2), signed=True)
    rt = float(np.max(np.abs(back.table - dist.table)))
    checks = {
        "markov_X1Y1Y2": m12,
        "markov_Y1Y2X2": m21,
        "psd_R": Check(psd.ok, psd.min_eig),
        "roundtrip": Check(rt <= tol_eq, rt),
    }
    ok = bool(m12 and m21 and psd and rt <= tol_eq)
    return ParallelMembership("member" if ok else "non-member", checks, R, rt, bool(psd.ok and not ok))


def membership_individual(dist: JointDistribution, tol_eq: float = TOL_EQ) -> Check:
    return markov_full_chain(dist, tol_eq)


# ---- reverse compatibility -------------------------------------------------------------------


@dataclass
class DChecks:
    status: str
    D1: Check | None = None
    D2: Check | None = None
    D3: Check | None = None
    tilde_choi_21: np.ndarray | None = None

    @property
    def indistinguishable(self) -> bool | None:
        checks = [c for c in (self.D1, self.D2, self.D3) if c is not None]
        if any(not c for c in checks):
            return False
        return True if len(checks) == 3 else None


def d1d2d3(dist: JointDistribution, basis1=None, basis2=None, tol_eq: float = TOL_EQ,
           tol_psd: float = TOL_PSD, require_member: bool = True) -> DChecks:
    """D1: Y1-Y2-X2.  D2: X1-Y1-Y2 on the (possibly signed) reverse simulation
    S_2to1(rho2[P], tilde C_2to1[P]).  D3: tilde C_2to1 >= 0.
    """
    b1, b2 = _bases(dist, basis1, basis2)
    if require_member:
        mem = membership_N12(dist, b1, b2, tol_eq, tol_psd)
        if mem.status != "member":
            reason = mem.status if mem.status.startswith("inconclusive") else "inconclusive:not_N12"
            return DChecks(reason)
    d1 = markov_y1y2x2(dist, tol_eq)
    try:
        ct = recon.tilde_choi(dist, "2to1", b1, b2)
    except SingularAnchor:
        return DChecks("inconclusive:singular_anchor", D1=d1)
    r2 = recon.rho2(dist, b1, b2)
    rev = simulate_exact(seq("2to1", r2, ct), _family_of(b1), _family_of(b2), signed=True)
    d2 = markov_x1y1y2(rev, tol_eq)
    psd = qmat.is_psd(ct, tol_psd)
    return DChecks("classified", d1, d2, Check(psd.ok, psd.min_eig), ct)


# ---- classifier ----------------------------------------------------------------------------------


def _family_of(basis: OperatorBasis):
    if basis.family is None:
        raise ValueError("operator basis does not record its measurement family")
    return basis.family


def _psd_entry(m, tol) -> dict:
    r = qmat.is_psd(m, tol)
    return {"ok": r.ok, "min_eig": r.min_eig}


def _check_entry(c) -> dict | None:
    if c is None:
        return None
    return {"ok": bool(c.ok), "residual": float(c.residual)}


def classify(dist: JointDistribution, basis1=None, basis2=None, tol_eq: float = TOL_EQ,
             tol_psd: float = TOL_PSD) -> dict:
    """Run every criterion and assemble a report with a stable field order."""
    b1, b2 = _bases(dist, basis1, basis2)
    reasons: list[str] = []
    rep: dict = {"status": None}
    rep["markov_X1Y1Y2"] = _check_entry(markov_x1y1y2(dist, tol_eq))
    rep["markov_Y1Y2X2"] = _check_entry(markov_y1y2x2(dist, tol_eq))
    rep["markov_full"] = _check_entry(markov_full_chain(dist, tol_eq))
    c0 = check_C0(dist)
    c0r = check_C0_reverse(dist)
    rep["C0"] = _check_entry(c0)
    rep["C0_reverse"] = _check_entry(c0r)
    if not c0:
        reasons.append("C0")
    if not c0r:
        reasons.append("C0_reverse")

    def c1_entry(fn):
        try:
            c = fn(dist, b1, b2, tol_eq)
        except C0Degenerate:
            return None
        return {"ok": c.ok, "residual": c.residual, "witness": list(c.witness), "lhs": c.lhs, "rhs": c.rhs}

    rep["C1"] = c1_entry(check_C1)
    rep["C2"] = c1_entry(check_C2)

    R = recon.pdm(dist, b1, b2)
    rep["psd_R"] = _psd_entry(R, tol_psd)
    for direction, key, c0chk in (("1to2", "12", c0), ("2to1", "21", c0r)):
        if c0chk:
            rep[f"psd_hatC_{key}"] = _psd_entry(recon.hat_choi(dist, direction, b1, b2), tol_psd)
        else:
            rep[f"psd_hatC_{key}"] = None
        try:
            rep[f"psd_tildeC_{key}"] = _psd_entry(recon.tilde_choi(dist, direction, b1, b2), tol_psd)
        except SingularAnchor:
            rep[f"psd_tildeC_{key}"] = None
            reasons.append(f"singular_anchor_{key}")

    n12 = membership_N12(dist, b1, b2, tol_eq, tol_psd)
    n21 = membership_N21(dist, b1, b2, tol_eq, tol_psd)
    par = membership_parallel(dist, b1, b2, tol_eq, tol_psd)
    ind = membership_individual(dist, tol_eq)
    rep["member_N12"] = n12.verdict
    rep["member_N21"] = n21.verdict
    rep["member_parallel"] = par.verdict
    rep["member_individual"] = bool(ind.ok)
    rep["roundtrip_N12"] = n12.roundtrip
    rep["roundtrip_parallel"] = par.roundtrip
    rep["psd_without_chains"] = par.psd_without_chains
    if n12.status == "member":
        dc = d1d2d3(dist, b1, b2, tol_eq, tol_psd, require_member=False)
        rep["D1"] = _check_entry(dc.D1)
        rep["D2"] = _check_entry(dc.D2)
        rep["D3"] = _check_entry(dc.D3)
        rep["order_indistinguishable"] = dc.indistinguishable
    else:
        rep["D1"] = rep["D2"] = rep["D3"] = None
        rep["order_indistinguishable"] = None
    rep["tolerances"] = {"tol_eq": tol_eq, "tol_psd": tol_psd}
    undecided = [m.status.split(":", 1)[1] for m in (n12, n21, par) if m.verdict is None]
    rep["status"] = f"inconclusive:{undecided[0]}" if undecided else "classified"
    rep["inconclusive_reasons"] = reasons
    return rep
