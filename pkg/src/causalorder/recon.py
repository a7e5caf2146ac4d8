"""Distribution-level reconstruction: moments, the pseudo-density matrix, its
marginals, and the two Choi estimators (Jordan inversion and the direct formula).

All bipartite outputs live on H_{I,1} (x) H_{I,2}.  Direction "2to1" is
obtained by exchanging the parties, running the "1to2" computation and
swapping the factors back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmat
from .errors import A1Violation, DimensionMismatch
from .measure import OperatorBasis, pauli_basis
from .sim import JointDistribution, conditionals

DIRECTIONS = ("1to2", "2to1")


def _bases(dist: JointDistribution, basis1, basis2) -> tuple[OperatorBasis, OperatorBasis]:
    basis1 = basis1 if basis1 is not None else pauli_basis()
    basis2 = basis2 if basis2 is not None else pauli_basis()
    for b, d, n in ((basis1, dist.d1, dist.n1), (basis2, dist.d2, dist.n2)):
        if b.d != d or int(b.setting_of.max()) != n:
            raise DimensionMismatch(f"basis (d={b.d}) does not match distribution (d={d}, {n} settings)")
        if b.H is None:
            raise A1Violation("operator basis has no dual (A1 fails)")
    return basis1, basis2


@dataclass(frozen=True)
class MomentTable:
    values: np.ndarray  # m[t1, t2]


def moments(dist: JointDistribution, basis1: OperatorBasis | None = None,
            basis2: OperatorBasis | None = None) -> MomentTable:
    """m[t1, t2] = sum_{x1, x2} g_{x1|t1} g_{x2|t2} P(x1, x2 | y(t1), y(t2))."""
    basis1, basis2 = _bases(dist, basis1, basis2)
    t = dist.table[basis1.setting_of][:, :, basis2.setting_of]  # [t1, x1, t2, x2]
    m = np.einsum("ax,bw,axbw->ab", basis1.coeffs, basis2.coeffs, t)
    return MomentTable(m)


def pdm(dist: JointDistribution, basis1: OperatorBasis | None = None,
        basis2: OperatorBasis | None = None) -> np.ndarray:
    """R = sum m[t1, t2] H_t1 (x) H_t2, the unique PDM reproducing every moment."""
    basis1, basis2 = _bases(dist, basis1, basis2)
    m = moments(dist, basis1, basis2).values
    d1, d2 = basis1.d, basis2.d
    r = np.einsum("ab,aij,bkl->ikjl", m, basis1.H, basis2.H).reshape(d1 * d2, d1 * d2)
    return r


def rho1(dist: JointDistribution, basis1=None, basis2=None) -> np.ndarray:
    r = pdm(dist, basis1, basis2)
    return qmat.partial_trace(r, [dist.d1, dist.d2], [0])


def rho2(dist: JointDistribution, basis1=None, basis2=None) -> np.ndarray:
    r = pdm(dist, basis1, basis2)
    return qmat.partial_trace(r, [dist.d1, dist.d2], [1])


def _check_direction(direction: str) -> None:
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")


def tilde_choi(dist: JointDistribution, direction: str = "1to2", basis1=None, basis2=None,
               tol_pd: float = qmat.PD_TOL) -> np.ndarray:
    """Jordan-inversion Choi estimate.

    1to2: R = C^{T1} o (rho1 (x) I);  2to1: R = C^{T2} o (I (x) rho2).
    Raises SingularAnchor when the anchor state is not full rank.
    """
    _check_direction(direction)
    basis1, basis2 = _bases(dist, basis1, basis2)
    d1, d2 = dist.d1, dist.d2
    r = pdm(dist, basis1, basis2)
    if direction == "1to2":
        anchor = qmat.kron(qmat.partial_trace(r, [d1, d2], [0]), np.eye(d2))
        x = qmat.jordan_inverse(anchor, r, tol_pd)
        return qmat.hermitize(qmat.partial_transpose(x, [d1, d2], 0))
    anchor = qmat.kron(np.eye(d1), qmat.partial_trace(r, [d1, d2], [1]))
    x = qmat.jordan_inverse(anchor, r, tol_pd)
    return qmat.hermitize(qmat.partial_transpose(x, [d1, d2], 1))


@dataclass(frozen=True)
class HatChoi:
    choi: np.ndarray
    # largest change of any coefficient when the arbitrary setting used for
    # the t2 = 0 slot is varied over all settings
    anchor_spread: float


def _hat_coefficients(dist: JointDistribution, b1: OperatorBasis, b2: OperatorBasis,
                      anchor_setting: int) -> np.ndarray:
    cond = conditionals(dist, strict=True)
    d1 = b1.d
    n1, n2 = b1.size, b2.size
    # second-party coefficients; the t2 = 0 slot uses the anchor setting with g = 1
    y2_of = b2.setting_of.copy()
    y2_of[0] = anchor_setting
    g2 = b2.coeffs
    pc = cond.p_x2_cond  # [y1, x1, y2, x2]
    c = np.zeros((n1, n2))
    for a in range(1, n1):
        y1 = b1.setting_of[a]
        blk = pc[y1][:, y2_of]  # [x1, t2, x2]
        c[a] = np.einsum("x,bw,xbw->b", b1.coeffs[a], g2, blk)
    # identity row: d * [<G_t2> with first party idle - sum <G_t1> h_{t1 t1'} c_{t1' t2}]
    mean1 = np.array([b1.coeffs[a] @ cond.p_x1[b1.setting_of[a]] for a in range(n1)])
    mean1[0] = 0.0
    idle = np.array([g2[b] @ cond.p_x2_nothing[b2.setting_of[b]] for b in range(n2)])
    idle[0] = 1.0
    corr = mean1[1:] @ b1.h[1:, 1:] @ c[1:]
    c[0] = d1 * (idle - corr)
    return c


def hat_choi_full(dist: JointDistribution, direction: str = "1to2", basis1=None, basis2=None,
                  anchor: int = 1) -> HatChoi:
    """Direct-formula Choi estimate with its anchor-choice diagnostic.

    `anchor` is the receiving party's setting (1-based table index) used for
    the identity slot; the spread over all choices is reported.
    """
    _check_direction(direction)
    basis1, basis2 = _bases(dist, basis1, basis2)
    if direction == "2to1":
        res = hat_choi_full(dist.swapped(), "1to2", basis2, basis1, anchor)
        return HatChoi(qmat.swap_parties(res.choi, dist.d2, dist.d1), res.anchor_spread)
    if not 1 <= anchor <= dist.n2:
        raise ValueError(f"anchor setting {anchor} outside 1..{dist.n2}")
    c = _hat_coefficients(dist, basis1, basis2, anchor)
    spread = 0.0
    for y in range(1, dist.n2 + 1):
        spread = max(spread, float(np.max(np.abs(_hat_coefficients(dist, basis1, basis2, y) - c))))
    d1, d2 = basis1.d, basis2.d
    Ht = np.swapaxes(basis1.H, -1, -2)
    choi = np.einsum("ab,aij,bkl->ikjl", c, Ht, basis2.H).reshape(d1 * d2, d1 * d2)
    return HatChoi(qmat.hermitize(choi), spread)


def hat_choi(dist: JointDistribution, direction: str = "1to2", basis1=None, basis2=None,
             anchor: int = 1) -> np.ndarray:
    return hat_choi_full(dist, direction, basis1, basis2, anchor).choi
