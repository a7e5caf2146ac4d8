"""Rank-one projective measurement families and the operator bases built from them.

A family lists nontrivial settings y with an orthonormal basis {|x,y>} each.
The "do nothing" setting is never stored here; distribution tables give it
index 0 with a single dummy outcome x = 0, and setting k of the family sits
at table index k + 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import qmat
from .errors import A1Violation, BadContrastRank, NonOrthonormalBasis

ORTHO_TOL = 1e-12
GRAM_COND_MAX = 1e8


@dataclass(frozen=True)
class ProjectiveFamily:
    d: int
    labels: tuple
    # vectors[k][:, x] is |x, labels[k]>
    vectors: tuple

    @property
    def n_settings(self) -> int:
        return len(self.labels)

    def effect(self, k: int, x: int) -> np.ndarray:
        """E_{x|y} for the k-th nontrivial setting (0-based)."""
        return qmat.proj(self.vectors[k][:, x])

    def effects(self) -> list[np.ndarray]:
        """Array of shape (d, d, d) per setting: effects[k][x]."""
        return [np.stack([self.effect(k, x) for x in range(self.d)]) for k in range(self.n_settings)]

    def outcome_counts(self) -> list[int]:
        return [self.d] * self.n_settings


@dataclass(frozen=True)
class ContrastScheme:
    # rows[k] has shape (d - 1, d): g_{x | y_k, z} for z = 0..d-2
    rows: tuple


@dataclass(frozen=True)
class Verdict:
    ok: bool
    residual: float

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class OperatorBasis:
    """Contrast operators G_t, dual operators H_t and Gram data h.

    Index 0 is t = 0 (G_0 = I); the remaining indices enumerate (y, z) pairs.
    `setting_of[t]` is the table setting index (0 for t = 0) and `coeffs[t]`
    the outcome coefficients g_{x|t} (all ones for t = 0, length d).
    """

    d: int
    labels: list
    setting_of: np.ndarray
    coeffs: np.ndarray
    G: np.ndarray
    gram: np.ndarray
    H: np.ndarray | None = None
    h: np.ndarray | None = None
    gram_cond: float = field(default=np.inf)
    family: ProjectiveFamily | None = None

    @property
    def size(self) -> int:
        return len(self.labels)


def _validate_vectors(d: int, vecs: np.ndarray, label) -> np.ndarray:
    vecs = np.asarray(vecs, dtype=complex)
    if vecs.shape != (d, d):
        raise NonOrthonormalBasis(f"setting {label}: expected {d} vectors of dimension {d}, got {vecs.shape}")
    res = float(np.max(np.abs(qmat.dagger(vecs) @ vecs - np.eye(d))))
    if res > ORTHO_TOL * 10:
        raise NonOrthonormalBasis(f"setting {label}: orthonormality residual {res:.3e}")
    return vecs


def make_family(d: int, labels: Sequence, vectors: Sequence) -> ProjectiveFamily:
    if len(labels) != len(vectors):
        raise ValueError("labels and vectors differ in length")
    if len(set(labels)) != len(labels):
        raise ValueError("setting labels must be distinct")
    vs = tuple(_validate_vectors(d, v, lab) for lab, v in zip(labels, vectors))
    return ProjectiveFamily(int(d), tuple(labels), vs)


def default_contrasts(family: ProjectiveFamily) -> ContrastScheme:
    """First outcome minus each other outcome."""
    d = family.d
    rows = []
    for _ in range(family.n_settings):
        g = np.zeros((d - 1, d))
        g[:, 0] = 1.0
        for z in range(d - 1):
            g[z, z + 1] = -1.0
        rows.append(g)
    return ContrastScheme(tuple(rows))


def _normalize_contrasts(family: ProjectiveFamily, rows: Sequence) -> ContrastScheme:
    d = family.d
    out = []
    for k, g in enumerate(rows):
        g = np.asarray(g, dtype=float)
        if g.ndim != 2 or g.shape != (d - 1, d):
            raise BadContrastRank(f"setting {family.labels[k]}: expected {d - 1} rows of length {d}")
        # rank-one effects: Tr G = sum_x g_x, so removing the mean makes G traceless
        g = g - g.mean(axis=1, keepdims=True)
        stacked = np.vstack([np.ones((1, d)), g])
        if np.linalg.matrix_rank(stacked, tol=1e-10) != d:
            raise BadContrastRank(f"setting {family.labels[k]}: contrast rows are dependent")
        out.append(g)
    return ContrastScheme(tuple(out))


def build_pauli_family() -> tuple[ProjectiveFamily, ContrastScheme]:
    """sigma_1, sigma_2, sigma_3 eigenbases with g_{x|y} = (-1)^x."""
    s = 1 / np.sqrt(2)
    v1 = np.array([[s, s], [s, -s]], dtype=complex)
    v2 = np.array([[s, s], [1j * s, -1j * s]], dtype=complex)
    v3 = np.eye(2, dtype=complex)
    fam = make_family(2, (1, 2, 3), (v1, v2, v3))
    g = np.array([[1.0, -1.0]])
    return fam, ContrastScheme((g, g, g))


def family_to_json(family: ProjectiveFamily, contrasts: ContrastScheme | None = None) -> dict:
    obj = {
        "d": family.d,
        "settings": [
            {"y": lab, "vectors": [qmat.matrix_to_json(v[:, x]) for x in range(family.d)]}
            for lab, v in zip(family.labels, family.vectors)
        ],
    }
    if contrasts is not None:
        obj["contrasts"] = {
            str(lab): [[float(a) for a in row] for row in g] for lab, g in zip(family.labels, contrasts.rows)
        }
    return obj


def family_from_json(obj: dict) -> tuple[ProjectiveFamily, ContrastScheme]:
    try:
        d = int(obj["d"])
        labels = []
        vectors = []
        for s in obj["settings"]:
            labels.append(s["y"])
            cols = [qmat.matrix_from_json(v).reshape(-1) for v in s["vectors"]]
            vectors.append(np.stack(cols, axis=1) if cols else np.zeros((d, 0)))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"bad family JSON: {exc}") from exc
    family = make_family(d, labels, vectors)
    if obj.get("contrasts"):
        table = obj["contrasts"]
        rows = []
        for lab in family.labels:
            if str(lab) not in table:
                raise BadContrastRank(f"contrasts missing for setting {lab}")
            rows.append(table[str(lab)])
        contrasts = _normalize_contrasts(family, rows)
    else:
        contrasts = default_contrasts(family)
    return family, contrasts


def load_family(path) -> tuple[ProjectiveFamily, ContrastScheme]:
    with open(Path(path), encoding="utf-8") as fh:
        return family_from_json(json.load(fh))


def build_operator_basis(
    family: ProjectiveFamily, contrasts: ContrastScheme | None = None, strict: bool = True
) -> OperatorBasis:
    """Assemble G_t, solve the dual basis H_t from the Gram system, compute h."""
    if contrasts is None:
        contrasts = default_contrasts(family)
    d = family.d
    labels: list = [0]
    setting_of = [0]
    coeffs = [np.ones(d)]
    G = [np.eye(d, dtype=complex)]
    for k, lab in enumerate(family.labels):
        E = family.effects()[k]
        for z, g in enumerate(contrasts.rows[k]):
            labels.append((lab, z))
            setting_of.append(k + 1)
            coeffs.append(np.asarray(g, dtype=float))
            G.append(np.einsum("x,xab->ab", g, E))
    G = np.stack(G)
    gram = np.real(np.einsum("iab,jba->ij", G, G))
    basis = OperatorBasis(d, labels, np.array(setting_of), np.stack(coeffs), G, gram, family=family)
    n = len(labels)
    if n == d * d:
        sv = np.linalg.svd(gram, compute_uv=False)
        basis.gram_cond = float(sv[0] / sv[-1]) if sv[-1] > 1e-10 * max(sv[0], 1.0) else np.inf
    if np.isfinite(basis.gram_cond) and basis.gram_cond <= GRAM_COND_MAX:
        ginv = np.linalg.inv(gram)
        basis.H = np.einsum("ij,jab->iab", ginv, G)
        basis.h = np.real(np.einsum("iab,jba->ij", basis.H, basis.H))
    elif strict:
        raise A1Violation(
            f"{n} contrast operators for d={d} (need {d * d}), Gram condition number {basis.gram_cond:.3e}"
        )
    return basis


def check_A1(basis: OperatorBasis) -> Verdict:
    """The G_t form a basis of the Hermitian operators; residual is the Gram condition number."""
    ok = basis.size == basis.d**2 and basis.H is not None
    return Verdict(bool(ok), float(basis.gram_cond))


def check_A2(basis: OperatorBasis) -> Verdict:
    """Each nontrivial G_t squares to a multiple of the identity."""
    d = basis.d
    worst = 0.0
    for G in basis.G[1:]:
        sq = G @ G
        c = np.real(np.trace(sq)) / d
        worst = max(worst, float(np.max(np.abs(sq - c * np.eye(d)))))
    return Verdict(worst <= 1e-10, worst)


def check_A3(family: ProjectiveFamily) -> Verdict:
    """Every effect has rank one; residual is the largest deviation of the rank from 1."""
    worst = 0
    for E in family.effects():
        for e in E:
            r = int(np.linalg.matrix_rank(e, tol=1e-10))
            worst = max(worst, abs(r - 1))
    return Verdict(worst == 0, float(worst))


def duality_residual(basis: OperatorBasis) -> float:
    if basis.H is None:
        return np.inf
    m = np.einsum("iab,jba->ij", basis.G, basis.H)
    return float(np.max(np.abs(m - np.eye(basis.size))))


def expand(basis: OperatorBasis, a) -> np.ndarray:
    """Reconstruct a from its G-moments: sum_t Tr(G_t a) H_t."""
    if basis.H is None:
        raise A1Violation("basis has no dual operators")
    a = np.asarray(a, dtype=complex)
    m = np.einsum("tab,ba->t", basis.G, a)
    return np.einsum("t,tab->ab", m, basis.H)


_PAULI_CACHE: dict = {}


def pauli_basis() -> OperatorBasis:
    if "basis" not in _PAULI_CACHE:
        fam, con = build_pauli_family()
        _PAULI_CACHE["family"] = fam
        _PAULI_CACHE["basis"] = build_operator_basis(fam, con)
    return _PAULI_CACHE["basis"]


def pauli_family() -> ProjectiveFamily:
    pauli_basis()
    return _PAULI_CACHE["family"]
