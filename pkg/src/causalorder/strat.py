"""Strategy representations, channel constructors and qubit channel normal forms.

Choi convention: C[L] = sum_ab |a><b| (x) L(|a><b|) on in (x) out, so that
L(rho) = Tr_in[(rho^T (x) I) C].

Memoryless strategies store their Choi matrix in party order, i.e. on
H_{I,1} (x) H_{I,2} whatever the direction.  For direction "1to2" this is the
usual in (x) out layout; for "2to1" the first factor is the channel output.
Reconstructed Choi matrices (module recon) use the same layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from . import qmat
from .errors import C0Degenerate, DimensionMismatch, InvalidStrategy

TP_TOL = 1e-10
PSD_TOL = 1e-9
RANK_TOL = 1e-10

DIRECTIONS = ("1to2", "2to1")


# ---- channels ----------------------------------------------------------------


def choi_of_map(fn: Callable[[np.ndarray], np.ndarray], d_in: int) -> np.ndarray:
    blocks = []
    for a in range(d_in):
        for b in range(d_in):
            e = np.zeros((d_in, d_in), dtype=complex)
            e[a, b] = 1.0
            blocks.append((e, np.asarray(fn(e), dtype=complex)))
    return sum(qmat.kron(e, out) for e, out in blocks)


def choi_of_kraus(kraus: Sequence[np.ndarray]) -> np.ndarray:
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    d_in = kraus[0].shape[1]
    return choi_of_map(lambda x: sum(k @ x @ qmat.dagger(k) for k in kraus), d_in)


def apply_choi(choi, x, d_in: int, d_out: int) -> np.ndarray:
    """L(x) = Tr_in[(x^T (x) I) C] for an in (x) out Choi matrix."""
    c = np.asarray(choi, dtype=complex).reshape(d_in, d_out, d_in, d_out)
    return np.einsum("ab,akbl->kl", np.asarray(x, dtype=complex), c)


def identity_choi(d: int = 2) -> np.ndarray:
    return d * qmat.proj(qmat.bell_phi_plus(d))


def unitary_choi(u) -> np.ndarray:
    return choi_of_kraus([u])


def depolarizing_choi(mu: float, d: int = 2) -> np.ndarray:
    """L(rho) = (1 - mu) rho + mu Tr(rho) I/d."""
    if not 0.0 <= mu <= 1.0:
        raise InvalidStrategy(f"depolarizing weight {mu} outside [0, 1]")
    return (1 - mu) * identity_choi(d) + mu * np.eye(d * d, dtype=complex) / d


def pauli_lambdas(p) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(4)
    return np.array([2 * p[0] + 2 * p[1] - 1, -2 * p[0] - 2 * p[2] + 1, 2 * p[0] + 2 * p[3] - 1])


def choi_from_pauli_probs(p) -> np.ndarray:
    """Choi matrix of rho -> sum_j p_j sigma_j rho sigma_j.

    Closed form I(x)I/2 + sum_j (lambda_j/2) sigma_j (x) sigma_j with the
    lambdas of `pauli_lambdas`; the sign flip on lambda_2 comes from
    sigma_2^T = -sigma_2.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape != (4,) or np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-12:
        raise InvalidStrategy(f"invalid Pauli probability vector {p}")
    lam = pauli_lambdas(p)
    c = 0.5 * np.eye(4, dtype=complex)
    for j in range(3):
        c = c + 0.5 * lam[j] * qmat.kron(qmat.PAULI[j + 1], qmat.PAULI[j + 1])
    return c


def tp_residual(choi, d_in: int, d_out: int) -> float:
    c = np.asarray(choi, dtype=complex)
    if c.shape != (d_in * d_out, d_in * d_out):
        raise DimensionMismatch(f"Choi shape {c.shape} does not match {d_in}x{d_out}")
    red = qmat.partial_trace(c, [d_in, d_out], [0])
    return float(np.max(np.abs(red - np.eye(d_in))))


def to_in_out(choi, direction: str, d1: int, d2: int) -> np.ndarray:
    """Convert a party-ordered Choi matrix to in (x) out layout."""
    if direction == "1to2":
        return np.asarray(choi, dtype=complex)
    return qmat.swap_parties(choi, d1, d2)


def to_party_order(choi_in_out, direction: str, d1: int, d2: int) -> np.ndarray:
    if direction == "1to2":
        return np.asarray(choi_in_out, dtype=complex)
    # in (x) out = I2 (x) I1 for 2to1
    return qmat.swap_parties(choi_in_out, d2, d1)


# ---- strategies --------------------------------------------------------------


def _check_direction(direction: str) -> str:
    if direction not in DIRECTIONS:
        raise InvalidStrategy(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    return direction


@dataclass(frozen=True)
class Individual:
    rho1: np.ndarray
    rho2: np.ndarray

    @property
    def dims(self) -> tuple[int, int]:
        return self.rho1.shape[0], self.rho2.shape[0]


@dataclass(frozen=True)
class Parallel:
    rho12: np.ndarray
    d1: int = 2
    d2: int = 2

    @property
    def dims(self) -> tuple[int, int]:
        return self.d1, self.d2


@dataclass(frozen=True)
class SeqMemoryless:
    direction: str
    rho: np.ndarray
    choi: np.ndarray  # party order, see module docstring

    @property
    def dims(self) -> tuple[int, int]:
        d_src = self.rho.shape[0]
        d_tgt = self.choi.shape[0] // d_src
        return (d_src, d_tgt) if self.direction == "1to2" else (d_tgt, d_src)

    def choi_in_out(self) -> np.ndarray:
        d1, d2 = self.dims
        return to_in_out(self.choi, self.direction, d1, d2)


@dataclass(frozen=True)
class SeqQuantumMemory:
    """Source state on I_first (x) M; processor Choi on (O_first (x) M) (x) I_second."""

    direction: str
    rho: np.ndarray
    processor: np.ndarray
    d_mem: int

    @property
    def dims(self) -> tuple[int, int]:
        d_src = self.rho.shape[0] // self.d_mem
        d_tgt = self.processor.shape[0] // (d_src * self.d_mem)
        return (d_src, d_tgt) if self.direction == "1to2" else (d_tgt, d_src)


@dataclass(frozen=True)
class Mixture:
    weights: tuple
    components: tuple

    @property
    def dims(self) -> tuple[int, int]:
        return self.components[0].dims


Strategy = Union[Individual, Parallel, SeqMemoryless, SeqQuantumMemory, Mixture]


def seq(direction: str, rho, choi) -> SeqMemoryless:
    rho = qmat.as_matrix(rho)
    choi = qmat.as_matrix(choi)
    if choi.shape[0] % rho.shape[0]:
        raise DimensionMismatch("Choi dimension is not a multiple of the state dimension")
    return SeqMemoryless(_check_direction(direction), rho, choi)


def seq_from_in_out(direction: str, rho, choi_in_out) -> SeqMemoryless:
    rho = qmat.as_matrix(rho)
    d_src = rho.shape[0]
    d_tgt = qmat.as_matrix(choi_in_out).shape[0] // d_src
    d1, d2 = (d_src, d_tgt) if direction == "1to2" else (d_tgt, d_src)
    return seq(direction, rho, to_party_order(choi_in_out, _check_direction(direction), d1, d2))


def mixture(weights, components) -> Mixture:
    w = tuple(float(x) for x in weights)
    if len(w) != len(components) or not components:
        raise InvalidStrategy("weights and components must be non-empty and of equal length")
    if any(x < 0 for x in w) or abs(sum(w) - 1) > 1e-12:
        raise InvalidStrategy(f"mixture weights {w} are not a probability vector")
    dims = {c.dims for c in components}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixture components have different dimensions {dims}")
    return Mixture(w, tuple(components))


def _state_report(name: str, rho) -> dict:
    rho = np.asarray(rho)
    herm = qmat.hermiticity_residual(rho)
    ev = np.linalg.eigvalsh(qmat.hermitize(rho))
    return {
        f"{name}_hermiticity": herm,
        f"{name}_trace_error": float(abs(np.trace(rho) - 1)),
        f"{name}_min_eig": float(ev[0]),
    }


def _choi_report(name: str, choi, d_in: int, d_out: int) -> dict:
    ev = np.linalg.eigvalsh(qmat.hermitize(choi))
    return {
        f"{name}_hermiticity": qmat.hermiticity_residual(choi),
        f"{name}_tp_error": tp_residual(choi, d_in, d_out),
        f"{name}_min_eig": float(ev[0]),
    }


def validate(strategy: Strategy) -> dict:
    """Per-invariant residuals plus `valid` and `quasi` flags.

    `quasi` marks a Hermitian trace-preserving Choi matrix that is not PSD.
    """
    rep: dict = {"class": type(strategy).__name__}
    states: list[str] = []
    chois: list[str] = []
    if isinstance(strategy, Individual):
        rep.update(_state_report("rho1", strategy.rho1))
        rep.update(_state_report("rho2", strategy.rho2))
        states = ["rho1", "rho2"]
    elif isinstance(strategy, Parallel):
        if strategy.rho12.shape[0] != strategy.d1 * strategy.d2:
            raise DimensionMismatch("rho12 does not match d1*d2")
        rep.update(_state_report("rho12", strategy.rho12))
        states = ["rho12"]
    elif isinstance(strategy, SeqMemoryless):
        d1, d2 = strategy.dims
        if strategy.choi.shape[0] != d1 * d2:
            raise DimensionMismatch("Choi dimension inconsistent with the state")
        d_in, d_out = (d1, d2) if strategy.direction == "1to2" else (d2, d1)
        rep.update(_state_report("rho", strategy.rho))
        rep.update(_choi_report("choi", strategy.choi_in_out(), d_in, d_out))
        states, chois = ["rho"], ["choi"]
    elif isinstance(strategy, SeqQuantumMemory):
        d1, d2 = strategy.dims
        d_src = d1 if strategy.direction == "1to2" else d2
        d_tgt = d2 if strategy.direction == "1to2" else d1
        if strategy.processor.shape[0] != d_src * strategy.d_mem * d_tgt:
            raise DimensionMismatch("processor dimension inconsistent")
        rep.update(_state_report("rho", strategy.rho))
        rep.update(_choi_report("processor", strategy.processor, d_src * strategy.d_mem, d_tgt))
        states, chois = ["rho"], ["processor"]
    elif isinstance(strategy, Mixture):
        subs = [validate(c) for c in strategy.components]
        rep["weights_error"] = float(abs(sum(strategy.weights) - 1))
        rep["weights_min"] = float(min(strategy.weights))
        rep["components"] = subs
        rep["valid"] = (
            all(s["valid"] for s in subs) and rep["weights_error"] <= 1e-12 and rep["weights_min"] >= 0
        )
        rep["quasi"] = any(s["quasi"] for s in subs)
        return rep
    else:
        raise InvalidStrategy(f"unknown strategy type {type(strategy).__name__}")
    states_ok = all(
        rep[f"{s}_hermiticity"] <= 1e-12 and rep[f"{s}_trace_error"] <= 1e-12 and rep[f"{s}_min_eig"] >= -PSD_TOL
        for s in states
    )
    herm_tp = all(rep[f"{c}_hermiticity"] <= 1e-12 and rep[f"{c}_tp_error"] <= TP_TOL for c in chois)
    psd = all(rep[f"{c}_min_eig"] >= -PSD_TOL for c in chois)
    rep["valid"] = bool(states_ok and herm_tp and psd)
    rep["quasi"] = bool(herm_tp and not psd)
    return rep


# ---- qubit normal form -------------------------------------------------------


@dataclass(frozen=True)
class QubitCanonicalForm:
    """C^{T1} = I (x) rho2 + sum_j (lam_j/2) alpha_j (x) beta_j.

    alpha_j = a[j] . sigma and beta_j = b[j] . sigma with unit real vectors,
    rho2 = (I + c2 . sigma)/2 is the output for a maximally mixed input.
    Only the first `t` entries of lam/a/b are meaningful.  `orientation` is
    det(A) det(B) of the full rotation pair returned by the SVD.
    """

    c2: np.ndarray
    t: int
    lam: np.ndarray
    a: np.ndarray
    b: np.ndarray
    orientation: float = 1.0
    T: np.ndarray = field(default=None)

    def correlation(self) -> np.ndarray:
        """Bloch correlation matrix sum_j lam_j a_j b_j^T."""
        k = self.t
        return (self.a[:k].T * self.lam[:k]) @ self.b[:k]


def bloch_correlation(choi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(T, c1_term, c2) with T_ij = Tr[(s_i (x) s_j) C^{T1}]/2.

    c1_term collects the s_i (x) I coefficients, which vanish for TP maps.
    """
    ct = qmat.partial_transpose(choi, [2, 2], 0)
    P = qmat.PAULI
    T = np.array([[np.real(np.trace(qmat.kron(P[i], P[j]) @ ct)) / 2 for j in (1, 2, 3)] for i in (1, 2, 3)])
    c2 = np.array([np.real(np.trace(qmat.kron(P[0], P[j]) @ ct)) / 2 for j in (1, 2, 3)])
    c1 = np.array([np.real(np.trace(qmat.kron(P[i], P[0]) @ ct)) / 2 for i in (1, 2, 3)])
    return T, c1, c2


def canonical_qubit_form(choi, rank_tol: float = RANK_TOL) -> QubitCanonicalForm:
    choi = qmat.as_matrix(choi)
    if choi.shape != (4, 4):
        raise DimensionMismatch("canonical form requires a qubit-to-qubit Choi matrix")
    if tp_residual(choi, 2, 2) > TP_TOL:
        raise InvalidStrategy("Choi matrix is not trace preserving")
    T, _, c2 = bloch_correlation(choi)
    U, s, Vt = np.linalg.svd(T)
    t = int(np.sum(s > rank_tol))
    orient = float(np.sign(np.linalg.det(U) * np.linalg.det(Vt)))
    return QubitCanonicalForm(c2=c2, t=t, lam=s.copy(), a=U.T.copy(), b=Vt.copy(), orientation=orient, T=T)


def choi_from_canonical(form: QubitCanonicalForm) -> np.ndarray:
    ct = qmat.kron(qmat.I2, qmat.bloch_state(form.c2))
    for j in range(form.t):
        ct = ct + 0.5 * form.lam[j] * qmat.kron(qmat.pauli_op(form.a[j]), qmat.pauli_op(form.b[j]))
    return qmat.partial_transpose(ct, [2, 2], 0)


# ---- presets and families ----------------------------------------------------


def _sigma_conj_choi(j: int) -> np.ndarray:
    return unitary_choi(qmat.PAULI[j])


PRESETS = ("entangled_memory", "flip_depolarize", "classical_flip")


def preset(name: str, lam: float | None = None, strict: bool = True) -> Strategy:
    """Counterexample strategies separating the classes of the hierarchy.

    entangled_memory: the first party measures half of |Phi+>, the other half
        is stored and handed to the second party (quantum memory).
    flip_depolarize: a uniform classical bit x prepares |x> on the first
        input and applies sigma_x conjugation then half depolarization.
    classical_flip: the same bit with weights (lam, 1 - lam) and no noise;
        with strict=False, lam in {0, 1} is accepted and the resulting table
        has zero-probability first-party outcomes.
    """
    if name == "entangled_memory":
        phi = qmat.proj(qmat.bell_phi_plus(2))
        # discard O1, forward the memory: L(A (x) B) = Tr(A) B
        proc = qmat.kron(qmat.I2, identity_choi(2))
        return SeqQuantumMemory("1to2", phi, proc, 2)
    if name == "flip_depolarize":
        half_depol = depolarizing_choi(0.5)
        comps = []
        for x in (0, 1):
            rho = qmat.proj(np.eye(2)[:, x])  # |(-1)^x, 3>
            chan = _compose_in_out(_sigma_conj_choi(x), half_depol)
            comps.append(seq_from_in_out("1to2", rho, chan))
        return mixture((0.5, 0.5), comps)
    if name == "classical_flip":
        if lam is None:
            raise InvalidStrategy("classical_flip needs a weight lambda")
        lam = float(lam)
        if not 0.0 <= lam <= 1.0:
            raise InvalidStrategy(f"classical_flip weight {lam} outside [0, 1]")
        if strict and lam in (0.0, 1.0):
            raise C0Degenerate("classical_flip requires lambda strictly between 0 and 1")
        comps = [seq_from_in_out("1to2", qmat.proj(np.eye(2)[:, x]), _sigma_conj_choi(x)) for x in (0, 1)]
        return Mixture((lam, 1.0 - lam), tuple(comps))
    raise InvalidStrategy(f"unknown preset {name!r}; choose from {PRESETS}")


def _compose_in_out(first, second, d: int = 2) -> np.ndarray:
    """Choi of second o first (both qubit in (x) out)."""
    return choi_of_map(lambda x: apply_choi(second, apply_choi(first, x, d, d), d, d), d)


FAMILY_NAMES = ("depolarizing", "pauli", "phase_damping_s1", "phase_damping_s3")


def family_lambdas(name: str, params: dict) -> np.ndarray:
    """Pauli-channel lambdas (coefficients of sigma_j (x) sigma_j in C/2) for a named family."""
    if name == "depolarizing":
        mu = float(params["mu"])
        if not 0 <= mu <= 1:
            raise InvalidStrategy(f"mu={mu} outside [0, 1]")
        return np.array([1 - mu, -(1 - mu), 1 - mu])
    if name == "pauli":
        return pauli_lambdas(_pauli_p(params))
    if name == "phase_damping_s1":
        l3 = float(params["lam3"])
        if not -1 <= l3 <= 1:
            raise InvalidStrategy(f"lam3={l3} outside [-1, 1]")
        return np.array([1.0, -l3, l3])
    if name == "phase_damping_s3":
        l1 = float(params["lam1"])
        if not -1 <= l1 <= 1:
            raise InvalidStrategy(f"lam1={l1} outside [-1, 1]")
        return np.array([l1, -l1, 1.0])
    raise InvalidStrategy(f"unknown channel family {name!r}")


def _pauli_p(params: dict) -> np.ndarray:
    p = np.asarray(params["p"], dtype=float).reshape(-1)
    if p.shape != (4,) or np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-12:
        raise InvalidStrategy(f"invalid Pauli probabilities {p}")
    return p


def family_choi(name: str, params: dict) -> np.ndarray:
    if name == "depolarizing":
        return depolarizing_choi(float(params["mu"]))
    if name == "pauli":
        return choi_from_pauli_probs(_pauli_p(params))
    lam = family_lambdas(name, params)
    c = 0.5 * np.eye(4, dtype=complex)
    for j in range(3):
        c = c + 0.5 * lam[j] * qmat.kron(qmat.PAULI[j + 1], qmat.PAULI[j + 1])
    return c


def family_strategy(name: str, params: dict, bloch) -> SeqMemoryless:
    """Forward strategy with rho1 = (I + c . sigma)/2 and a named qubit channel."""
    c = np.asarray(bloch, dtype=float).reshape(3)
    if np.linalg.norm(c) > 1 + 1e-12:
        raise InvalidStrategy(f"Bloch vector {c} has norm > 1")
    return seq("1to2", qmat.bloch_state(c), family_choi(name, params))


# ---- JSON --------------------------------------------------------------------


def strategy_to_json(s: Strategy) -> dict:
    m = qmat.matrix_to_json
    if isinstance(s, Individual):
        return {"class": "individual", "rho1": m(s.rho1), "rho2": m(s.rho2)}
    if isinstance(s, Parallel):
        return {"class": "parallel", "dims": [s.d1, s.d2], "rho12": m(s.rho12)}
    if isinstance(s, SeqMemoryless):
        return {"class": "seq", "direction": s.direction, "rho": m(s.rho), "choi": m(s.choi)}
    if isinstance(s, SeqQuantumMemory):
        return {
            "class": "seq_qmem",
            "direction": s.direction,
            "d_mem": s.d_mem,
            "rho": m(s.rho),
            "processor": m(s.processor),
        }
    if isinstance(s, Mixture):
        return {
            "class": "mixture",
            "weights": list(s.weights),
            "components": [strategy_to_json(c) for c in s.components],
        }
    raise InvalidStrategy(f"unknown strategy type {type(s).__name__}")


def strategy_from_json(obj: dict) -> Strategy:
    m = qmat.matrix_from_json
    try:
        cls = obj["class"]
        if cls == "seq" and "family" in obj:
            fam = obj["family"]
            params = dict(fam.get("params", {}))
            bloch = params.pop("bloch", [0.0, 0.0, 0.0])
            s = family_strategy(fam["name"], params, bloch)
            if obj.get("direction", "1to2") != "1to2":
                s = SeqMemoryless("2to1", s.rho, to_party_order(s.choi, "2to1", 2, 2))
            return s
        if cls == "individual":
            return Individual(m(obj["rho1"]), m(obj["rho2"]))
        if cls == "parallel":
            rho = m(obj["rho12"])
            d1, d2 = obj.get("dims", [int(round(np.sqrt(rho.shape[0])))] * 2)
            return Parallel(rho, int(d1), int(d2))
        if cls == "seq":
            return seq(obj.get("direction", "1to2"), m(obj["rho"]), m(obj["choi"]))
        if cls == "seq_qmem":
            return SeqQuantumMemory(
                _check_direction(obj.get("direction", "1to2")), m(obj["rho"]), m(obj["processor"]), int(obj["d_mem"])
            )
        if cls == "mixture":
            return mixture(obj["weights"], [strategy_from_json(c) for c in obj["components"]])
    except KeyError as exc:
        raise InvalidStrategy(f"strategy JSON missing field {exc}") from exc
    raise InvalidStrategy(f"unknown strategy class {obj.get('class')!r}")
