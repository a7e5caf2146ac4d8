"""Dense complex linear algebra for small operators.

Subsystem indices are 0-based throughout: for an operator on A (x) B,
subsystem 0 is A and subsystem 1 is B.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NonHermitian, SingularAnchor

HERM_TOL = 1e-12
PD_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
# PAULI[0] is the identity, PAULI[j] is sigma_j.
PAULI = np.stack([I2, SX, SY, SZ])


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _check_square(m: np.ndarray) -> int:
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m.shape[0]


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> list[int]:
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims):
        raise DimensionMismatch(f"subsystem dimensions must be >= 1, got {dims}")
    n = _check_square(m)
    if int(np.prod(dims)) != n:
        raise DimensionMismatch(f"dims {dims} do not match matrix dimension {n}")
    return dims


def kron(*ops) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    out = as_matrix(ops[0])
    for op in ops[1:]:
        out = np.kron(out, as_matrix(op))
    return out


def dagger(m) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def hermiticity_residual(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - dagger(m)))) if m.size else 0.0


def is_hermitian(m, tol: float = HERM_TOL) -> bool:
    return hermiticity_residual(m) <= tol


def hermitize(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + dagger(m))


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in `keep`.

    The kept subsystems stay in their original order.
    """
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise DimensionMismatch(f"keep indices {keep} out of range for {n} subsystems")
    t = m.reshape(dims + dims)
    # Contract traced subsystems pairwise, highest index first so axis numbers stay valid.
    cur = n
    for k in reversed(range(n)):
        if k in keep:
            continue
        t = np.trace(t, axis1=k, axis2=k + cur)
        cur -= 1
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def partial_transpose(m, dims: Sequence[int], subsystem: int) -> np.ndarray:
    """Transpose the named tensor factor only."""
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    if not 0 <= subsystem < n:
        raise DimensionMismatch(f"subsystem {subsystem} out of range for {n} subsystems")
    t = m.reshape(dims + dims)
    t = np.swapaxes(t, subsystem, subsystem + n)
    return t.reshape(m.shape)


def permute_subsystems(m, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: factor i of the result is factor perm[i] of `m`."""
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(n)):
        raise DimensionMismatch(f"{perm} is not a permutation of {n} subsystems")
    t = m.reshape(dims + dims)
    t = np.transpose(t, perm + [p + n for p in perm])
    return t.reshape(m.shape)


def swap_parties(m, d1: int, d2: int) -> np.ndarray:
    """Exchange the two factors of an operator on a d1 x d2 space."""
    return permute_subsystems(m, [d1, d2], [1, 0])


def jordan(a, b) -> np.ndarray:
    """Symmetrized product (ab + ba)/2."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    _check_square(a)
    return 0.5 * (a @ b + b @ a)


def jordan_inverse(m, r, tol_pd: float = PD_TOL) -> np.ndarray:
    """Solve r = jordan(x, m) for x, given positive-definite m.

    Works in the eigenbasis of m, where the equation decouples entrywise:
    x_ij = 2 r_ij / (mu_i + mu_j).
    """
    m = as_matrix(m)
    r = as_matrix(r)
    if m.shape != r.shape:
        raise DimensionMismatch(f"shapes {m.shape} and {r.shape} differ")
    _check_square(m)
    mu, u = np.linalg.eigh(hermitize(m))
    if mu[0] <= tol_pd:
        raise SingularAnchor(f"anchor minimum eigenvalue {mu[0]:.3e} <= {tol_pd:.1e}")
    r_hat = dagger(u) @ r @ u
    x_hat = 2.0 * r_hat / (mu[:, None] + mu[None, :])
    return u @ x_hat @ dagger(u)


def herm_eigvals(m, tol: float = HERM_TOL) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix."""
    m = as_matrix(m)
    _check_square(m)
    res = hermiticity_residual(m)
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    if res > tol * scale:
        raise NonHermitian(f"hermiticity residual {res:.3e} exceeds {tol:.1e}")
    return np.linalg.eigvalsh(hermitize(m))


@dataclass(frozen=True)
class PsdResult:
    ok: bool
    min_eig: float

    def __bool__(self) -> bool:
        return self.ok


def is_psd(m, tol: float = 1e-9) -> PsdResult:
    """PSD test: passes when the minimum eigenvalue is >= -tol."""
    ev = herm_eigvals(m)
    lo = float(ev[0]) if ev.size else 0.0
    return PsdResult(lo >= -tol, lo)


def ket(*amps) -> np.ndarray:
    return np.asarray(amps, dtype=complex).reshape(-1, 1)


def proj(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1, 1)
    return v @ dagger(v)


def bell_phi_plus(d: int = 2) -> np.ndarray:
    """Normalized maximally entangled vector sum_a |aa>/sqrt(d)."""
    v = np.zeros(d * d, dtype=complex)
    for a in range(d):
        v[a * d + a] = 1.0
    return v / np.sqrt(d)


def swap_operator(d: int = 2) -> np.ndarray:
    s = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            s[b * d + a, a * d + b] = 1.0
    return s


def bloch_state(c) -> np.ndarray:
    """Qubit operator (I + c . sigma)/2."""
    c = np.asarray(c, dtype=float).reshape(3)
    return 0.5 * (I2 + c[0] * SX + c[1] * SY + c[2] * SZ)


def bloch_vector(rho) -> np.ndarray:
    rho = as_matrix(rho)
    return np.array([np.real(np.trace(rho @ PAULI[j])) for j in (1, 2, 3)])


def pauli_op(coeffs) -> np.ndarray:
    """sum_j coeffs[j] sigma_j for a real 3-vector."""
    c = np.asarray(coeffs, dtype=float).reshape(3)
    return c[0] * SX + c[1] * SY + c[2] * SZ


# ---- matrix JSON -------------------------------------------------------------


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    return {
        "dim": int(m.shape[0]),
        "re": [[float(x) for x in row] for row in np.real(m)],
        "im": [[float(x) for x in row] for row in np.imag(m)],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad matrix JSON: {exc}") from exc
    if re.shape != im.shape:
        raise DimensionMismatch("re and im parts have different shapes")
    m = re + 1j * im
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if "dim" in obj and int(obj["dim"]) != m.shape[0]:
        raise DimensionMismatch(f"declared dim {obj['dim']} != {m.shape[0]} rows")
    return m
