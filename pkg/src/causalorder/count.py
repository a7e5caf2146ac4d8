"""Dimension counting for process-matrix reconstruction.

The Born rule only sees a process matrix modulo the subspace V1 + V2 + V3 of
Hermitian operators it annihilates; exact reconstruction needs the accessible
instrument tensors to span the quotient.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .measure import ProjectiveFamily


@dataclass(frozen=True)
class InterfaceDims:
    d_in1: int
    d_out1: int
    d_in2: int
    d_out2: int

    def __post_init__(self):
        if any(int(d) < 1 for d in self.as_tuple()):
            raise ValueError(f"interface dimensions must be >= 1, got {self.as_tuple()}")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.d_in1, self.d_out1, self.d_in2, self.d_out2)

    def swapped(self) -> "InterfaceDims":
        return InterfaceDims(self.d_in2, self.d_out2, self.d_in1, self.d_out1)


def quotient_dim(dims: InterfaceDims) -> int:
    a, b, c, d = (int(x) for x in dims.as_tuple())
    return a * a * c * c * (b * b + d * d - 1) - c * c * (d * d - 1) - a * a * (b * b - 1)


def _hermitian_basis(d: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Identity and a basis of the traceless Hermitian d x d matrices."""
    traceless = []
    for j in range(d):
        for k in range(j + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k] = e[k, j] = 1
            traceless.append(e)
            f = np.zeros((d, d), dtype=complex)
            f[j, k], f[k, j] = -1j, 1j
            traceless.append(f)
    for j in range(1, d):
        h = np.zeros((d, d), dtype=complex)
        h[:j, :j] = np.eye(j)
        h[j, j] = -j
        traceless.append(h)
    return np.eye(d, dtype=complex), traceless


def quotient_dim_enumerated(dims: InterfaceDims) -> int:
    """dim B - rank(V1 + V2 + V3) from explicit spanning sets.

    Factor order (I,1), (O,1), (I,2), (O,2).  Cost grows as (product of dims)^4;
    intended as a cross-check at small dimensions.
    """
    ds = [int(x) for x in dims.as_tuple()]
    full = [[np.eye(d, dtype=complex)] + _hermitian_basis(d)[1] for d in ds]
    traceless = [_hermitian_basis(d)[1] for d in ds]
    ident = [[np.eye(d, dtype=complex)] for d in ds]
    # V1: identity on party 1, anything on I2, traceless on O2
    # V2: anything on I1, traceless on O1, identity on party 2
    # V3: anything on the inputs, traceless on both outputs
    patterns = [
        (ident[0], ident[1], full[2], traceless[3]),
        (full[0], traceless[1], ident[2], ident[3]),
        (full[0], traceless[1], full[2], traceless[3]),
    ]
    vecs = []
    for pat in patterns:
        for ops in product(*pat):
            m = ops[0]
            for o in ops[1:]:
                m = np.kron(m, o)
            flat = m.reshape(-1)
            vecs.append(np.concatenate([flat.real, flat.imag]))
    total = int(np.prod(ds)) ** 2
    if not vecs:
        return total
    rank = int(np.linalg.matrix_rank(np.array(vecs), tol=1e-9))
    return total - rank


def accessible_count(family1: ProjectiveFamily, family2: ProjectiveFamily) -> int:
    """Number of distinct (x1, y1, x2, y2) labels, the do-nothing setting included.

    This is an upper bound on the number of linearly independent accessible tensors.
    """
    n1 = 1 + sum(family1.outcome_counts())
    n2 = 1 + sum(family2.outcome_counts())
    return n1 * n2


@dataclass(frozen=True)
class CountReport:
    accessible: int
    quotient: int

    @property
    def impossible(self) -> bool:
        return self.accessible < self.quotient

    @property
    def message(self) -> str:
        if self.impossible:
            return f"{self.accessible} < {self.quotient}: reconstruction impossible"
        return f"{self.accessible} >= {self.quotient}: counting does not rule out reconstruction"

    def to_json(self) -> dict:
        return {
            "accessible_count": self.accessible,
            "quotient_dim": self.quotient,
            "impossible": self.impossible,
            "message": self.message,
        }


def impossibility_report(family1: ProjectiveFamily, family2: ProjectiveFamily,
                         dims: InterfaceDims) -> CountReport:
    return CountReport(accessible_count(family1, family2), quotient_dim(dims))
