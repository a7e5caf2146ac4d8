"""Random states, channels and strategies for tests and oracle suites."""

from __future__ import annotations

import numpy as np

from . import qmat
from .strat import Individual, Parallel, QubitCanonicalForm, SeqMemoryless, choi_of_kraus, seq_from_in_out


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar unitary via QR of a Ginibre matrix with the phases fixed."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    """Density matrix from a d x rank Ginibre factor; rank=None gives full rank."""
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ qmat.dagger(g)
    return qmat.hermitize(rho / np.trace(rho).real)


def random_kraus(rng: np.random.Generator, d_in: int, d_out: int, n_kraus: int | None = None) -> list[np.ndarray]:
    """Kraus operators of a random channel from a Stinespring isometry."""
    k = d_in * d_out if n_kraus is None else n_kraus
    u = random_unitary(rng, max(d_out * k, d_in))
    iso = u[:, :d_in].reshape(k, d_out, d_in)
    return [iso[j] for j in range(k)]


def random_channel_choi(rng: np.random.Generator, d_in: int, d_out: int, n_kraus: int | None = None) -> np.ndarray:
    return choi_of_kraus(random_kraus(rng, d_in, d_out, n_kraus))


def random_seq_memoryless(rng: np.random.Generator, direction: str = "1to2", d1: int = 2, d2: int = 2,
                          full_rank: bool = True) -> SeqMemoryless:
    d_src, d_tgt = (d1, d2) if direction == "1to2" else (d2, d1)
    rho = random_state(rng, d_src, None if full_rank else 1)
    return seq_from_in_out(direction, rho, random_channel_choi(rng, d_src, d_tgt))


def random_parallel(rng: np.random.Generator, d1: int = 2, d2: int = 2) -> Parallel:
    return Parallel(random_state(rng, d1 * d2), d1, d2)


def random_individual(rng: np.random.Generator, d1: int = 2, d2: int = 2) -> Individual:
    return Individual(random_state(rng, d1), random_state(rng, d2))


def _random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    return q * np.sign(np.diag(r))


def _random_side(rng: np.random.Generator, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Direction rows and a Bloch vector obeying the axis condition c_i v_{j,i} = 0."""
    c = np.zeros(3)
    if t == 3:
        return _random_rotation(rng), c
    if t == 2:
        i = int(rng.integers(3))
        others = [k for k in range(3) if k != i]
        th = rng.uniform(0, 2 * np.pi)
        u, w, e = np.zeros(3), np.zeros(3), np.zeros(3)
        u[others] = [np.cos(th), np.sin(th)]
        w[others] = [-np.sin(th), np.cos(th)]
        e[i] = 1.0
        c[i] = rng.uniform(-1, 1)
        return np.array([u, w, e]), c
    mode = int(rng.integers(3))
    i = int(rng.integers(3))
    if mode == 0:
        # direction along an axis, Bloch vector in the orthogonal plane
        a = np.zeros(3)
        a[i] = rng.choice([-1.0, 1.0])
        c = rng.uniform(-1, 1, 3)
        c[i] = 0.0
        if np.linalg.norm(c) > 1:
            c /= np.linalg.norm(c) * rng.uniform(1, 1.5)
    elif mode == 1:
        # direction in a coordinate plane, Bloch vector along the normal axis
        a = rng.normal(size=3)
        a[i] = 0.0
        a /= np.linalg.norm(a)
        c[i] = rng.uniform(-1, 1)
    else:
        a = rng.normal(size=3)
        a /= np.linalg.norm(a)
    return np.array([a, a, a]), c


def random_canonical_form(rng: np.random.Generator, t: int) -> tuple[np.ndarray, QubitCanonicalForm]:
    """(c1, form) of rank t satisfying the directional conditions D1 and D2.

    The lambdas are spread so that a good share of draws lands on each side of
    every positivity boundary; the form need not be completely positive.
    """
    A, c1 = _random_side(rng, t)
    B, c2 = _random_side(rng, t)
    lam = np.zeros(3)
    lam[:t] = np.sort(rng.uniform(0, 1, t))[::-1]
    if rng.random() < 0.3:
        lam[:t] = lam[:t] / max(lam[:t].sum(), 1e-9) * rng.uniform(0.8, 1.2)
    lam = np.clip(lam, 0.0, 1.0)
    orient = float(np.sign(np.linalg.det(A) * np.linalg.det(B))) if t == 3 else 1.0
    return c1, QubitCanonicalForm(c2=c2, t=t, lam=lam, a=A, b=B, orientation=orient)
