"""Observed distributions: direct simulation, process-matrix contraction, sampling.

Tables are dense arrays p[y1, x1, y2, x2] = P(x1, x2 | y1, y2).  Setting
index 0 is "do nothing" with the single outcome x = 0; index k >= 1 is the
k-th setting of the measurement family.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import qmat
from .errors import C0Degenerate, DimensionMismatch, InvalidStrategy
from .measure import ProjectiveFamily, pauli_family
from .strat import (
    Individual,
    Mixture,
    Parallel,
    SeqMemoryless,
    SeqQuantumMemory,
    Strategy,
    apply_choi,
    identity_choi,
)

NORM_TOL = 1e-10
NEG_TOL = 1e-12
C0_TOL = 1e-12
SAMPLE_CHUNK = 1 << 16


@dataclass(frozen=True)
class JointDistribution:
    table: np.ndarray
    signed: bool = False

    @property
    def d1(self) -> int:
        return self.table.shape[1]

    @property
    def d2(self) -> int:
        return self.table.shape[3]

    @property
    def n1(self) -> int:
        """Number of nontrivial settings of the first party."""
        return self.table.shape[0] - 1

    @property
    def n2(self) -> int:
        return self.table.shape[2] - 1

    def swapped(self) -> "JointDistribution":
        """The same data with the two parties' roles exchanged."""
        return JointDistribution(np.ascontiguousarray(self.table.transpose(2, 3, 0, 1)), self.signed)

    def normalization_error(self) -> float:
        return float(np.max(np.abs(self.table.sum(axis=(1, 3)) - 1.0)))

    def validate(self) -> None:
        t = self.table
        if t.ndim != 4:
            raise DimensionMismatch("distribution table must be 4-dimensional")
        if self.normalization_error() > NORM_TOL:
            raise ValueError(f"blocks not normalized (error {self.normalization_error():.3e})")
        if np.any(np.abs(t[0, 1:]) > NORM_TOL) or np.any(np.abs(t[:, :, 0, 1:]) > NORM_TOL):
            raise ValueError("do-nothing rows must put all weight on the dummy outcome 0")
        if not self.signed and t.min() < -NEG_TOL:
            raise ValueError(f"negative probability {t.min():.3e} in an unsigned table")

    def to_json(self) -> dict:
        return {
            "d": [self.d1, self.d2],
            "settings": [self.n1, self.n2],
            "signed": bool(self.signed),
            "table": [[[[float(v) for v in row] for row in blk] for blk in slab] for slab in self.table],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "JointDistribution":
        try:
            t = np.asarray(obj["table"], dtype=float)
            d1, d2 = obj["d"]
            n1, n2 = obj["settings"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"bad distribution JSON: {exc}") from exc
        if t.shape != (n1 + 1, d1, n2 + 1, d2):
            raise DimensionMismatch(f"table shape {t.shape} does not match d={[d1, d2]} settings={[n1, n2]}")
        dist = cls(t, bool(obj.get("signed", False)))
        dist.validate()
        return dist


def _effect_stack(family: ProjectiveFamily) -> np.ndarray:
    """A[y, x] with A[0, 0] = I (do nothing) and zeros for unused dummy outcomes."""
    d = family.d
    A = np.zeros((family.n_settings + 1, d, d, d), dtype=complex)
    A[0, 0] = np.eye(d)
    for k, E in enumerate(family.effects()):
        A[k + 1] = E
    return A


def _families(strategy: Strategy, fam1, fam2) -> tuple[ProjectiveFamily, ProjectiveFamily]:
    fam1 = fam1 if fam1 is not None else pauli_family()
    fam2 = fam2 if fam2 is not None else pauli_family()
    d1, d2 = strategy.dims
    if (fam1.d, fam2.d) != (d1, d2):
        raise DimensionMismatch(f"strategy dims {(d1, d2)} do not match family dims {(fam1.d, fam2.d)}")
    return fam1, fam2


def _forward_table(rho, choi_in_out, d_mem: int, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """First party measures rho (on I_first (x) M), the channel feeds the second party."""
    d_src = A.shape[-1]
    d_tgt = B.shape[-1]
    d_in = d_src * d_mem
    ops = np.einsum("yxab,mn->yxambn", A, np.eye(d_mem)).reshape(A.shape[0], A.shape[1], d_in, d_in)
    post = ops @ rho @ ops
    c = np.asarray(choi_in_out).reshape(d_in, d_tgt, d_in, d_tgt)
    out = np.einsum("yxab,akbl->yxkl", post, c)
    return np.real(np.einsum("zwlk,yxkl->yxzw", B, out))


def simulate_exact(strategy: Strategy, fam1: ProjectiveFamily | None = None, fam2: ProjectiveFamily | None = None,
                   signed: bool | None = None) -> JointDistribution:
    """Direct state evolution with the projection postulate for each party."""
    fam1, fam2 = _families(strategy, fam1, fam2)
    table = _exact_table(strategy, _effect_stack(fam1), _effect_stack(fam2))
    if signed is None:
        signed = bool(table.min() < -NEG_TOL)
    return JointDistribution(table, signed)


def _exact_table(s: Strategy, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if isinstance(s, Individual):
        pa = np.real(np.einsum("yxab,ba->yx", A, s.rho1))
        pb = np.real(np.einsum("yxab,ba->yx", B, s.rho2))
        return np.einsum("yx,zw->yxzw", pa, pb)
    if isinstance(s, Parallel):
        d1, d2 = A.shape[-1], B.shape[-1]
        r = np.asarray(s.rho12).reshape(d1, d2, d1, d2)
        return np.real(np.einsum("yxab,zwcd,bdac->yxzw", A, B, r))
    if isinstance(s, SeqMemoryless):
        if s.direction == "1to2":
            return _forward_table(s.rho, s.choi_in_out(), 1, A, B)
        return _forward_table(s.rho, s.choi_in_out(), 1, B, A).transpose(2, 3, 0, 1)
    if isinstance(s, SeqQuantumMemory):
        if s.direction == "1to2":
            return _forward_table(s.rho, s.processor, s.d_mem, A, B)
        return _forward_table(s.rho, s.processor, s.d_mem, B, A).transpose(2, 3, 0, 1)
    if isinstance(s, Mixture):
        return sum(w * _exact_table(c, A, B) for w, c in zip(s.weights, s.components))
    raise InvalidStrategy(f"unknown strategy type {type(s).__name__}")


# ---- process matrix contraction -------------------------------------------------


def instrument_chois(family: ProjectiveFamily) -> np.ndarray:
    """C[Gamma_{x|y}] on in (x) out for every table slot.

    Projective instruments give E^T (x) E; the do-nothing slot is the identity
    channel; unused dummy outcomes are zero.
    """
    d = family.d
    A = _effect_stack(family)
    out = np.zeros((A.shape[0], d, d * d, d * d), dtype=complex)
    out[0, 0] = identity_choi(d)
    for y in range(1, A.shape[0]):
        for x in range(d):
            out[y, x] = qmat.kron(A[y, x].T, A[y, x])
    return out


def process_matrix(strategy: Strategy) -> np.ndarray:
    """W_S on I1 (x) O1 (x) I2 (x) O2 (outputs identified with inputs in dimension)."""
    d1, d2 = strategy.dims
    I1 = np.eye(d1)
    I2 = np.eye(d2)
    if isinstance(strategy, Individual):
        return qmat.kron(strategy.rho1, I1, strategy.rho2, I2)
    if isinstance(strategy, Parallel):
        w = qmat.kron(strategy.rho12, I1, I2)
        return qmat.permute_subsystems(w, [d1, d2, d1, d2], [0, 2, 1, 3])
    if isinstance(strategy, SeqMemoryless):
        c = strategy.choi_in_out()
        if strategy.direction == "1to2":
            return qmat.kron(strategy.rho, c, I2)
        w = qmat.kron(strategy.rho, c, I1)  # I2, O2, I1, O1
        return qmat.permute_subsystems(w, [d2, d2, d1, d1], [2, 3, 0, 1])
    raise InvalidStrategy(f"process-matrix contraction not supported for {type(strategy).__name__}")


def born_contract(W: np.ndarray, inst1: np.ndarray, inst2: np.ndarray) -> np.ndarray:
    """P = Tr[W X] for X = A (x) B, given already-prepared instrument operators."""
    d1 = inst1.shape[-1]
    d2 = inst2.shape[-1]
    d1 = int(round(np.sqrt(d1)))
    d2 = int(round(np.sqrt(d2)))
    w = W.reshape(d1, d1, d2, d2, d1, d1, d2, d2)
    a = inst1.reshape(inst1.shape[:2] + (d1, d1, d1, d1))
    b = inst2.reshape(inst2.shape[:2] + (d2, d2, d2, d2))
    # Tr[W (A (x) B)] with A = a[i o, i' o'], B = b[j p, j' p']
    return np.real(np.einsum("iojpIOJP,yxIOio,zwJPjp->yxzw", w, a, b, optimize=True))


def simulate_born(strategy: Strategy, fam1: ProjectiveFamily | None = None,
                  fam2: ProjectiveFamily | None = None) -> JointDistribution:
    """Generalized Born rule with W_S.

    Each instrument Choi matrix is transposed before the contraction.  With
    this Choi convention that is the placement that reproduces the direct
    formulas; transposing only the input slot fails for complex bases.
    """
    fam1, fam2 = _families(strategy, fam1, fam2)
    W = process_matrix(strategy)
    a = np.swapaxes(instrument_chois(fam1), -1, -2)
    b = np.swapaxes(instrument_chois(fam2), -1, -2)
    table = born_contract(W, a, b)
    return JointDistribution(table, bool(table.min() < -NEG_TOL))


# ---- conditionals --------------------------------------------------------------------


@dataclass(frozen=True)
class Conditionals:
    """Derived tables.

    p_x1[y1, x1]        = P(x1 | y1), taken from the y2 = 0 block
    p_x1_given[y1, x1, y2] = P(x1 | y1, y2)
    p_x2_nothing[y2, x2] = P(x2 | 0, y2)
    p_x2_cond[y1, x1, y2, x2] = P(x2 | x1, y1, y2) (NaN where undefined)
    """

    p_x1: np.ndarray
    p_x1_given: np.ndarray
    p_x2_nothing: np.ndarray
    p_x2_cond: np.ndarray
    c0_ok: bool
    c0_min: float


def conditionals(dist: JointDistribution, strict: bool = False, tol: float = C0_TOL) -> Conditionals:
    t = dist.table
    p_x1_given = t.sum(axis=3)
    p_x1 = t[:, :, 0, 0].copy()
    p_x2_nothing = t[0, 0].copy()
    denom = p_x1_given[1:]
    c0_min = float(denom.min()) if denom.size else 1.0
    c0_ok = c0_min > tol
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = t / p_x1_given[:, :, :, None]
    cond[~np.isfinite(cond)] = np.nan
    if strict and not c0_ok:
        raise C0Degenerate(f"first-party outcome probability {c0_min:.3e} <= {tol:.1e}")
    return Conditionals(p_x1, p_x1_given, p_x2_nothing, cond, bool(c0_ok), c0_min)


# ---- sampling -----------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleSet:
    n_shots: int
    seed: int
    counts: np.ndarray
    records: np.ndarray  # shape (N, 4): y1, x1, y2, x2

    def empirical(self) -> JointDistribution:
        block = self.counts.sum(axis=(1, 3))
        if np.any(block == 0):
            raise ValueError("some setting pair received no shots; empirical table undefined")
        return JointDistribution(self.counts / block[:, None, :, None], False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("y1,x1,y2,x2\n")
        np.savetxt(buf, self.records, fmt="%d", delimiter=",")
        return buf.getvalue()


def _sample_chunk(cdf: np.ndarray, n_pairs: int, n2: int, d2: int, seed: int, chunk: int, size: int) -> np.ndarray:
    # counter-based stream keyed by (seed, chunk index)
    rng = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, chunk, 0]))
    u = rng.random((size, 2))
    pair = np.minimum((u[:, 0] * n_pairs).astype(np.int64), n_pairs - 1)
    c = cdf[pair]
    out_idx = np.minimum((c < u[:, 1:2]).sum(axis=1), c.shape[1] - 1)
    y1, y2 = np.divmod(pair, n2)
    x1, x2 = np.divmod(out_idx, d2)
    return np.stack([y1, x1, y2, x2], axis=1).astype(np.int64)


def sample(dist: JointDistribution, n_shots: int, seed: int = 0, threads: int = 1,
           chunk: int = SAMPLE_CHUNK) -> SampleSet:
    """Settings uniform over the enlarged sets, outcomes from each block.

    Shot i is drawn from the stream of chunk i // chunk, so the output does not
    depend on how chunks are spread over threads.
    """
    if n_shots < 1:
        raise ValueError("number of shots must be positive")
    if dist.signed:
        raise ValueError("cannot sample from a signed table")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    t = np.clip(dist.table, 0.0, None)
    ny1, d1, ny2, d2 = t.shape
    blocks = t.transpose(0, 2, 1, 3).reshape(ny1 * ny2, d1 * d2)
    blocks = blocks / blocks.sum(axis=1, keepdims=True)
    cdf = np.cumsum(blocks, axis=1)
    n_chunks = (n_shots + chunk - 1) // chunk
    sizes = [min(chunk, n_shots - k * chunk) for k in range(n_chunks)]

    def work(k: int) -> np.ndarray:
        return _sample_chunk(cdf, ny1 * ny2, ny2, d2, int(seed), k, sizes[k])

    if threads > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, range(n_chunks)))
    else:
        parts = [work(k) for k in range(n_chunks)]
    records = np.concatenate(parts)
    counts = np.zeros(t.shape, dtype=np.int64)
    np.add.at(counts, (records[:, 0], records[:, 1], records[:, 2], records[:, 3]), 1)
    return SampleSet(int(n_shots), int(seed), counts, records)


def total_variation_per_block(p: JointDistribution, q: JointDistribution) -> np.ndarray:
    return 0.5 * np.abs(p.table - q.table).sum(axis=(1, 3))
